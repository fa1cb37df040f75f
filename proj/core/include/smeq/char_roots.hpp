#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "smeq/common.hpp"

namespace smeq {

/// Roots of chi(z) = prod_{j=1}^{b-1}(z + j) - b!, with per-root relative
/// residuals |chi(z)|/b! confirmed in double-double arithmetic.
struct RootSet {
  int b = 0;
  std::vector<Complex> roots;
  std::vector<double> residuals;
  std::string method;
};

/// All b-1 roots by Aberth-Ehrlich iteration. chi is evaluated in the product
/// form prod((z+j)/j) - 1 (relative to b!), so nothing overflows for large b.
/// Initial points sit on a circle of radius b. Throws on non-convergence.
RootSet chi_roots(int b);

struct Lambda2 {
  Complex value;
  bool real_root = false;  // no conjugate pair among the maximizers
};

/// The root with second-largest real part, imaginary part made positive.
/// Real-part ties within 1e-9 resolve to the smallest positive imaginary part.
Lambda2 select_lambda2(const RootSet& rs);

/// Newton iteration on psi(z) - 1 from z0 (derivative by central difference).
Complex psi_root_near(const std::function<Complex(Complex)>& psi, Complex z0,
                      double tol = 1e-12, int max_iter = 100);

/// log Gamma on the complex plane (Lanczos, reflection for Re z < 0.5).
Complex complex_lgamma(Complex z);

/// psi(z) = E[sum_j V_j^z] for symmetric Dirichlet(theta,...,theta) spacings
/// with b parts: b * Gamma(theta+z) Gamma(b theta) / (Gamma(theta) Gamma(b theta + z)).
Complex dirichlet_psi(int b, double theta, Complex z);

namespace detail {
/// Two-double compensated value; enough spare precision to certify residuals
/// whose leading digits cancel against b!.
struct DD {
  double hi = 0.0, lo = 0.0;
};
DD dd_from(double x);
DD dd_add(DD a, DD b);
DD dd_mul(DD a, DD b);
DD dd_div(DD a, DD b);

struct DDComplex {
  DD re, im;
};
DDComplex ddc_from(Complex z);
DDComplex ddc_add(const DDComplex& a, const DDComplex& b);
DDComplex ddc_mul(const DDComplex& a, const DDComplex& b);
double ddc_abs(const DDComplex& a);

/// |prod_{j=1}^{b-1}((z+j)/j) - 1| evaluated in double-double.
double chi_relative_residual(int b, Complex z);
}  // namespace detail

}  // namespace smeq
