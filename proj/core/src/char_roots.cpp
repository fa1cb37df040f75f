#include "smeq/char_roots.hpp"

#include <algorithm>
#include <cmath>

namespace smeq {

namespace detail {

namespace {
// Dekker/Knuth error-free transforms; dd_mul relies on fma.
inline DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}
inline DD two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}
}  // namespace

DD dd_from(double x) { return {x, 0.0}; }

DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  const double hi = s.hi + s.lo;
  return {hi, s.lo - (hi - s.hi)};
}

DD dd_mul(DD a, DD b) {
  DD p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  const double hi = p.hi + p.lo;
  return {hi, p.lo - (hi - p.hi)};
}

DD dd_div(DD a, DD b) {
  const double q1 = a.hi / b.hi;
  DD r = dd_add(a, dd_mul(dd_from(-q1), b));
  const double q2 = r.hi / b.hi;
  DD q = two_sum(q1, q2);
  return q;
}

DDComplex ddc_from(Complex z) { return {dd_from(z.real()), dd_from(z.imag())}; }

DDComplex ddc_add(const DDComplex& a, const DDComplex& b) {
  return {dd_add(a.re, b.re), dd_add(a.im, b.im)};
}

DDComplex ddc_mul(const DDComplex& a, const DDComplex& b) {
  DD re = dd_add(dd_mul(a.re, b.re), dd_mul(dd_from(-1.0), dd_mul(a.im, b.im)));
  DD im = dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re));
  return {re, im};
}

double ddc_abs(const DDComplex& a) {
  return std::hypot(a.re.hi + a.re.lo, a.im.hi + a.im.lo);
}

double chi_relative_residual(int b, Complex z) {
  // prod (z+j)/j divided by b equals P/b!; the residual is |P/b! - 1|
  DDComplex prod = ddc_from(Complex(1.0, 0.0));
  for (int j = 1; j < b; ++j) {
    DDComplex factor{dd_div(dd_add(dd_from(z.real()), dd_from(j)), dd_from(j)),
                     dd_div(dd_from(z.imag()), dd_from(j))};
    prod = ddc_mul(prod, factor);
  }
  prod.re = dd_div(prod.re, dd_from(b));
  prod.im = dd_div(prod.im, dd_from(b));
  prod = ddc_add(prod, ddc_from(Complex(-1.0, 0.0)));
  return ddc_abs(prod);
}

}  // namespace detail

namespace {

// chi(z)/b! = exp(L) - 1 and the Newton ratio chi/chi', both from the log form
// L = sum log(z+j) - log b!; stable for any b.
struct ChiEval {
  Complex ratio_newton;  // chi / chi'
  double rel_residual;   // |chi| / b!
};

ChiEval eval_chi(int b, Complex z) {
  // with P(z) = prod (z+j): exp(L) = P / b!  (note b! = b * (b-1)!)
  Complex L = -std::log(static_cast<double>(b));
  Complex S(0.0, 0.0);  // sum 1/(z+j) = P'/P
  for (int j = 1; j < b; ++j) {
    const Complex zj = z + static_cast<double>(j);
    L += std::log(zj) - std::log(static_cast<double>(j));
    S += 1.0 / zj;
  }
  const Complex expL = std::exp(L);
  const Complex chi_rel = expL - 1.0;  // chi / b!
  ChiEval out;
  out.rel_residual = std::abs(chi_rel);
  out.ratio_newton = chi_rel / (expL * S);
  return out;
}

}  // namespace

RootSet chi_roots(int b) {
  require(b >= 4, "chi_roots: b must be at least 4");
  require(b <= 300, "chi_roots: b above the supported range");
  const int n = b - 1;
  std::vector<Complex> z(n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * 3.141592653589793 * (k + 0.25) / n;
    z[k] = static_cast<double>(b) * Complex(std::cos(a), std::sin(a));
  }

  const int max_iter = 300;
  bool converged = false;
  for (int iter = 0; iter < max_iter && !converged; ++iter) {
    double max_step = 0.0;
    for (int i = 0; i < n; ++i) {
      const ChiEval e = eval_chi(b, z[i]);
      Complex repulse(0.0, 0.0);
      for (int j = 0; j < n; ++j) {
        if (j != i) repulse += 1.0 / (z[i] - z[j]);
      }
      const Complex w = e.ratio_newton / (1.0 - e.ratio_newton * repulse);
      z[i] -= w;
      max_step = std::max(max_step, std::abs(w) / std::max(1.0, std::abs(z[i])));
    }
    converged = max_step < 1e-15;
  }
  require(converged, "chi_roots: Aberth iteration did not converge for b=" + std::to_string(b));

  RootSet rs;
  rs.b = b;
  rs.method = "aberth-ehrlich, product-form, dd residual";
  rs.roots = std::move(z);
  rs.residuals.reserve(n);
  for (const auto& root : rs.roots) {
    rs.residuals.push_back(detail::chi_relative_residual(b, root));
  }
  // polish the z = 1 root exactly; it is always present
  std::size_t i1 = 0;
  for (std::size_t i = 1; i < rs.roots.size(); ++i) {
    if (std::abs(rs.roots[i] - 1.0) < std::abs(rs.roots[i1] - 1.0)) i1 = i;
  }
  if (std::abs(rs.roots[i1] - 1.0) < 1e-8) {
    rs.roots[i1] = Complex(1.0, 0.0);
    rs.residuals[i1] = 0.0;
  }
  return rs;
}

Lambda2 select_lambda2(const RootSet& rs) {
  constexpr double kTieTol = 1e-9;
  bool has_one = false;
  std::vector<Complex> others;
  for (const auto& z : rs.roots) {
    if (std::abs(z - 1.0) < 1e-8) {
      has_one = true;
    } else {
      others.push_back(z);
    }
  }
  require(has_one, "select_lambda2: root set does not contain lambda1 = 1");
  require(!others.empty(), "select_lambda2: no root besides 1");

  double best_re = -1e300;
  for (const auto& z : others) best_re = std::max(best_re, z.real());
  std::vector<Complex> top;
  for (const auto& z : others) {
    if (z.real() > best_re - kTieTol) top.push_back(z);
  }
  // canonical representative: positive imaginary part, then smallest Im
  Lambda2 out;
  std::vector<Complex> pos;
  for (auto& z : top) {
    if (z.imag() > kTieTol) pos.push_back(z);
  }
  if (pos.empty()) {
    // only a real second root (or its conjugate pair collapsed); flag it
    out.value = *std::min_element(top.begin(), top.end(), [](Complex a, Complex b) {
      return std::abs(a.imag()) < std::abs(b.imag());
    });
    if (out.value.imag() < 0.0) out.value = std::conj(out.value);
    out.real_root = std::abs(out.value.imag()) <= kTieTol;
    return out;
  }
  out.value = *std::min_element(pos.begin(), pos.end(), [](Complex a, Complex b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  return out;
}

Complex psi_root_near(const std::function<Complex(Complex)>& psi, Complex z0, double tol,
                      int max_iter) {
  Complex z = z0;
  for (int it = 0; it < max_iter; ++it) {
    const Complex f = psi(z) - 1.0;
    if (std::abs(f) < tol) return z;
    const double h = 1e-7 * std::max(1.0, std::abs(z));
    const Complex df = (psi(z + h) - psi(z - h)) / (2.0 * h);
    require(std::abs(df) > 1e-300, "psi_root_near: vanishing derivative");
    const Complex step = f / df;
    z -= step;
    require(std::isfinite(z.real()) && std::isfinite(z.imag()) && std::abs(z) < 1e6,
            "psi_root_near: iteration diverged from the starting point");
  }
  const Complex f = psi(z) - 1.0;
  require(std::abs(f) < tol, "psi_root_near: no convergence within iteration cap");
  return z;
}

Complex complex_lgamma(Complex z) {
  // Lanczos g = 7, n = 9
  static const double kCoef[] = {0.99999999999980993,  676.5203681218851,
                                 -1259.1392167224028,  771.32342877765313,
                                 -176.61502916214059,  12.507343278686905,
                                 -0.13857109526572012, 9.9843695780195716e-6,
                                 1.5056327351493116e-7};
  const double pi = 3.141592653589793238462643;
  if (z.real() < 0.5) {
    // reflection: log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
    return std::log(pi) - std::log(std::sin(pi * z)) - complex_lgamma(1.0 - z);
  }
  z -= 1.0;
  Complex x(kCoef[0], 0.0);
  for (int i = 1; i < 9; ++i) x += kCoef[i] / (z + static_cast<double>(i));
  const Complex t = z + 7.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

Complex dirichlet_psi(int b, double theta, Complex z) {
  require(b >= 2 && theta > 0.0, "dirichlet_psi: need b >= 2 and theta > 0");
  const double bt = b * theta;
  const Complex lg = complex_lgamma(theta + z) - complex_lgamma(Complex(theta, 0.0)) +
                     complex_lgamma(Complex(bt, 0.0)) - complex_lgamma(bt + z);
  return static_cast<double>(b) * std::exp(lg);
}

}  // namespace smeq
