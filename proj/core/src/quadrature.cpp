#include "smeq/quadrature.hpp"

namespace smeq {

std::vector<double> oscillation_panels(double a, double b, double max_step) {
  std::vector<double> pts{a};
  double x = a;
  while (x < b) {
    x += std::min(x, max_step);
    if (x >= b * (1.0 - 1e-15)) x = b;
    pts.push_back(x);
  }
  return pts;
}

OscTailResult oscillatory_power_tail(const TrigPoly& c, double T, double p, double tol,
                                     long eval_budget) {
  OscTailResult out;
  const double amp = c.amplitude();
  if (amp == 0.0) {
    out.value = Complex(std::pow(T, 1.0 - p) / (p - 1.0), 0.0);
    return out;
  }
  // GK15 resolves a full period of phase to ~1e-12 relative, so one panel
  // per period of the fastest phase of t * c(ln t) suffices
  const double period = 2.0 * 3.141592653589793 / (amp * (1.0 + c.max_omega()));
  auto f = [&](double t) -> Complex {
    const double v = std::log(t);
    const double g = t * c.eval(v);
    return Complex(std::cos(g), std::sin(g)) * std::exp(-p * v);
  };
  double prev_mag = -1.0;
  double est = 1e300;
  long used = 0;
  double quad_err = 0.0;
  for (int k = 0; k < 60; ++k) {
    // a block [T, 2T] costs about 30 evaluations per panel; respect the budget
    const double panels_next = T / period + 8.0;
    if (used + 30.0 * panels_next > static_cast<double>(eval_budget)) {
      out.converged = false;
      break;
    }
    auto pts = oscillation_panels(T, 2 * T, period);
    double e = 0.0;
    const Complex val = adaptive_gk_seeded(f, pts, tol / 8.0, 64, &e);
    used += static_cast<long>(pts.size()) * 30;
    quad_err += e;
    out.value += val;
    const double mag = std::abs(val);
    if (prev_mag > 0.0 && mag > 0.0) {
      const double q = std::min(mag / prev_mag, 0.75);
      est = mag * q / (1.0 - q);
    } else {
      est = mag;
    }
    prev_mag = mag;
    T *= 2.0;
    if (mag < tol / 8.0 && est < tol / 2.0) break;
    if (mag < quad_err) break;  // below the accumulated noise floor
  }
  out.achieved_tol = est + quad_err;
  out.converged = out.converged && (est < tol);
  return out;
}

}  // namespace smeq
