#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <queue>
#include <vector>

#include "smeq/common.hpp"

namespace smeq {

namespace detail {
// Kronrod-15 / Gauss-7 abscissae and weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};
}  // namespace detail

template <typename F>
struct Gk15Result {
  using value_type = decltype(std::declval<F&>()(0.0));
  value_type value;
  double error;
};

template <typename F>
Gk15Result<F> gk15(F&& f, double a, double b) {
  using V = typename Gk15Result<F>::value_type;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const V fc = f(c);
  V resk = detail::kWgk[7] * fc;
  V resg = detail::kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = h * detail::kXgk[j];
    const V f1 = f(c - x), f2 = f(c + x);
    resk += detail::kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += detail::kWg[j / 2] * (f1 + f2);
  }
  return {resk * h, std::abs((resk - resg) * h)};
}

/// Adaptive GK15 over [a, b] to absolute tolerance. `budget` caps the number
/// of interval evaluations; on exhaustion the current sum is returned and
/// `achieved` (if given) holds the remaining error estimate. The worklist is
/// a max-heap on the interval error.
template <typename F>
auto adaptive_gk(F&& f, double a, double b, double tol, long budget = 200000,
                 double* achieved = nullptr) {
  using V = typename Gk15Result<F>::value_type;
  struct Item {
    double a, b, err;
    V val;
    bool operator<(const Item& o) const { return err < o.err; }
  };
  auto first = gk15(f, a, b);
  std::priority_queue<Item> work;
  work.push({a, b, first.error, first.value});
  V total = first.value;
  double total_err = first.error;
  long used = 1;
  while (total_err > tol && used < budget && !work.empty()) {
    const Item it = work.top();
    work.pop();
    const double m = 0.5 * (it.a + it.b);
    if (m <= it.a || m >= it.b) continue;  // interval at double resolution
    auto l = gk15(f, it.a, m);
    auto r = gk15(f, m, it.b);
    used += 2;
    total += l.value + r.value - it.val;
    total_err += l.error + r.error - it.err;
    work.push({it.a, m, l.error, l.value});
    work.push({m, it.b, r.error, r.value});
  }
  if (achieved) *achieved = total_err;
  return total;
}

/// Adaptive GK15 on a pre-seeded partition. Each cell refines to tol/64; the
/// summed per-cell error estimates are reported through `achieved` rather
/// than forcing per-cell tolerances that scale with the partition size.
template <typename F>
auto adaptive_gk_seeded(F&& f, const std::vector<double>& pts, double tol,
                        long budget_per_cell = 4000, double* achieved = nullptr) {
  using V = typename Gk15Result<F>::value_type;
  V total{};
  double err = 0.0;
  const double cell_tol = tol / 64.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double e = 0.0;
    total += adaptive_gk(f, pts[i], pts[i + 1], cell_tol, budget_per_cell, &e);
    err += e;
  }
  if (achieved) *achieved = err;
  return total;
}

/// Breakpoints from a to b: geometric while steps are below `max_step`,
/// arithmetic with step `max_step` after. Covers a smooth head plus an
/// oscillatory range with about one cell per half-period.
std::vector<double> oscillation_panels(double a, double b, double max_step);

/// Finite trigonometric polynomial c(v) = sum_k amp_k cos(omega_k v + phase_k)
/// with omega_k >= 0 and conjugate pairs merged. Encodes the projection
/// <x, e^{v(Q-I)} s> of a rotating direction.
struct TrigPoly {
  struct Mode {
    double omega;
    double amp;
    double phase;
  };
  std::vector<Mode> modes;

  /// Accumulate Re(beta e^{i omega v}); same-frequency phasors merge.
  void add_mode(double omega, Complex beta) {
    double amp = std::abs(beta);
    if (amp == 0.0) return;
    double phase = std::atan2(beta.imag(), beta.real());
    if (omega < 0.0) {
      omega = -omega;
      phase = -phase;
    }
    for (auto& m : modes) {
      if (std::abs(m.omega - omega) < 1e-12) {
        const Complex merged = m.amp * std::exp(Complex(0.0, m.phase)) +
                               amp * std::exp(Complex(0.0, phase));
        m.amp = std::abs(merged);
        m.phase = std::atan2(merged.imag(), merged.real());
        return;
      }
    }
    modes.push_back({omega, amp, phase});
  }

  double amplitude() const {
    double a = 0.0;
    for (const auto& m : modes) a += m.amp;
    return a;
  }
  double max_omega() const {
    double w = 0.0;
    for (const auto& m : modes) w = std::max(w, m.omega);
    return w;
  }
  double eval(double v) const {
    double s = 0.0;
    for (const auto& m : modes) s += m.amp * std::cos(m.omega * v + m.phase);
    return s;
  }
  double deriv(double v) const {
    double s = 0.0;
    for (const auto& m : modes) s -= m.amp * m.omega * std::sin(m.omega * v + m.phase);
    return s;
  }
};

struct OscTailResult {
  Complex value{0.0, 0.0};
  double achieved_tol = 0.0;  // extrapolated remainder + quadrature error
  bool converged = true;
};

/// integral_T^infinity e^{i t c(ln t)} t^{-p} dt for p > 1, by doubling blocks
/// with oscillation-seeded adaptive panels; the remainder is extrapolated from
/// the measured geometric decay of block contributions.
OscTailResult oscillatory_power_tail(const TrigPoly& c, double T, double p, double tol,
                                     long eval_budget = 40000000);

}  // namespace smeq
