#include "smeq/stable_laws.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "smeq/char_roots.hpp"

namespace smeq {

namespace detail {

Vec RotatedDirection::eval(double v) const {
  CVec acc = CVec::Zero(dim);
  for (std::size_t k = 0; k < omega.size(); ++k) {
    acc += coef[k] * std::exp(Complex(0.0, omega[k] * v));
  }
  return Vec(acc.real());
}

}  // namespace detail

namespace {

constexpr double kPi = 3.141592653589793238462643;
constexpr double kSeriesArg = 1e-3;   // switch to series below this argument
constexpr double kRadialTol = 1e-9;   // absolute target per radial integral
constexpr double kEta1Tol = 1e-7;     // alpha = 1 operator exponent (t^-2 tails
                                      // decay slowly; the achieved value is
                                      // reported through QuadReport)

// ---------------------------------------------------------------------------
// projections <x, e^{v(Q-I)} s> as finite trigonometric polynomials

TrigPoly rotation_projection(const GroupDescriptor& g, const Vec& x, const Vec& s) {
  const auto& sp = g.skew_spectrum();
  TrigPoly c;
  const Eigen::VectorXcd xs = sp.basis.adjoint() * Eigen::VectorXd(x).cast<Complex>();
  const Eigen::VectorXcd ss = sp.basis.adjoint() * Eigen::VectorXd(s).cast<Complex>();
  for (std::size_t k = 0; k < sp.omega.size(); ++k) {
    const Complex beta = std::conj(xs[static_cast<long>(k)]) * ss[static_cast<long>(k)];
    if (std::abs(beta) > 1e-300) c.add_mode(sp.omega[k], beta);
  }
  return c;
}

detail::RotatedDirection rotated_direction(const GroupDescriptor& g, const Vec& s) {
  const auto& sp = g.skew_spectrum();
  detail::RotatedDirection rd;
  rd.dim = g.dim();
  const Eigen::VectorXcd ss = sp.basis.adjoint() * Eigen::VectorXd(s).cast<Complex>();
  for (std::size_t k = 0; k < sp.omega.size(); ++k) {
    rd.omega.push_back(sp.omega[k]);
    rd.coef.push_back(detail::RotatedDirection::CVec(
        sp.basis.col(static_cast<long>(k)) * ss[static_cast<long>(k)]));
  }
  return rd;
}

// ---------------------------------------------------------------------------
// continuous-group radial Levy integrals
//
//   I1 = int_0^inf (1 - cos(t c(ln t))) t^{-alpha-1} dt
//   I2 = int_0^inf (sin(t c(ln t)) - [alpha>1] t c(ln t)) t^{-alpha-1} dt
//
// split at the argument scale |t c| = 1e-3: series below (stable against the
// cancellation in 1-cos and sin-g), seeded adaptive panels through the first
// oscillations, then the doubling-block oscillatory tail with the power mass
// and the compensator part integrated in closed form.

struct RadialResult {
  double I1 = 0.0;
  double I2 = 0.0;
  double achieved = 0.0;
  bool converged = true;
};

RadialResult radial_jump_integrals(double alpha, const TrigPoly& c, bool compensate) {
  RadialResult out;
  const double A = c.amplitude();
  if (A <= 0.0) return out;

  const double t_split = kSeriesArg / A;
  const double v_split = std::log(t_split);
  const double logA = std::log(A);

  // series region
  {
    const double vlo1 =
        std::min((std::log(1e-14 * 2.0 * (2.0 - alpha)) - 2.0 * logA) / (2.0 - alpha),
                 v_split - 1.0);
    auto f1 = [&](double v) {
      const double g = std::exp(v) * c.eval(v);
      const double g2 = g * g;
      return std::exp(-alpha * v) * (g2 / 2.0 - g2 * g2 / 24.0 + g2 * g2 * g2 / 720.0);
    };
    out.I1 += adaptive_gk(f1, vlo1, v_split, 1e-12);

    double vlo2;
    if (compensate) {
      vlo2 = std::min(
          (std::log(1e-14 * 6.0 * (3.0 - alpha)) - 3.0 * logA) / (3.0 - alpha),
          v_split - 1.0);
    } else {
      vlo2 = std::min((std::log(1e-14 * (1.0 - alpha)) - logA) / (1.0 - alpha),
                      v_split - 1.0);
    }
    auto f2 = [&](double v) {
      const double g = std::exp(v) * c.eval(v);
      const double g2 = g * g;
      const double tail_terms = -g * g2 / 6.0 + g * g2 * g2 / 120.0;
      return std::exp(-alpha * v) * (compensate ? tail_terms : g + tail_terms);
    };
    out.I2 += adaptive_gk(f2, vlo2, v_split, 1e-12);
  }

  // first oscillations, direct
  const double period = 2.0 * kPi / (A * (1.0 + c.max_omega()));
  const double T0 = std::max(4.0 * t_split, 16.0 * kPi / A);
  {
    auto pts = oscillation_panels(t_split, T0, period);
    auto f1 = [&](double t) {
      const double v = std::log(t);
      const double g = t * c.eval(v);
      const double sh = std::sin(0.5 * g);
      return 2.0 * sh * sh * std::exp(-(alpha + 1.0) * v);
    };
    auto f2 = [&](double t) {
      const double v = std::log(t);
      const double g = t * c.eval(v);
      return (std::sin(g) - (compensate ? g : 0.0)) * std::exp(-(alpha + 1.0) * v);
    };
    double e1 = 0.0, e2 = 0.0;
    out.I1 += adaptive_gk_seeded(f1, pts, kRadialTol / 4.0, 4000, &e1);
    out.I2 += adaptive_gk_seeded(f2, pts, kRadialTol / 4.0, 4000, &e2);
    out.achieved += e1 + e2;
  }

  // tail
  out.I1 += std::pow(T0, -alpha) / alpha;
  const OscTailResult tail = oscillatory_power_tail(c, T0, alpha + 1.0, kRadialTol / 2.0);
  out.I1 -= tail.value.real();
  out.I2 += tail.value.imag();
  out.achieved += tail.achieved_tol;
  out.converged = tail.converged;
  if (compensate) {
    // int_T0^inf c(ln t) t^{-alpha} dt, exact per mode
    double comp = 0.0;
    for (const auto& m : c.modes) {
      const Complex phasor = m.amp * std::exp(Complex(0.0, m.phase));
      const Complex p = std::pow(Complex(T0, 0.0), Complex(1.0 - alpha, m.omega));
      comp += (phasor * p / Complex(alpha - 1.0, -m.omega)).real();
    }
    out.I2 -= comp;
  }
  return out;
}

// discrete-group lattice sums over a = A^n
RadialResult lattice_jump_sums(double alpha, const Similarity& A, const Vec& x,
                               const Vec& s, bool compensate) {
  RadialResult out;
  const double r = A.scale();
  const double lr = std::log(r);
  auto term = [&](const Vec& y, double mass) {
    const double g = x.dot(y);
    const double sh = std::sin(0.5 * g);
    out.I1 += mass * 2.0 * sh * sh;
    out.I2 += mass * (std::sin(g) - (compensate ? g : 0.0));
  };
  constexpr int kMaxSteps = 20000;
  const double xn = x.norm();
  auto scale_now = [&]() {
    return 1e-16 * (std::abs(out.I1) + std::abs(out.I2)) + 1e-300;
  };
  // n = 0, 1, 2, ...: jumps shrink (|y| ~ r^n), masses grow (r^{-n alpha});
  // the integrand decay r^{n(2-alpha)} resp. r^{n(3-alpha)} wins
  Vec y = s;
  double mass = 1.0;
  for (int n = 0; n < kMaxSteps; ++n) {
    term(y, mass);
    y = A.apply(y);
    mass *= std::exp(-alpha * lr);
    const double b = xn * y.norm();
    const double cap1 = mass * std::min(2.0, b * b / 2.0);
    const double cap2 = mass * (compensate ? std::min(2.0 + b, b * b * b / 6.0)
                                           : std::min(1.0, b));
    if (cap1 < scale_now() && cap2 < scale_now() && n > 4) break;
  }
  // n = -1, -2, ...: jumps grow, masses decay as r^{|n| alpha}
  const Similarity Ainv = A.inverse();
  y = Ainv.apply(s);
  mass = std::exp(alpha * lr);
  for (int n = 1; n < kMaxSteps; ++n) {
    term(y, mass);
    y = Ainv.apply(y);
    mass *= std::exp(alpha * lr);
    const double b = xn * y.norm();
    const double cap = mass * (compensate ? 2.0 + b : 2.0);
    if (cap < scale_now() && n > 4) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// operator-stable alpha = 1 pieces

Complex eta1_operator(const GroupDescriptor& g, const SpectralMeasure& rho, const Vec& x,
                      QuadReport* report) {
  double re = 0.0, im = 0.0, achieved = 0.0;
  bool converged = true;
  for (const auto& atom : rho.atoms) {
    const TrigPoly c = rotation_projection(g, x, atom.s);
    const double A = c.amplitude();
    if (A <= 0.0) {
      // <x, t^Q s> = 0 for all t: e^{ig} - 1 = 0 and the drift term vanishes
      continue;
    }
    const double t_split = kSeriesArg / A;
    const double v_split = std::log(t_split);

    double re_i = 0.0, im_i = 0.0;
    // series region: real -(g^2/2 - g^4/24), imag g t^2/(1+t^2) - g^3/6 + g^5/120
    {
      const double vlo_re = std::min((std::log(2e-14) - 2.0 * std::log(A)) / 1.0,
                                     v_split - 1.0);
      auto fre = [&](double v) {
        const double g = std::exp(v) * c.eval(v);
        const double g2 = g * g;
        return -std::exp(-v) * (g2 / 2.0 - g2 * g2 / 24.0 + g2 * g2 * g2 / 720.0);
      };
      re_i += adaptive_gk(fre, vlo_re, v_split, 1e-12);
      const double vlo_im = std::min((std::log(2e-14 / A)) / 2.0, v_split - 1.0);
      auto fim = [&](double v) {
        const double t = std::exp(v);
        const double cv = c.eval(v);
        const double g = t * cv;
        const double g2 = g * g;
        return std::exp(-v) *
               (g * (t * t) / (1.0 + t * t) - g * g2 / 6.0 + g * g2 * g2 / 120.0);
      };
      im_i += adaptive_gk(fim, vlo_im, v_split, 1e-12);
    }
    // direct region
    const double T0 = std::max(4.0 * t_split, 16.0 * kPi / A);
    {
      auto pts = oscillation_panels(t_split, T0, kPi / (A * (1.0 + c.max_omega())));
      auto fre = [&](double t) {
        const double g = t * c.eval(std::log(t));
        const double sh = std::sin(0.5 * g);
        return -2.0 * sh * sh / (t * t);
      };
      auto fim = [&](double t) {
        const double g = t * c.eval(std::log(t));
        return (std::sin(g) - g / (1.0 + t * t)) / (t * t);
      };
      double e1 = 0.0, e2 = 0.0;
      re_i += adaptive_gk_seeded(fre, pts, kRadialTol / 4.0, 4000, &e1);
      im_i += adaptive_gk_seeded(fim, pts, kRadialTol / 4.0, 4000, &e2);
      achieved += e1 + e2;
    }
    // tail
    re_i -= 1.0 / T0;
    const OscTailResult tail = oscillatory_power_tail(c, T0, 2.0, kEta1Tol);
    re_i += tail.value.real();
    im_i += tail.value.imag();
    achieved += tail.achieved_tol;
    converged = converged && tail.converged;
    {
      // - int_T0^inf c(ln t) / (t (1 + t^2)) dt, in v with e^{-2v} decay
      const double v0 = std::log(T0);
      const double v1 = v0 + 0.5 * std::log(4.0 * A / kEta1Tol) + 1.0;
      auto fdrift = [&](double v) { return c.eval(v) / (1.0 + std::exp(2.0 * v)); };
      im_i -= adaptive_gk(fdrift, v0, v1, 1e-12);
    }
    re += atom.w * re_i;
    im += atom.w * im_i;
  }
  if (report) {
    report->achieved_tol += achieved;
    report->converged = report->converged && converged;
  }
  return Complex(re, im);
}

// gamma^1 from (Q - I) gamma = int (t^Q y) 2t <Qy,y> / (1+t^2)^2 rho(dy) dt;
// for unit atoms <Qy,y> = 1 and the t-integral has a Beta closed form per mode
Vec gamma1_operator(const GroupDescriptor& g, const SpectralMeasure& rho) {
  const int d = g.dim();
  const auto& sp = g.skew_spectrum();
  Eigen::VectorXcd rhs_c = Eigen::VectorXcd::Zero(d);
  for (const auto& atom : rho.atoms) {
    const Eigen::VectorXcd ss =
        sp.basis.adjoint() * Eigen::VectorXd(atom.s).cast<Complex>();
    for (std::size_t k = 0; k < sp.omega.size(); ++k) {
      const double w = sp.omega[k];
      // int_0^inf 2 t^{2+iw} / (1+t^2)^2 dt = Gamma((3+iw)/2) Gamma((1-iw)/2)
      const Complex mellin = std::exp(complex_lgamma(Complex(1.5, w / 2.0)) +
                                      complex_lgamma(Complex(0.5, -w / 2.0)));
      rhs_c += atom.w * mellin * sp.basis.col(static_cast<long>(k)) *
               ss[static_cast<long>(k)];
    }
  }
  const Eigen::VectorXd rhs = rhs_c.real();
  const Eigen::MatrixXd skew = g.Q_skew();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(skew);
  const Eigen::VectorXd gamma = cod.solve(rhs);
  require((skew * gamma - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()),
          "stable spec: spectral measure violates the alpha = 1 moment condition");
  return gamma.cast<double>();
}

// ---------------------------------------------------------------------------

void validate_atoms(const SpectralMeasure& rho, const GroupDescriptor& g) {
  require(!rho.atoms.empty(), "stable spec: spectral measure needs at least one atom");
  for (const auto& a : rho.atoms) {
    require(static_cast<int>(a.s.size()) == g.dim(), "stable spec: atom dimension mismatch");
    require(a.w > 0.0, "stable spec: atom weights must be positive");
    const double n = a.s.norm();
    if (g.kind() == GroupKind::continuous) {
      require(std::abs(n - 1.0) <= 1e-9, "stable spec: continuous-group atoms must be unit");
    } else if (g.kind() == GroupKind::discrete) {
      const double r = g.generator().scale();
      require(n >= r * (1.0 - 1e-12) && n < 1.0 + 1e-12,
              "stable spec: discrete-group atoms must satisfy r <= |s| < 1");
    }
  }
}

void validate_drift(const Vec& z, const GroupDescriptor& g) {
  if (z.norm() == 0.0) return;
  if (g.kind() == GroupKind::continuous) {
    require((g.Q_skew() * z).norm() <= 1e-9 * (1.0 + z.norm()),
            "stable spec: drift must satisfy t^Q z = t z");
  } else if (g.kind() == GroupKind::discrete) {
    const auto& A = g.generator();
    require((A.rotation() * z - z).norm() <= 1e-9 * (1.0 + z.norm()),
            "stable spec: drift must satisfy A z = ||A|| z");
  }
  for (const auto& o : g.compact_generators()) {
    require((o * z - z).norm() <= 1e-9 * (1.0 + z.norm()),
            "stable spec: drift must be fixed by the compact generators");
  }
}

}  // namespace

SpectralMeasure symmetrize(const SpectralMeasure& rho, const GroupDescriptor& g) {
  auto invariant_under = [&](const Mat& o) {
    for (const auto& a : rho.atoms) {
      const Vec img = o * a.s;
      double matched = 0.0;
      for (const auto& b : rho.atoms) {
        if ((img - b.s).norm() < 1e-10) matched += b.w;
      }
      if (std::abs(matched - a.w) > 1e-10 * (1.0 + a.w)) return false;
    }
    return true;
  };
  if (g.compact_generators().empty()) return rho;
  const auto group = enumerate_compact_group(g.compact_generators(), g.dim());
  if (group.empty()) {
    // infinite (or huge) compact part: accept only already-invariant input
    for (const auto& o : g.compact_generators()) {
      require(invariant_under(o),
              "symmetrize: compact closure exceeds the enumeration cap and the "
              "input measure is not invariant");
    }
    return rho;
  }
  const double inv_n = 1.0 / static_cast<double>(group.size());
  SpectralMeasure out;
  for (const auto& o : group) {
    for (const auto& a : rho.atoms) {
      Vec img = o * a.s;
      bool merged = false;
      for (auto& b : out.atoms) {
        if ((img - b.s).norm() < 1e-10) {
          b.w += a.w * inv_n;
          merged = true;
          break;
        }
      }
      if (!merged) out.atoms.push_back({std::move(img), a.w * inv_n});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

StableSpec StableSpec::jump(double alpha, GroupDescriptor group, SpectralMeasure rho) {
  require(alpha > 0.0 && alpha < 2.0 && std::abs(alpha - 1.0) > 1e-9,
          "stable spec: jump payload needs alpha in (0,2) away from 1");
  require(group.kind() != GroupKind::trivial, "stable spec: trivial scale group");
  validate_atoms(rho, group);
  StableSpec s(alpha, std::move(group));
  s.payload_ = JumpPayload{std::move(rho)};
  return s;
}

StableSpec StableSpec::gaussian(GroupDescriptor group, Mat sigma) {
  require(sigma.rows() == group.dim() && sigma.cols() == group.dim(),
          "stable spec: sigma dimension mismatch");
  require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "stable spec: sigma must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(sigma)};
  require(eig.eigenvalues().minCoeff() >= -1e-10, "stable spec: sigma must be PSD");
  for (const auto& o : group.compact_generators()) {
    require((o * sigma * o.transpose() - sigma).cwiseAbs().maxCoeff() <= 1e-9,
            "stable spec: sigma must be invariant under the compact generators");
  }
  StableSpec s(2.0, std::move(group));
  s.payload_ = GaussianPayload{std::move(sigma)};
  return s;
}

StableSpec StableSpec::isotropic1(GroupDescriptor group, double c, Vec z) {
  require(c >= 0.0, "stable spec: isotropic alpha=1 needs c >= 0");
  require(group.kind() == GroupKind::continuous,
          "stable spec: alpha = 1 requires a continuous scale group");
  require(group.isotropic(),
          "stable spec: the closed-form alpha = 1 payload needs an isotropic group");
  validate_drift(z, group);
  StableSpec s(1.0, std::move(group));
  s.payload_ = Isotropic1Payload{c, std::move(z)};
  return s;
}

StableSpec StableSpec::operator1(GroupDescriptor group, SpectralMeasure rho, Vec z) {
  require(group.kind() == GroupKind::continuous,
          "stable spec: alpha = 1 with a discrete scale group is not representable");
  validate_atoms(rho, group);
  validate_drift(z, group);
  // the moment condition int <x,s> rho(ds) = 0 on E_1(Q^T) = ker(Q - I)^T
  Vec mean = Vec::Zero(group.dim());
  for (const auto& a : rho.atoms) mean += a.w * a.s;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(group.Q_skew()),
                                        Eigen::ComputeFullV);
  for (int k = 0; k < svd.matrixV().cols(); ++k) {
    if (k < svd.singularValues().size() && svd.singularValues()(k) > 1e-10) continue;
    const Eigen::VectorXd x = svd.matrixV().col(k);
    require(std::abs(x.dot(Eigen::VectorXd(mean))) <= 1e-9 * (1.0 + mean.norm()),
            "stable spec: rho violates the alpha = 1 moment condition on E_1(Q^T)");
  }
  StableSpec s(1.0, std::move(group));
  s.payload_ = Operator1Payload{std::move(rho), std::move(z)};
  return s;
}

StableSpec StableSpec::zero(double alpha, GroupDescriptor group) {
  require(alpha > 0.0, "stable spec: alpha must be positive");
  StableSpec s(alpha, std::move(group));
  s.payload_ = ZeroPayload{};
  return s;
}

StableSpec::Kind StableSpec::kind() const {
  if (std::holds_alternative<JumpPayload>(payload_)) return Kind::jump;
  if (std::holds_alternative<Isotropic1Payload>(payload_)) return Kind::isotropic1;
  if (std::holds_alternative<Operator1Payload>(payload_)) return Kind::operator1;
  if (std::holds_alternative<GaussianPayload>(payload_)) return Kind::gaussian;
  return Kind::zero;
}

const JumpPayload& StableSpec::jump_payload() const {
  return std::get<JumpPayload>(payload_);
}
const Isotropic1Payload& StableSpec::isotropic1_payload() const {
  return std::get<Isotropic1Payload>(payload_);
}
const Operator1Payload& StableSpec::operator1_payload() const {
  return std::get<Operator1Payload>(payload_);
}
const GaussianPayload& StableSpec::gaussian_payload() const {
  return std::get<GaussianPayload>(payload_);
}

// ---------------------------------------------------------------------------

Complex psi_eval(const StableSpec& spec, const Vec& x, QuadReport* report) {
  require(static_cast<int>(x.size()) == spec.dim(), "psi_eval: x dimension mismatch");
  if (x.norm() == 0.0) return Complex(0.0, 0.0);
  switch (spec.kind()) {
    case StableSpec::Kind::zero:
      return Complex(0.0, 0.0);
    case StableSpec::Kind::gaussian: {
      const Mat& s = spec.gaussian_payload().sigma;
      return Complex(-0.5 * x.dot(s * x), 0.0);
    }
    case StableSpec::Kind::isotropic1: {
      const auto& p = spec.isotropic1_payload();
      return Complex(-p.c * x.norm(), p.z.size() ? p.z.dot(x) : 0.0);
    }
    case StableSpec::Kind::operator1: {
      const auto& p = spec.operator1_payload();
      const Complex eta = eta1_operator(spec.group(), p.rho, x, report);
      const Vec gamma = gamma1_operator(spec.group(), p.rho);
      double drift = gamma.dot(x);
      if (p.z.size()) drift += p.z.dot(x);
      return eta + Complex(0.0, drift);
    }
    case StableSpec::Kind::jump:
      break;
  }

  const auto& rho = spec.jump_payload().rho;
  const double alpha = spec.alpha();
  const bool compensate = alpha > 1.0;
  double I1 = 0.0, I2 = 0.0;
  for (const auto& atom : rho.atoms) {
    RadialResult r;
    if (spec.group().kind() == GroupKind::continuous) {
      r = radial_jump_integrals(alpha, rotation_projection(spec.group(), x, atom.s),
                                compensate);
    } else {
      r = lattice_jump_sums(alpha, spec.group().generator(), Vec(x), atom.s, compensate);
    }
    I1 += atom.w * r.I1;
    I2 += atom.w * r.I2;
    if (report) {
      report->achieved_tol += atom.w * r.achieved;
      report->converged = report->converged && r.converged;
    }
  }
  return Complex(-I1, I2);
}

double nu_tail(const StableSpec& spec, double radius) {
  require(radius > 0.0, "nu_tail: radius must be positive");
  require(spec.kind() == StableSpec::Kind::jump, "nu_tail: jump payload only");
  const auto& rho = spec.jump_payload().rho;
  const double alpha = spec.alpha();
  if (spec.group().kind() == GroupKind::continuous) {
    return rho.total_mass() * std::pow(radius, -alpha) / alpha;
  }
  const double r = spec.group().generator().scale();
  const double q = std::pow(r, alpha);
  double total = 0.0;
  for (const auto& a : rho.atoms) {
    // atoms A^n s with r^n |s| > radius, i.e. n <= n0
    const double n_star = std::log(radius / a.s.norm()) / std::log(r);
    const long n0 = static_cast<long>(std::ceil(n_star)) - 1;
    total += a.w * std::pow(r, -static_cast<double>(n0) * alpha) / (1.0 - q);
  }
  return total;
}

// ---------------------------------------------------------------------------
// sampling

namespace {

long poisson_draw(double lambda, RngStream& rng) {
  require(lambda >= 0.0 && std::isfinite(lambda), "poisson: bad intensity");
  if (lambda < 30.0) {
    const double limit = std::exp(-lambda);
    long k = 0;
    double prod = rng.next_open01();
    while (prod > limit) {
      ++k;
      prod *= rng.next_open01();
    }
    return k;
  }
  // Hormann's PTRS transformed rejection
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = rng.next_double() - 0.5;
    double v = rng.next_open01();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * std::log(lambda) - lambda - std::lgamma(k + 1.0)) {
      return static_cast<long>(k);
    }
  }
}

// int_{|y|<=eps} |y|^k nu(dy) for k > alpha
double small_moment(const StableSpec& spec, double k, double eps) {
  const auto& rho = spec.jump_payload().rho;
  const double alpha = spec.alpha();
  if (spec.group().kind() == GroupKind::continuous) {
    return rho.total_mass() * std::pow(eps, k - alpha) / (k - alpha);
  }
  const double r = spec.group().generator().scale();
  double total = 0.0;
  for (const auto& a : rho.atoms) {
    const long n1 = static_cast<long>(std::ceil(std::log(eps / a.s.norm()) / std::log(r)));
    total += a.w * std::pow(a.s.norm(), k) *
             std::pow(r, static_cast<double>(n1) * (k - alpha)) /
             (1.0 - std::pow(r, k - alpha));
  }
  return total;
}

Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(m)};
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return Mat(eig.eigenvectors() * vals.asDiagonal());
}

}  // namespace

double sample_positive_stable(double alpha, RngStream& rng) {
  require(alpha > 0.0 && alpha < 1.0, "positive stable: alpha must be in (0,1)");
  // Chambers-Mallows-Stuck, totally skewed; normalized so that the Laplace
  // transform is exactly exp(-u^alpha)
  const double v = kPi * (rng.next_open01() - 0.5);
  const double e = rng.exponential();
  const double c0 = kPi / 2.0;
  const double num = std::sin(alpha * (v + c0));
  const double den = std::pow(std::cos(v), 1.0 / alpha);
  const double frac = std::cos(v - alpha * (v + c0)) / e;
  return (num / den) * std::pow(frac, (1.0 - alpha) / alpha);
}

Vec sample_isotropic_stable(double alpha, double c, int dim, double t, RngStream& rng) {
  require(alpha > 0.0 && alpha <= 2.0 && c >= 0.0 && t > 0.0,
          "isotropic stable: bad parameters");
  Vec g(dim);
  for (int i = 0; i < dim; ++i) g[i] = rng.normal();
  if (c == 0.0) return Vec(Vec::Zero(dim));
  if (alpha == 2.0) return Vec(std::sqrt(2.0 * c * t) * g);
  if (alpha == 1.0) {
    const double z = std::abs(rng.normal());
    return Vec((t * c / z) * g);
  }
  // subordination: sqrt(lam A) G with E[e^{-uA}] = e^{-u^{alpha/2}} gives the
  // characteristic function exp(-(lam/2)^{alpha/2} |x|^alpha)
  const double a2 = alpha / 2.0;
  const double lam = 2.0 * std::pow(c * t, 1.0 / a2);
  const double sub = sample_positive_stable(a2, rng);
  return Vec(std::sqrt(lam * sub) * g);
}

StableSampler::StableSampler(StableSpec spec, SamplerOptions opts)
    : spec_(std::move(spec)), opts_(opts) {
  const int d = spec_.dim();
  switch (spec_.kind()) {
    case StableSpec::Kind::zero:
      return;
    case StableSpec::Kind::gaussian:
      gaussian_factor_ = psd_sqrt(spec_.gaussian_payload().sigma);
      return;
    case StableSpec::Kind::isotropic1:
      return;
    case StableSpec::Kind::operator1:
      throw DomainError(
          "stable sampler: the operator alpha = 1 payload supports exponent "
          "evaluation only");
    case StableSpec::Kind::jump:
      break;
  }

  const double alpha = spec_.alpha();
  correction_ = opts_.gaussian_correction.value_or(alpha > 1.5);

  // truncation radius from the documented CF-bias proxy at |x| = x_scale:
  //   no correction, alpha < 1:  X   * int_{|y|<=eps} |y|   nu(dy)
  //   no correction, alpha > 1:  X^2 * int_{|y|<=eps} |y|^2 nu(dy) / 2
  //   correction:                X^3 * int_{|y|<=eps} |y|^3 nu(dy) / 6
  auto bias_at = [&](double eps) {
    const double X = opts_.x_scale;
    if (correction_) return opts_.t_ref * std::pow(X, 3.0) * small_moment(spec_, 3.0, eps) / 6.0;
    if (alpha > 1.0) return opts_.t_ref * X * X * small_moment(spec_, 2.0, eps) / 2.0;
    return opts_.t_ref * X * small_moment(spec_, 1.0, eps);
  };
  if (opts_.epsilon_override) {
    epsilon_ = *opts_.epsilon_override;
  } else {
    double lo = 1e-14, hi = 1e3;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      (bias_at(mid) > opts_.cf_error_budget ? hi : lo) = mid;
    }
    epsilon_ = lo;
    // cap the mean jump count; report the resulting bias honestly
    const double max_rate = opts_.max_mean_jumps / opts_.t_ref;
    if (nu_tail(spec_, epsilon_) > max_rate) {
      lo = epsilon_;
      hi = 1e6;
      for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (nu_tail(spec_, mid) > max_rate ? lo : hi) = mid;
      }
      epsilon_ = hi;
    }
  }
  cf_error_bound_ = bias_at(epsilon_);
  big_jump_intensity_ = nu_tail(spec_, epsilon_);

  const auto& rho = spec_.jump_payload().rho;
  const auto& g = spec_.group();
  double acc = 0.0;
  for (const auto& a : rho.atoms) {
    double weight = a.w;
    if (g.kind() == GroupKind::discrete) {
      const double r = g.generator().scale();
      const long n1 =
          static_cast<long>(std::ceil(std::log(epsilon_ / a.s.norm()) / std::log(r)));
      const double tail_mass = std::pow(r, -static_cast<double>(n1 - 1) * alpha) /
                               (1.0 - std::pow(r, alpha));
      atom_tail_.push_back(tail_mass);
      weight = a.w * tail_mass;
    }
    acc += weight;
    atom_cdf_.push_back(acc);
  }
  for (auto& c : atom_cdf_) c /= acc;

  // exact compensator / small-jump mean, closed form per atom
  compensator_ = Vec::Zero(d);
  small_mean_ = Vec::Zero(d);
  Mat small_cov = Mat::Zero(d, d);
  if (g.kind() == GroupKind::continuous) {
    for (const auto& a : rho.atoms) atom_dirs_.push_back(rotated_direction(g, a.s));
    const Eigen::MatrixXd skew = g.Q_skew();
    const Mat rot_eps = matrix_exp(Mat(std::log(epsilon_) * skew));
    const double scale_eps = std::pow(epsilon_, 1.0 - alpha);
    const Eigen::MatrixXd big = (alpha - 1.0) * Eigen::MatrixXd::Identity(d, d) - skew;
    const Eigen::MatrixXd sml = (1.0 - alpha) * Eigen::MatrixXd::Identity(d, d) + skew;
    for (const auto& a : rho.atoms) {
      const Vec re = scale_eps * (rot_eps * a.s);
      if (alpha > 1.0) {
        compensator_ += a.w * Vec(big.partialPivLu().solve(Eigen::VectorXd(re)));
      } else {
        small_mean_ += a.w * Vec(sml.partialPivLu().solve(Eigen::VectorXd(re)));
      }
    }
    if (correction_) {
      const double vhi = std::log(epsilon_);
      const double vlo = vhi + std::log(1e-14) / (2.0 - alpha);
      for (const auto& a : rho.atoms) {
        const detail::RotatedDirection rd = rotated_direction(g, a.s);
        for (int i = 0; i < d; ++i) {
          for (int j = i; j < d; ++j) {
            auto f = [&](double v) {
              const Vec y = rd.eval(v);
              return std::exp((2.0 - alpha) * v) * y[i] * y[j];
            };
            const double val = a.w * adaptive_gk(f, vlo, vhi, 1e-13);
            small_cov(i, j) += val;
            if (i != j) small_cov(j, i) += val;
          }
        }
      }
    }
  } else {
    const Similarity& A = g.generator();
    const double r = A.scale();
    auto rot_pow = [&](const Vec& v, long n) {
      Vec y = v;
      const Mat o = n >= 0 ? A.rotation() : Mat(A.rotation().transpose());
      for (long m = 0; m < std::labs(n); ++m) y = o * y;
      return y;
    };
    for (const auto& a : rho.atoms) {
      const long n1 =
          static_cast<long>(std::ceil(std::log(epsilon_ / a.s.norm()) / std::log(r)));
      // small side n >= n1: sum r^{n(1-alpha)} O^n s and r^{n(2-alpha)} outer
      // products; big side n <= n1 - 1: the alpha > 1 compensator
      if (alpha < 1.0 || correction_) {
        // A^n s = r^n O^n s, so the |s| factor lives inside the rotated vector
        Vec y = rot_pow(a.s, n1);
        double mean_f = std::pow(r, static_cast<double>(n1) * (1.0 - alpha));
        double cov_f = std::pow(r, static_cast<double>(n1) * (2.0 - alpha));
        for (int guard = 0; guard < 100000; ++guard) {
          if (alpha < 1.0 && correction_) small_mean_ += a.w * mean_f * y;
          if (correction_) small_cov += a.w * cov_f * (y * y.transpose());
          y = A.rotation() * y;
          mean_f *= std::pow(r, 1.0 - alpha);
          cov_f *= std::pow(r, 2.0 - alpha);
          if (cov_f < 1e-18 && (alpha >= 1.0 || mean_f < 1e-18)) break;
        }
      }
      if (alpha > 1.0) {
        Vec y = rot_pow(a.s, n1 - 1);
        double f = std::pow(r, static_cast<double>(n1 - 1) * (1.0 - alpha));
        for (int guard = 0; guard < 100000; ++guard) {
          compensator_ += a.w * f * y;
          y = A.rotation().transpose() * y;
          f *= std::pow(r, alpha - 1.0);
          if (f < 1e-18) break;
        }
      }
    }
  }
  small_cov_factor_ = correction_ ? psd_sqrt(small_cov) : Mat(Mat::Zero(d, d));
}

Vec StableSampler::sample_jump_payload(double t, RngStream& rng) const {
  const int d = spec_.dim();
  const double alpha = spec_.alpha();
  const auto& rho = spec_.jump_payload().rho;
  const auto& g = spec_.group();
  Vec sum = Vec::Zero(d);
  const long k = poisson_draw(t * big_jump_intensity_, rng);
  for (long i = 0; i < k; ++i) {
    // atom, then radius from the restricted tail law
    const double u = rng.next_double();
    std::size_t ai = 0;
    while (ai + 1 < atom_cdf_.size() && u > atom_cdf_[ai]) ++ai;
    const auto& atom = rho.atoms[ai];
    if (g.kind() == GroupKind::continuous) {
      const double radius = epsilon_ * std::pow(rng.next_open01(), -1.0 / alpha);
      sum += radius * atom_dirs_[ai].eval(std::log(radius));
    } else {
      const double r = g.generator().scale();
      const long n1 =
          static_cast<long>(std::ceil(std::log(epsilon_ / atom.s.norm()) / std::log(r)));
      const double q = std::pow(r, alpha);
      const long geo = static_cast<long>(std::log(rng.next_open01()) / std::log(q));
      const long n = (n1 - 1) - geo;
      Vec y = atom.s;
      const Similarity& A = g.generator();
      if (n >= 0) {
        for (long m = 0; m < n; ++m) y = A.apply(y);
      } else {
        const Similarity Ainv = A.inverse();
        for (long m = 0; m < -n; ++m) y = Ainv.apply(y);
      }
      sum += y;
    }
  }
  if (alpha > 1.0) sum -= t * compensator_;
  if (alpha < 1.0 && correction_) sum += t * small_mean_;
  if (correction_) {
    Vec gvec(d);
    for (int i = 0; i < d; ++i) gvec[i] = rng.normal();
    sum += std::sqrt(t) * (small_cov_factor_ * gvec);
  }
  return sum;
}

Vec StableSampler::sample(double t, RngStream& rng) const {
  require(t > 0.0, "stable sampler: t must be positive");
  const int d = spec_.dim();
  switch (spec_.kind()) {
    case StableSpec::Kind::zero:
      return Vec(Vec::Zero(d));
    case StableSpec::Kind::gaussian: {
      Vec g(d);
      for (int i = 0; i < d; ++i) g[i] = rng.normal();
      return Vec(std::sqrt(t) * (gaussian_factor_ * g));
    }
    case StableSpec::Kind::isotropic1: {
      const auto& p = spec_.isotropic1_payload();
      Vec g(d);
      for (int i = 0; i < d; ++i) g[i] = rng.normal();
      const double z = std::abs(rng.normal());
      Vec out = (t * p.c / z) * g;
      if (p.z.size()) out += t * p.z;
      return out;
    }
    case StableSpec::Kind::operator1:
      throw DomainError("stable sampler: operator alpha = 1 payload is not samplable");
    case StableSpec::Kind::jump:
      return sample_jump_payload(t, rng);
  }
  return Vec(Vec::Zero(d));
}

Vec StableSampler::sample_at_W(double W, RngStream& rng, bool group_shortcut) const {
  require(W > 0.0, "stable sampler: W must be positive");
  if (!group_shortcut) return sample(W, rng);
  require(spec_.group().kind() == GroupKind::continuous,
          "stable sampler: the group shortcut needs a continuous scale group");
  const Similarity u = power_Q(spec_.group(), std::pow(W, 1.0 / spec_.alpha()));
  return u.apply(sample(1.0, rng));
}

Vec sample_Y(const StableSpec& spec, double t, RngStream& rng, const SamplerOptions& opts) {
  return StableSampler(spec, opts).sample(t, rng);
}

Vec sample_YW(const StableSpec& spec, double W, RngStream& rng, bool group_shortcut,
              const SamplerOptions& opts) {
  return StableSampler(spec, opts).sample_at_W(W, rng, group_shortcut);
}

Similarity random_group_element(const GroupDescriptor& g, RngStream& rng,
                                double scale_lo, double scale_hi) {
  Similarity u = Similarity::identity(g.dim());
  switch (g.kind()) {
    case GroupKind::continuous: {
      const double t =
          scale_lo * std::pow(scale_hi / scale_lo, rng.next_double());
      u = power_Q(g, t);
      break;
    }
    case GroupKind::discrete: {
      const auto& A = g.generator();
      const double lr = A.log_scale();
      const long n_lo = static_cast<long>(std::ceil(std::log(scale_hi) / lr));
      const long n_hi = static_cast<long>(std::floor(std::log(scale_lo) / lr));
      const long n = n_lo + static_cast<long>(rng.next_below(
                                static_cast<uint64_t>(std::max<long>(1, n_hi - n_lo + 1))));
      const Similarity step = n >= 0 ? A : A.inverse();
      for (long i = 0; i < std::labs(n); ++i) u = compose(u, step);
      break;
    }
    case GroupKind::trivial:
      break;
  }
  if (!g.compact_generators().empty() && rng.next_double() < 0.5) {
    const auto& o =
        g.compact_generators()[rng.next_below(g.compact_generators().size())];
    u = compose(u, Similarity(1.0, o));
  }
  return u;
}

}  // namespace smeq
