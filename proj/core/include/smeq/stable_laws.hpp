#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "smeq/common.hpp"
#include "smeq/quadrature.hpp"
#include "smeq/rng.hpp"
#include "smeq/similarity.hpp"

namespace smeq {

struct SpectralAtom {
  Vec s;
  double w = 0.0;
};

namespace detail {
/// coefficients u_k with e^{v(Q-I)} s = Re(sum_k u_k e^{i omega_k v}); lets a
/// sampler rotate jump directions without a matrix exponential per jump
struct RotatedDirection {
  using CVec = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
  std::vector<double> omega;
  std::vector<CVec> coef;
  int dim = 0;
  Vec eval(double v) const;
};
}  // namespace detail

/// Finite atomic spectral measure on the polar section S_U. Continuous-group
/// atoms sit on the unit sphere; discrete-group atoms in the annulus
/// r <= |s| < 1. Continuous rho must be pre-discretized by the caller.
struct SpectralMeasure {
  std::vector<SpectralAtom> atoms;
  double total_mass() const {
    double t = 0.0;
    for (const auto& a : atoms) t += a.w;
    return t;
  }
};

/// Orbit-average the atom weights over the finite group generated by the
/// compact generators (cap 10^4 elements). Total mass is preserved exactly.
/// If the closure is not finite the input must already be invariant.
SpectralMeasure symmetrize(const SpectralMeasure& rho, const GroupDescriptor& g);

struct JumpPayload {
  SpectralMeasure rho;
};
struct Isotropic1Payload {
  double c = 0.0;
  Vec z;
};
struct Operator1Payload {
  SpectralMeasure rho;
  Vec z;
};
struct GaussianPayload {
  Mat sigma;
};
struct ZeroPayload {};

/// A strictly (U, alpha)-stable law, parametrized per index regime:
/// Jump for alpha in (0,2) \ {1}, Isotropic1 / Operator1 at alpha = 1,
/// Gaussian at alpha = 2, Zero above 2 (and as the trivial law anywhere).
class StableSpec {
 public:
  enum class Kind { jump, isotropic1, operator1, gaussian, zero };

  static StableSpec jump(double alpha, GroupDescriptor group, SpectralMeasure rho);
  static StableSpec gaussian(GroupDescriptor group, Mat sigma);
  static StableSpec isotropic1(GroupDescriptor group, double c, Vec z);
  static StableSpec operator1(GroupDescriptor group, SpectralMeasure rho, Vec z);
  static StableSpec zero(double alpha, GroupDescriptor group);

  double alpha() const { return alpha_; }
  const GroupDescriptor& group() const { return group_; }
  int dim() const { return group_.dim(); }
  Kind kind() const;

  const JumpPayload& jump_payload() const;
  const Isotropic1Payload& isotropic1_payload() const;
  const Operator1Payload& operator1_payload() const;
  const GaussianPayload& gaussian_payload() const;

 private:
  StableSpec(double alpha, GroupDescriptor group)
      : alpha_(alpha), group_(std::move(group)) {}
  double alpha_;
  GroupDescriptor group_;
  std::variant<JumpPayload, Isotropic1Payload, Operator1Payload, GaussianPayload,
               ZeroPayload>
      payload_ = ZeroPayload{};
};

struct QuadReport {
  double achieved_tol = 0.0;
  bool converged = true;
};

/// Characteristic exponent Psi(x) = log E[e^{i<x, Y_1>}]. Jump payloads reduce
/// the Levy integral per atom to a one-dimensional radial integral; at alpha=2
/// this is -x^T Sigma x / 2, at alpha > 2 identically 0.
Complex psi_eval(const StableSpec& spec, const Vec& x, QuadReport* report = nullptr);

/// nu(B_r^c) for Jump payloads: rho_total r^-alpha / alpha in the continuous
/// case, a multiplicatively periodic lattice sum in the discrete case.
double nu_tail(const StableSpec& spec, double radius);

struct SamplerOptions {
  double cf_error_budget = 1e-3;  // target CF bias at |x| = x_scale, time t_ref
  double x_scale = 4.0;
  double t_ref = 1.0;
  std::optional<double> epsilon_override;
  std::optional<bool> gaussian_correction;  // default: on for alpha > 1.5
  double max_mean_jumps = 2e6;
};

/// Sampler for Y_t. Jump payloads use a compound-Poisson truncation at radius
/// epsilon: jumps above epsilon have the exact law of nu restricted, alpha > 1
/// subtracts the exact compensator, and the small-jump remainder is optionally
/// replaced by a Gaussian with the exact small-jump covariance.
class StableSampler {
 public:
  explicit StableSampler(StableSpec spec, SamplerOptions opts = {});

  Vec sample(double t, RngStream& rng) const;

  /// Y at the random time W. The default path is sample(W); the continuous
  /// group shortcut applies power_Q(W^{1/alpha}) to a sample of Y_1.
  Vec sample_at_W(double W, RngStream& rng, bool group_shortcut = false) const;

  const StableSpec& spec() const { return spec_; }
  double epsilon() const { return epsilon_; }
  double mean_jumps(double t) const { return t * big_jump_intensity_; }
  /// Documented CF-bias proxy of the truncation at |x| = x_scale, per t_ref.
  double cf_error_bound() const { return cf_error_bound_; }

 private:
  StableSpec spec_;
  SamplerOptions opts_;
  bool correction_ = false;
  double epsilon_ = 0.0;
  double big_jump_intensity_ = 0.0;  // nu(B_eps^c)
  Vec compensator_;                  // int_{|y|>eps} y nu(dy), alpha > 1
  Vec small_mean_;                   // int_{|y|<=eps} y nu(dy), alpha < 1
  Mat small_cov_factor_;             // B with B B^T = int_{|y|<=eps} y y^T nu(dy)
  Mat gaussian_factor_;              // for the alpha = 2 payload
  std::vector<double> atom_cdf_;     // jump atom selection
  std::vector<double> atom_tail_;    // discrete case: per-atom tail mass
  std::vector<detail::RotatedDirection> atom_dirs_;  // continuous case
  double cf_error_bound_ = 0.0;

  Vec sample_jump_payload(double t, RngStream& rng) const;
};

/// Convenience one-shot draw (builds a sampler internally).
Vec sample_Y(const StableSpec& spec, double t, RngStream& rng,
             const SamplerOptions& opts = {});
Vec sample_YW(const StableSpec& spec, double W, RngStream& rng,
              bool group_shortcut = false, const SamplerOptions& opts = {});

/// Closed-form rotation-invariant alpha-stable vector with exponent
/// Psi(x) = -c |x|^alpha (positive-stable subordination of a Gaussian;
/// Chambers-Mallows-Stuck for the subordinator).
Vec sample_isotropic_stable(double alpha, double c, int dim, double t, RngStream& rng);

/// Totally skewed positive alpha-stable variable (0 < alpha < 1) with Laplace
/// transform E[e^{-u A}] = exp(-u^alpha).
double sample_positive_stable(double alpha, RngStream& rng);

/// Random element of the group, ||u|| log-uniform in [scale_lo, scale_hi]
/// composed with a uniformly chosen compact generator (test surface).
Similarity random_group_element(const GroupDescriptor& g, RngStream& rng,
                                double scale_lo = 0.5, double scale_hi = 2.0);

}  // namespace smeq
