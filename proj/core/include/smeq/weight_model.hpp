#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smeq/common.hpp"
#include "smeq/rng.hpp"
#include "smeq/similarity.hpp"

namespace smeq {

/// One draw of the weight family (C, T_1, ..., T_N). Zero weights are omitted,
/// so T.size() == N is finite by construction.
struct WeightSample {
  Vec C;
  std::vector<Similarity> T;
};

/// Immutable weight-sequence model: a deterministic sampler over an explicit
/// stream, the declared weight group, and optional analytic structure
/// (m(s) and E[Z_1]) where a closed form exists.
class WeightModel {
 public:
  using Sampler = std::function<WeightSample(RngStream&)>;

  WeightModel(int dim, GroupDescriptor group, Sampler sampler, std::string label)
      : dim_(dim), group_(std::move(group)), sampler_(std::move(sampler)),
        label_(std::move(label)) {
    require(dim_ >= 1 && dim_ <= kMaxDim, "weight model: dim out of range");
  }

  WeightModel&& with_analytic_m(std::function<double(double)> m) && {
    analytic_m_ = std::move(m);
    return std::move(*this);
  }
  WeightModel&& with_analytic_EZ1(Mat ez1) && {
    analytic_ez1_ = std::move(ez1);
    return std::move(*this);
  }
  WeightModel&& with_homogeneous(bool h) && {
    homogeneous_ = h;
    return std::move(*this);
  }

  int dim() const { return dim_; }
  const GroupDescriptor& group() const { return group_; }
  const std::string& label() const { return label_; }
  bool homogeneous() const { return homogeneous_; }
  WeightSample sample(RngStream& rng) const { return sampler_(rng); }

  bool has_analytic_m() const { return static_cast<bool>(analytic_m_); }
  double analytic_m(double s) const {
    require(has_analytic_m(), "weight model: no analytic m");
    return analytic_m_(s);
  }
  const std::optional<Mat>& analytic_EZ1() const { return analytic_ez1_; }

 private:
  int dim_;
  GroupDescriptor group_;
  Sampler sampler_;
  std::string label_;
  std::function<double(double)> analytic_m_;
  std::optional<Mat> analytic_ez1_;
  bool homogeneous_ = false;
};

// ---------------------------------------------------------------------------
// presets

namespace presets {

/// Spacings of b-1 uniforms raised to lambda_2, b >= 4.
WeightModel bary_spacings(int b);

/// b equal weights e^{-lambda_2 T}, T a sum of independent Exp(j), j < b.
WeightModel bary_exponential(int b);

/// U^zeta and zeta (1-U)^zeta for the primitive b-th root of unity zeta.
WeightModel cyclic_polya(int b);

/// Dirichlet(theta,...,theta) spacings raised to lambda_2 (theta = 1 matches
/// the uniform-spacings law; other theta are solved by Newton continuation).
WeightModel fragmentation(int b, double theta = 1.0);

struct BigginsParams {
  Complex lambda;             // Re > 0
  double disp_mean = 0.0;     // normal displacement of the real walk
  double disp_sd = 1.0;
  double imag_disp_sd = 0.0;  // optional independent imaginary-exponent walk
  int offspring = 2;
};
WeightModel biggins_brw(const BigginsParams& p);

/// Three-dimensional kinetic pair L = sin(Theta) O_L, R = cos(Theta) O_R.
/// With momentum conservation the rotations are built so L e1 + R e1 = e1.
WeightModel kac3d(bool conserve_momentum);

struct TableAtom {
  double prob;
  Vec C;
  std::vector<Similarity> T;
};
WeightModel table(std::vector<TableAtom> atoms,
                  std::optional<GroupDescriptor> group = std::nullopt,
                  std::string label = "table");

}  // namespace presets

// ---------------------------------------------------------------------------
// operations

struct MEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool diverged = false;
  bool analytic = false;
};

/// m(s) = E[sum_j ||T_j||^s]; the analytic path returns (m(s), 0), the Monte
/// Carlo path a sample mean with its standard error. A running-mean doubling
/// between n/2 and n draws reports divergence (m(s) may be infinite off alpha).
MEstimate m_eval(const WeightModel& model, double s, long n_mc = 100000,
                 uint64_t seed = 0x6d65766lu);

struct AlphaResult {
  double alpha = 0.0;
  double m_residual = 0.0;                          // |m(alpha) - 1|
  std::vector<std::pair<double, double>> brackets;  // every sign change found
};

/// Root of m(alpha) = 1 by bisection with secant acceleration. Without a
/// bracket, scans s = 2^k s0 geometrically and solves in the smallest
/// bracketing interval; all sign changes are reported. Throws (with the scan
/// trace) if no sign change is found.
AlphaResult solve_alpha(const WeightModel& model,
                        std::optional<std::pair<double, double>> bracket = std::nullopt,
                        double tol = 1e-12, long n_mc = 100000, uint64_t seed = 0xa1fa);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

enum class Flag { pass, fail, unknown };

/// Finite-sample assumption diagnostics. Moment-finiteness entries are
/// surrogates ("no divergence detected at n_mc"), never proofs.
struct AssumptionReport {
  Estimate mean_N;
  Flag a1 = Flag::unknown;

  double alpha = 0.0;
  double m_residual = 0.0;
  Flag a2 = Flag::unknown;

  Estimate m_prime;         // m'(alpha)
  Estimate w1_log_w1;       // E[W_1 log+ W_1]
  Flag a3 = Flag::unknown;

  Estimate h3_w1;           // E[h_3(W_1)], h_r(x) = x (log+ x)^r log+log+ x
  Estimate neg_log_sq;      // E[sum ||T||^alpha (log- ||T||)^2]
  Flag a4_prime = Flag::unknown;

  Estimate h_a4_w1;         // E[h_{2l+2}(W_1)], l = 1 + d(d-1)/2 (delta = 1)
  Estimate neg_log_a4;      // E[sum ||T||^alpha |log- ||T|||^{l+2}]
  Flag a4 = Flag::unknown;  // spread-out part is not sample-checkable

  std::optional<double> s1_beta;
  Estimate m_at_beta;
  Estimate c_moment_beta;   // E[|C|^beta]
  Flag s1 = Flag::unknown;
  Flag s2 = Flag::unknown;

  long n_mc = 0;
  std::string notes;
};

AssumptionReport check_assumptions(const WeightModel& model, double alpha, long n_mc,
                                   uint64_t seed = 0xa55e55);

struct MatrixEstimate {
  Mat value;
  Mat std_error;
  bool analytic = false;
};

MatrixEstimate expected_Z1(const WeightModel& model, long n_mc = 100000,
                           uint64_t seed = 0xe21);

struct GroupConsistency {
  bool consistent = true;
  double worst_log_defect = 0.0;
  long violations = 0;
  long samples = 0;
};

/// Checks that sampled ||T_j|| lie in the declared scale group, within 1e-9
/// on the log scale. The group kind itself is declared, never inferred.
GroupConsistency check_group_consistency(const WeightModel& model, long n_samples = 1000,
                                         uint64_t seed = 0x96);

}  // namespace smeq
