#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "smeq/branching.hpp"
#include "smeq/common.hpp"
#include "smeq/stable_laws.hpp"
#include "smeq/weight_model.hpp"

namespace smeq {

struct ECFGrid {
  std::vector<Vec> points;
};

/// 20 test points: a 10-point log-spaced radial ladder along e1 (radii 0.05
/// to 2) and 10 seed-derived random directions on the unit sphere. The
/// exponent varies radially like |x|^alpha and angularly through the group,
/// so both axes are probed.
ECFGrid standard_grid(int dim, uint64_t seed);

struct ECFEstimate {
  std::vector<Complex> phi;
  std::vector<double> se;  // |e^{i<x,X>}| = 1, so se^2 = (1 - |phi|^2)/n
  long n = 0;
};

ECFEstimate ecf(const std::vector<Vec>& samples, const ECFGrid& grid);

struct PointRow {
  Vec x;
  Complex phi_left;
  Complex phi_right;
  double se = 0.0;
  double stat = 0.0;
};

struct TestVerdict {
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double level = 0.01;
  std::vector<PointRow> table;
  long n = 0;
  long cap_hits = 0;
};

/// Max studentized two-sample ECF discrepancy with a pooled-bootstrap
/// threshold (500 resamples). Deterministic given the seed.
TestVerdict two_sample_ecf_test(const std::vector<Vec>& left,
                                const std::vector<Vec>& right, const ECFGrid& grid,
                                double level, uint64_t seed);

using SolutionSampler = std::function<Vec(RngStream&)>;

/// Draws n candidate samples of X and n fresh one-step images
/// sum_j T_j X_j + C (a new weight family and fresh independent X copies per
/// image), then compares the two empirical characteristic functions.
TestVerdict fixed_point_test(const WeightModel& model, const SolutionSampler& sampler,
                             const ECFGrid& grid, long n, double level, uint64_t seed,
                             long child_cap = 1000);

/// Sampler for W* + Y_W + Z_n w: one coupled tree realization per draw, the
/// Levy leg seeded from a stream disjoint from the tree stream.
SolutionSampler solution_sampler(const WeightModel& model, double alpha,
                                 const StableSpec& spec, Vec w,
                                 const BranchingConfig& cfg,
                                 const SamplerOptions& opts = {},
                                 bool group_shortcut = false);

struct HillEstimate {
  double alpha_hat = 0.0;
  double std_error = 0.0;
  std::vector<std::pair<long, double>> sweep;  // (k, alpha_hat(k)) ladder
};

/// Hill estimator on the top-k order statistics; ratio form, so it is exactly
/// invariant under power-of-two rescaling of the sample.
HillEstimate hill_tail_index(std::vector<double> samples, long k);

struct EigenCheckResult {
  Vec w;
  double residual = 0.0;          // |E[Z_1] w - w|
  Complex eigenvalue{0.0, 0.0};   // the one nearest 1
  double as_violation_rate = 0.0; // fraction of samples with Z_1 w != w
};

/// Eigenvector of E[Z_1] for the eigenvalue nearest 1, when within tolerance
/// (1e-6 analytic, 3 sigma Monte Carlo); nullopt otherwise.
std::optional<EigenCheckResult> eigen_check(const WeightModel& model, long n_mc = 100000,
                                            double tol = 1e-6, uint64_t seed = 0xe16);

struct MartingaleRow {
  int depth = 0;
  double mean_W = 0.0;
  double se_W = 0.0;
  Vec mean_Zw;
  double se_Zw = 0.0;
  std::map<double, double> beta_norm;  // E[|Z_n w|^beta] per requested beta
};

struct MartingaleReport {
  std::vector<MartingaleRow> rows;
  std::map<double, double> m_beta;
  std::map<double, double> z1w_beta;  // E[|Z_1 w|^beta]
  bool growth_flag = false;           // some beta-norm grew by more than 2x
};

MartingaleReport martingale_report(const WeightModel& model, double alpha,
                                   const std::vector<int>& depths,
                                   const std::vector<double>& betas, long replicas,
                                   const Vec& w, uint64_t seed = 0x3a7, int threads = 1);

}  // namespace smeq
