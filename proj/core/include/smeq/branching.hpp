#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "smeq/common.hpp"
#include "smeq/weight_model.hpp"

namespace smeq {

struct BranchingConfig {
  int max_depth = 10;                    // active unless stopping_level is set
  std::optional<double> stopping_level;  // C(t) criterion: S(v) > t
  uint64_t max_nodes = 10'000'000;
  uint64_t root_seed = 0;
  bool prune = false;
  double prune_threshold = 0.0;  // drop subtrees with ||L(v)||^alpha below this
};

struct LineMember {
  double S_parent = 0.0;
  double S = 0.0;
  Mat O;
  int depth = 0;
};

/// One coupled tree realization: the weight martingale W_n = sum ||L||^alpha,
/// the matrix martingale Z_n = sum L, and the inhomogeneous accumulator
/// W*_n = sum_{|v|<n} L(v) C(v), all recorded per depth from the same tree.
struct MartingaleDraw {
  std::vector<double> W_by_depth;
  std::vector<Mat> Z_by_depth;
  std::vector<Vec> Wstar_by_depth;  // index k holds sum over |v| < k

  double W = 0.0;  // W_n, or W_{C(t)} for stopping-line runs
  Mat Z;
  Vec Zw;     // Z_n w when a direction was supplied, else empty
  Vec Wstar;  // final-depth W*

  uint64_t node_count = 0;
  double discarded_mass_bound = 0.0;
  int depth_reached = 0;
  bool truncated = false;  // max_nodes exceeded; accumulators are partial

  std::vector<LineMember> line;  // stopping-line runs only
};

/// Depth-first traversal with an explicit stack; every node draws its family
/// from a stream keyed by (root seed, path), so the draw is reproducible
/// regardless of traversal or thread schedule.
MartingaleDraw simulate_joint(const WeightModel& model, double alpha,
                              const BranchingConfig& cfg,
                              std::optional<Vec> w = std::nullopt);

/// Coming generation at level t: W_{C(t)} = sum_{v in C(t)} e^{-alpha S(v)},
/// with per-member (S(parent), S(v), O(v)) records.
MartingaleDraw simulate_stopping_line(const WeightModel& model, double alpha, double t,
                                      const BranchingConfig& cfg);

/// Size-biased single-line walk: at each step one child index J is chosen with
/// probability ||T_J||^alpha / W_1 and the cumulative importance weight
/// prod W_1 makes weighted path functionals unbiased for branching sums.
struct WalkPath {
  std::vector<double> S;  // S_0 = 0, ..., S_n
  std::vector<Mat> O;
  double weight = 1.0;
  long dead_family_restarts = 0;
};

WalkPath many_to_one_walk(const WeightModel& model, double alpha, int n_steps,
                          uint64_t seed);

/// W_n at the configured depth as the finite-horizon surrogate for W, with
/// stabilization diagnostics (the a.s. limit has no finite construction).
struct WEstimate {
  std::vector<double> samples;
  double mean = 0.0;
  double std_error = 0.0;
  int depth = 0;
  double var_final = 0.0;
  double var_prev = 0.0;  // at depth - 2
  bool divergence_flag = false;
};

WEstimate estimate_W(const WeightModel& model, double alpha, const BranchingConfig& cfg,
                     long replicas, int threads = 1);

}  // namespace smeq
