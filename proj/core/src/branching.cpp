#include "smeq/branching.hpp"

#include <cmath>

#include "smeq/parallel.hpp"

namespace smeq {

namespace {

// pessimistic per-subtree mass multiplier used when pruning: the dropped
// subtree's conditional martingale mass ||L||^alpha E[W | subtree] is bounded
// by a high-quantile proxy rather than its mean
constexpr double kPruneQuantileFactor = 10.0;

struct StackNode {
  Similarity L;
  RngStream stream;
  double S;  // -log ||L||
  double S_parent;
  int depth;
};

}  // namespace

MartingaleDraw simulate_joint(const WeightModel& model, double alpha,
                              const BranchingConfig& cfg, std::optional<Vec> w) {
  require(!cfg.stopping_level, "simulate_joint: depth mode only; use simulate_stopping_line");
  require(cfg.max_depth >= 0 && cfg.max_nodes >= 1, "simulate_joint: bad config");
  const int n = cfg.max_depth;
  const int d = model.dim();

  MartingaleDraw out;
  out.W_by_depth.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.Z_by_depth.assign(static_cast<std::size_t>(n) + 1, Mat::Zero(d, d));
  std::vector<Vec> wstar_partial(static_cast<std::size_t>(n) + 1, Vec::Zero(d));

  std::vector<StackNode> stack;
  stack.push_back({Similarity::identity(d), RngStream::from_root_seed(cfg.root_seed),
                   0.0, 0.0, 0});
  while (!stack.empty()) {
    StackNode node = std::move(stack.back());
    stack.pop_back();
    if (++out.node_count > cfg.max_nodes) {
      out.truncated = true;
      --out.node_count;
      break;
    }
    out.depth_reached = std::max(out.depth_reached, node.depth);
    const double mass = std::pow(node.L.scale(), alpha);
    out.W_by_depth[static_cast<std::size_t>(node.depth)] += mass;
    out.Z_by_depth[static_cast<std::size_t>(node.depth)] += node.L.dense();
    if (node.depth == n) continue;

    RngStream family_stream = node.stream.child(0);
    const WeightSample ws = model.sample(family_stream);
    wstar_partial[static_cast<std::size_t>(node.depth)] += node.L.apply(ws.C);
    for (std::size_t j = ws.T.size(); j-- > 0;) {
      Similarity child = compose(node.L, ws.T[j]);
      if (cfg.prune) {
        const double child_mass = std::pow(child.scale(), alpha);
        if (child_mass < cfg.prune_threshold) {
          out.discarded_mass_bound += child_mass * kPruneQuantileFactor;
          continue;
        }
      }
      const double s = -child.log_scale();
      stack.push_back({std::move(child), node.stream.child(j + 1), s, node.S,
                       node.depth + 1});
    }
  }

  out.Wstar_by_depth.assign(static_cast<std::size_t>(n) + 1, Vec::Zero(d));
  for (int k = 1; k <= n; ++k) {
    out.Wstar_by_depth[static_cast<std::size_t>(k)] =
        out.Wstar_by_depth[static_cast<std::size_t>(k - 1)] +
        wstar_partial[static_cast<std::size_t>(k - 1)];
  }
  out.W = out.W_by_depth.back();
  out.Z = out.Z_by_depth.back();
  out.Wstar = out.Wstar_by_depth.back();
  if (w) {
    require(static_cast<int>(w->size()) == d, "simulate_joint: w dimension mismatch");
    out.Zw = out.Z * (*w);
  }
  require(std::isfinite(out.W), "simulate_joint: non-finite accumulation");
  return out;
}

MartingaleDraw simulate_stopping_line(const WeightModel& model, double alpha, double t,
                                      const BranchingConfig& cfg) {
  require(t >= 0.0, "simulate_stopping_line: level must be nonnegative");
  const int d = model.dim();
  MartingaleDraw out;

  std::vector<StackNode> stack;
  stack.push_back({Similarity::identity(d), RngStream::from_root_seed(cfg.root_seed),
                   0.0, 0.0, 0});
  while (!stack.empty()) {
    StackNode node = std::move(stack.back());
    stack.pop_back();
    if (++out.node_count > cfg.max_nodes) {
      out.truncated = true;
      --out.node_count;
      break;
    }
    out.depth_reached = std::max(out.depth_reached, node.depth);
    if (node.depth > 0 && node.S > t) {
      // first crossing: all ancestors have S <= t by construction
      out.W += std::exp(-alpha * node.S);
      out.line.push_back({node.S_parent, node.S, node.L.rotation(), node.depth});
      continue;
    }
    RngStream family_stream = node.stream.child(0);
    const WeightSample ws = model.sample(family_stream);
    for (std::size_t j = ws.T.size(); j-- > 0;) {
      Similarity child = compose(node.L, ws.T[j]);
      const double s = -child.log_scale();
      stack.push_back({std::move(child), node.stream.child(j + 1), s, node.S,
                       node.depth + 1});
    }
  }
  require(std::isfinite(out.W), "simulate_stopping_line: non-finite accumulation");
  return out;
}

WalkPath many_to_one_walk(const WeightModel& model, double alpha, int n_steps,
                          uint64_t seed) {
  require(n_steps >= 1, "many_to_one_walk: n_steps must be positive");
  const int d = model.dim();
  WalkPath path;
  path.S.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.O.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.S.push_back(0.0);
  path.O.push_back(Mat::Identity(d, d));

  RngStream rng = RngStream::from_root_seed(seed).child(0x3a1);
  Similarity L = Similarity::identity(d);
  for (int k = 0; k < n_steps; ++k) {
    WeightSample ws;
    double w1 = 0.0;
    std::vector<double> masses;
    for (;;) {
      ws = model.sample(rng);
      masses.clear();
      masses.reserve(ws.T.size());
      w1 = 0.0;
      for (const auto& tj : ws.T) {
        const double m = std::pow(tj.scale(), alpha);
        masses.push_back(m);
        w1 += m;
      }
      if (w1 > 0.0) break;
      ++path.dead_family_restarts;  // N = 0 family: redraw this step
    }
    const double u = rng.next_double() * w1;
    double acc = 0.0;
    std::size_t pick = masses.size() - 1;
    for (std::size_t j = 0; j < masses.size(); ++j) {
      acc += masses[j];
      if (u < acc) {
        pick = j;
        break;
      }
    }
    L = compose(L, ws.T[pick]);
    path.weight *= w1;
    path.S.push_back(-L.log_scale());
    path.O.push_back(L.rotation());
  }
  return path;
}

WEstimate estimate_W(const WeightModel& model, double alpha, const BranchingConfig& cfg,
                     long replicas, int threads) {
  require(replicas >= 1, "estimate_W: replicas must be positive");
  WEstimate out;
  out.depth = cfg.max_depth;
  out.samples.assign(static_cast<std::size_t>(replicas), 0.0);
  std::vector<double> w_prev(static_cast<std::size_t>(replicas), 0.0);
  const int prev_depth = std::max(0, cfg.max_depth - 2);

  RngStream root = RngStream::from_root_seed(cfg.root_seed);
  for_each_replica(static_cast<uint64_t>(replicas), threads, [&](uint64_t i) {
    BranchingConfig rc = cfg;
    rc.root_seed = root.child(i).key_lo();
    const MartingaleDraw draw = simulate_joint(model, alpha, rc);
    out.samples[i] = draw.W;
    w_prev[i] = draw.W_by_depth[static_cast<std::size_t>(prev_depth)];
  });

  double sum = 0.0, sumsq = 0.0, sum_p = 0.0, sumsq_p = 0.0;
  for (long i = 0; i < replicas; ++i) {
    sum += out.samples[static_cast<std::size_t>(i)];
    sumsq += out.samples[static_cast<std::size_t>(i)] * out.samples[static_cast<std::size_t>(i)];
    sum_p += w_prev[static_cast<std::size_t>(i)];
    sumsq_p += w_prev[static_cast<std::size_t>(i)] * w_prev[static_cast<std::size_t>(i)];
  }
  const double n = static_cast<double>(replicas);
  out.mean = sum / n;
  out.var_final = std::max(0.0, sumsq / n - out.mean * out.mean);
  const double mean_p = sum_p / n;
  out.var_prev = std::max(0.0, sumsq_p / n - mean_p * mean_p);
  out.std_error = std::sqrt(out.var_final / n);
  out.divergence_flag = out.var_prev > 0.0 && out.var_final > 2.0 * out.var_prev;
  return out;
}

}  // namespace smeq
