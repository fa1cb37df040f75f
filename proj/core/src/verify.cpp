#include "smeq/verify.hpp"

#include <memory>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "smeq/parallel.hpp"

namespace smeq {

ECFGrid standard_grid(int dim, uint64_t seed) {
  ECFGrid grid;
  RngStream rng = RngStream::from_root_seed(seed).child(0x661d);
  for (int k = 0; k < 10; ++k) {
    const double r = 0.05 * std::pow(2.0 / 0.05, k / 9.0);
    Vec x = Vec::Zero(dim);
    x[0] = r;
    grid.points.push_back(std::move(x));
  }
  for (int k = 0; k < 10; ++k) {
    Vec x(dim);
    double n = 0.0;
    do {
      for (int i = 0; i < dim; ++i) x[i] = rng.normal();
      n = x.norm();
    } while (n < 1e-12);
    grid.points.push_back(Vec(x / n));
  }
  return grid;
}

ECFEstimate ecf(const std::vector<Vec>& samples, const ECFGrid& grid) {
  ECFEstimate est;
  est.n = static_cast<long>(samples.size());
  require(est.n > 0, "ecf: empty sample");
  est.phi.resize(grid.points.size());
  est.se.resize(grid.points.size());
  for (std::size_t g = 0; g < grid.points.size(); ++g) {
    Complex acc(0.0, 0.0);
    for (const auto& x : samples) {
      const double p = grid.points[g].dot(x);
      acc += Complex(std::cos(p), std::sin(p));
    }
    est.phi[g] = acc / static_cast<double>(est.n);
    const double var = std::max(0.0, 1.0 - std::norm(est.phi[g]));
    est.se[g] = std::sqrt(var / static_cast<double>(est.n));
  }
  return est;
}

namespace {

// per-sample phases at all grid points, flattened row-major
std::vector<Complex> phase_rows(const std::vector<Vec>& samples, const ECFGrid& grid) {
  const std::size_t G = grid.points.size();
  std::vector<Complex> rows(samples.size() * G);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t g = 0; g < G; ++g) {
      const double p = grid.points[g].dot(samples[i]);
      rows[i * G + g] = Complex(std::cos(p), std::sin(p));
    }
  }
  return rows;
}

double max_studentized(const std::vector<Complex>& mean_l,
                       const std::vector<Complex>& mean_r, long nl, long nr,
                       std::vector<double>* se_out = nullptr,
                       std::vector<double>* stat_out = nullptr) {
  double worst = 0.0;
  for (std::size_t g = 0; g < mean_l.size(); ++g) {
    const double vl = std::max(1e-300, 1.0 - std::norm(mean_l[g]));
    const double vr = std::max(1e-300, 1.0 - std::norm(mean_r[g]));
    const double se = std::sqrt(vl / nl + vr / nr);
    const double stat = std::abs(mean_l[g] - mean_r[g]) / se;
    if (se_out) (*se_out)[g] = se;
    if (stat_out) (*stat_out)[g] = stat;
    worst = std::max(worst, stat);
  }
  return worst;
}

}  // namespace

TestVerdict two_sample_ecf_test(const std::vector<Vec>& left,
                                const std::vector<Vec>& right, const ECFGrid& grid,
                                double level, uint64_t seed) {
  require(!left.empty() && !right.empty(), "ecf test: empty sample sets");
  require(level > 0.0 && level < 1.0, "ecf test: level must lie in (0,1)");
  const std::size_t G = grid.points.size();
  const long nl = static_cast<long>(left.size());
  const long nr = static_cast<long>(right.size());

  const std::vector<Complex> rows_l = phase_rows(left, grid);
  const std::vector<Complex> rows_r = phase_rows(right, grid);

  std::vector<Complex> mean_l(G, Complex(0, 0)), mean_r(G, Complex(0, 0));
  for (long i = 0; i < nl; ++i)
    for (std::size_t g = 0; g < G; ++g) mean_l[g] += rows_l[static_cast<std::size_t>(i) * G + g];
  for (long i = 0; i < nr; ++i)
    for (std::size_t g = 0; g < G; ++g) mean_r[g] += rows_r[static_cast<std::size_t>(i) * G + g];
  for (auto& m : mean_l) m /= static_cast<double>(nl);
  for (auto& m : mean_r) m /= static_cast<double>(nr);

  TestVerdict v;
  v.level = level;
  v.n = nl;
  std::vector<double> se(G), stat(G);
  v.statistic = max_studentized(mean_l, mean_r, nl, nr, &se, &stat);
  v.table.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    v.table[g] = {grid.points[g], mean_l[g], mean_r[g], se[g], stat[g]};
  }

  // pooled bootstrap of the max statistic under the null
  constexpr int kBoot = 500;
  const long pool = nl + nr;
  auto row = [&](long i, std::size_t g) -> const Complex& {
    return i < nl ? rows_l[static_cast<std::size_t>(i) * G + g]
                  : rows_r[static_cast<std::size_t>(i - nl) * G + g];
  };
  RngStream rng = RngStream::from_root_seed(seed).child(0xb007);
  std::vector<double> boot(kBoot);
  std::vector<Complex> bl(G), br(G);
  for (int b = 0; b < kBoot; ++b) {
    std::fill(bl.begin(), bl.end(), Complex(0, 0));
    std::fill(br.begin(), br.end(), Complex(0, 0));
    for (long i = 0; i < nl; ++i) {
      const long pick = static_cast<long>(rng.next_below(static_cast<uint64_t>(pool)));
      for (std::size_t g = 0; g < G; ++g) bl[g] += row(pick, g);
    }
    for (long i = 0; i < nr; ++i) {
      const long pick = static_cast<long>(rng.next_below(static_cast<uint64_t>(pool)));
      for (std::size_t g = 0; g < G; ++g) br[g] += row(pick, g);
    }
    for (auto& m : bl) m /= static_cast<double>(nl);
    for (auto& m : br) m /= static_cast<double>(nr);
    boot[b] = max_studentized(bl, br, nl, nr);
  }
  std::sort(boot.begin(), boot.end());
  const std::size_t idx = std::min<std::size_t>(
      kBoot - 1, static_cast<std::size_t>(std::ceil((1.0 - level) * kBoot)));
  v.threshold = boot[idx];
  v.pass = v.statistic <= v.threshold;
  return v;
}

TestVerdict fixed_point_test(const WeightModel& model, const SolutionSampler& sampler,
                             const ECFGrid& grid, long n, double level, uint64_t seed,
                             long child_cap) {
  require(n >= 1000, "fixed_point_test: n too small");
  RngStream root = RngStream::from_root_seed(seed);
  RngStream xs_stream = root.child(1);
  RngStream rhs_stream = root.child(2);

  std::vector<Vec> xs;
  xs.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) xs.push_back(sampler(xs_stream));

  long cap_hits = 0;
  std::vector<Vec> rhs;
  rhs.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    RngStream si = rhs_stream.child(static_cast<uint64_t>(i));
    RngStream family_stream = si.child(0);
    const WeightSample ws = model.sample(family_stream);
    Vec acc = ws.C;
    const long nkids = static_cast<long>(ws.T.size());
    if (nkids > child_cap) ++cap_hits;
    RngStream kids = si.child(1);
    for (long j = 0; j < std::min(nkids, child_cap); ++j) {
      RngStream kid_stream = kids.child(static_cast<uint64_t>(j));
      acc += ws.T[static_cast<std::size_t>(j)].apply(sampler(kid_stream));
    }
    rhs.push_back(std::move(acc));
  }

  TestVerdict v = two_sample_ecf_test(xs, rhs, grid, level, root.child(3).key_lo());
  v.cap_hits = cap_hits;
  return v;
}

SolutionSampler solution_sampler(const WeightModel& model, double alpha,
                                 const StableSpec& spec, Vec w,
                                 const BranchingConfig& cfg, const SamplerOptions& opts,
                                 bool group_shortcut) {
  require(static_cast<int>(w.size()) == model.dim(), "solution_sampler: bad w dimension");
  auto stable = std::make_shared<StableSampler>(spec, opts);
  return [&model, alpha, stable, w, cfg, group_shortcut](RngStream& rng) -> Vec {
    const uint64_t id = rng.next_u64();
    BranchingConfig c = cfg;
    c.root_seed = id;
    // the Levy stream must be independent of the tree; key it off a branch of
    // the instance stream that no tree node ever uses
    RngStream y_stream = RngStream::from_root_seed(id).child(0xfffffffffffffff0ULL);
    const MartingaleDraw draw = simulate_joint(model, alpha, c, w);
    Vec out = draw.Wstar + draw.Zw;
    if (stable->spec().kind() != StableSpec::Kind::zero && draw.W > 0.0) {
      out += stable->sample_at_W(draw.W, y_stream, group_shortcut);
    }
    return out;
  };
}

HillEstimate hill_tail_index(std::vector<double> samples, long k) {
  const long n = static_cast<long>(samples.size());
  require(k >= 10 && k <= n / 10, "hill: k must satisfy 10 <= k <= n/10");
  for (double s : samples) require(s > 0.0, "hill: samples must be positive");
  std::sort(samples.begin(), samples.end(), std::greater<double>());
  auto estimate = [&](long kk) {
    const double pivot = samples[static_cast<std::size_t>(kk)];
    double acc = 0.0;
    for (long i = 0; i < kk; ++i)
      acc += std::log(samples[static_cast<std::size_t>(i)] / pivot);
    return static_cast<double>(kk) / acc;
  };
  HillEstimate out;
  out.alpha_hat = estimate(k);
  out.std_error = out.alpha_hat / std::sqrt(static_cast<double>(k));
  for (double f = 1.0; f <= static_cast<double>(n / 10);) {
    const long kk = std::max<long>(10, static_cast<long>(f * 10.0));
    if (kk > n / 10) break;
    out.sweep.emplace_back(kk, estimate(kk));
    f *= 1.4;
  }
  return out;
}

std::optional<EigenCheckResult> eigen_check(const WeightModel& model, long n_mc,
                                            double tol, uint64_t seed) {
  const MatrixEstimate ez1 = expected_Z1(model, n_mc, seed);
  const double tol_eff =
      ez1.analytic ? tol : std::max(tol, 3.0 * ez1.std_error.norm());
  Eigen::EigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(ez1.value)};
  int best = 0;
  for (int i = 1; i < eig.eigenvalues().size(); ++i) {
    if (std::abs(eig.eigenvalues()[i] - 1.0) < std::abs(eig.eigenvalues()[best] - 1.0))
      best = i;
  }
  const Complex lambda = eig.eigenvalues()[best];
  if (std::abs(lambda - 1.0) > tol_eff) return std::nullopt;

  Eigen::VectorXcd wc = eig.eigenvectors().col(best);
  // rotate the phase so the vector is as real as possible
  int pivot = 0;
  for (int i = 1; i < wc.size(); ++i)
    if (std::abs(wc[i]) > std::abs(wc[pivot])) pivot = i;
  wc *= std::abs(wc[pivot]) / wc[pivot];
  EigenCheckResult res;
  res.eigenvalue = lambda;
  res.w = wc.real().cast<double>();
  res.w /= res.w.norm();
  res.residual = (ez1.value * res.w - res.w).norm();

  long violations = 0;
  const long n_as = std::min<long>(n_mc, 20000);
  RngStream rng = RngStream::from_root_seed(seed).child(0xa5);
  for (long i = 0; i < n_as; ++i) {
    const WeightSample ws = model.sample(rng);
    Vec img = Vec::Zero(model.dim());
    for (const auto& t : ws.T) img += t.apply(res.w);
    if ((img - res.w).norm() > 1e-9 * (1.0 + res.w.norm())) ++violations;
  }
  res.as_violation_rate = static_cast<double>(violations) / static_cast<double>(n_as);
  return res;
}

MartingaleReport martingale_report(const WeightModel& model, double alpha,
                                   const std::vector<int>& depths,
                                   const std::vector<double>& betas, long replicas,
                                   const Vec& w, uint64_t seed, int threads) {
  require(!depths.empty(), "martingale_report: need at least one depth");
  require(std::is_sorted(depths.begin(), depths.end()),
          "martingale_report: depths must be increasing");
  const int max_depth = depths.back();
  const int d = model.dim();
  require(static_cast<int>(w.size()) == d, "martingale_report: w dimension mismatch");

  struct Acc {
    double w_sum = 0.0, w_sq = 0.0;
    Vec zw_sum;
    double zw_sq = 0.0;
    std::map<double, double> beta_sum;
  };
  std::vector<std::vector<double>> w_samples(depths.size());
  std::vector<std::vector<Vec>> zw_samples(depths.size());
  for (auto& v : w_samples) v.resize(static_cast<std::size_t>(replicas));
  for (auto& v : zw_samples) v.resize(static_cast<std::size_t>(replicas));

  RngStream root = RngStream::from_root_seed(seed);
  for_each_replica(static_cast<uint64_t>(replicas), threads, [&](uint64_t i) {
    BranchingConfig cfg;
    cfg.max_depth = max_depth;
    cfg.root_seed = root.child(i).key_lo();
    const MartingaleDraw draw = simulate_joint(model, alpha, cfg);
    for (std::size_t k = 0; k < depths.size(); ++k) {
      const auto depth = static_cast<std::size_t>(depths[k]);
      w_samples[k][i] = draw.W_by_depth[depth];
      zw_samples[k][i] = draw.Z_by_depth[depth] * w;
    }
  });

  MartingaleReport rep;
  const double n = static_cast<double>(replicas);
  for (std::size_t k = 0; k < depths.size(); ++k) {
    MartingaleRow row;
    row.depth = depths[k];
    double sw = 0.0, sw2 = 0.0;
    Vec sz = Vec::Zero(d);
    double sz2 = 0.0;
    std::map<double, double> bsum;
    for (long i = 0; i < replicas; ++i) {
      const double wv = w_samples[k][static_cast<std::size_t>(i)];
      sw += wv;
      sw2 += wv * wv;
      const Vec& zw = zw_samples[k][static_cast<std::size_t>(i)];
      sz += zw;
      sz2 += zw.squaredNorm();
      for (double beta : betas) bsum[beta] += std::pow(zw.norm(), beta);
    }
    row.mean_W = sw / n;
    row.se_W = std::sqrt(std::max(0.0, sw2 / n - row.mean_W * row.mean_W) / n);
    row.mean_Zw = sz / n;
    row.se_Zw = std::sqrt(std::max(0.0, sz2 / n - row.mean_Zw.squaredNorm()) / n);
    for (double beta : betas) row.beta_norm[beta] = bsum[beta] / n;
    rep.rows.push_back(std::move(row));
  }

  for (double beta : betas) {
    rep.m_beta[beta] = m_eval(model, beta, replicas, seed).value;
    double acc = 0.0;
    RngStream rng = root.child(0x217);
    const long n1 = std::min<long>(replicas, 50000);
    for (long i = 0; i < n1; ++i) {
      const WeightSample ws = model.sample(rng);
      Vec z1w = ws.C * 0.0;
      for (const auto& t : ws.T) z1w += t.apply(w);
      acc += std::pow(z1w.norm(), beta);
    }
    rep.z1w_beta[beta] = acc / static_cast<double>(n1);
  }

  for (double beta : betas) {
    const double first = rep.rows.front().beta_norm[beta];
    const double last = rep.rows.back().beta_norm[beta];
    if (first > 0.0 && last > 2.0 * first) rep.growth_flag = true;
  }
  return rep;
}

}  // namespace smeq
