// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Statistical criteria run on pre-registered seeds; every tolerance
// is pinned here in code.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cli.hpp"
#include "smeq/branching.hpp"
#include "smeq/char_roots.hpp"
#include "smeq/parallel.hpp"
#include "smeq/serialize.hpp"
#include "smeq/stable_laws.hpp"
#include "smeq/verify.hpp"
#include "smeq/weight_model.hpp"

using namespace smeq;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAlphaPolya = 1.6038754716096765049;
constexpr double kAlphaBary27 = 1.9343477654460870223;

int g_failures = 0;

template <typename F>
void criterion(int index, const char* name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %2d: %-52s (%5.1fs)%s%s\n", pass ? "PASS" : "FAIL",
              index, name, secs, detail.empty() ? "" : "  ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

Mat rot2(double th) {
  Mat r(2, 2);
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return r;
}

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

GroupDescriptor snail7(std::vector<Mat> gens = {}) {
  return GroupDescriptor::from_complex_exponent(
      std::exp(Complex(0.0, 2.0 * kPi / 7.0)), std::move(gens));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  double s = 0.0, s2 = 0.0;
  for (double x : xs) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(xs.size());
  MeanSe out;
  out.mean = s / n;
  out.se = std::sqrt(std::max(0.0, s2 / n - out.mean * out.mean) / n);
  return out;
}

WeightModel scalar_table(double c, std::vector<double> scales) {
  presets::TableAtom a;
  a.prob = 1.0;
  a.C = Vec::Zero(1);
  a.C[0] = c;
  for (double s : scales) a.T.emplace_back(s, Mat(Mat::Identity(1, 1)));
  return presets::table({a});
}

// ---------------------------------------------------------------------------

bool c1_phase(std::string& detail) {
  const std::string dir =
      (std::filesystem::temp_directory_path() / "smeq_acceptance_phase").string();
  std::filesystem::remove_all(dir);
  auto rows_ok = [&](const std::string& csv, int flip_after) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    bool ok = true;
    bool saw_any = false;
    while (std::getline(in, line)) {
      if (line.size() < 3) continue;
      saw_any = true;
      const int b = std::stoi(line.substr(0, line.find(',')));
      const bool stable = line.find("stable") != std::string::npos;
      ok = ok && (stable == (b > flip_after));
    }
    return ok && saw_any;
  };
  if (cli_run({"phase", "--preset", "bary", "--range", "20:30", "--out", dir}) != 0)
    return false;
  const bool bary_ok = rows_ok(slurp(dir + "/phase.csv"), 26);
  if (cli_run({"phase", "--preset", "cyclic_polya", "--range", "4:10", "--out", dir}) !=
      0)
    return false;
  const bool polya_ok = rows_ok(slurp(dir + "/phase.csv"), 6);
  std::filesystem::remove_all(dir);
  detail = std::string("bary flip 26/27 ") + (bary_ok ? "ok" : "BAD") +
           ", cyclic flip 6/7 " + (polya_ok ? "ok" : "BAD");
  return bary_ok && polya_ok;
}

bool c2_alpha_consistency(std::string& detail) {
  const Lambda2 l2 = select_lambda2(chi_roots(27));
  const auto model = presets::bary_spacings(27);
  const AlphaResult res = solve_alpha(model);
  const double err_root = std::abs(res.alpha - 1.0 / l2.value.real());
  const double err_m = std::abs(model.analytic_m(res.alpha) - 1.0);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "|alpha - 1/Re(l2)| = %.1e, |m(alpha)-1| = %.1e",
                err_root, err_m);
  detail = buf;
  return err_root < 1e-9 && err_m < 1e-12;
}

bool c3_polya_closed_form(std::string& detail) {
  const AlphaResult res = solve_alpha(presets::cyclic_polya(7));
  const double err = std::abs(res.alpha - 1.0 / std::cos(2.0 * kPi / 7.0));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "|alpha - 1/cos(2pi/7)| = %.1e", err);
  detail = buf;
  return err < 1e-12;
}

bool c4_mean_one(std::string& detail) {
  std::ostringstream msg;
  bool ok = true;

  {
    const auto model = presets::cyclic_polya(7);
    const long replicas = 10000;
    std::vector<double> w(replicas), zre(replicas), zim(replicas);
    RngStream root = RngStream::from_root_seed(0xacc4a);
    const Vec e1 = v2(1, 0);
    for_each_replica(replicas, 4, [&](uint64_t i) {
      BranchingConfig cfg;
      cfg.max_depth = 12;
      cfg.root_seed = root.child(i).key_lo();
      const MartingaleDraw d = simulate_joint(model, kAlphaPolya, cfg, e1);
      w[i] = d.W;
      zre[i] = d.Zw[0];
      zim[i] = d.Zw[1];
    });
    const MeanSe mw = mean_se(w), mre = mean_se(zre), mim = mean_se(zim);
    const bool pw = std::abs(mw.mean - 1.0) <= 4.0 * mw.se + 1e-12;
    const bool pz = mre.se > 0.0 && std::abs(mre.mean - 1.0) <= 4.0 * mre.se &&
                    std::abs(mim.mean) <= 4.0 * mim.se;
    ok = ok && pw && pz;
    msg << "cyclic(n=12) " << ((pw && pz) ? "ok" : "BAD");
  }

  {
    const auto model = presets::bary_spacings(27);
    const long replicas = 10000;
    std::vector<double> w(replicas), zre(replicas);
    RngStream root = RngStream::from_root_seed(0xacc4b);
    const Vec e1 = v2(1, 0);
    for_each_replica(replicas, 4, [&](uint64_t i) {
      BranchingConfig cfg;
      cfg.max_depth = 2;
      cfg.root_seed = root.child(i).key_lo();
      const MartingaleDraw d = simulate_joint(model, kAlphaBary27, cfg, e1);
      w[i] = d.W;
      zre[i] = d.Zw[0];
    });
    const MeanSe mw = mean_se(w), mz = mean_se(zre);
    const bool pw = std::abs(mw.mean - 1.0) <= 4.0 * mw.se + 1e-12;
    const bool pz = std::abs(mz.mean - 1.0) <= 4.0 * mz.se + 1e-12;
    ok = ok && pw && pz;
    msg << ", bary27(n=2) " << ((pw && pz) ? "ok" : "BAD");
  }

  {
    // deterministic table is exactly 1; a mixed table fluctuates around 1
    const auto det = scalar_table(0.0, {0.5, 0.5});
    BranchingConfig cfg;
    cfg.max_depth = 10;
    cfg.root_seed = 0xacc4c;
    const bool pdet = simulate_joint(det, 1.0, cfg).W == 1.0;

    presets::TableAtom a1, a2;
    a1.prob = 0.5;
    a1.C = Vec::Zero(1);
    a1.T.emplace_back(0.9, Mat(Mat::Identity(1, 1)));
    a2.prob = 0.5;
    a2.C = Vec::Zero(1);
    a2.T.emplace_back(0.4, Mat(Mat::Identity(1, 1)));
    a2.T.emplace_back(0.4, Mat(Mat::Identity(1, 1)));
    const auto rnd = presets::table({a1, a2});
    const double alpha_rnd = solve_alpha(rnd).alpha;
    const long replicas = 10000;
    std::vector<double> w(replicas);
    RngStream root = RngStream::from_root_seed(0xacc4d);
    for_each_replica(replicas, 4, [&](uint64_t i) {
      BranchingConfig c;
      c.max_depth = 10;
      c.root_seed = root.child(i).key_lo();
      w[i] = simulate_joint(rnd, alpha_rnd, c).W;
    });
    const MeanSe mw = mean_se(w);
    const bool prnd = mw.se > 0.0 && std::abs(mw.mean - 1.0) <= 4.0 * mw.se;
    ok = ok && pdet && prnd;
    msg << ", tables " << ((pdet && prnd) ? "ok" : "BAD");
  }
  detail = msg.str();
  return ok;
}

bool c5_many_to_one(std::string& detail) {
  // random finite table: atom A with children (1/2, 1/4), atom B with (7/10);
  // branching sums fluctuate and the exact values are nested finite sums
  presets::TableAtom atom_a, atom_b;
  atom_a.prob = 0.6;
  atom_a.C = Vec::Zero(1);
  atom_a.T.emplace_back(0.5, Mat(Mat::Identity(1, 1)));
  atom_a.T.emplace_back(0.25, Mat(Mat::Identity(1, 1)));
  atom_b.prob = 0.4;
  atom_b.C = Vec::Zero(1);
  atom_b.T.emplace_back(0.7, Mat(Mat::Identity(1, 1)));
  const auto model = presets::table({atom_a, atom_b});
  const double alpha = solve_alpha(model).alpha;

  struct Atom {
    double p;
    std::vector<double> scales;
  };
  const std::vector<Atom> atoms{{0.6, {0.5, 0.25}}, {0.4, {0.7}}};
  auto battery = [](double s) {
    return std::array<double, 3>{s > 0.9 ? 1.0 : 0.0, std::exp(-s), s};
  };

  bool ok = true;
  std::ostringstream msg;
  for (int n = 1; n <= 2; ++n) {
    // exact nested sums over atom choices
    std::array<double, 3> exact{0.0, 0.0, 0.0};
    for (const auto& a : atoms) {
      for (double t1 : a.scales) {
        const double m1 = std::pow(t1, alpha);
        if (n == 1) {
          const auto f = battery(-std::log(t1));
          for (int q = 0; q < 3; ++q) exact[static_cast<std::size_t>(q)] += a.p * m1 * f[static_cast<std::size_t>(q)];
        } else {
          for (const auto& b : atoms) {
            for (double t2 : b.scales) {
              const double m2 = std::pow(t2, alpha);
              const auto f = battery(-std::log(t1) - std::log(t2));
              for (int q = 0; q < 3; ++q) {
                exact[static_cast<std::size_t>(q)] += a.p * m1 * b.p * m2 * f[static_cast<std::size_t>(q)];
              }
            }
          }
        }
      }
    }
    // importance-weighted walk
    const long reps = 40000;
    std::array<std::vector<double>, 3> walk;
    for (auto& v : walk) v.resize(reps);
    RngStream root = RngStream::from_root_seed(0xacc5);
    for_each_replica(reps, 4, [&](uint64_t i) {
      const WalkPath p = many_to_one_walk(model, alpha, n, root.child(i).key_lo());
      const auto f = battery(p.S[static_cast<std::size_t>(n)]);
      for (int q = 0; q < 3; ++q) {
        walk[static_cast<std::size_t>(q)][i] = p.weight * f[static_cast<std::size_t>(q)];
      }
    });
    // direct branching sums, enumerated per replica from the model sampler
    std::array<std::vector<double>, 3> tree;
    for (auto& v : tree) v.resize(reps);
    RngStream root2 = RngStream::from_root_seed(0xacc6);
    for_each_replica(reps, 4, [&](uint64_t i) {
      RngStream r = root2.child(i);
      std::array<double, 3> acc{0.0, 0.0, 0.0};
      const WeightSample top = model.sample(r);
      for (const auto& t1 : top.T) {
        if (n == 1) {
          const auto f = battery(-t1.log_scale());
          for (int q = 0; q < 3; ++q) {
            acc[static_cast<std::size_t>(q)] +=
                std::pow(t1.scale(), alpha) * f[static_cast<std::size_t>(q)];
          }
        } else {
          const WeightSample sub = model.sample(r);
          for (const auto& t2 : sub.T) {
            const double sc = t1.scale() * t2.scale();
            const auto f = battery(-std::log(sc));
            for (int q = 0; q < 3; ++q) {
              acc[static_cast<std::size_t>(q)] += std::pow(sc, alpha) * f[static_cast<std::size_t>(q)];
            }
          }
        }
      }
      for (int q = 0; q < 3; ++q) tree[static_cast<std::size_t>(q)][i] = acc[static_cast<std::size_t>(q)];
    });
    for (int q = 0; q < 3; ++q) {
      const MeanSe mw = mean_se(walk[static_cast<std::size_t>(q)]);
      const MeanSe mt = mean_se(tree[static_cast<std::size_t>(q)]);
      const double e = exact[static_cast<std::size_t>(q)];
      const bool pw = std::abs(mw.mean - e) <= 4.0 * mw.se + 1e-12;
      const bool pt = std::abs(mt.mean - e) <= 4.0 * mt.se + 1e-12;
      const bool pwt =
          std::abs(mw.mean - mt.mean) <= 4.0 * std::sqrt(mw.se * mw.se + mt.se * mt.se) + 1e-12;
      ok = ok && pw && pt && pwt;
    }
    msg << "n=" << n << " " << (ok ? "ok" : "BAD") << " ";
  }
  detail = msg.str() + "(3-way, 3 test functions)";
  return ok;
}

bool c6_exponent_invariance(std::string& detail) {
  struct SpecCase {
    const char* name;
    StableSpec spec;
  };
  std::vector<SpecCase> cases;
  {
    auto g = snail7({rot2(2.0 * kPi / 7.0)});
    SpectralMeasure rho = symmetrize(SpectralMeasure{{{v2(1, 0), 1.0}}}, g);
    cases.push_back(
        {"jump", StableSpec::jump(kAlphaPolya, snail7({rot2(2.0 * kPi / 7.0)}),
                                  std::move(rho))});
  }
  cases.push_back(
      {"gaussian",
       StableSpec::gaussian(GroupDescriptor::continuous_group(
                                Mat(Mat::Identity(2, 2)), {rot2(2.0 * kPi / 7.0)}, true),
                            Mat(1.7 * Mat::Identity(2, 2)))});
  cases.push_back(
      {"isotropic1",
       StableSpec::isotropic1(
           GroupDescriptor::continuous_group(Mat(Mat::Identity(2, 2)), {rot2(1.0)}, true),
           0.7, Vec(Vec::Zero(2)))});
  {
    // planar atom: <e3, s> = 0 meets the moment condition with one atom
    Mat q = Mat::Identity(3, 3);
    q(0, 1) = -0.9;
    q(1, 0) = 0.9;
    Vec s0(3);
    s0 << 0.6, 0.8, 0.0;
    SpectralMeasure rho;
    rho.atoms.push_back({s0, 1.0});
    cases.push_back({"operator1",
                     StableSpec::operator1(GroupDescriptor::continuous_group(q),
                                           std::move(rho), Vec(Vec::Zero(3)))});
  }
  cases.push_back({"zero", StableSpec::zero(2.7, snail7())});

  bool ok = true;
  std::ostringstream msg;
  for (const auto& c : cases) {
    const ECFGrid grid = standard_grid(c.spec.dim(), 0xacc7);
    RngStream rng = RngStream::from_root_seed(0xacc8);
    std::vector<Complex> base(grid.points.size());
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      base[i] = psi_eval(c.spec, grid.points[i]);
    }
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const Similarity u = random_group_element(c.spec.group(), rng);
      const double pow_u = std::pow(u.scale(), c.spec.alpha());
      for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const Complex lhs = psi_eval(c.spec, Vec(u.dense().transpose() * grid.points[i]));
        const Complex rhs = pow_u * base[i];
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
      }
    }
    const bool pass = worst < 1e-6;
    ok = ok && pass;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s %.0e ", c.name, worst);
    msg << buf;
  }
  detail = msg.str();
  return ok;
}

bool c7_sampler_exponent(std::string& detail) {
  bool ok = true;
  std::ostringstream msg;
  struct Case {
    const char* name;
    StableSpec spec;
    SamplerOptions opts;
  };
  std::vector<Case> cases;
  cases.push_back({"gaussian",
                   StableSpec::gaussian(
                       GroupDescriptor::continuous_group(Mat(Mat::Identity(2, 2)), {}, true),
                       Mat(Mat::Identity(2, 2))),
                   {}});
  {
    SpectralMeasure rho;
    const int m = 64;
    for (int k = 0; k < m; ++k) {
      rho.atoms.push_back(
          {v2(std::cos(2.0 * kPi * k / m), std::sin(2.0 * kPi * k / m)), 1.0 / m});
    }
    SamplerOptions opts;
    opts.gaussian_correction = true;
    opts.x_scale = 2.0;  // grid radii stop at 2
    cases.push_back(
        {"isotropic",
         StableSpec::jump(1.5,
                          GroupDescriptor::continuous_group(
                              Mat(Mat::Identity(2, 2)), {rot2(2.0 * kPi / m)}, true),
                          std::move(rho)),
         opts});
  }
  {
    auto g = snail7({rot2(2.0 * kPi / 7.0)});
    SpectralMeasure rho = symmetrize(SpectralMeasure{{{v2(1, 0), 0.5}}}, g);
    SpectralMeasure neg = symmetrize(SpectralMeasure{{{v2(-1, 0), 0.5}}}, g);
    rho.atoms.insert(rho.atoms.end(), neg.atoms.begin(), neg.atoms.end());
    SamplerOptions opts;
    opts.gaussian_correction = true;
    opts.x_scale = 2.0;
    cases.push_back({"jump-snail",
                     StableSpec::jump(1.3, snail7({rot2(2.0 * kPi / 7.0)}), std::move(rho)),
                     opts});
  }

  for (const auto& c : cases) {
    const StableSampler sampler(c.spec, c.opts);
    const long n = 100000;
    const ECFGrid grid = standard_grid(2, 0xacca);
    const std::size_t G = grid.points.size();
    RngStream rng = RngStream::from_root_seed(0xacc9);
    // per-sample phases, kept for the bootstrap
    std::vector<Complex> phases(static_cast<std::size_t>(n) * G);
    std::vector<Complex> mean(G, Complex(0, 0));
    for (long i = 0; i < n; ++i) {
      const Vec y = sampler.sample(1.0, rng);
      for (std::size_t g = 0; g < G; ++g) {
        const double p = grid.points[g].dot(y);
        const Complex z(std::cos(p), std::sin(p));
        phases[static_cast<std::size_t>(i) * G + g] = z;
        mean[g] += z;
      }
    }
    for (auto& m : mean) m /= static_cast<double>(n);

    auto stud = [&](const std::vector<Complex>& phi, const std::vector<Complex>& ref) {
      double worst = 0.0;
      for (std::size_t g = 0; g < G; ++g) {
        const double se =
            std::sqrt(std::max(1e-300, 1.0 - std::norm(phi[g])) / static_cast<double>(n));
        worst = std::max(worst, std::abs(phi[g] - ref[g]) / se);
      }
      return worst;
    };
    std::vector<Complex> ref(G);
    for (std::size_t g = 0; g < G; ++g) ref[g] = std::exp(psi_eval(c.spec, grid.points[g]));
    const double stat = stud(mean, ref);

    // 500 bootstrap resamples of the ECF cloud against its own mean
    RngStream brng = RngStream::from_root_seed(0xaccb);
    std::vector<double> boot(500);
    std::vector<Complex> bm(G);
    for (int b = 0; b < 500; ++b) {
      std::fill(bm.begin(), bm.end(), Complex(0, 0));
      for (long i = 0; i < n / 10; ++i) {  // 10x thinned; se in stud() uses n/10
        const std::size_t pick =
            static_cast<std::size_t>(brng.next_below(static_cast<uint64_t>(n)));
        for (std::size_t g = 0; g < G; ++g) bm[g] += phases[pick * G + g];
      }
      for (auto& m : bm) m /= static_cast<double>(n / 10);
      double worst = 0.0;
      for (std::size_t g = 0; g < G; ++g) {
        const double se = std::sqrt(std::max(1e-300, 1.0 - std::norm(bm[g])) /
                                    static_cast<double>(n / 10));
        worst = std::max(worst, std::abs(bm[g] - mean[g]) / se);
      }
      boot[static_cast<std::size_t>(b)] = worst;
    }
    std::sort(boot.begin(), boot.end());
    const double threshold = boot[494];
    const bool pass = stat <= threshold;
    ok = ok && pass;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s %.2f<=%.2f ", c.name, stat, threshold);
    msg << buf;
  }
  detail = msg.str();
  return ok;
}

bool c8_fixed_point(std::string& detail) {
  const auto model = presets::cyclic_polya(7);
  const ECFGrid grid2 = standard_grid(2, 0xaccc);
  BranchingConfig cfg;
  cfg.max_depth = 11;
  bool ok = true;
  std::ostringstream msg;

  {
    const StableSpec zero = StableSpec::zero(kAlphaPolya, snail7());
    auto s = solution_sampler(model, kAlphaPolya, zero, v2(1, 0), cfg);
    const TestVerdict v = fixed_point_test(model, s, grid2, 10000, 0.01, 0xc8a);
    ok = ok && v.pass;
    msg << "aZ " << (v.pass ? "ok" : "BAD") << " ";
  }
  {
    SpectralMeasure rho;
    const int m = 32;
    for (int k = 0; k < m; ++k) {
      rho.atoms.push_back({v2(std::cos(2.0 * kPi * k / m), std::sin(2.0 * kPi * k / m)),
                           kAlphaPolya / m});
    }
    const StableSpec iso =
        StableSpec::jump(kAlphaPolya,
                         GroupDescriptor::continuous_group(
                             Mat(Mat::Identity(2, 2)), {rot2(2.0 * kPi / m)}, true),
                         std::move(rho));
    SamplerOptions opts;
    opts.gaussian_correction = true;
    opts.x_scale = 2.0;
    auto s = solution_sampler(model, kAlphaPolya, iso, Vec(Vec::Zero(2)), cfg, opts);
    const TestVerdict v = fixed_point_test(model, s, grid2, 10000, 0.01, 0xc8b);
    ok = ok && v.pass;
    msg << "Y_W " << (v.pass ? "ok" : "BAD") << " ";
  }
  {
    // random inhomogeneous table: W* has a nondegenerate law (a deterministic
    // table would make the ECF test infinitely sharp against the finite-depth
    // truncation of the point mass)
    presets::TableAtom a1, a2;
    a1.prob = 0.5;
    a1.C = Vec::Zero(1);
    a1.C[0] = 1.0;
    a1.T.emplace_back(1.0 / 3.0, Mat(Mat::Identity(1, 1)));
    a1.T.emplace_back(1.0 / 3.0, Mat(Mat::Identity(1, 1)));
    a2.prob = 0.5;
    a2.C = Vec::Zero(1);
    a2.C[0] = 0.5;
    a2.T.emplace_back(0.25, Mat(Mat::Identity(1, 1)));
    const auto table = presets::table({a1, a2});
    const double alpha_t = solve_alpha(table).alpha;
    const StableSpec zero1 = StableSpec::zero(
        alpha_t, GroupDescriptor::continuous_group(Mat(Mat::Identity(1, 1))));
    BranchingConfig c1;
    c1.max_depth = 16;
    auto s = solution_sampler(table, alpha_t, zero1, Vec(Vec::Zero(1)), c1);
    const ECFGrid grid1 = standard_grid(1, 0xaccd);
    const TestVerdict v = fixed_point_test(table, s, grid1, 10000, 0.01, 0xc8c);
    ok = ok && v.pass;
    msg << "W* " << (v.pass ? "ok" : "BAD") << " ";
  }
  {
    auto bad = [&](RngStream& r) {
      return sample_isotropic_stable(kAlphaPolya + 0.3, 0.6, 2, 1.0, r);
    };
    const TestVerdict v = fixed_point_test(model, bad, grid2, 10000, 0.01, 0xc8d);
    ok = ok && !v.pass;
    msg << "alpha+0.3 " << (!v.pass ? "rejected" : "NOT-REJECTED");
  }
  detail = msg.str();
  return ok;
}

bool c9_hill_tail(std::string& detail) {
  const auto model = presets::cyclic_polya(7);
  SpectralMeasure rho;
  const int m = 32;
  for (int k = 0; k < m; ++k) {
    rho.atoms.push_back({v2(std::cos(2.0 * kPi * k / m), std::sin(2.0 * kPi * k / m)),
                         kAlphaPolya / m});
  }
  const StableSpec spec =
      StableSpec::jump(kAlphaPolya,
                       GroupDescriptor::continuous_group(
                           Mat(Mat::Identity(2, 2)), {rot2(2.0 * kPi / m)}, true),
                       std::move(rho));
  SamplerOptions opts;
  opts.gaussian_correction = true;
  opts.x_scale = 2.0;
  const StableSampler sampler(spec, opts);

  const long n = 100000;
  std::vector<double> mags(static_cast<std::size_t>(n));
  RngStream root = RngStream::from_root_seed(0xacc99);
  for_each_replica(static_cast<uint64_t>(n), 4, [&](uint64_t i) {
    RngStream rng = root.child(i);
    BranchingConfig cfg;
    cfg.max_depth = 10;
    cfg.root_seed = rng.next_u64();
    const MartingaleDraw d = simulate_joint(model, kAlphaPolya, cfg);
    RngStream y = rng.child(7);
    mags[i] = std::max(sampler.sample_at_W(std::max(d.W, 1e-12), y).norm(), 1e-300);
  });
  const HillEstimate h = hill_tail_index(mags, 1000);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "alpha_hat %.3f, target 1.604 +- 0.15", h.alpha_hat);
  detail = buf;
  return std::abs(h.alpha_hat - 1.60) <= 0.15;
}

bool c10_invariant_space(std::string& detail) {
  const auto basis1 = invariant_symmetric_space({rot2(2.0 * kPi / 7.0)}, 2);
  bool ok = basis1.basis.size() == 1;
  if (ok) {
    const Mat& s = basis1.basis[0];
    ok = std::abs(s(0, 0) - s(1, 1)) < 1e-10 && std::abs(s(0, 1)) < 1e-10;
  }
  for (int d : {2, 3, 4}) {
    const auto full = invariant_symmetric_space({Mat(Mat::Identity(d, d))}, d);
    ok = ok && static_cast<int>(full.basis.size()) == d * (d + 1) / 2;
  }
  // brute-force oracle: kernel dimension of the 3x3 coordinate system
  int oracle_dim = 0;
  {
    const Mat o = rot2(2.0 * kPi / 7.0);
    Eigen::Matrix3d m;
    for (int a = 0; a < 3; ++a) {
      Mat e = Mat::Zero(2, 2);
      if (a == 0) e(0, 0) = 1.0;
      if (a == 1) e(1, 1) = 1.0;
      if (a == 2) e(0, 1) = e(1, 0) = 1.0;
      const Mat img = o * e * o.transpose() - e;
      m(0, a) = img(0, 0);
      m(1, a) = img(1, 1);
      m(2, a) = img(0, 1);
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
    lu.setThreshold(1e-9);
    oracle_dim = static_cast<int>(lu.dimensionOfKernel());
  }
  ok = ok && oracle_dim == static_cast<int>(basis1.basis.size());
  detail = ok ? "span{I} for 2pi/7, d(d+1)/2 trivial, oracle dim equal"
              : "dimension mismatch";
  return ok;
}

bool c11_nu_tail_scaling(std::string& detail) {
  bool ok = true;
  {
    const double alpha = kAlphaPolya;
    SpectralMeasure rho;
    rho.atoms.push_back({v2(1, 0), alpha});
    const StableSpec spec = StableSpec::jump(alpha, snail7(), std::move(rho));
    for (int i = 1; i <= 1000 && ok; ++i) {
      const double r = 0.013 * i;
      const double ratio = nu_tail(spec, 2.0 * r) / nu_tail(spec, r);
      ok = std::abs(ratio - std::pow(2.0, -alpha)) < 1e-10;
    }
  }
  {
    const Similarity A(0.5, rot2(0.3));
    SpectralMeasure rho;
    rho.atoms.push_back({v2(0.7, 0.0), 1.0});
    const StableSpec spec =
        StableSpec::jump(1.2, GroupDescriptor::discrete_group(A), std::move(rho));
    for (int i = 1; i <= 1000 && ok; ++i) {
      const double r = 0.002 + 0.004 * i;
      const double lhs = nu_tail(spec, 0.5 * r) * std::pow(0.5 * r, spec.alpha());
      const double rhs = nu_tail(spec, r) * std::pow(r, spec.alpha());
      ok = std::abs(lhs - rhs) < 1e-10 * (std::abs(rhs) + 1.0);
    }
  }
  detail = ok ? "continuous power law and discrete periodicity at 1e-10" : "violated";
  return ok;
}

}  // namespace

int main() {
  std::printf("acceptance suite (pre-registered seeds, pinned tolerances)\n");
  criterion(1, "phase transitions: bary 26/27, cyclic polya 6/7", c1_phase);
  criterion(2, "alpha consistency with 1/Re(lambda2) at b = 27", c2_alpha_consistency);
  criterion(3, "closed-form polya index 1/cos(2pi/7)", c3_polya_closed_form);
  criterion(4, "mean-one martingales W_n and Z_n", c4_mean_one);
  criterion(5, "many-to-one walk vs branching sums vs exact", c5_many_to_one);
  criterion(6, "exponent group-invariance per payload kind", c6_exponent_invariance);
  criterion(7, "samplers match exp(Psi) on the standard grid", c7_sampler_exponent);
  criterion(8, "fixed-point certification and positive control", c8_fixed_point);
  criterion(9, "hill tail plateau for |Y_W| near 1.604", c9_hill_tail);
  criterion(10, "invariant symmetric space dimensions", c10_invariant_space);
  criterion(11, "levy tail scaling laws at 1000 radii", c11_nu_tail_scaling);
  if (g_failures == 0) {
    std::printf("all 11 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
