#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "smeq/branching.hpp"
#include "smeq/char_roots.hpp"
#include "smeq/parallel.hpp"
#include "smeq/serialize.hpp"
#include "smeq/stable_laws.hpp"
#include "smeq/verify.hpp"
#include "smeq/version.hpp"
#include "smeq/weight_model.hpp"

namespace smeq {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string preset;
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  uint64_t seed = 0;
  bool seed_given = false;
  long replicas = 10000;
  int depth = 10;
  double level = -1.0;
  int threads = 1;
  int b = 0;
  double theta = 1.0;
  long n_mc = 100000;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_model = true) {
  if (with_model) {
    cmd->add_option("--preset", o.preset, "preset model name");
    cmd->add_option("--config", o.config_path, "JSON or TOML config file");
    cmd->add_option("--b", o.b, "preset branching parameter");
    cmd->add_option("--theta", o.theta, "fragmentation spacing parameter");
  }
  cmd->add_option("--seed", o.seed, "64-bit root seed")
      ->each([&o](const std::string&) { o.seed_given = true; });
  cmd->add_option("--threads", o.threads, "replica worker threads");
  cmd->add_option("--replicas", o.replicas, "Monte Carlo replicas");
  cmd->add_option("--depth", o.depth, "tree depth");
  cmd->add_option("--level", o.level, "stopping-line level t");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--mc", o.n_mc, "samples for Monte Carlo m(s) estimates");
}

// manifest files ({"subcommand":..., "config":...}) unwrap to their config
Json unwrap_config(Json j, CommonOpts& o) {
  if (j.contains("subcommand") && j.contains("config")) {
    if (!o.seed_given && j.contains("seed")) {
      o.seed = j["seed"].get<uint64_t>();
      o.seed_given = true;
    }
    if (j.contains("replicas")) o.replicas = j["replicas"].get<long>();
    if (j.contains("depth")) o.depth = j["depth"].get<int>();
    return j["config"];
  }
  return j;
}

Json resolve_model_config(CommonOpts& o) {
  Json cfg;
  if (!o.config_path.empty()) {
    cfg = unwrap_config(load_config_file(o.config_path), o);
  }
  if (!o.preset.empty()) cfg["preset"] = o.preset;
  if (o.b > 0) cfg["b"] = o.b;
  if (o.theta != 1.0) cfg["theta"] = o.theta;
  if (!cfg.contains("preset")) {
    throw UsageError("no model: pass --preset or --config");
  }
  return cfg;
}

class OutputSink {
 public:
  OutputSink(std::string dir, std::string subcommand)
      : dir_(std::move(dir)), sub_(std::move(subcommand)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& bytes) {
    const std::string path = dir_ + "/" + name;
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), "cannot write '" + path + "'");
    out.write(bytes.data(), static_cast<long>(bytes.size()));
    char digest[32];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));
    digests_[name] = digest;
  }

  void manifest(const Json& config, const CommonOpts& o, double wall_ms) {
    Json m;
    m["subcommand"] = sub_;
    m["config"] = config;
    m["seed"] = o.seed;
    m["replicas"] = o.replicas;
    m["depth"] = o.depth;
    m["threads"] = o.threads;
    m["version"] = kVersion;
    m["wall_clock_ms"] = wall_ms;
    m["outputs"] = digests_;
    const std::string path = dir_ + "/manifest.json";
    std::ofstream out(path, std::ios::binary);
    out << m.dump(2) << "\n";
  }

 private:
  std::string dir_, sub_;
  std::map<std::string, std::string> digests_;
};

std::string json_bytes(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

int cmd_alpha(CommonOpts& o) {
  const Json cfg = resolve_model_config(o);
  const WeightModel model = model_from_json(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const AlphaResult res = solve_alpha(model, std::nullopt, 1e-12, o.n_mc, o.seed);

  CsvWriter csv({"s", "m", "std_error"});
  const double s_hi = std::max(2.0 * res.alpha, 1.0);
  for (int k = 0; k <= 64; ++k) {
    const double s = s_hi * k / 64.0;
    const MEstimate m = m_eval(model, s, std::max<long>(1000, o.n_mc / 10), o.seed);
    csv.row_values({s, m.value, m.std_error});
  }
  Json summary;
  summary["alpha"] = res.alpha;
  summary["m_residual"] = res.m_residual;
  Json brackets = Json::array();
  for (const auto& b : res.brackets) brackets.push_back(Json{b.first, b.second});
  summary["brackets"] = brackets;
  summary["model"] = model.label();

  OutputSink sink(o.out_dir, "alpha");
  sink.write("alpha_mcurve.csv", csv.str());
  sink.write("alpha.json", json_bytes(summary));
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  sink.manifest(cfg, o, ms);
  std::cout << CsvWriter::format(res.alpha) << "\n";
  return 0;
}

int cmd_roots(CommonOpts& o) {
  if (o.b < 4) throw UsageError("roots: pass --b >= 4");
  const auto t0 = std::chrono::steady_clock::now();
  const RootSet rs = chi_roots(o.b);
  const Lambda2 l2 = select_lambda2(rs);
  CsvWriter csv({"b", "re", "im", "residual", "is_lambda2"});
  for (std::size_t i = 0; i < rs.roots.size(); ++i) {
    const bool is_l2 = std::abs(rs.roots[i] - l2.value) < 1e-12;
    csv.row_values({static_cast<double>(o.b), rs.roots[i].real(), rs.roots[i].imag(),
                    rs.residuals[i], is_l2 ? 1.0 : 0.0});
  }
  OutputSink sink(o.out_dir, "roots");
  sink.write("roots.csv", csv.str());
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  sink.manifest(Json{{"b", o.b}}, o, ms);
  std::cout << "lambda2 " << CsvWriter::format(l2.value.real()) << " "
            << CsvWriter::format(l2.value.imag()) << "\n";
  return 0;
}

int cmd_simulate(CommonOpts& o) {
  const Json cfg = resolve_model_config(o);
  const WeightModel model = model_from_json(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const AlphaResult ar = solve_alpha(model, std::nullopt, 1e-12, o.n_mc, o.seed);
  const double alpha = ar.alpha;

  Vec w = Vec::Zero(model.dim());
  w[0] = 1.0;
  if (const auto eig = eigen_check(model, std::min<long>(o.n_mc, 20000), 1e-6, o.seed)) {
    w = eig->w;
  }

  const bool line_mode = o.level >= 0.0;
  const int d = model.dim();
  struct Row {
    uint64_t seed = 0;
    MartingaleDraw draw;
  };
  std::vector<Row> rows(static_cast<std::size_t>(o.replicas));
  RngStream root = RngStream::from_root_seed(o.seed);
  for_each_replica(static_cast<uint64_t>(o.replicas), o.threads, [&](uint64_t i) {
    BranchingConfig bc;
    bc.max_depth = o.depth;
    bc.root_seed = root.child(i).key_lo();
    rows[i].seed = bc.root_seed;
    rows[i].draw = line_mode ? simulate_stopping_line(model, alpha, o.level, bc)
                             : simulate_joint(model, alpha, bc, w);
  });

  std::vector<std::string> header{"seed", "n", "W"};
  for (int k = 0; k < d; ++k) header.push_back("Zw_" + std::to_string(k));
  for (int k = 0; k < d; ++k) header.push_back("Wstar_" + std::to_string(k));
  header.push_back("node_count");
  header.push_back("discarded_mass_bound");
  CsvWriter csv(header);
  double sum_w = 0.0, sum_w2 = 0.0;
  Vec sum_zw = Vec::Zero(d), sum_ws = Vec::Zero(d);
  for (const auto& r : rows) {
    std::vector<double> vals{static_cast<double>(r.seed),
                             static_cast<double>(line_mode ? r.draw.depth_reached : o.depth),
                             r.draw.W};
    for (int k = 0; k < d; ++k) vals.push_back(line_mode ? 0.0 : r.draw.Zw[k]);
    for (int k = 0; k < d; ++k) vals.push_back(line_mode ? 0.0 : r.draw.Wstar[k]);
    vals.push_back(static_cast<double>(r.draw.node_count));
    vals.push_back(r.draw.discarded_mass_bound);
    csv.row_values(vals);
    sum_w += r.draw.W;
    sum_w2 += r.draw.W * r.draw.W;
    if (!line_mode) {
      sum_zw += r.draw.Zw;
      sum_ws += r.draw.Wstar;
    }
  }
  const double n = static_cast<double>(o.replicas);
  const double mean_w = sum_w / n;
  Json summary;
  summary["alpha"] = alpha;
  summary["replicas"] = o.replicas;
  summary["mean_W"] = mean_w;
  summary["se_W"] = std::sqrt(std::max(0.0, sum_w2 / n - mean_w * mean_w) / n);
  if (!line_mode) {
    Json zw = Json::array(), ws = Json::array();
    for (int k = 0; k < d; ++k) {
      zw.push_back(sum_zw[k] / n);
      ws.push_back(sum_ws[k] / n);
    }
    summary["mean_Zw"] = zw;
    summary["mean_Wstar"] = ws;
  } else {
    summary["level"] = o.level;
  }

  OutputSink sink(o.out_dir, "simulate");
  sink.write("simulate.csv", csv.str());
  sink.write("simulate_summary.json", json_bytes(summary));
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  sink.manifest(cfg, o, ms);
  std::cout << "mean_W " << CsvWriter::format(mean_w) << "\n";
  return 0;
}

int cmd_phase(CommonOpts& o, const std::string& range) {
  const auto colon = range.find(':');
  if (colon == std::string::npos) throw UsageError("phase: --range expects lo:hi");
  const int lo = std::stoi(range.substr(0, colon));
  const int hi = std::stoi(range.substr(colon + 1));
  if (lo < 3 || hi < lo) throw UsageError("phase: bad range");
  const std::string preset = o.preset.empty() ? "bary" : o.preset;

  const auto t0 = std::chrono::steady_clock::now();
  CsvWriter csv({"param", "re_lambda2", "alpha", "regime"});
  std::vector<std::string> regimes;
  for (int b = lo; b <= hi; ++b) {
    double re2 = 0.0;
    double alpha = std::numeric_limits<double>::infinity();
    if (preset == "bary" || preset == "bary_spacings" || preset == "bary_exponential") {
      const Lambda2 l2 = select_lambda2(chi_roots(b));
      re2 = l2.value.real();
      if (re2 > 0.0) alpha = 1.0 / re2;
    } else if (preset == "cyclic_polya") {
      re2 = std::cos(2.0 * 3.14159265358979323846 / b);
      if (re2 > 0.0) alpha = 1.0 / re2;
    } else {
      throw UsageError("phase: supported presets are bary and cyclic_polya");
    }
    const bool gaussian = !(alpha < 2.0);
    csv.row({CsvWriter::format(b), CsvWriter::format(re2), CsvWriter::format(alpha),
             gaussian ? "gaussian" : "stable"});
    regimes.push_back(gaussian ? "gaussian" : "stable");
  }
  OutputSink sink(o.out_dir, "phase");
  sink.write("phase.csv", csv.str());
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  sink.manifest(Json{{"preset", preset}, {"range", range}}, o, ms);
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    std::cout << (lo + static_cast<int>(i)) << " " << regimes[i] << "\n";
  }
  return 0;
}

int cmd_psi(CommonOpts& o, const std::string& spec_path) {
  if (spec_path.empty()) throw UsageError("psi: pass --spec FILE");
  const StableSpec spec = stable_spec_from_json(load_config_file(spec_path));
  const auto t0 = std::chrono::steady_clock::now();
  const ECFGrid grid = standard_grid(spec.dim(), o.seed);
  std::vector<std::string> header;
  for (int k = 0; k < spec.dim(); ++k) header.push_back("x_" + std::to_string(k));
  header.push_back("re_psi");
  header.push_back("im_psi");
  header.push_back("achieved_tol");
  CsvWriter csv(header);
  for (const auto& x : grid.points) {
    QuadReport rep;
    const Complex psi = psi_eval(spec, x, &rep);
    std::vector<double> vals;
    for (int k = 0; k < spec.dim(); ++k) vals.push_back(x[k]);
    vals.push_back(psi.real());
    vals.push_back(psi.imag());
    vals.push_back(rep.achieved_tol);
    csv.row_values(vals);
  }
  OutputSink sink(o.out_dir, "psi");
  sink.write("psi.csv", csv.str());
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  sink.manifest(Json{{"spec", spec_path}}, o, ms);
  return 0;
}

int cmd_check(CommonOpts& o) {
  const Json cfg = resolve_model_config(o);
  const WeightModel model = model_from_json(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const AlphaResult ar = solve_alpha(model, std::nullopt, 1e-12, o.n_mc, o.seed);
  const AssumptionReport rep = check_assumptions(model, ar.alpha, o.n_mc, o.seed);
  const GroupConsistency gc = check_group_consistency(model, 1000, o.seed);

  auto flag = [](Flag f) {
    return f == Flag::pass ? "pass" : f == Flag::fail ? "fail" : "unknown";
  };
  auto est = [](const Estimate& e) {
    return Json{{"value", e.value}, {"std_error", e.std_error}};
  };
  Json j;
  j["alpha"] = rep.alpha;
  j["m_residual"] = rep.m_residual;
  j["mean_N"] = est(rep.mean_N);
  j["A1"] = flag(rep.a1);
  j["A2"] = flag(rep.a2);
  j["m_prime"] = est(rep.m_prime);
  j["E_W1_logW1"] = est(rep.w1_log_w1);
  j["A3"] = flag(rep.a3);
  j["E_h3_W1"] = est(rep.h3_w1);
  j["E_neglog_sq"] = est(rep.neg_log_sq);
  j["A4_prime"] = flag(rep.a4_prime);
  j["A4"] = flag(rep.a4);
  if (rep.s1_beta) {
    j["S1_beta"] = *rep.s1_beta;
    j["m_at_beta"] = est(rep.m_at_beta);
    j["E_C_beta"] = est(rep.c_moment_beta);
  }
  j["S1"] = flag(rep.s1);
  j["S2"] = flag(rep.s2);
  j["n_mc"] = rep.n_mc;
  j["notes"] = rep.notes;
  j["group_consistent"] = gc.consistent;
  j["group_worst_log_defect"] = gc.worst_log_defect;

  OutputSink sink(o.out_dir, "check");
  sink.write("check.json", json_bytes(j));
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  sink.manifest(cfg, o, ms);
  std::cout << "A1 " << flag(rep.a1) << "  A2 " << flag(rep.a2) << "  A3 "
            << flag(rep.a3) << "\n";
  return 0;
}

int cmd_verify(CommonOpts& o) {
  if (!o.seed_given) {
    throw UsageError("verify: --seed is required (pre-registration discipline)");
  }
  if (o.config_path.empty()) throw UsageError("verify: pass --config FILE");
  Json cfg = unwrap_config(load_config_file(o.config_path), o);
  const WeightModel model = model_from_json(cfg.at("model"));
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha =
      cfg.contains("alpha") ? cfg["alpha"].get<double>()
                            : solve_alpha(model, std::nullopt, 1e-12, o.n_mc, o.seed).alpha;
  const StableSpec spec = stable_spec_from_json(cfg.at("spec"));
  Vec w = Vec::Zero(model.dim());
  if (cfg.contains("w")) {
    for (int k = 0; k < model.dim(); ++k) {
      w[k] = cfg["w"].at(static_cast<std::size_t>(k)).get<double>();
    }
  }
  BranchingConfig bc;
  bc.max_depth = cfg.value("depth", o.depth);
  const long n = cfg.value("n", static_cast<long>(10000));
  const double level = cfg.value("level", 0.01);

  const ECFGrid grid = standard_grid(model.dim(), o.seed);
  auto sampler = solution_sampler(model, alpha, spec, w, bc);
  const TestVerdict v = fixed_point_test(model, sampler, grid, n, level, o.seed);

  Json j;
  j["statistic"] = v.statistic;
  j["threshold"] = v.threshold;
  j["pass"] = v.pass;
  j["level"] = v.level;
  j["n"] = v.n;
  j["cap_hits"] = v.cap_hits;
  j["alpha"] = alpha;
  std::vector<std::string> header;
  for (int k = 0; k < model.dim(); ++k) header.push_back("x_" + std::to_string(k));
  for (const char* c : {"re_phi_X", "im_phi_X", "re_phi_map", "im_phi_map", "se", "stat"}) {
    header.push_back(c);
  }
  CsvWriter csv(header);
  Json table = Json::array();
  for (const auto& row : v.table) {
    table.push_back(Json{{"stat", row.stat}, {"se", row.se}});
    std::vector<double> vals;
    for (int k = 0; k < model.dim(); ++k) vals.push_back(row.x[k]);
    vals.push_back(row.phi_left.real());
    vals.push_back(row.phi_left.imag());
    vals.push_back(row.phi_right.real());
    vals.push_back(row.phi_right.imag());
    vals.push_back(row.se);
    vals.push_back(row.stat);
    csv.row_values(vals);
  }
  j["grid"] = table;

  OutputSink sink(o.out_dir, "verify");
  sink.write("verify.json", json_bytes(j));
  sink.write("verify_points.csv", csv.str());
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  sink.manifest(cfg, o, ms);
  std::cout << (v.pass ? "pass" : "fail") << " statistic "
            << CsvWriter::format(v.statistic) << " threshold "
            << CsvWriter::format(v.threshold) << "\n";
  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
  CLI::App app{"smoothing-equation toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string range, spec_path;

  auto* alpha = app.add_subcommand("alpha", "solve m(alpha) = 1 and emit the m-curve");
  add_common(alpha, o);
  auto* roots = app.add_subcommand("roots", "characteristic roots of the b-ary equation");
  add_common(roots, o);
  auto* simulate = app.add_subcommand("simulate", "weighted branching martingales");
  add_common(simulate, o);
  auto* verify = app.add_subcommand("verify", "fixed-point certification");
  add_common(verify, o);
  auto* phase = app.add_subcommand("phase", "sweep a preset parameter");
  add_common(phase, o);
  phase->add_option("--range", range, "parameter range lo:hi")->required();
  auto* psi = app.add_subcommand("psi", "characteristic exponent on the standard grid");
  add_common(psi, o, false);
  psi->add_option("--spec", spec_path, "stable-spec JSON file");
  auto* check = app.add_subcommand("check", "assumption diagnostics");
  add_common(check, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help() << "\n";
      return 0;
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (alpha->parsed()) return cmd_alpha(o);
    if (roots->parsed()) return cmd_roots(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (verify->parsed()) return cmd_verify(o);
    if (phase->parsed()) return cmd_phase(o, range);
    if (psi->parsed()) return cmd_psi(o, spec_path);
    if (check->parsed()) return cmd_check(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_run(args);
}

}  // namespace smeq
