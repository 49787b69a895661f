// Command-line front end: solve, bench, lowerbound, check.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "saddle/bench.hpp"
#include "saddle/minimax.hpp"

using namespace saddle;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

int cmd_solve(const std::string& config_path) {
  const nlohmann::json cfg = read_json(config_path);
  nlohmann::json spec = cfg.at("problem");
  if (cfg.contains("p")) spec["p"] = cfg["p"];
  if (const char* env = std::getenv("BENCH_SEED")) spec["seed"] = std::stoul(env);
  const SaddleProblem prob = make_problem(spec);
  const double eps = cfg.at("eps").get<double>();
  const std::string solver = cfg.value("solver", std::string("minimax_aipe"));
  SolveReport rep;
  if (solver == "minimax_aipe") {
    rep = solve(prob, eps, derive_parameters(prob, eps, !cfg.value("paper_value_mode", false))).second;
  } else if (solver == "eg_baseline") {
    BaselineOptions bo;
    bo.max_calls = cfg.value("baseline_max_calls", bo.max_calls);
    rep = baseline_eg_solve(prob, eps, std::min(prob.order(), 2), bo).second;
  } else {
    throw std::invalid_argument("unknown solver: " + solver);
  }
  if (cfg.contains("trace_csv")) std::ofstream(cfg["trace_csv"].get<std::string>()) << rep.trace_csv();
  const std::string text = rep.to_json().dump(2);
  if (cfg.contains("out")) {
    std::ofstream(cfg["out"].get<std::string>()) << text << '\n';
  } else {
    std::cout << text << '\n';
  }
  return rep.flagged ? 2 : 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, int jobs) {
  BenchConfig cfg = BenchConfig::from_json(read_json(config_path));
  if (!out.empty()) cfg.out_dir = out;
  if (cfg.out_dir.empty()) throw std::invalid_argument("bench: no output directory");
  const BenchResult res = run_suite(cfg, jobs);
  write_suite(res, cfg.out_dir);
  std::cout << "rows " << res.rows.size() << ", flagged " << res.summary["flagged"] << ", failed "
            << res.summary["failed"] << '\n';
  for (const auto& s : res.summary["slopes"]) {
    std::cout << s["problem"].get<std::string>() << ' ' << s["solver"].get<std::string>()
              << " slope " << format17(s["slope"].get<double>()) << " +- "
              << format17(s["half_width"].get<double>()) << '\n';
  }
  return res.exit_code;
}

int cmd_lowerbound(int p, int tmax, const std::string& schedule, const std::string& out) {
  std::vector<int> Ts;
  for (int T = 4; T <= tmax; T *= 2) Ts.push_back(T);
  if (Ts.empty()) throw std::invalid_argument("lowerbound: tmax must be >= 4");
  const auto rows = lowerbound_experiment(p, Ts, schedule);
  const std::string csv = lowerbound_csv(rows);
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream(out) << csv;
  }
  for (const auto& r : rows) {
    if (r.ratio < 1.0 || r.zero_respect_violations > 0 || r.precondition_violations > 0) return 2;
  }
  return 0;
}

int cmd_check() {
  int failures = 0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<nlohmann::json> specs = {
      {{"problem", "bilinear"}, {"p", 1}, {"dim", 3}, {"seed", 1}},
      {{"problem", "quadratic"}, {"p", 1}, {"dim", 3}, {"seed", 2}},
      {{"problem", "quadratic"}, {"p", 2}, {"dim", 3}, {"seed", 3}},
      {{"problem", "power"}, {"p", 2}, {"dim", 3}, {"seed", 4}},
      {{"problem", "hard_new"}, {"p", 2}, {"T", 4}},
      {{"problem", "hard_lin"}, {"p", 2}, {"T", 2}}};
  for (const auto& spec : specs) {
    const SaddleProblem prob = make_problem(spec);
    // Projected samples can sit on a face; mixing with the average of several
    // samples moves the point off it so central differences stay feasible.
    auto sample = [&] {
      Vec v(prob.dim());
      for (int i = 0; i < v.size(); ++i) v[i] = u(rng);
      return Vec(project(prob.domain(), v));
    };
    Vec center = Vec::Zero(prob.dim());
    for (int k = 0; k < 16; ++k) center += sample() / 16.0;
    const Vec z = 0.5 * (sample() + center);
    const DerivativeReport r = check_derivatives(prob, z);
    std::printf("derivatives %-24s %s (grad %.2e, hess %.2e)\n", prob.name().c_str(),
                r.ok ? "ok" : "FAIL", r.grad_error, r.hess_error);
    for (const std::string& f : r.failures) std::printf("  %s\n", f.c_str());
    failures += r.ok ? 0 : 1;
  }
  // Geometry: projections land inside and are idempotent; residual of the
  // projected-gradient fixed point is zero.
  const std::vector<Domain> doms = {
      Domain::cube(4, -1.0, 1.0), Domain::ball(Vec::Zero(3), 1.5),
      Domain::product(Domain::cube(2, 0.0, 1.0), Domain::ball(Vec::Ones(2), 0.5))};
  int geo_bad = 0;
  for (const Domain& d : doms) {
    for (int k = 0; k < 100; ++k) {
      Vec p(d.dim());
      for (int i = 0; i < p.size(); ++i) p[i] = 3.0 * u(rng);
      const Vec z = project(d, p);
      if (!contains(d, z) || (project(d, z) - z).norm() > 1e-12) ++geo_bad;
      if (tangent_residual(d, z, z - p) > 1e-9) ++geo_bad;
    }
  }
  std::printf("geometry %s (%d violations)\n", geo_bad == 0 ? "ok" : "FAIL", geo_bad);
  failures += geo_bad == 0 ? 0 : 1;
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saddle-point solvers and benchmarks"};
  app.require_subcommand(1);
  std::string config, out;
  int jobs = 1, p = 1, tmax = 64;
  std::string schedule = "eg";

  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem from a JSON config");
  solve_cmd->add_option("--config", config, "config file")->required();
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite");
  bench_cmd->add_option("--config", config, "config file")->required();
  bench_cmd->add_option("--out", out, "output directory");
  bench_cmd->add_option("--jobs", jobs, "parallel rows")->check(CLI::PositiveNumber);
  auto* lb_cmd = app.add_subcommand("lowerbound", "Lower-bound experiment on the chain instance");
  lb_cmd->add_option("--p", p, "order")->check(CLI::IsMember({1, 2}));
  lb_cmd->add_option("--tmax", tmax, "largest T (T = 4, 8, ...)");
  lb_cmd->add_option("--schedule", schedule, "eg|tensor|alternating|averaged");
  lb_cmd->add_option("--out", out, "CSV path (stdout when empty)");
  auto* check_cmd = app.add_subcommand("check", "Derivative and geometry self-tests");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve_cmd) return cmd_solve(config);
    if (*bench_cmd) return cmd_bench(config, out, jobs);
    if (*lb_cmd) return cmd_lowerbound(p, tmax, schedule, out);
    if (*check_cmd) return cmd_check();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
