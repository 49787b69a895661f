#include "saddle/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace saddle {

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

BenchConfig BenchConfig::from_json(const nlohmann::json& j) {
  BenchConfig c;
  if (j.contains("problems")) {
    for (const auto& p : j.at("problems")) c.problems.push_back(p);
  }
  if (j.contains("solvers")) c.solvers = j.at("solvers").get<std::vector<std::string>>();
  if (j.contains("solver")) c.solvers = {j.at("solver").get<std::string>()};
  if (j.contains("eps")) c.eps = j.at("eps").get<std::vector<double>>();
  c.p = j.value("p", 0);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<unsigned>>();
  if (j.contains("seed")) c.seeds = {j.at("seed").get<unsigned>()};
  c.paper_value_mode = j.value("paper_value_mode", false);
  c.baseline_max_calls = j.value("baseline_max_calls", c.baseline_max_calls);
  c.out_dir = j.value("out", std::string());
  if (const char* env = std::getenv("BENCH_SEED")) {
    c.seeds = {static_cast<unsigned>(std::stoul(env))};
  }
  for (const auto& s : c.solvers) {
    if (s != "minimax_aipe" && s != "eg_baseline") {
      throw std::invalid_argument("unknown solver: " + s);
    }
  }
  for (size_t i = 1; i < c.eps.size(); ++i) {
    if (!(c.eps[i] < c.eps[i - 1])) throw std::invalid_argument("eps grid must be strictly decreasing");
  }
  for (double e : c.eps) {
    if (!(e > 0.0)) throw std::invalid_argument("eps values must be > 0");
  }
  return c;
}

nlohmann::json BenchConfig::to_json() const {
  return {{"problems", problems},
          {"solvers", solvers},
          {"eps", eps},
          {"p", p},
          {"seeds", seeds},
          {"paper_value_mode", paper_value_mode},
          {"baseline_max_calls", baseline_max_calls},
          {"out", out_dir}};
}

namespace {

BenchRow run_row(const BenchConfig& cfg, const nlohmann::json& spec_in, const std::string& solver,
                 double eps, unsigned seed) {
  nlohmann::json spec = spec_in;
  spec["seed"] = seed;
  if (cfg.p > 0) spec["p"] = cfg.p;
  BenchRow row;
  row.solver = solver;
  row.eps = eps;
  row.seed = seed;
  row.p = spec.value("p", 1);
  row.problem = spec.value("problem", std::string("?"));
  try {
    const SaddleProblem prob = make_problem(spec);
    row.problem = prob.name();
    row.p = prob.order();
    SolveReport rep;
    if (solver == "minimax_aipe") {
      rep = solve(prob, eps, derive_parameters(prob, eps, !cfg.paper_value_mode)).second;
    } else {
      BaselineOptions bo;
      bo.max_calls = cfg.baseline_max_calls;
      rep = baseline_eg_solve(prob, eps, std::min(prob.order(), 2), bo).second;
    }
    row.oracle_calls = rep.calls_total;
    row.residual = rep.residual;
    row.gap = rep.gap;
    row.flagged = rep.flagged;
    row.calls_outer = rep.calls_outer;
    row.calls_middle = rep.calls_middle;
    row.calls_inner = rep.calls_inner;
    row.calls_polish = rep.calls_polish;
    row.wall_seconds = rep.wall_seconds;
  } catch (const std::exception& e) {
    row.flagged = true;
    row.error = e.what();
  }
  return row;
}

}  // namespace

BenchResult run_suite(const BenchConfig& cfg, int jobs) {
  struct Task {
    const nlohmann::json* spec;
    const std::string* solver;
    double eps;
    unsigned seed;
  };
  std::vector<Task> tasks;
  for (const auto& spec : cfg.problems)
    for (const auto& solver : cfg.solvers)
      for (double eps : cfg.eps)
        for (unsigned seed : cfg.seeds) tasks.push_back({&spec, &solver, eps, seed});

  BenchResult res;
  res.rows.resize(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      res.rows[i] = run_row(cfg, *tasks[i].spec, *tasks[i].solver, tasks[i].eps, tasks[i].seed);
      res.rows[i].index = i;
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int flagged = 0, failed = 0;
  for (const BenchRow& r : res.rows) {
    if (!r.error.empty()) ++failed;
    else if (r.flagged) ++flagged;
  }
  res.exit_code = (flagged + failed) > 0 ? 2 : 0;
  nlohmann::json slopes = nlohmann::json::array();
  for (const auto& spec : cfg.problems) {
    for (const auto& solver : cfg.solvers) {
      for (unsigned seed : cfg.seeds) {
        std::vector<std::pair<double, double>> pts;
        std::string name;
        for (const BenchRow& r : res.rows) {
          if (r.solver != solver || r.seed != seed || !r.error.empty()) continue;
          if (&spec != tasks[r.index].spec) continue;
          name = r.problem;
          pts.emplace_back(r.eps, static_cast<double>(r.oracle_calls));
        }
        if (pts.size() < 3) continue;
        const RateFit f = fit_rate(pts);
        slopes.push_back({{"problem", name}, {"solver", solver}, {"seed", seed},
                          {"slope", f.slope}, {"half_width", f.half_width}, {"flagged", f.flagged}});
      }
    }
  }
  res.summary = {{"config", cfg.to_json()},
                 {"rows", res.rows.size()},
                 {"flagged", flagged},
                 {"failed", failed},
                 {"slopes", slopes}};
  return res;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "index,problem,solver,p,eps,seed,oracle_calls,residual,gap,flagged,calls_outer,"
        "calls_middle,calls_inner,calls_polish,error\n";
  for (const BenchRow& r : rows) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    os << r.index << ',' << r.problem << ',' << r.solver << ',' << r.p << ',' << format17(r.eps)
       << ',' << r.seed << ',' << r.oracle_calls << ',' << format17(r.residual) << ','
       << (r.gap ? format17(*r.gap) : "") << ',' << (r.flagged ? 1 : 0) << ',' << r.calls_outer
       << ',' << r.calls_middle << ',' << r.calls_inner << ',' << r.calls_polish << ',' << err
       << '\n';
  }
  return os.str();
}

std::string timing_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "index,wall_seconds\n";
  for (const BenchRow& r : rows) os << r.index << ',' << format17(r.wall_seconds) << '\n';
  return os.str();
}

void write_suite(const BenchResult& res, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  std::ofstream(d / "results.csv") << bench_csv(res.rows);
  std::ofstream(d / "timing.csv") << timing_csv(res.rows);
  std::ofstream(d / "summary.json") << res.summary.dump(2) << '\n';
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& eps_count) {
  const size_t n = eps_count.size();
  if (n < 3) throw std::invalid_argument("fit_rate: need at least 3 rows");
  std::vector<double> xs, ys;
  for (const auto& [eps, count] : eps_count) {
    if (!(eps > 0.0) || !(count > 0.0)) throw std::invalid_argument("fit_rate: eps and count must be > 0");
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(std::log(count));
  }
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit f;
  if (sxx <= 0.0) throw std::invalid_argument("fit_rate: all eps equal");
  if (syy == 0.0) {
    f.flagged = true;
    f.intercept = my;
    return f;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = ys[i] - f.intercept - f.slope * xs[i];
    sse += e * e;
  }
  // Two-sided 97.5% Student t quantiles for 1..10 degrees of freedom.
  static const double tq[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
  const size_t dof = n - 2;
  const double t = dof <= 10 ? tq[dof - 1] : 1.96 + 2.5 / dof;
  f.half_width = t * std::sqrt(sse / dof / sxx);
  return f;
}

std::vector<LowerBoundRow> lowerbound_experiment(int p, const std::vector<int>& T_list,
                                                 const std::string& schedule, double dz) {
  std::vector<LowerBoundRow> rows;
  for (int T : T_list) {
    HardInstanceInfo info;
    const SaddleProblem prob = hard_instance(p, T, 1.0, dz, &info);
    const int q = std::min(p, 2);
    const double M = q == 1 ? prob.L1() : 2.0 * prob.Lp();
    const AlgClassRun run = run_alg_class(prob, make_schedule(schedule, T, q, M));
    const std::vector<FloorRow> fr = residual_floor(prob, info, run);
    LowerBoundRow row;
    row.T = T;
    row.p = p;
    row.analytic_floor = analytic_floor(info);
    row.measured_residual = std::numeric_limits<double>::infinity();
    for (const FloorRow& r : fr) {
      row.measured_residual = std::min(row.measured_residual, r.residual);
      if (!r.precondition) ++row.precondition_violations;
    }
    row.ratio = row.measured_residual / row.analytic_floor;
    row.zero_respect_violations = run.violations;
    rows.push_back(row);
  }
  return rows;
}

std::string lowerbound_csv(const std::vector<LowerBoundRow>& rows) {
  std::ostringstream os;
  os << "T,p,measured_residual,analytic_floor,ratio,zero_respect_violations,precondition_violations\n";
  for (const LowerBoundRow& r : rows) {
    os << r.T << ',' << r.p << ',' << format17(r.measured_residual) << ','
       << format17(r.analytic_floor) << ',' << format17(r.ratio) << ','
       << r.zero_respect_violations << ',' << r.precondition_violations << '\n';
  }
  return os.str();
}

}  // namespace saddle
