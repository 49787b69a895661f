// Benchmark suites, rate fits and lower-bound experiments with CSV/JSON output.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "saddle/lowerbound.hpp"
#include "saddle/minimax.hpp"

namespace saddle {

struct BenchConfig {
  std::vector<nlohmann::json> problems;  // make_problem specs; "seed" is filled per row
  std::vector<std::string> solvers = {"minimax_aipe"};
  std::vector<double> eps;               // strictly decreasing
  int p = 0;                             // 0: take p from each problem spec
  std::vector<unsigned> seeds = {0};
  bool paper_value_mode = false;
  long baseline_max_calls = 10000000;
  std::string out_dir;

  static BenchConfig from_json(const nlohmann::json& j);  // applies BENCH_SEED
  nlohmann::json to_json() const;
};

struct BenchRow {
  size_t index = 0;
  std::string problem;
  std::string solver;
  int p = 1;
  double eps = 0.0;
  unsigned seed = 0;
  long oracle_calls = 0;
  double residual = 0.0;
  std::optional<double> gap;
  bool flagged = false;
  std::string error;  // set when the row could not run
  long calls_outer = 0, calls_middle = 0, calls_inner = 0, calls_polish = 0;
  double wall_seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  nlohmann::json summary;
  int exit_code = 0;  // 2 when any row is flagged or failed
};

// Rows ordered by (problem, solver, eps, seed) index regardless of jobs.
BenchResult run_suite(const BenchConfig& cfg, int jobs = 1);

// Header and rows; 17 significant digits, no timing column.
std::string bench_csv(const std::vector<BenchRow>& rows);
std::string timing_csv(const std::vector<BenchRow>& rows);

// Writes results.csv, timing.csv and summary.json into dir.
void write_suite(const BenchResult& res, const std::string& dir);

struct RateFit {
  double slope = 0.0;
  double half_width = 0.0;  // 95% interval
  double intercept = 0.0;
  bool flagged = false;     // degenerate data
};

// Least-squares slope of log(count) against log(1/eps); needs >= 3 rows.
RateFit fit_rate(const std::vector<std::pair<double, double>>& eps_count);

struct LowerBoundRow {
  int T = 0;
  int p = 1;
  double measured_residual = 0.0;  // smallest over the iterates
  double analytic_floor = 0.0;
  double ratio = 0.0;
  int zero_respect_violations = 0;
  int precondition_violations = 0;
};

// For each T: hard instance (unscaled when dz <= 0), schedule of T steps.
std::vector<LowerBoundRow> lowerbound_experiment(int p, const std::vector<int>& T_list,
                                                 const std::string& schedule, double dz = 0.0);
std::string lowerbound_csv(const std::vector<LowerBoundRow>& rows);

std::string format17(double v);

}  // namespace saddle
