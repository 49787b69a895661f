// Minimax-AIPE: outer AIPE on the primal function, middle AIPE on the dual of
// the one-sided surrogate, restarted EG on the two-sided surrogate inside.
// Also the plain high-order EG baseline.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "saddle/aipe.hpp"
#include "saddle/eg.hpp"
#include "saddle/problems.hpp"

namespace saddle {

struct MinimaxConfig {
  double eps = 1e-3;
  int p = 1;
  double gamma = 1.0;
  double mu_x = 0.0;
  double mu_y = 0.0;
  double Lp_eff = 1.0;
  int T1 = 1, T2 = 1, T3 = 1;
  int S1 = 1, S2 = 1, S3 = 1;
  double delta1 = 0.0, delta2 = 0.0;
  double zeta1 = 0.0, zeta2 = 0.0, zeta3 = 0.0;
  // Values the Appendix-B chain gives before the practical override.
  double delta1_chain = 0.0, delta2_chain = 0.0;
  double L1_tilde = 0.0;        // f_eps gradient constant
  double L1x_tilde = 0.0;       // g_eps gradient constant in x
  double L1gamma_tilde = 0.0;   // h_eps gradient constant
  double Lpgamma_tilde = 0.0;   // h_eps p-th derivative constant
  double M_inner = 0.0;         // 32 * Lpgamma_tilde
  bool practical_mode = true;
  // Practical-mode controls.
  double inner_residual_factor = 0.1;  // inner solves stop at residual <= factor * delta
  int max_outer_epochs = 60;
  int max_middle_epochs = 60;
  int max_inner_epochs = 60;
  int max_solver_epochs = 200;
  std::optional<Vec> z0;

  nlohmann::json to_json() const;
};

// Parameters for an eps-solution of problem. Throws if eps / min(D_X^p, D_Y^p) > Lp
// (checked when Lp > 0).
MinimaxConfig derive_parameters(const SaddleProblem& problem, double eps, bool practical_mode = true);

enum class Level { Outer = 0, Middle = 1, Inner = 2, Polish = 3 };
const char* level_name(Level l);

struct TraceRow {
  long oracle_calls = 0;
  double residual = 0.0;
  std::optional<double> gap;
  Level level = Level::Outer;
};

struct SolveReport {
  std::string problem;
  std::string solver;
  double eps = 0.0;
  Vec z;
  double residual = 0.0;  // tangent residual of the original operator at z
  std::optional<double> gap;
  bool flagged = false;
  std::vector<std::string> messages;
  long calls_outer = 0, calls_middle = 0, calls_inner = 0, calls_polish = 0;
  long calls_total = 0;  // counter delta over the solve
  long outer_iters = 0, middle_iters = 0, inner_epochs = 0;
  std::vector<TraceRow> trace;
  double wall_seconds = 0.0;
  nlohmann::json params;

  nlohmann::json to_json() const;  // no wall time inside "trace"
  std::string trace_csv() const;
};

// Value, gradient and maximizer for Phi(x) = max_y f_eps(x, y), or for the
// dual Psi(y) = min_x g_eps(x, y) with roles swapped.
struct InnerOracleOptions {
  double residual_factor = 0.1;  // 0: certified targets only
  double L_cross = 1.0;
  int max_epochs = 200;
};
struct InnerOracleResult {
  double value = 0.0;
  Vec grad;     // gradient of Phi at x (or of Psi at y)
  Vec argopt;   // y_hat (or x_hat)
  Vec full_grad;  // joint gradient of the problem at (x, y_hat)
  double residual = 0.0;
  double gap_bound = 0.0;
  double dist_bound = 0.0;
  bool certified = false;  // value and gradient errors provably <= delta
  bool met = false;        // stopping rule satisfied
};
InnerOracleResult ifunc_igrad_primal(const SaddleProblem& f_eps, const Vec& x, double delta,
                                     const InnerOracleOptions& opt = {},
                                     const Vec* warm = nullptr);
InnerOracleResult ifunc_igrad_dual(const SaddleProblem& g_eps, const Vec& y, double delta,
                                   const InnerOracleOptions& opt = {}, const Vec* warm = nullptr);

struct PhiProxResult {
  Vec x;  // x_tilde
  Vec u;  // u_tilde
  ProxCertificate cert;
  int middle_iters = 0;
  int inner_epochs = 0;
};

// Middle loop: Phi-prox at x_bar. f_eps must come from regularize_f_eps.
PhiProxResult iprox_phi(const SaddleProblem& f_eps, const Vec& x_bar, double gamma, double delta1,
                        const MinimaxConfig& cfg);

std::pair<Vec, SolveReport> solve(const SaddleProblem& problem, double eps,
                                  const MinimaxConfig& cfg);
std::pair<Vec, SolveReport> solve(const SaddleProblem& problem, double eps);

struct BaselineOptions {
  long max_calls = 10000000;
  std::optional<Vec> z0;
};
std::pair<Vec, SolveReport> baseline_eg_solve(const SaddleProblem& problem, double eps, int q,
                                              const BaselineOptions& opt = {});

}  // namespace saddle
