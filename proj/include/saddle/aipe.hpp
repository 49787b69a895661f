// Accelerated inexact proximal extragradient with restarts for uniformly
// convex minimization, driven by inexact value, gradient and prox oracles.
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "saddle/problems.hpp"
#include "saddle/tensor_step.hpp"

namespace saddle {

struct OracleCounts {
  long ifunc = 0;
  long igrad = 0;
  long iprox = 0;
};

struct OracleBundle {
  std::function<double(const Vec&, double)> ifunc;
  std::function<Vec(const Vec&, double)> igrad;
  std::function<ProxCertificate(const Vec&, double, double)> iprox;
  std::shared_ptr<OracleCounts> counts = std::make_shared<OracleCounts>();

  double func(const Vec& z, double delta) const;
  Vec grad(const Vec& z, double delta) const;
  ProxCertificate prox(const Vec& z_bar, double gamma, double delta) const;
};

struct SolveAResult {
  double a_prime = 0.0;
  double A_prime = 0.0;
};

// Positive root of A + a = 2 lambda' a^2.
SolveAResult solve_a(double A, double lambda_prime);

struct AipeIterRecord {
  double A = 0.0;        // A_{t+1}
  double a = 0.0;        // a_{t+1}
  double a_prime = 0.0;  // a'_{t+1}
  double A_prime = 0.0;  // A'_{t+1}
  double lambda = 0.0;
  double lambda_prime = 0.0;  // lambda'_{t+1} used in the test
  double gamma_t = 1.0;
  int lambda_action = 0;  // -1 halved, +1 doubled
  double h_hat = 0.0;     // iFunc(z_t)
  double h_tilde = 0.0;   // iFunc(z_tilde_t)
  double coef_bar = 0.0;  // weight of z_t in z_bar_t
  double coef_next = 0.0; // weight of z_t in z_{t+1}
  double cert_residual = 0.0;
  double cert_bound = 0.0;
};

struct AipeOptions {
  // Stop when the best recorded value has not dropped by early_exit_tol for
  // this many iterations (0 disables). A negative tol means "use delta".
  int early_exit_window = 5;
  double early_exit_tol = -1.0;
  // Called with each new z_tilde_{t+1}; returning true ends the run there.
  std::function<bool(const Vec&)> stop;
  // End the epoch when a prox certificate misses its bound.
  bool abort_on_miss = true;
  // Ground-truth gap h(z) - h*, logged per epoch when set.
  std::function<double(const Vec&)> gap;
};

struct AipeEpochResult {
  Vec z_next;
  double best_value = 0.0;
  bool from_tilde = true;  // selected from the z_tilde family
  bool fixed_point = false;
  bool stopped = false;
  bool aborted = false;
  bool early_exit = false;
  std::vector<AipeIterRecord> iters;
  std::vector<Vec> z;        // z_0..z_T
  std::vector<Vec> v;        // v_0..v_T
  std::vector<Vec> z_bar;    // z_bar_0..z_bar_{T-1}
  std::vector<Vec> z_tilde;  // z_tilde_0..z_tilde_T
};

AipeEpochResult aipe_epoch(const OracleBundle& oracles, const Domain& domain, const Vec& z_start,
                           double gamma, double delta, int T, int q,
                           const AipeOptions& opt = {});

struct AipeRestartResult {
  Vec z;
  std::vector<AipeEpochResult> epochs;
  std::vector<double> gaps;  // gap(z^{(s)}) for s = 0..S when opt.gap is set
  bool stopped = false;
  bool aborted = false;
};

AipeRestartResult aipe_restart(const OracleBundle& oracles, const Domain& domain, const Vec& z0,
                               double gamma, double delta, int T, int S, int q,
                               const AipeOptions& opt = {});

// Epoch length ceil(8 (gamma/mu)^{2/(3p+1)}).
int default_epoch_length(double gamma, double mu, int p);

// Right-hand side of the delta condition for AIPE-restart.
double aipe_delta_bound(double eps, double mu, double Delta, double D, int p);

// Caches the last few evaluations of h; a cached entry serves any order up
// to the one it was computed with and costs no oracle call.
FunctionView memoized(const FunctionView& h, int capacity = 8);

struct OptmsOptions {
  int T = 0;  // 0: default_epoch_length
  int S = 0;  // 0: ceil(log2(Delta/eps))
  // Certified stop: h(z) - h* <= eps and ||z - z*|| <= dist_tol from the
  // tangent residual at z_tilde and uniform convexity.
  bool certify = true;
  double dist_tol = 0.0;  // 0: no distance requirement
  // Also stop once the tangent residual is at most this (0 disables).
  double residual_tol = 0.0;
  int max_epochs = 200;
  std::function<double(const Vec&)> gap;
};

struct OptmsResult {
  Vec z;
  Vec grad;               // grad h(z)
  double value = 0.0;     // h(z)
  double residual = 0.0;  // tangent residual of grad h at z
  double gap_bound = 0.0;
  double dist_bound = 0.0;
  double Delta = 0.0;
  bool certified = false;  // gap and distance bounds met
  bool met = false;        // certified, or residual_tol reached
  int T = 0;
  int S = 0;
  AipeRestartResult run;
};

// Certified value gap and distance for a mu-uniformly convex h of order p+1.
struct ConvexityBounds {
  double gap = 0.0;
  double dist = 0.0;
};
ConvexityBounds uniform_convexity_bounds(double residual, double mu, int p, double D);

// AIPE-restart with exact oracles and tensor-step prox (M = 2 Lp,
// gamma = 2 Lp / p!).
OptmsResult optms_restart(const FunctionView& h, const Vec& z0, double eps,
                          const OptmsOptions& opt = {});

}  // namespace saddle
