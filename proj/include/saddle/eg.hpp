// Restarted q-th order extragradient (the inner loop), the gradient polish
// step and the dual proximal oracle it provides to the middle loop.
#pragma once

#include <vector>

#include "saddle/problems.hpp"
#include "saddle/tensor_step.hpp"

namespace saddle {

struct EgIterRecord {
  double step_norm = 0.0;  // ||z_{t+1/2} - z_t||
  double eta = 0.0;
  double half_residual = 0.0;  // tangent residual at z_{t+1/2}
};

struct EgTrace {
  std::vector<EgIterRecord> iters;
  std::vector<Vec> epoch_points;
  long oracle_calls = 0;
};

struct EgEpochResult {
  Vec z_avg;
  Vec best_half;  // half-iterate with the smallest tangent residual
  double best_half_residual = 0.0;
  bool exact = false;  // zero movement: half-iterate solves the VI
  EgTrace trace;
};

EgEpochResult eg_epoch(const OperatorView& op, const Domain& domain, const Vec& z0, double M, int T,
                       int q);

struct EgConfig {
  double M = 1.0;
  int q = 1;
  int T3 = 1;
  int S3 = 1;
  double zeta3 = 0.0;
  bool adaptive_stop = true;
  // Certification: <F(z) - F(z*), z - z*> >= kappa ||z - z*||^{q+1}.
  double kappa = 0.0;
};

// Epoch length from the Appendix-B contraction bound with distance factor rho
// per epoch, for M = 32 Lt, uniform convexity gamma/2^{p-1}.
int eg_epoch_length(double Lt, double gamma, int p, double rho = 0.5);

struct RestartedEgResult {
  Vec z;
  int epochs = 0;
  double residual = 0.0;   // tangent residual at z
  double dist_bound = 0.0; // certified ||z - z*||
  bool certified = false;
  EgTrace trace;
};

RestartedEgResult restarted_eg(const OperatorView& op, const Vec& z0, const EgConfig& cfg);

struct PolishResult {
  Vec z_hat;
  Vec c_hat;
  Vec Fz;
  Vec Fz_hat;
  double measured = 0.0;  // ||F(z_hat) + c_hat||
};

// z_hat = P(z - F(z)/Lt), c_hat = Lt (z - z_hat) - F(z).
PolishResult polish_step(const OperatorView& op, const Domain& domain, const Vec& z, double Lt);
PolishResult polish_step(const OperatorView& op, const Domain& domain, const Vec& z, const Vec& Fz,
                         double Lt);

struct PsiProxConfig {
  EgConfig eg;
  double L_tilde = 1.0;  // polish constant L1 + p max{(gamma+mu_x) D_X^{p-1}, ...}
  double L_cross = 1.0;  // Lipschitz constant of grad_y f in x
  double mu_x = 0.0;     // regularization mu_x of f_eps
  int max_epochs = 50;
  bool strict_epochs = false;  // run exactly S3 epochs
};

struct PsiProxResult {
  Vec y;        // y_tilde
  Vec v;        // normal-cone part for y
  Vec z_hat;    // full polished point (x_hat, y_hat)
  Vec c_hat;
  ProxCertificate cert;
  int epochs = 0;
  int retries = 0;
};

// Dual proximal oracle of -Psi(.; x_bar) at y_bar from g_eps = f_eps + gamma-term in x.
PsiProxResult iprox_psi(const SaddleProblem& g_eps, const Vec& x_bar, const Vec& y_bar,
                        double gamma, double delta2, const PsiProxConfig& cfg,
                        const Vec& z_start);

}  // namespace saddle
