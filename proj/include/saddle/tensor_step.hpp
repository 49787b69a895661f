// The q-th order tensor step for monotone operators (q in {1, 2}) and the
// inexact proximal oracle built from it.
#pragma once

#include "saddle/geometry.hpp"
#include "saddle/problems.hpp"

namespace saddle {

struct TensorStepConfig {
  int q = 1;
  double M = 1.0;
  double vi_tol = 1e-10;  // relative: target is vi_tol * (1 + ||F(z_bar)||)
  int max_inner_iters = 10000;
  double bisection_tol = 1e-12;
};

struct TensorStepResult {
  Vec z;
  double model_residual = 0.0;
  bool converged = true;
  bool constrained = false;
  int inner_iters = 0;
};

// F_{q-1}(z; z_bar): F(z_bar) for q = 1, F(z_bar) + J(z_bar)(z - z_bar) for q = 2.
Vec taylor_operator(const OperatorEval& at_bar, const Vec& z_bar, const Vec& z, int q);
Vec taylor_operator(const OperatorView& op, const Vec& z_bar, const Vec& z, int q);

// Regularized model: taylor_operator + (M/q!)||z - z_bar||^{q-1}(z - z_bar).
Vec model_operator(const OperatorEval& at_bar, const Vec& z_bar, const Vec& z, int q, double M);

// Solves the model VI at z_bar given F (and J for q = 2) evaluated there.
TensorStepResult tensor_step(const OperatorEval& at_bar, const Domain& domain, const Vec& z_bar,
                             const TensorStepConfig& cfg);
// Convenience form: evaluates the operator at z_bar (one oracle call).
TensorStepResult tensor_step(const OperatorView& op, const Domain& domain, const Vec& z_bar,
                             const TensorStepConfig& cfg);

struct ProxCertificate {
  Vec z;
  Vec u;  // element of the normal cone at z
  double lambda = 0.0;
  double residual = 0.0;  // ||grad h(z) + u + lambda (z - z_bar)||
  double bound = 0.0;     // (lambda/2)||z - z_bar|| + delta
  bool ok = true;
  // Derivatives of h at z, kept so callers can reuse the evaluation.
  Derivs at_z;
};

// Tensor step on grad h at z_bar. lambda = gamma ||z - z_bar||^{q-1}; the
// certificate holds for gamma = M/q! when h has M/2-Lipschitz q-th derivatives.
ProxCertificate iprox_via_tensor(const FunctionView& h, const Vec& z_bar, double gamma,
                                 double delta, const TensorStepConfig& cfg);

}  // namespace saddle
