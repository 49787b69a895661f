// Saddle-problem oracles, built-in games, the regularized surrogates
// f_eps / g_eps / h_eps and the chain-structured hard instances.
#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "saddle/geometry.hpp"

namespace saddle {

// Derivatives up to the requested order; hess is empty below order 2.
struct Derivs {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

using RawOracle = std::function<Derivs(const Vec& z, int order)>;

class SaddleProblem {
 public:
  SaddleProblem(std::string name, Domain x_domain, Domain y_domain, int p, double L1, double Lp,
                RawOracle oracle);

  // Builds a problem whose oracle is this one's plus extra terms. The new
  // problem shares the call counter: one call to it is one call to f.
  SaddleProblem derived(std::string name, std::function<void(const Vec&, int, Derivs&)> add_terms,
                        double L1, double Lp) const;

  Derivs eval(const Vec& z, int order) const;

  const std::string& name() const { return name_; }
  const Domain& x_domain() const { return x_; }
  const Domain& y_domain() const { return y_; }
  const Domain& domain() const { return z_; }
  int nx() const { return x_.dim(); }
  int ny() const { return y_.dim(); }
  int dim() const { return z_.dim(); }
  int order() const { return p_; }
  double L1() const { return L1_; }
  double Lp() const { return Lp_; }
  long oracle_calls() const { return counter_->load(); }

  Vec join(const Vec& x, const Vec& y) const;
  Vec x_part(const Vec& z) const { return z.head(nx()); }
  Vec y_part(const Vec& z) const { return z.tail(ny()); }

  // Moduli such that x -> f is (p+1)th-order mu_x-uniformly convex and
  // y -> -f is (p+1)th-order mu_y-uniformly convex (0 when unknown).
  double mu_x = 0.0;
  double mu_y = 0.0;
  // Exact duality gap when the inner problems have closed forms.
  std::function<double(const Vec&)> closed_form_gap;
  std::optional<Vec> known_saddle;

 private:
  std::string name_;
  Domain x_, y_, z_;
  int p_;
  double L1_, Lp_;
  std::shared_ptr<const RawOracle> raw_;
  std::shared_ptr<std::atomic<long>> counter_;
};

Derivs oracle_eval(const SaddleProblem& problem, const Vec& z, int order);

// Operator F with optional Jacobian.
struct OperatorEval {
  Vec F;
  Mat J;
};

// F(z) = (grad_x f, -grad_y f) for a saddle problem, or any standalone
// monotone operator.
class OperatorView {
 public:
  using Fn = std::function<OperatorEval(const Vec&, int)>;
  explicit OperatorView(const SaddleProblem& problem);
  OperatorView(Domain domain, int order, double L1, double Lp, Fn fn);

  OperatorEval eval(const Vec& z, int order) const { return fn_(z, order); }
  Vec F(const Vec& z) const { return fn_(z, 1).F; }
  const Domain& domain() const { return domain_; }
  int order() const { return order_; }
  double L1() const { return L1_; }
  double Lp() const { return Lp_; }

 private:
  Domain domain_;
  int order_;
  double L1_, Lp_;
  Fn fn_;
};

Vec saddle_operator(const Derivs& d, int nx);
Mat saddle_jacobian(const Derivs& d, int nx);

// A convex function to be minimized, with its constants. mu is the
// (p+1)th-order uniform convexity modulus.
struct FunctionView {
  Domain domain;
  int p = 1;
  double L1 = 0.0;
  double Lp = 0.0;
  double mu = 0.0;
  std::function<Derivs(const Vec&, int)> eval;
};

// x -> f(x, y) and y -> -f(x, y).
FunctionView slice_x(const SaddleProblem& problem, const Vec& y);
FunctionView slice_y_neg(const SaddleProblem& problem, const Vec& x);
OperatorView gradient_operator(const FunctionView& h);

// d(v) = ||v||^{p+1}/(p+1) with gradient and Hessian.
Derivs power_regularizer(const Vec& v, int p, int order);

SaddleProblem regularize_f_eps(const SaddleProblem& problem, const Vec& z0, double mu_x,
                               double mu_y);
SaddleProblem surrogate_g(const SaddleProblem& f_eps, const Vec& x_bar, double gamma);
SaddleProblem surrogate_h(const SaddleProblem& f_eps, const Vec& x_bar, const Vec& y_bar,
                          double gamma);

// f(x, y) = sum_i phi_i(x_i) + x'Ay + b'x + c'y - sum_j psi_j(y_j) on boxes,
// with phi_i(t) = sx_i/(k+1)|t - ax_i|^{k+1} (likewise psi); sx = 0 gives a
// bilinear game.
struct SeparableGame {
  Mat A;
  Vec b, c;
  Vec sx, ax, sy, ay;
  int k = 1;
};
SaddleProblem separable_game(std::string name, const SeparableGame& g, const Vec& xlo,
                             const Vec& xhi, const Vec& ylo, const Vec& yhi, int p);

struct HardInstanceInfo {
  int T = 0;
  int p = 1;
  double Lp = 1.0;
  double beta = 1.0;      // 1 for the unscaled instance
  double D_bar = 0.0;     // diameter of the unscaled domain
};

// Chain instance on X = ordered box, Y = [0,1]^{T+1}; dz <= 0 keeps it unscaled.
SaddleProblem hard_instance(int p, int T, double Lp, double dz, HardInstanceInfo* info = nullptr);

struct LinInstanceInfo {
  int T = 0;
  double D_x_paper = 0.0;  // 8 T^{3/2}
  double D_y_paper = 0.0;  // T^{1/2}
  double gap_lower_bound = 0.0;
};
SaddleProblem lin_hard_instance(int p, int T, double Lp, LinInstanceInfo* info = nullptr);

// Built-in problem from a config object
// {"problem": "bilinear"|"quadratic"|"power"|"hard_new"|"hard_lin", "p", "dim"|"T", "Lp", "L1", "seed"}.
SaddleProblem make_problem(const nlohmann::json& spec);

struct GapEstimate {
  double gap = 0.0;
  double error = 0.0;  // true gap lies in [gap, gap + error]
};
// Minimizer of a convex function started from a point.
using InnerSolver = std::function<Vec(const FunctionView&, const Vec&)>;
GapEstimate duality_gap(const SaddleProblem& problem, const Vec& z,
                        const InnerSolver* solver = nullptr);

struct DerivativeReport {
  bool ok = true;
  double grad_error = 0.0;
  double hess_error = 0.0;
  std::vector<std::string> failures;
};
DerivativeReport check_derivatives(const SaddleProblem& problem, const Vec& z, double tol = 0.0);

}  // namespace saddle
