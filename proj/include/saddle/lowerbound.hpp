// Algorithm-class runs on the chain hard instances: support tracking and
// comparison of measured tangent residuals with the analytic floor.
#pragma once

#include <string>
#include <vector>

#include "saddle/problems.hpp"

namespace saddle {

// A: x-step on grad_x f(., y_bar). B: y-step on -grad_y f(x_bar, .).
// C: joint step on F. EgCorrector: z_{t+1} = P(z_bar - F(w_bar)/M), the
// extragradient update, with w_bar also taken from the span of the history.
enum class StepOption { A, B, C, EgCorrector };

struct AlgStep {
  StepOption option = StepOption::C;
  int q = 1;
  double M = 1.0;
  // Anchor x_bar = sum_i x_coef[i] x_i over the history so far (likewise y).
  std::vector<double> x_coef, y_coef;
  // Evaluation point for EgCorrector.
  std::vector<double> w_coef;
};

struct AlgClassRun {
  std::vector<AlgStep> steps;
  std::vector<Vec> x, y;       // x_0..x_T, y_0..y_T
  std::vector<int> x_support;  // largest 1-based index with |x_i| > tol (0 if none)
  std::vector<int> y_support;
  int violations = 0;          // iterates with supp beyond index t
};

inline constexpr double kSupportTol = 1e-12;

int support_size(const Vec& v, double tol = kSupportTol);

// Schedules of length T: "eg" (C half-step then corrector), "tensor" (all C
// from the last iterate), "alternating" (A then B from the last iterate) and
// "averaged" (C from (z_t + z_{t-1})/2).
std::vector<AlgStep> make_schedule(const std::string& kind, int T, int q, double M);

// Runs the schedule from z_0 = 0. Throws if a step references iterates that
// do not exist yet.
AlgClassRun run_alg_class(const SaddleProblem& problem, const std::vector<AlgStep>& schedule);

struct FloorRow {
  int t = 0;
  double residual = 0.0;
  double floor = 0.0;
  bool precondition = true;  // x_{T+1} = y_{T+1} = 0
};

// Floor Lp (D/sqrt2)^{p+1} / (2^{p+1} p! (T+1)^{(3p-1)/2} D) of the unscaled
// instance, D = sqrt(2(T+1)), divided by beta^p for a scaled one.
double analytic_floor(const HardInstanceInfo& info);

std::vector<FloorRow> residual_floor(const SaddleProblem& problem, const HardInstanceInfo& info,
                                     const AlgClassRun& run);

}  // namespace saddle
