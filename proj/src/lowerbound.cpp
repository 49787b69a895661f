#include "saddle/lowerbound.hpp"

#include <cmath>
#include <stdexcept>

#include "saddle/tensor_step.hpp"

namespace saddle {
namespace {

double factorial(int q) { return q == 2 ? 2.0 : 1.0; }

Vec combine(const std::vector<Vec>& hist, const std::vector<double>& coef, int t, const char* what) {
  if (static_cast<int>(coef.size()) > t + 1) {
    throw std::invalid_argument(std::string("run_alg_class: ") + what + " at step " +
                                std::to_string(t) + " uses iterates beyond x_" + std::to_string(t));
  }
  Vec out = Vec::Zero(hist.front().size());
  for (size_t i = 0; i < coef.size(); ++i) {
    if (!std::isfinite(coef[i])) throw std::invalid_argument("run_alg_class: non-finite coefficient");
    out += coef[i] * hist[i];
  }
  return out;
}

std::vector<double> last_of(int t) {
  std::vector<double> c(t + 1, 0.0);
  c[t] = 1.0;
  return c;
}

}  // namespace

int support_size(const Vec& v, double tol) {
  for (Eigen::Index i = v.size() - 1; i >= 0; --i) {
    if (std::abs(v[i]) > tol) return static_cast<int>(i) + 1;
  }
  return 0;
}

std::vector<AlgStep> make_schedule(const std::string& kind, int T, int q, double M) {
  if (T < 0) throw std::invalid_argument("make_schedule: T must be >= 0");
  if (q != 1 && q != 2) throw std::invalid_argument("make_schedule: q must be 1 or 2");
  std::vector<AlgStep> s;
  for (int t = 0; t < T; ++t) {
    AlgStep st;
    st.q = q;
    st.M = M;
    if (kind == "eg") {
      if (t % 2 == 0) {
        st.option = StepOption::C;
        st.x_coef = st.y_coef = last_of(t);
      } else {
        // z_{t+1} = P(z_{t-1} - F(z_t)/M)
        st.option = StepOption::EgCorrector;
        st.x_coef = st.y_coef = std::vector<double>(t + 1, 0.0);
        st.x_coef[t - 1] = st.y_coef[t - 1] = 1.0;
        st.w_coef = last_of(t);
      }
    } else if (kind == "tensor") {
      st.option = StepOption::C;
      st.x_coef = st.y_coef = last_of(t);
    } else if (kind == "alternating") {
      st.option = t % 2 == 0 ? StepOption::A : StepOption::B;
      st.x_coef = st.y_coef = last_of(t);
    } else if (kind == "averaged") {
      st.option = StepOption::C;
      st.x_coef = st.y_coef = last_of(t);
      if (t > 0) {
        st.x_coef[t] = st.y_coef[t] = 0.5;
        st.x_coef[t - 1] = st.y_coef[t - 1] = 0.5;
      }
    } else {
      throw std::invalid_argument("make_schedule: unknown schedule " + kind);
    }
    s.push_back(std::move(st));
  }
  return s;
}

AlgClassRun run_alg_class(const SaddleProblem& problem, const std::vector<AlgStep>& schedule) {
  const int nx = problem.nx();
  const int ny = problem.ny();
  AlgClassRun run;
  run.steps = schedule;
  run.x.push_back(Vec::Zero(nx));
  run.y.push_back(Vec::Zero(ny));
  run.x_support.push_back(0);
  run.y_support.push_back(0);
  const OperatorView op(problem);
  for (int t = 0; t < static_cast<int>(schedule.size()); ++t) {
    const AlgStep& st = schedule[t];
    if (st.q < 1 || st.q > std::min(2, problem.order())) {
      throw std::invalid_argument("run_alg_class: order q out of range at step " + std::to_string(t));
    }
    if (!(st.M > 0.0)) throw std::invalid_argument("run_alg_class: M must be > 0");
    const Vec xb = combine(run.x, st.x_coef, t, "x_bar");
    const Vec yb = combine(run.y, st.y_coef, t, "y_bar");
    TensorStepConfig ts;
    ts.q = st.q;
    ts.M = st.M;
    Vec x_next = run.x[t];
    Vec y_next = run.y[t];
    switch (st.option) {
      case StepOption::A: {
        const Derivs d = problem.eval(problem.join(xb, yb), st.q);
        OperatorEval at;
        at.F = d.grad.head(nx);
        if (st.q >= 2) at.J = d.hess.topLeftCorner(nx, nx);
        x_next = tensor_step(at, problem.x_domain(), xb, ts).z;
        break;
      }
      case StepOption::B: {
        const Derivs d = problem.eval(problem.join(xb, yb), st.q);
        OperatorEval at;
        at.F = -d.grad.tail(ny);
        if (st.q >= 2) at.J = -d.hess.bottomRightCorner(ny, ny);
        y_next = tensor_step(at, problem.y_domain(), yb, ts).z;
        break;
      }
      case StepOption::C: {
        const Vec zb = problem.join(xb, yb);
        const Vec z = tensor_step(op.eval(zb, st.q), problem.domain(), zb, ts).z;
        x_next = z.head(nx);
        y_next = z.tail(ny);
        break;
      }
      case StepOption::EgCorrector: {
        const Vec wx = combine(run.x, st.w_coef, t, "w_bar");
        const Vec wy = combine(run.y, st.w_coef, t, "w_bar");
        const Vec zb = problem.join(xb, yb);
        const Vec z = project(problem.domain(), zb - op.F(problem.join(wx, wy)) / st.M);
        x_next = z.head(nx);
        y_next = z.tail(ny);
        break;
      }
    }
    const int sx = support_size(x_next);
    const int sy = support_size(y_next);
    if (sx > t + 1 || sy > t + 1) ++run.violations;
    run.x.push_back(std::move(x_next));
    run.y.push_back(std::move(y_next));
    run.x_support.push_back(sx);
    run.y_support.push_back(sy);
  }
  return run;
}

double analytic_floor(const HardInstanceInfo& info) {
  const int p = info.p;
  const double n = info.T + 1.0;
  const double D = std::sqrt(2.0 * n);
  const double gap_floor = info.Lp * std::pow(D / std::sqrt(2.0), p + 1) /
                           (std::pow(2.0, p + 1) * factorial(p) * std::pow(n, (3.0 * p - 1.0) / 2.0));
  return gap_floor / D / std::pow(info.beta, p);
}

std::vector<FloorRow> residual_floor(const SaddleProblem& problem, const HardInstanceInfo& info,
                                     const AlgClassRun& run) {
  const double floor = analytic_floor(info);
  const OperatorView op(problem);
  std::vector<FloorRow> rows;
  for (size_t t = 0; t < run.x.size(); ++t) {
    FloorRow r;
    r.t = static_cast<int>(t);
    r.precondition = std::abs(run.x[t][info.T]) <= kSupportTol && std::abs(run.y[t][info.T]) <= kSupportTol;
    const Vec z = problem.join(run.x[t], run.y[t]);
    r.residual = tangent_residual(problem.domain(), z, op.F(z));
    r.floor = floor;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace saddle
