#include "saddle/minimax.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace saddle {
namespace {

double factorial(int q) { return q == 2 ? 2.0 : 1.0; }

double floored(double v) { return std::max(v, 1e-14); }

// Largest t in [lo, hi] with f(t) <= target for increasing f (log bisection).
double largest_below(const std::function<double(double)>& f, double target, double lo, double hi) {
  if (f(hi) <= target) return hi;
  if (f(lo) > target) return lo;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (f(mid) <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi / lo < 1.0 + 1e-12) break;
  }
  return lo;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Memoized joint evaluations of a problem; keeps full derivatives so slice
// solvers can hand back the joint gradient for free.
class JointCache {
 public:
  explicit JointCache(int capacity = 16) : capacity_(capacity) {}
  Derivs eval(const SaddleProblem& P, const Vec& z, int order) {
    for (const Entry& e : entries_) {
      if (e.order >= order && e.z.size() == z.size() && e.z == z) return e.d;
    }
    Derivs d = P.eval(z, order);
    entries_.push_front({z, order, d});
    if (static_cast<int>(entries_.size()) > capacity_) entries_.pop_back();
    return d;
  }

 private:
  struct Entry {
    Vec z;
    int order;
    Derivs d;
  };
  int capacity_;
  std::deque<Entry> entries_;
};

// Per-level accounting of the shared oracle counter.
struct Accounting {
  const SaddleProblem* problem = nullptr;
  long start = 0;
  long last = 0;
  Level cur = Level::Outer;
  long counts[4] = {0, 0, 0, 0};

  void flush() {
    const long now = problem->oracle_calls();
    counts[static_cast<int>(cur)] += now - last;
    last = now;
  }
  long total() const { return problem->oracle_calls() - start; }
};

class LevelScope {
 public:
  LevelScope(Accounting* acc, Level l) : acc_(acc) {
    if (!acc_) return;
    acc_->flush();
    prev_ = acc_->cur;
    acc_->cur = l;
  }
  ~LevelScope() {
    if (!acc_) return;
    acc_->flush();
    acc_->cur = prev_;
  }
  LevelScope(const LevelScope&) = delete;
  LevelScope& operator=(const LevelScope&) = delete;

 private:
  Accounting* acc_;
  Level prev_ = Level::Outer;
};

template <class T>
const T* find_cached(const std::deque<std::pair<Vec, T>>& cache, const Vec& key) {
  for (const auto& e : cache) {
    if (e.first.size() == key.size() && e.first == key) return &e.second;
  }
  return nullptr;
}

template <class T>
const T& store(std::deque<std::pair<Vec, T>>& cache, const Vec& key, T value, size_t cap = 16) {
  cache.emplace_front(key, std::move(value));
  if (cache.size() > cap) cache.pop_back();
  return cache.front().second;
}

FunctionView cached_slice_neg_y(const SaddleProblem& P, const Vec& x,
                                const std::shared_ptr<JointCache>& cache) {
  FunctionView h;
  h.domain = P.y_domain();
  h.p = P.order();
  h.L1 = P.L1();
  h.Lp = P.Lp();
  h.mu = P.mu_y;
  const int ny = P.ny();
  h.eval = [P, x, ny, cache](const Vec& y, int order) {
    const Derivs d = cache->eval(P, P.join(x, y), order);
    Derivs out;
    out.value = -d.value;
    if (order >= 1) out.grad = -d.grad.tail(ny);
    if (order >= 2) out.hess = -d.hess.bottomRightCorner(ny, ny);
    return out;
  };
  return h;
}

FunctionView cached_slice_x(const SaddleProblem& P, const Vec& y,
                            const std::shared_ptr<JointCache>& cache) {
  FunctionView h;
  h.domain = P.x_domain();
  h.p = P.order();
  h.L1 = P.L1();
  h.Lp = P.Lp();
  h.mu = P.mu_x;
  const int nx = P.nx();
  h.eval = [P, y, nx, cache](const Vec& x, int order) {
    const Derivs d = cache->eval(P, P.join(x, y), order);
    Derivs out;
    out.value = d.value;
    if (order >= 1) out.grad = d.grad.head(nx);
    if (order >= 2) out.hess = d.hess.topLeftCorner(nx, nx);
    return out;
  };
  return h;
}

InnerOracleResult inner_solve(const SaddleProblem& P, const FunctionView& h,
                              const std::shared_ptr<JointCache>& cache, const Vec& fixed,
                              bool over_y, double delta, const InnerOracleOptions& opt,
                              const Vec* warm) {
  if (!(delta > 0.0)) throw std::invalid_argument("inner oracle: delta must be > 0");
  OptmsOptions oo;
  oo.certify = true;
  oo.dist_tol = delta / std::max(opt.L_cross, 1e-300);
  oo.residual_tol = opt.residual_factor * delta;
  oo.max_epochs = opt.max_epochs;
  const Vec start = warm ? project(h.domain, *warm) : project(h.domain, Vec::Zero(h.domain.dim()));
  const OptmsResult r = optms_restart(h, start, delta, oo);
  const Vec z = over_y ? P.join(fixed, r.z) : P.join(r.z, fixed);
  const Derivs d = cache->eval(P, z, 1);
  InnerOracleResult out;
  out.value = d.value;
  out.grad = over_y ? Vec(d.grad.head(P.nx())) : Vec(d.grad.tail(P.ny()));
  out.argopt = r.z;
  out.full_grad = d.grad;
  out.residual = r.residual;
  out.gap_bound = r.gap_bound;
  out.dist_bound = r.dist_bound;
  out.certified = r.certified;
  out.met = r.met;
  return out;
}

// Shared state of one solve (or of a standalone middle-loop call).
struct Context {
  const SaddleProblem* original = nullptr;
  SaddleProblem f_eps;
  MinimaxConfig cfg;
  Accounting* acc = nullptr;
  std::vector<TraceRow>* trace = nullptr;
  InnerOracleOptions iopt;
  std::deque<std::pair<Vec, InnerOracleResult>> phi_cache;
  std::shared_ptr<JointCache> f_cache = std::make_shared<JointCache>();
  std::optional<Vec> phi_warm;     // last y_hat
  std::optional<Vec> psi_warm;     // last x_hat
  std::optional<Vec> middle_warm;  // last y_tilde
  std::optional<Vec> inner_warm;   // last inner z_hat
  long middle_iters = 0;
  long inner_epochs = 0;
  std::vector<std::string> messages;

  explicit Context(SaddleProblem f) : f_eps(std::move(f)) {}

  long calls() const { return acc ? acc->total() : f_eps.oracle_calls(); }

  void row(Level l, double residual, std::optional<double> gap = std::nullopt) {
    if (trace) trace->push_back({calls(), residual, gap, l});
  }

  const InnerOracleResult& phi(const Vec& x) {
    if (const auto* hit = find_cached(phi_cache, x)) return *hit;
    const FunctionView h = cached_slice_neg_y(f_eps, x, f_cache);
    InnerOracleResult r = inner_solve(f_eps, h, f_cache, x, true, cfg.delta1, iopt,
                                      phi_warm ? &*phi_warm : nullptr);
    // Phi(x) = max_y f_eps; the slice minimized -f_eps.
    phi_warm = r.argopt;
    if (!r.met) messages.push_back("primal inner solve missed its target");
    return store(phi_cache, x, std::move(r));
  }
};

PhiProxResult middle_loop(Context& ctx, const Vec& x_bar) {
  const MinimaxConfig& cfg = ctx.cfg;
  const SaddleProblem& f_eps = ctx.f_eps;
  const int p = cfg.p;
  const int nx = f_eps.nx();
  const double gamma = cfg.gamma;
  const SaddleProblem g = surrogate_g(f_eps, x_bar, gamma);
  const Domain& X = f_eps.x_domain();
  const Domain& Y = f_eps.y_domain();
  auto g_cache = std::make_shared<JointCache>();
  std::deque<std::pair<Vec, InnerOracleResult>> psi_cache;

  auto psi = [&](const Vec& y) -> const InnerOracleResult& {
    if (const auto* hit = find_cached(psi_cache, y)) return *hit;
    const FunctionView h = cached_slice_x(g, y, g_cache);
    InnerOracleResult r = inner_solve(g, h, g_cache, y, false, cfg.delta2, ctx.iopt,
                                      ctx.psi_warm ? &*ctx.psi_warm : nullptr);
    ctx.psi_warm = r.argopt;
    if (!r.met) ctx.messages.push_back("dual inner solve missed its target");
    return store(psi_cache, y, std::move(r));
  };

  PsiProxConfig pcfg;
  pcfg.eg.M = cfg.M_inner;
  pcfg.eg.q = p;
  pcfg.eg.T3 = cfg.T3;
  pcfg.eg.S3 = cfg.S3;
  pcfg.eg.zeta3 = cfg.zeta3;
  pcfg.L_tilde = cfg.L1gamma_tilde;
  pcfg.L_cross = ctx.original ? ctx.original->L1() : f_eps.L1();
  pcfg.max_epochs = cfg.max_inner_epochs;
  pcfg.strict_epochs = !cfg.practical_mode;

  OracleBundle ob;
  ob.ifunc = [&](const Vec& y, double) { return -psi(y).value; };
  ob.igrad = [&](const Vec& y, double) { return Vec(-psi(y).grad); };
  ob.iprox = [&](const Vec& y_bar, double gam, double delta) {
    LevelScope scope(ctx.acc, Level::Inner);
    Vec start = ctx.inner_warm ? *ctx.inner_warm : f_eps.join(x_bar, y_bar);
    start = project(g.domain(), start);
    const PsiProxResult r = iprox_psi(g, x_bar, y_bar, gam, delta, pcfg, start);
    ctx.inner_warm = r.z_hat;
    ctx.inner_epochs += r.epochs;
    ctx.row(Level::Inner, r.cert.residual);
    if (!r.cert.ok) ctx.messages.push_back("inner prox certificate missed");
    return r.cert;
  };

  // Closing steps at y: x_hat from the dual oracle, x-polish, Phi certificate.
  auto closing = [&](const Vec& y) {
    const InnerOracleResult& ps = psi(y);
    const Vec x_hat = ps.argopt;
    const Vec gx = ps.full_grad.head(nx);
    PhiProxResult out;
    out.x = project(X, x_hat - gx / cfg.L1x_tilde);
    out.u = cfg.L1x_tilde * (x_hat - out.x) - gx;
    const Vec grad_phi = ctx.phi(out.x).grad;
    const Vec s = out.x - x_bar;
    const double ns = s.norm();
    ProxCertificate& c = out.cert;
    c.z = out.x;
    c.u = out.u;
    c.lambda = gamma * std::pow(ns, p - 1);
    c.residual = (grad_phi + c.lambda * s + out.u).norm();
    c.bound = 0.5 * c.lambda * ns + cfg.delta1;
    c.ok = c.residual <= c.bound;
    ctx.row(Level::Middle, c.residual);
    return out;
  };

  LevelScope scope(ctx.acc, Level::Middle);
  Vec y_start = ctx.middle_warm ? *ctx.middle_warm : ctx.phi(x_bar).argopt;
  y_start = project(Y, y_start);
  std::optional<PhiProxResult> stopped;
  AipeOptions ao;
  int S = cfg.S2;
  if (cfg.practical_mode) {
    S = cfg.max_middle_epochs;
    ao.abort_on_miss = false;
    ao.stop = [&](const Vec& y) {
      PhiProxResult c = closing(y);
      const bool ok = c.cert.ok;
      stopped = std::move(c);
      return ok;
    };
  } else {
    ao.early_exit_window = 0;
  }
  const long inner_before = ctx.inner_epochs;
  const AipeRestartResult run = aipe_restart(ob, Y, y_start, gamma, cfg.delta2, cfg.T2, S, p, ao);
  PhiProxResult out = run.stopped && stopped ? *stopped : closing(run.z);
  for (const auto& e : run.epochs) out.middle_iters += static_cast<int>(e.iters.size());
  out.inner_epochs = static_cast<int>(ctx.inner_epochs - inner_before);
  ctx.middle_iters += out.middle_iters;
  ctx.middle_warm = run.z;
  if (!out.cert.ok) ctx.messages.push_back("middle prox certificate missed");
  return out;
}

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

const char* level_name(Level l) {
  switch (l) {
    case Level::Outer: return "outer";
    case Level::Middle: return "middle";
    case Level::Inner: return "inner";
    case Level::Polish: return "polish";
  }
  return "?";
}

nlohmann::json MinimaxConfig::to_json() const {
  return {{"eps", eps},
          {"p", p},
          {"gamma", gamma},
          {"mu_x", mu_x},
          {"mu_y", mu_y},
          {"T1", T1}, {"T2", T2}, {"T3", T3},
          {"S1", S1}, {"S2", S2}, {"S3", S3},
          {"delta1", delta1}, {"delta2", delta2},
          {"delta1_chain", delta1_chain}, {"delta2_chain", delta2_chain},
          {"zeta1", zeta1}, {"zeta2", zeta2}, {"zeta3", zeta3},
          {"L1_tilde", L1_tilde}, {"L1x_tilde", L1x_tilde},
          {"L1gamma_tilde", L1gamma_tilde}, {"Lpgamma_tilde", Lpgamma_tilde},
          {"M_inner", M_inner},
          {"practical_mode", practical_mode}};
}

MinimaxConfig derive_parameters(const SaddleProblem& problem, double eps, bool practical_mode) {
  if (!(eps > 0.0)) throw std::invalid_argument("derive_parameters: eps must be > 0");
  MinimaxConfig c;
  const int p = problem.order();
  c.eps = eps;
  c.p = p;
  c.practical_mode = practical_mode;
  const double Dx = diameter(problem.x_domain());
  const double Dy = diameter(problem.y_domain());
  const double Dz = diameter(problem.domain());
  const double Dmin_p = std::pow(std::min(Dx, Dy), p);
  const double Lp = p == 1 ? problem.L1() : problem.Lp();
  if (Lp > 0.0 && eps / Dmin_p > Lp) {
    throw std::invalid_argument("derive_parameters: eps / min(D_X^p, D_Y^p) = " +
                                num(eps / Dmin_p) + " exceeds Lp = " + num(Lp));
  }
  const double L1 = problem.L1();
  c.Lp_eff = std::max(Lp, 1e-8);
  c.gamma = std::max(Lp, eps / Dmin_p);
  c.mu_x = eps / (4.0 * std::pow(Dx, p));
  c.mu_y = eps / (4.0 * std::pow(Dy, p));
  const double pf = factorial(p);
  const double g = c.gamma;
  c.L1_tilde = L1 + p * std::max(c.mu_x * std::pow(Dx, p - 1), c.mu_y * std::pow(Dy, p - 1));
  c.L1x_tilde = L1 + p * (g + c.mu_x) * std::pow(Dx, p - 1);
  c.L1gamma_tilde = L1 + p * std::max((g + c.mu_x) * std::pow(Dx, p - 1),
                                      (g + c.mu_y) * std::pow(Dy, p - 1));
  c.Lpgamma_tilde = Lp + pf * (g + std::max(c.mu_x, c.mu_y));
  c.M_inner = 32.0 * c.Lpgamma_tilde;
  const double scale = std::pow(0.5, p - 1);
  const double mux_u = c.mu_x * scale;  // uniform convexity of Phi
  const double muy_u = c.mu_y * scale;
  c.T1 = default_epoch_length(g, mux_u, p);
  c.T2 = default_epoch_length(g, muy_u, p);
  c.T3 = eg_epoch_length(c.Lpgamma_tilde, g, p);

  // Backward chain from eps, safety factor 1/2 per level.
  const double pw = (p + 1) * std::pow(2.0, p - 2);
  const double dist_final = eps / (12.0 * c.L1_tilde);
  c.zeta1 = floored(0.5 * largest_below(
                              [&](double z) { return 2.0 * z + std::pow(pw * L1 * z / muy_u, 1.0 / p); },
                              dist_final, 1e-300, Dz));
  const double expo = 2.0 * (p + 2) / (p + 1);
  c.delta1_chain = floored(0.5 * std::pow(c.zeta1, expo) / std::pow(mux_u, 1.0 / (p + 1)));
  const double gx = g + c.mu_x;
  auto phi_rhs = [&](double z2) {
    const double grad_small = 6.0 * c.L1x_tilde * z2;
    const double xdist = std::pow(p, 1.0 / (p + 1)) *
                             std::pow(pw * 2.0 * grad_small / gx, 1.0 / p) +
                         std::pow(pw * L1 * z2 / gx, 1.0 / p);
    return grad_small + c.L1x_tilde * (z2 + std::pow(pw * L1 * xdist / muy_u, 1.0 / p));
  };
  c.zeta2 = floored(0.5 * largest_below(phi_rhs, c.delta1_chain, 1e-300, Dz));
  c.delta2_chain = floored(0.5 * std::pow(c.zeta2, expo) / std::pow(muy_u, 1.0 / (p + 1)));
  auto psi_rhs = [&](double z3) {
    const double grad_small = 6.0 * c.L1gamma_tilde * z3;
    const double d = std::pow(pw / g * grad_small, 1.0 / p);
    return grad_small + c.L1gamma_tilde * (d + std::pow(pw * L1 * d / gx, 1.0 / p));
  };
  c.zeta3 = floored(0.5 * largest_below(psi_rhs, c.delta2_chain, 1e-300, Dz));
  auto log2c = [](double r) { return std::max(1, static_cast<int>(std::ceil(std::log2(std::max(r, 2.0))))); };
  c.S1 = log2c(Dx * Dx * c.L1_tilde / (mux_u * std::pow(c.zeta1, p + 1)));
  c.S2 = log2c(Dy * Dy * (L1 + p * c.mu_y * std::pow(Dy, p - 1)) /
               (muy_u * std::pow(c.zeta2, p + 1)));
  c.S3 = log2c(Dz / c.zeta3);

  if (practical_mode) {
    // The middle and outer loops resolve distances from values, so the
    // oracles must be far tighter than eps; 1e-4 eps was calibrated on the
    // built-in suite.
    c.delta1 = 1e-4 * eps;
    c.delta2 = c.delta1 / 4.0;
  } else {
    c.delta1 = c.delta1_chain;
    c.delta2 = c.delta2_chain;
  }
  return c;
}

InnerOracleResult ifunc_igrad_primal(const SaddleProblem& f_eps, const Vec& x, double delta,
                                     const InnerOracleOptions& opt, const Vec* warm) {
  auto cache = std::make_shared<JointCache>();
  const FunctionView h = cached_slice_neg_y(f_eps, x, cache);
  return inner_solve(f_eps, h, cache, x, true, delta, opt, warm);
}

InnerOracleResult ifunc_igrad_dual(const SaddleProblem& g_eps, const Vec& y, double delta,
                                   const InnerOracleOptions& opt, const Vec* warm) {
  auto cache = std::make_shared<JointCache>();
  const FunctionView h = cached_slice_x(g_eps, y, cache);
  return inner_solve(g_eps, h, cache, y, false, delta, opt, warm);
}

PhiProxResult iprox_phi(const SaddleProblem& f_eps, const Vec& x_bar, double gamma, double delta1,
                        const MinimaxConfig& cfg) {
  if (!(gamma > 0.0)) throw std::invalid_argument("iprox_phi: gamma must be > 0");
  Context ctx(f_eps);
  ctx.cfg = cfg;
  ctx.cfg.gamma = gamma;
  ctx.cfg.delta1 = delta1;
  ctx.iopt.residual_factor = cfg.practical_mode ? cfg.inner_residual_factor : 0.0;
  ctx.iopt.L_cross = f_eps.L1();
  ctx.iopt.max_epochs = cfg.max_solver_epochs;
  return middle_loop(ctx, x_bar);
}

std::pair<Vec, SolveReport> solve(const SaddleProblem& problem, double eps) {
  return solve(problem, eps, derive_parameters(problem, eps, true));
}

std::pair<Vec, SolveReport> solve(const SaddleProblem& problem, double eps,
                                  const MinimaxConfig& cfg_in) {
  const auto t0 = std::chrono::steady_clock::now();
  MinimaxConfig cfg = cfg_in;
  cfg.eps = eps;
  const Domain& Z = problem.domain();
  const Domain& X = problem.x_domain();
  const int nx = problem.nx();
  const Vec z0 = cfg.z0 ? project(Z, *cfg.z0) : project(Z, Vec::Zero(problem.dim()));

  Accounting acc;
  acc.problem = &problem;
  acc.start = acc.last = problem.oracle_calls();
  SolveReport rep;
  rep.problem = problem.name();
  rep.solver = "minimax_aipe";
  rep.eps = eps;
  rep.params = cfg.to_json();

  Context ctx(regularize_f_eps(problem, z0, cfg.mu_x, cfg.mu_y));
  ctx.original = &problem;
  ctx.cfg = cfg;
  ctx.acc = &acc;
  ctx.trace = &rep.trace;
  ctx.iopt.residual_factor = cfg.practical_mode ? cfg.inner_residual_factor : 0.0;
  ctx.iopt.L_cross = ctx.f_eps.L1();
  ctx.iopt.max_epochs = cfg.max_solver_epochs;

  Vec best_z = z0;
  double best_r = std::numeric_limits<double>::infinity();
  // Joint polish at (x, y_hat(x)) and the residual of the original operator.
  auto final_check = [&](const Vec& x) {
    const InnerOracleResult& ph = ctx.phi(x);
    LevelScope scope(&acc, Level::Polish);
    const Vec z_hat = problem.join(x, ph.argopt);
    Vec F = ph.full_grad;
    F.tail(problem.ny()) *= -1.0;
    const Vec z_t = project(Z, z_hat - F / cfg.L1_tilde);
    const Derivs d = problem.eval(z_t, 1);
    const double r = tangent_residual(Z, z_t, saddle_operator(d, nx));
    std::optional<double> gap;
    if (problem.closed_form_gap) gap = problem.closed_form_gap(z_t);
    ctx.row(Level::Outer, r, gap);
    if (r < best_r) {
      best_r = r;
      best_z = z_t;
    }
    return r <= eps;
  };

  bool done = false;
  {
    LevelScope scope(&acc, Level::Outer);
    const Vec x0 = problem.x_part(z0);
    if (cfg.practical_mode) done = final_check(x0);
    if (!done) {
      OracleBundle ob;
      ob.ifunc = [&](const Vec& x, double) { return ctx.phi(x).value; };
      ob.igrad = [&](const Vec& x, double) { return ctx.phi(x).grad; };
      ob.iprox = [&](const Vec& x_bar, double gam, double) {
        ctx.cfg.gamma = gam;
        return middle_loop(ctx, x_bar).cert;
      };
      AipeOptions ao;
      int S = cfg.S1;
      if (cfg.practical_mode) {
        S = cfg.max_outer_epochs;
        ao.abort_on_miss = false;
        ao.stop = [&](const Vec& x) { return final_check(x); };
      } else {
        ao.early_exit_window = 0;
      }
      const AipeRestartResult run = aipe_restart(ob, X, x0, cfg.gamma, cfg.delta1, cfg.T1, S, cfg.p, ao);
      for (const auto& e : run.epochs) rep.outer_iters += static_cast<long>(e.iters.size());
      if (run.aborted) ctx.messages.push_back("outer epoch aborted on a prox certificate");
      done = run.stopped;
      if (!done) done = final_check(run.z);
    }
  }
  acc.flush();
  rep.z = best_z;
  rep.residual = best_r;
  if (problem.closed_form_gap) rep.gap = problem.closed_form_gap(best_z);
  rep.flagged = !(best_r <= eps);
  rep.messages = ctx.messages;
  std::sort(rep.messages.begin(), rep.messages.end());
  rep.messages.erase(std::unique(rep.messages.begin(), rep.messages.end()), rep.messages.end());
  if (rep.flagged) rep.messages.push_back("final residual " + num(best_r) + " > eps");
  rep.calls_outer = acc.counts[0];
  rep.calls_middle = acc.counts[1];
  rep.calls_inner = acc.counts[2];
  rep.calls_polish = acc.counts[3];
  rep.calls_total = acc.total();
  rep.middle_iters = ctx.middle_iters;
  rep.inner_epochs = ctx.inner_epochs;
  rep.trace.push_back({rep.calls_total, best_r, rep.gap, Level::Polish});
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {best_z, rep};
}

std::pair<Vec, SolveReport> baseline_eg_solve(const SaddleProblem& problem, double eps, int q,
                                              const BaselineOptions& opt) {
  if (!(eps > 0.0)) throw std::invalid_argument("baseline: eps must be > 0");
  if (q < 1 || q > problem.order()) throw std::invalid_argument("baseline: bad order q");
  const auto t0 = std::chrono::steady_clock::now();
  const Domain& Z = problem.domain();
  const double Dmin = std::min(diameter(problem.x_domain()), diameter(problem.y_domain()));
  const double Lq = q == 1 ? problem.L1() : problem.Lp();
  const double M = std::max(2.0 * Lq, eps / std::pow(Dmin, q));
  const OperatorView op(problem);
  TensorStepConfig ts;
  ts.q = q;
  ts.M = M;

  SolveReport rep;
  rep.problem = problem.name();
  rep.solver = "eg_baseline";
  rep.eps = eps;
  rep.params = {{"M", M}, {"q", q}, {"max_calls", opt.max_calls}};
  const long start = problem.oracle_calls();
  Vec z = opt.z0 ? project(Z, *opt.z0) : project(Z, Vec::Zero(problem.dim()));
  Vec best = z;
  double best_r = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec& pt, const Vec& F) {
    const double r = tangent_residual(Z, pt, F);
    if (r < best_r) {
      best_r = r;
      best = pt;
    }
    return r <= eps;
  };
  long iters = 0;
  bool done = false;
  long next_row = 1;
  while (!done) {
    if (problem.oracle_calls() - start + 2 > opt.max_calls) break;
    const OperatorEval at = op.eval(z, q);
    if (consider(z, at.F)) break;
    const Vec half = tensor_step(at, Z, z, ts).z;
    const double sn = (half - z).norm();
    const Vec Fh = op.F(half);
    done = consider(half, Fh);
    const double eta = q == 1 ? 1.0 / M : factorial(q) / (M * std::max(sn, 1e-300));
    if (!done) z = project(Z, z - eta * Fh);
    ++iters;
    if (iters == next_row || done) {
      rep.trace.push_back({problem.oracle_calls() - start, best_r, std::nullopt, Level::Inner});
      next_row *= 2;
    }
  }
  rep.z = best;
  rep.residual = best_r;
  if (problem.closed_form_gap) rep.gap = problem.closed_form_gap(best);
  rep.flagged = !(best_r <= eps);
  if (rep.flagged) rep.messages.push_back("iteration cap reached before eps");
  rep.calls_total = problem.oracle_calls() - start;
  rep.calls_inner = rep.calls_total;
  rep.outer_iters = iters;
  rep.trace.push_back({rep.calls_total, best_r, rep.gap, Level::Polish});
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {best, rep};
}

nlohmann::json SolveReport::to_json() const {
  nlohmann::json j;
  j["problem"] = problem;
  j["solver"] = solver;
  j["eps"] = eps;
  j["z"] = vec_json(z);
  j["residual"] = residual;
  j["gap"] = gap ? nlohmann::json(*gap) : nlohmann::json(nullptr);
  j["flagged"] = flagged;
  j["messages"] = messages;
  j["counts"] = {{"outer", calls_outer},   {"middle", calls_middle}, {"inner", calls_inner},
                 {"polish", calls_polish}, {"total", calls_total}};
  j["iterations"] = {{"outer", outer_iters}, {"middle", middle_iters}, {"inner_epochs", inner_epochs}};
  j["params"] = params;
  nlohmann::json tr = nlohmann::json::array();
  for (const TraceRow& r : trace) {
    tr.push_back({{"oracle_calls", r.oracle_calls},
                  {"residual", r.residual},
                  {"gap", r.gap ? nlohmann::json(*r.gap) : nlohmann::json(nullptr)},
                  {"loop_level", level_name(r.level)}});
  }
  j["trace"] = tr;
  j["wall_seconds"] = wall_seconds;
  return j;
}

std::string SolveReport::trace_csv() const {
  std::ostringstream os;
  os << "oracle_calls,residual,gap_if_available,loop_level\n";
  for (const TraceRow& r : trace) {
    os << r.oracle_calls << ',' << num(r.residual) << ',' << (r.gap ? num(*r.gap) : "") << ','
       << level_name(r.level) << '\n';
  }
  return os.str();
}

}  // namespace saddle
