#include "saddle/aipe.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace saddle {
namespace {

double factorial(int q) { return q == 2 ? 2.0 : 1.0; }

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double OracleBundle::func(const Vec& z, double delta) const {
  ++counts->ifunc;
  return ifunc(z, delta);
}

Vec OracleBundle::grad(const Vec& z, double delta) const {
  ++counts->igrad;
  return igrad(z, delta);
}

ProxCertificate OracleBundle::prox(const Vec& z_bar, double gamma, double delta) const {
  ++counts->iprox;
  return iprox(z_bar, gamma, delta);
}

SolveAResult solve_a(double A, double lambda_prime) {
  if (!(lambda_prime > 0.0)) throw std::invalid_argument("solve_a: lambda' must be > 0");
  if (A < 0.0) throw std::invalid_argument("solve_a: A must be >= 0");
  SolveAResult r;
  r.a_prime = (1.0 + std::sqrt(1.0 + 8.0 * lambda_prime * A)) / (4.0 * lambda_prime);
  r.A_prime = A + r.a_prime;
  return r;
}

AipeEpochResult aipe_epoch(const OracleBundle& oracles, const Domain& domain, const Vec& z_start,
                           double gamma, double delta, int T, int q, const AipeOptions& opt) {
  if (!(gamma > 0.0)) throw std::invalid_argument("aipe_epoch: gamma must be > 0");
  if (q != 1 && q != 2) throw std::invalid_argument("aipe_epoch: q must be 1 or 2");
  if (!contains(domain, z_start)) throw std::invalid_argument("aipe_epoch: start outside domain");
  AipeEpochResult out;
  Vec z = z_start;
  Vec v = z_start;
  Vec z_tilde = z_start;
  double A = 0.0;
  double lambda_prime = 1.0;
  out.z.push_back(z);
  out.v.push_back(v);
  out.z_tilde.push_back(z_tilde);
  std::vector<double> h_hat, h_tilde;
  const double exit_tol = opt.early_exit_tol < 0.0 ? delta : opt.early_exit_tol;
  double best = kInf;
  int stale = 0;

  auto select = [&]() {
    const auto ih = std::min_element(h_hat.begin(), h_hat.end()) - h_hat.begin();
    const auto it = std::min_element(h_tilde.begin(), h_tilde.end()) - h_tilde.begin();
    if (h_hat[ih] < h_tilde[it]) {
      out.z_next = out.z[ih];
      out.best_value = h_hat[ih];
      out.from_tilde = false;
    } else {
      out.z_next = out.z_tilde[it];
      out.best_value = h_tilde[it];
      out.from_tilde = true;
    }
  };

  for (int t = 0; t < T; ++t) {
    AipeIterRecord rec;
    rec.h_hat = oracles.func(z, delta);
    rec.h_tilde = oracles.func(z_tilde, delta);
    h_hat.push_back(rec.h_hat);
    h_tilde.push_back(rec.h_tilde);

    const SolveAResult sa = solve_a(A, lambda_prime);
    rec.a_prime = sa.a_prime;
    rec.A_prime = sa.A_prime;
    rec.coef_bar = A / sa.A_prime;
    const Vec z_bar = rec.coef_bar * z + (sa.a_prime / sa.A_prime) * v;
    out.z_bar.push_back(z_bar);

    const ProxCertificate cert = oracles.prox(z_bar, gamma, delta);
    rec.cert_residual = cert.residual;
    rec.cert_bound = cert.bound;
    if (!cert.ok && opt.abort_on_miss) {
      out.aborted = true;
      out.iters.push_back(rec);
      select();
      return out;
    }
    const double step = (cert.z - z_bar).norm();
    if (step == 0.0) {
      // Proximal fixed point.
      out.fixed_point = true;
      out.z_next = cert.z;
      out.best_value = oracles.func(cert.z, delta);
      out.iters.push_back(rec);
      return out;
    }
    rec.lambda = gamma * std::pow(step, q - 1);
    if (t == 0) lambda_prime = rec.lambda;
    rec.lambda_prime = lambda_prime;
    double a, A_next;
    if (rec.lambda <= lambda_prime) {
      rec.gamma_t = 1.0;
      a = sa.a_prime;
      A_next = sa.A_prime;
      lambda_prime *= 0.5;
      rec.lambda_action = -1;
    } else {
      rec.gamma_t = lambda_prime / rec.lambda;
      a = rec.gamma_t * sa.a_prime;
      A_next = A + a;
      lambda_prime *= 2.0;
      rec.lambda_action = 1;
    }
    rec.coef_next = (1.0 - rec.gamma_t) * A / A_next;
    z = rec.coef_next * z + (rec.gamma_t * sa.A_prime / A_next) * cert.z;
    z_tilde = cert.z;
    const Vec g = oracles.grad(z_tilde, delta);
    v = project(domain, v - a * (g + cert.u));
    A = A_next;
    rec.a = a;
    rec.A = A;
    out.iters.push_back(rec);
    out.z.push_back(z);
    out.v.push_back(v);
    out.z_tilde.push_back(z_tilde);

    if (opt.stop && opt.stop(z_tilde)) {
      out.stopped = true;
      out.z_next = z_tilde;
      out.best_value = oracles.func(z_tilde, delta);
      return out;
    }
    const double cur = std::min(rec.h_hat, rec.h_tilde);
    if (cur < best - exit_tol) {
      best = cur;
      stale = 0;
    } else if (opt.early_exit_window > 0 && ++stale >= opt.early_exit_window) {
      out.early_exit = true;
      break;
    }
  }
  // Values at z_T and z_tilde_T complete the selection over t = 0..T.
  h_hat.push_back(oracles.func(z, delta));
  h_tilde.push_back(oracles.func(z_tilde, delta));
  select();
  return out;
}

AipeRestartResult aipe_restart(const OracleBundle& oracles, const Domain& domain, const Vec& z0,
                               double gamma, double delta, int T, int S, int q,
                               const AipeOptions& opt) {
  if (S < 0 || T < 0) throw std::invalid_argument("aipe_restart: S, T must be >= 0");
  AipeRestartResult res;
  res.z = z0;
  if (opt.gap) res.gaps.push_back(opt.gap(z0));
  for (int s = 0; s < S; ++s) {
    AipeEpochResult ep = aipe_epoch(oracles, domain, res.z, gamma, delta, T, q, opt);
    res.z = ep.z_next;
    const bool stop = ep.stopped;
    const bool abort = ep.aborted;
    res.epochs.push_back(std::move(ep));
    if (opt.gap) res.gaps.push_back(opt.gap(res.z));
    if (stop) {
      res.stopped = true;
      break;
    }
    if (abort) {
      res.aborted = true;
      break;
    }
  }
  return res;
}

int default_epoch_length(double gamma, double mu, int p) {
  if (!(gamma > 0.0) || !(mu > 0.0)) throw std::invalid_argument("epoch length: need gamma, mu > 0");
  return static_cast<int>(std::ceil(8.0 * std::pow(gamma / mu, 2.0 / (3 * p + 1))));
}

double aipe_delta_bound(double eps, double mu, double Delta, double D, int p) {
  const double inner = std::min(D, std::pow((p + 1) * eps * eps / (2.0 * mu * Delta), 1.0 / (p + 1)));
  const double first =
      (1.0 + std::sqrt(17.0)) * eps * eps * inner / (128.0 * (7.0 + std::sqrt(6.0)) * D * D * Delta);
  const double second = eps * eps / (16.0 * std::max(D, 1.0) * Delta);
  return std::min(first, second);
}

FunctionView memoized(const FunctionView& h, int capacity) {
  struct Entry {
    Vec z;
    int order;
    Derivs d;
  };
  auto cache = std::make_shared<std::deque<Entry>>();
  FunctionView out = h;
  const auto inner = h.eval;
  out.eval = [cache, inner, capacity](const Vec& z, int order) {
    for (const Entry& e : *cache) {
      if (e.order >= order && e.z.size() == z.size() && e.z == z) return e.d;
    }
    Derivs d = inner(z, order);
    cache->push_front({z, order, d});
    if (static_cast<int>(cache->size()) > capacity) cache->pop_back();
    return d;
  };
  return out;
}

ConvexityBounds uniform_convexity_bounds(double residual, double mu, int p, double D) {
  ConvexityBounds b;
  const double kappa = 2.0 * mu / (p + 1);
  b.dist = kappa > 0.0 ? std::min(D, std::pow(residual / kappa, 1.0 / p)) : D;
  b.gap = residual * b.dist;
  return b;
}

OptmsResult optms_restart(const FunctionView& h_in, const Vec& z0, double eps,
                          const OptmsOptions& opt) {
  if (!(eps > 0.0)) throw std::invalid_argument("optms_restart: eps must be > 0");
  if (!(h_in.mu > 0.0)) throw std::invalid_argument("optms_restart: needs mu > 0");
  const FunctionView h = memoized(h_in);
  const int p = h.p;
  const double Lp = std::max(p == 1 ? h.L1 : h.Lp, 1e-8);
  const double M = 2.0 * Lp;
  const double gamma = M / factorial(p);
  const double D = diameter(h.domain);

  TensorStepConfig ts;
  ts.q = p;
  ts.M = M;
  OracleBundle ob;
  ob.ifunc = [&h](const Vec& z, double) { return h.eval(z, 0).value; };
  ob.igrad = [&h](const Vec& z, double) { return h.eval(z, 1).grad; };
  ob.iprox = [&h, ts](const Vec& z_bar, double g, double delta) {
    return iprox_via_tensor(h, z_bar, g, delta, ts);
  };

  OptmsResult res;
  const Vec start = project(h.domain, z0);
  const Derivs d0 = h.eval(start, 1);
  const double r0 = tangent_residual(h.domain, start, d0.grad);
  res.Delta = D * r0;
  res.T = opt.T > 0 ? opt.T : default_epoch_length(gamma, h.mu, p);
  res.S = opt.S > 0 ? opt.S
                    : std::max(1, static_cast<int>(std::ceil(std::log2(std::max(res.Delta / eps, 1.0)))));

  auto accept = [&](const Vec& z, const Vec& g) {
    const double r = tangent_residual(h.domain, z, g);
    const ConvexityBounds b = uniform_convexity_bounds(r, h.mu, p, D);
    const bool cert = b.gap <= eps && (opt.dist_tol <= 0.0 || b.dist <= opt.dist_tol);
    const bool ok = cert || (opt.residual_tol > 0.0 && r <= opt.residual_tol);
    return std::make_pair(ok, std::make_pair(cert, std::make_pair(r, b)));
  };

  AipeOptions ao;
  ao.gap = opt.gap;
  if (opt.certify) {
    ao.stop = [&](const Vec& z) { return accept(z, h.eval(z, 1).grad).first; };
  }

  auto finish = [&](const Vec& z) {
    res.z = z;
    const Derivs d = h.eval(z, 1);
    res.grad = d.grad;
    res.value = d.value;
    const auto a = accept(z, d.grad);
    res.met = a.first;
    res.certified = a.second.first;
    res.residual = a.second.second.first;
    res.gap_bound = a.second.second.second.gap;
    res.dist_bound = a.second.second.second.dist;
  };

  if (opt.certify && accept(start, d0.grad).first) {
    res.run.z = start;
    finish(start);
    return res;
  }
  if (!opt.certify) {
    res.run = aipe_restart(ob, h.domain, start, gamma, 0.0, res.T, res.S, p, ao);
    finish(res.run.z);
    return res;
  }
  // Certified mode: keep restarting until the stop test fires.
  Vec z = start;
  const int budget = std::max(res.S, opt.max_epochs);
  for (int s = 0; s < budget; ++s) {
    AipeRestartResult chunk = aipe_restart(ob, h.domain, z, gamma, 0.0, res.T, 1, p, ao);
    z = chunk.z;
    for (auto& e : chunk.epochs) res.run.epochs.push_back(std::move(e));
    for (size_t i = s == 0 ? 0 : 1; i < chunk.gaps.size(); ++i) res.run.gaps.push_back(chunk.gaps[i]);
    if (chunk.aborted) {
      res.run.aborted = true;
      break;
    }
    if (chunk.stopped || accept(z, h.eval(z, 1).grad).first) {
      res.run.stopped = true;
      break;
    }
  }
  res.run.z = z;
  finish(z);
  return res;
}

}  // namespace saddle
