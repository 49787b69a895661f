#include "saddle/eg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace saddle {
namespace {

double factorial(int q) { return q == 2 ? 2.0 : 1.0; }

}  // namespace

EgEpochResult eg_epoch(const OperatorView& op, const Domain& domain, const Vec& z0, double M, int T,
                       int q) {
  if (!contains(domain, z0)) throw std::invalid_argument("eg_epoch: z0 outside domain");
  EgEpochResult out;
  out.z_avg = z0;
  out.best_half = z0;
  out.best_half_residual = std::numeric_limits<double>::infinity();
  if (T <= 0) return out;
  TensorStepConfig ts;
  ts.q = q;
  ts.M = M;
  Vec z = z0;
  Vec acc = Vec::Zero(z0.size());
  double eta_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const OperatorEval at = op.eval(z, q);
    const Vec half = tensor_step(at, domain, z, ts).z;
    out.trace.oracle_calls += 1;
    const double sn = (half - z).norm();
    if (q == 2 && sn == 0.0) {
      out.exact = true;
      out.z_avg = half;
      out.best_half = half;
      out.best_half_residual = tangent_residual(domain, half, at.F);
      return out;
    }
    const double eta = q == 1 ? 1.0 / M : factorial(q) / (M * sn);
    const Vec Fh = op.F(half);
    out.trace.oracle_calls += 1;
    const double rh = tangent_residual(domain, half, Fh);
    if (rh < out.best_half_residual) {
      out.best_half_residual = rh;
      out.best_half = half;
    }
    out.trace.iters.push_back({sn, eta, rh});
    z = project(domain, z - eta * Fh);
    acc += eta * half;
    eta_sum += eta;
  }
  out.z_avg = acc / eta_sum;
  // Averaging can drift by rounding; snap back onto the set.
  out.z_avg = project(domain, out.z_avg);
  return out;
}

int eg_epoch_length(double Lt, double gamma, int p, double rho) {
  if (!(gamma > 0.0) || !(Lt > 0.0)) throw std::invalid_argument("eg_epoch_length: bad constants");
  const double base =
      std::pow(2.0, p + 2) * (p + 1) * Lt / (gamma * factorial(p) * std::pow(rho, p + 1));
  return static_cast<int>(std::ceil(std::pow(base, 2.0 / (p + 1))));
}

RestartedEgResult restarted_eg(const OperatorView& op, const Vec& z0, const EgConfig& cfg) {
  if (cfg.T3 < 1 || cfg.S3 < 1) throw std::invalid_argument("restarted_eg: T3, S3 must be >= 1");
  const Domain& domain = op.domain();
  const double D = diameter(domain);
  RestartedEgResult res;
  res.z = z0;
  auto certify = [&](const Vec& z) {
    const Vec F = op.F(z);
    res.trace.oracle_calls += 1;
    res.residual = tangent_residual(domain, z, F);
    res.dist_bound = cfg.kappa > 0.0
                         ? std::min(D, std::pow(res.residual / cfg.kappa, 1.0 / cfg.q))
                         : D;
    res.certified = res.dist_bound <= cfg.zeta3;
  };
  for (int s = 0; s < cfg.S3; ++s) {
    EgEpochResult ep = eg_epoch(op, domain, res.z, cfg.M, cfg.T3, cfg.q);
    res.trace.oracle_calls += ep.trace.oracle_calls;
    res.trace.iters.insert(res.trace.iters.end(), ep.trace.iters.begin(), ep.trace.iters.end());
    res.z = ep.z_avg;
    res.trace.epoch_points.push_back(res.z);
    res.epochs = s + 1;
    if (cfg.adaptive_stop || s + 1 == cfg.S3) {
      certify(res.z);
      if (cfg.adaptive_stop && res.certified) break;
    }
    if (ep.exact) break;
  }
  return res;
}

PolishResult polish_step(const OperatorView& op, const Domain& domain, const Vec& z, double Lt) {
  return polish_step(op, domain, z, op.F(z), Lt);
}

PolishResult polish_step(const OperatorView& op, const Domain& domain, const Vec& z, const Vec& Fz,
                         double Lt) {
  if (!(Lt > 0.0)) throw std::invalid_argument("polish_step: L must be > 0");
  PolishResult out;
  out.Fz = Fz;
  out.z_hat = project(domain, z - Fz / Lt);
  out.c_hat = Lt * (z - out.z_hat) - Fz;
  out.Fz_hat = op.F(out.z_hat);
  out.measured = (out.Fz_hat + out.c_hat).norm();
  return out;
}

PsiProxResult iprox_psi(const SaddleProblem& g_eps, const Vec& x_bar, const Vec& y_bar,
                        double gamma, double delta2, const PsiProxConfig& cfg,
                        const Vec& z_start) {
  if (!(gamma > 0.0)) throw std::invalid_argument("iprox_psi: gamma must be > 0");
  (void)x_bar;  // already inside g_eps
  const int p = g_eps.order();
  const int nx = g_eps.nx();
  const int ny = g_eps.ny();
  const double pf = factorial(p);
  SaddleProblem h = g_eps.derived(
      g_eps.name() + "_h",
      [y_bar, gamma, p, ny](const Vec& z, int order, Derivs& d) {
        const Derivs r = power_regularizer(z.tail(ny) - y_bar, p, order);
        d.value -= gamma * r.value;
        if (order >= 1) d.grad.tail(ny) -= gamma * r.grad;
        if (order >= 2) d.hess.bottomRightCorner(ny, ny) -= gamma * r.hess;
      },
      g_eps.L1() + p * gamma * std::pow(diameter(g_eps.y_domain()), p - 1),
      g_eps.Lp() + pf * gamma);
  h.mu_x = g_eps.mu_x;
  h.mu_y = g_eps.mu_y + gamma * std::pow(0.5, p - 1);
  const OperatorView op(h);
  const Domain& X = h.x_domain();
  const double Dx = diameter(X);
  const double kappa_x = 2.0 * h.mu_x / (p + 1);

  PsiProxResult out;
  Vec z = project(h.domain(), z_start);
  const int budget = cfg.strict_epochs ? cfg.eg.S3 : cfg.max_epochs;
  for (int attempt = 0; attempt < 2; ++attempt) {
    for (int s = 0; s < budget; ++s) {
      const EgEpochResult ep = eg_epoch(op, h.domain(), z, cfg.eg.M, cfg.eg.T3, cfg.eg.q);
      z = ep.z_avg;
      ++out.epochs;
      const PolishResult pol = polish_step(op, h.domain(), z, cfg.L_tilde);
      const Vec x_hat = pol.z_hat.head(nx);
      const Vec y_hat = pol.z_hat.tail(ny);
      const Vec v_hat = pol.c_hat.tail(ny);
      const double measured = (pol.Fz_hat.tail(ny) + v_hat).norm();
      const double r_x = tangent_residual(X, x_hat, pol.Fz_hat.head(nx));
      const double dist_x =
          kappa_x > 0.0 ? std::min(Dx, std::pow(r_x / kappa_x, 1.0 / p)) : Dx;
      const double step = (y_hat - y_bar).norm();
      ProxCertificate cert;
      cert.z = y_hat;
      cert.u = v_hat;
      cert.lambda = gamma * std::pow(step, p - 1);
      cert.residual = measured + cfg.L_cross * dist_x;
      cert.bound = 0.5 * cert.lambda * step + delta2;
      cert.ok = cert.residual <= cert.bound;
      out.y = y_hat;
      out.v = v_hat;
      out.z_hat = pol.z_hat;
      out.c_hat = pol.c_hat;
      out.cert = cert;
      if (cert.ok && !cfg.strict_epochs) return out;
    }
    if (out.cert.ok) return out;
    ++out.retries;
  }
  return out;
}

}  // namespace saddle
