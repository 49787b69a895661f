#include "saddle/tensor_step.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace saddle {
namespace {


Mat model_jacobian(const OperatorEval& at_bar, const Vec& s, double M) {
  const Eigen::Index n = s.size();
  Mat G = at_bar.J;
  const double ns = s.norm();
  if (ns > 0.0) G += 0.5 * M * (ns * Mat::Identity(n, n) + (s * s.transpose()) / ns);
  return G;
}

double model_residual_at(const OperatorEval& at_bar, const Domain& domain, const Vec& z_bar,
                         const Vec& z, double M) {
  return tangent_residual(domain, z, model_operator(at_bar, z_bar, z, 2, M));
}

// Unconstrained q = 2 step: find lambda = (M/2)||s(lambda)|| with
// s(lambda) = -(J + lambda I)^{-1} F. The map lambda - (M/2)||s|| is increasing
// for monotone J; a safeguarded secant search keeps the bracket.
Vec unconstrained_cubic_step(const OperatorEval& at_bar, double M, double tol) {
  const Vec& F = at_bar.F;
  const Eigen::Index n = F.size();
  const double nF = F.norm();
  if (nF == 0.0) return Vec::Zero(n);
  auto step = [&](double lam) -> Vec {
    Mat K = at_bar.J;
    K.diagonal().array() += lam;
    return -K.partialPivLu().solve(F);
  };
  auto phi = [&](double lam, Vec& s) {
    s = step(lam);
    if (!s.allFinite()) return -std::numeric_limits<double>::infinity();
    return lam - 0.5 * M * s.norm();
  };
  double lo = 0.0;
  double hi = std::sqrt(0.5 * M * nF) * (1.0 + 1e-12) + 1e-300;
  Vec s_hi;
  double f_hi = phi(hi, s_hi);
  for (int k = 0; k < 200 && f_hi < 0.0; ++k) {
    lo = hi;
    hi *= 2.0;
    f_hi = phi(hi, s_hi);
  }
  double f_lo = -std::numeric_limits<double>::infinity();
  Vec best = s_hi;
  for (int it = 0; it < 300; ++it) {
    double mid = 0.5 * (lo + hi);
    if (std::isfinite(f_lo) && f_hi > f_lo) {
      const double sec = lo - f_lo * (hi - lo) / (f_hi - f_lo);
      const double w = hi - lo;
      if (sec > lo + 0.05 * w && sec < hi - 0.05 * w) mid = sec;
    }
    Vec s;
    const double f = phi(mid, s);
    if (std::abs(f) <= tol * std::max(1.0, mid)) return s;
    if (f < 0.0) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
      f_hi = f;
      best = s;
    }
    if (hi - lo <= 1e-16 * hi) break;
  }
  return best;
}

}  // namespace

Vec taylor_operator(const OperatorEval& at_bar, const Vec& z_bar, const Vec& z, int q) {
  if (q == 1) return at_bar.F;
  if (q != 2) throw std::invalid_argument("taylor_operator: q must be 1 or 2");
  if (at_bar.J.rows() != z.size()) {
    throw std::invalid_argument("taylor_operator: q = 2 needs the Jacobian");
  }
  return at_bar.F + at_bar.J * (z - z_bar);
}

Vec taylor_operator(const OperatorView& op, const Vec& z_bar, const Vec& z, int q) {
  if (q > op.order()) throw std::invalid_argument("taylor_operator: q exceeds operator order");
  return taylor_operator(op.eval(z_bar, q), z_bar, z, q);
}

Vec model_operator(const OperatorEval& at_bar, const Vec& z_bar, const Vec& z, int q, double M) {
  const Vec s = z - z_bar;
  const double scale = q == 1 ? M : 0.5 * M * s.norm();
  return taylor_operator(at_bar, z_bar, z, q) + scale * s;
}

TensorStepResult tensor_step(const OperatorEval& at_bar, const Domain& domain, const Vec& z_bar,
                             const TensorStepConfig& cfg) {
  if (!(cfg.M > 0.0)) throw std::invalid_argument("tensor_step: M must be > 0");
  if (cfg.q != 1 && cfg.q != 2) throw std::invalid_argument("tensor_step: q must be 1 or 2");
  TensorStepResult res;
  if (cfg.q == 1) {
    res.z = project(domain, z_bar - at_bar.F / cfg.M);
    res.model_residual =
        tangent_residual(domain, res.z, model_operator(at_bar, z_bar, res.z, 1, cfg.M));
    return res;
  }
  const double M = cfg.M;
  const double target = cfg.vi_tol * (1.0 + at_bar.F.norm());
  const Vec s0 = unconstrained_cubic_step(at_bar, M, cfg.bisection_tol);
  Vec z = z_bar + s0;
  if (contains(domain, z, 0.0)) {
    res.z = z;
    res.model_residual = model_residual_at(at_bar, domain, z_bar, z, M);
    if (res.model_residual <= target) return res;
  }
  res.constrained = true;

  // Semismooth Newton on the natural map z - P(z - tau G(z)).
  const Eigen::Index n = z_bar.size();
  const double D = diameter(domain);
  const double LG = at_bar.J.norm() + M * std::max(s0.norm(), 1e-12 * (1.0 + D));
  const double tau = 1.0 / LG;
  auto natural = [&](const Vec& w, Vec& pw) {
    const Vec g = model_operator(at_bar, z_bar, w, 2, M);
    pw = project(domain, w - tau * g);
    return Vec(w - pw);
  };
  z = project(domain, z);
  Vec best = z;
  double best_res = model_residual_at(at_bar, domain, z_bar, z, M);
  Vec pz;
  Vec r = natural(z, pz);
  double rn = r.norm();
  int it = 0;
  for (; it < 100 && best_res > target; ++it) {
    const Vec w = z - tau * model_operator(at_bar, z_bar, z, 2, M);
    const Mat DP = project_jacobian(domain, w);
    const Mat JG = model_jacobian(at_bar, z - z_bar, M);
    const Mat Jac = Mat::Identity(n, n) - DP * (Mat::Identity(n, n) - tau * JG);
    Vec d = Jac.fullPivLu().solve(-r);
    if (!d.allFinite()) break;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      const Vec zt = z + alpha * d;
      Vec pt;
      const Vec rt = natural(zt, pt);
      if (rt.norm() <= (1.0 - 1e-4 * alpha) * rn) {
        z = zt;
        r = rt;
        rn = rt.norm();
        pz = pt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double cur = model_residual_at(at_bar, domain, z_bar, pz, M);
    if (cur < best_res) {
      best_res = cur;
      best = pz;
    }
  }
  res.inner_iters = it;
  if (best_res <= target) {
    res.z = best;
    res.model_residual = best_res;
    return res;
  }

  // Fallback: projected extragradient on the model operator.
  const double step = 0.5 / (at_bar.J.norm() + M * std::max(D, 1e-12));
  z = best;
  for (int k = 1; k <= cfg.max_inner_iters; ++k) {
    const Vec half = project(domain, z - step * model_operator(at_bar, z_bar, z, 2, M));
    z = project(domain, z - step * model_operator(at_bar, z_bar, half, 2, M));
    if (k % 16 == 0) {
      const double cur = model_residual_at(at_bar, domain, z_bar, z, M);
      if (cur < best_res) {
        best_res = cur;
        best = z;
      }
      if (best_res <= target) break;
    }
    res.inner_iters = it + k;
  }
  res.z = best;
  res.model_residual = best_res;
  res.converged = best_res <= target;
  return res;
}

TensorStepResult tensor_step(const OperatorView& op, const Domain& domain, const Vec& z_bar,
                             const TensorStepConfig& cfg) {
  if (cfg.q > op.order()) throw std::invalid_argument("tensor_step: q exceeds operator order");
  return tensor_step(op.eval(z_bar, cfg.q), domain, z_bar, cfg);
}

ProxCertificate iprox_via_tensor(const FunctionView& h, const Vec& z_bar, double gamma,
                                 double delta, const TensorStepConfig& cfg) {
  const Derivs at = h.eval(z_bar, cfg.q);
  const OperatorEval at_bar{at.grad, at.hess};
  const TensorStepResult step = tensor_step(at_bar, h.domain, z_bar, cfg);
  ProxCertificate cert;
  cert.z = step.z;
  const Vec G = model_operator(at_bar, z_bar, step.z, cfg.q, cfg.M);
  // Exact normal-cone element closest to -G; the gap is the model residual.
  cert.u = normal_component(h.domain, step.z, -G);
  const Vec s = step.z - z_bar;
  const double ns = s.norm();
  cert.lambda = gamma * std::pow(ns, cfg.q - 1);
  cert.at_z = h.eval(step.z, 1);
  cert.residual = (cert.at_z.grad + cert.u + cert.lambda * s).norm();
  const double slack = cfg.vi_tol * (1.0 + at.grad.norm()) * 2.0;
  cert.bound = 0.5 * cert.lambda * ns + delta + slack;
  cert.ok = step.converged && cert.residual <= cert.bound;
  return cert;
}

}  // namespace saddle
