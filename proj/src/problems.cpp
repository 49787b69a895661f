#include "saddle/problems.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "saddle/ordered_set.hpp"

namespace saddle {
namespace {

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

double spectral_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues()(0);
}

}  // namespace

SaddleProblem::SaddleProblem(std::string name, Domain x_domain, Domain y_domain, int p,
                             double L1, double Lp, RawOracle oracle)
    : name_(std::move(name)),
      x_(std::move(x_domain)),
      y_(std::move(y_domain)),
      z_(Domain::product(x_, y_)),
      p_(p),
      L1_(L1),
      Lp_(p == 1 ? L1 : Lp),
      raw_(std::make_shared<const RawOracle>(std::move(oracle))),
      counter_(std::make_shared<std::atomic<long>>(0)) {
  if (p != 1 && p != 2) throw std::invalid_argument("order p must be 1 or 2");
  if (!(L1 > 0.0)) throw std::invalid_argument("L1 must be > 0");
  if (!(Lp >= 0.0)) throw std::invalid_argument("Lp must be >= 0");
}

SaddleProblem SaddleProblem::derived(std::string name,
                                     std::function<void(const Vec&, int, Derivs&)> add_terms,
                                     double L1, double Lp) const {
  SaddleProblem out(*this);
  out.name_ = std::move(name);
  out.L1_ = L1;
  out.Lp_ = p_ == 1 ? L1 : Lp;
  auto base = raw_;
  out.raw_ = std::make_shared<const RawOracle>(
      [base, add = std::move(add_terms)](const Vec& z, int order) {
        Derivs d = (*base)(z, order);
        add(z, order, d);
        return d;
      });
  out.closed_form_gap = nullptr;
  out.known_saddle.reset();
  return out;
}

Derivs SaddleProblem::eval(const Vec& z, int order) const {
  if (order < 0 || order > p_) {
    throw std::invalid_argument("oracle order " + std::to_string(order) + " exceeds p=" +
                                std::to_string(p_));
  }
  if (!contains(z_, z, kMembershipTol)) {
    throw std::invalid_argument("oracle query outside the domain of " + name_);
  }
  counter_->fetch_add(1, std::memory_order_relaxed);
  return (*raw_)(z, order);
}

Vec SaddleProblem::join(const Vec& x, const Vec& y) const {
  Vec z(x.size() + y.size());
  z << x, y;
  return z;
}

Derivs oracle_eval(const SaddleProblem& problem, const Vec& z, int order) {
  return problem.eval(z, order);
}

Vec saddle_operator(const Derivs& d, int nx) {
  Vec F = d.grad;
  F.tail(F.size() - nx) *= -1.0;
  return F;
}

Mat saddle_jacobian(const Derivs& d, int nx) {
  Mat J = d.hess;
  J.bottomRows(J.rows() - nx) *= -1.0;
  return J;
}

OperatorView::OperatorView(const SaddleProblem& problem)
    : domain_(problem.domain()), order_(problem.order()), L1_(problem.L1()), Lp_(problem.Lp()) {
  const SaddleProblem prob = problem;
  fn_ = [prob](const Vec& z, int order) {
    const Derivs d = prob.eval(z, order);
    OperatorEval e;
    e.F = saddle_operator(d, prob.nx());
    if (order >= 2) e.J = saddle_jacobian(d, prob.nx());
    return e;
  };
}

OperatorView::OperatorView(Domain domain, int order, double L1, double Lp, Fn fn)
    : domain_(std::move(domain)), order_(order), L1_(L1), Lp_(Lp), fn_(std::move(fn)) {}

FunctionView slice_x(const SaddleProblem& problem, const Vec& y) {
  FunctionView h;
  h.domain = problem.x_domain();
  h.p = problem.order();
  h.L1 = problem.L1();
  h.Lp = problem.Lp();
  h.mu = problem.mu_x;
  const int nx = problem.nx();
  h.eval = [problem, y, nx](const Vec& x, int order) {
    const Derivs d = problem.eval(problem.join(x, y), order);
    Derivs out;
    out.value = d.value;
    out.grad = d.grad.head(nx);
    if (order >= 2) out.hess = d.hess.topLeftCorner(nx, nx);
    return out;
  };
  return h;
}

FunctionView slice_y_neg(const SaddleProblem& problem, const Vec& x) {
  FunctionView h;
  h.domain = problem.y_domain();
  h.p = problem.order();
  h.L1 = problem.L1();
  h.Lp = problem.Lp();
  h.mu = problem.mu_y;
  const int ny = problem.ny();
  h.eval = [problem, x, ny](const Vec& y, int order) {
    const Derivs d = problem.eval(problem.join(x, y), order);
    Derivs out;
    out.value = -d.value;
    out.grad = -d.grad.tail(ny);
    if (order >= 2) out.hess = -d.hess.bottomRightCorner(ny, ny);
    return out;
  };
  return h;
}

OperatorView gradient_operator(const FunctionView& h) {
  auto fn = h.eval;
  return OperatorView(h.domain, h.p, h.L1, h.Lp, [fn](const Vec& z, int order) {
    Derivs d = fn(z, order);
    return OperatorEval{std::move(d.grad), std::move(d.hess)};
  });
}

Derivs power_regularizer(const Vec& v, int p, int order) {
  Derivs d;
  const double n = v.norm();
  d.value = std::pow(n, p + 1) / (p + 1);
  if (order >= 1) d.grad = (p == 1) ? v : Vec(n * v);
  if (order >= 2) {
    const Eigen::Index k = v.size();
    if (p == 1) {
      d.hess = Mat::Identity(k, k);
    } else if (n > 0.0) {
      d.hess = n * Mat::Identity(k, k) + (v * v.transpose()) / n;
    } else {
      d.hess = Mat::Zero(k, k);
    }
  }
  return d;
}

namespace {

// Adds sx*d(x - cx) + sy_sign*sy*d(y - cy) to d.
void add_regularizers(const Vec& z, int order, Derivs& d, int nx, int p, const Vec& cx, double sx,
                      const Vec& cy, double sy) {
  const Eigen::Index ny = z.size() - nx;
  if (sx != 0.0) {
    const Derivs r = power_regularizer(z.head(nx) - cx, p, order);
    d.value += sx * r.value;
    if (order >= 1) d.grad.head(nx) += sx * r.grad;
    if (order >= 2) d.hess.topLeftCorner(nx, nx) += sx * r.hess;
  }
  if (sy != 0.0) {
    const Derivs r = power_regularizer(z.tail(ny) - cy, p, order);
    d.value += sy * r.value;
    if (order >= 1) d.grad.tail(ny) += sy * r.grad;
    if (order >= 2) d.hess.bottomRightCorner(ny, ny) += sy * r.hess;
  }
}

}  // namespace

SaddleProblem regularize_f_eps(const SaddleProblem& problem, const Vec& z0, double mu_x,
                               double mu_y) {
  if (!(mu_x > 0.0) || !(mu_y > 0.0)) throw std::invalid_argument("regularize: mu must be > 0");
  if (!contains(problem.domain(), z0)) throw std::invalid_argument("regularize: z0 outside domain");
  const int p = problem.order();
  const int nx = problem.nx();
  const Vec x0 = problem.x_part(z0);
  const Vec y0 = problem.y_part(z0);
  const double Dx = diameter(problem.x_domain());
  const double Dy = diameter(problem.y_domain());
  const double L1 =
      problem.L1() + p * std::max(mu_x * std::pow(Dx, p - 1), mu_y * std::pow(Dy, p - 1));
  const double Lp = problem.Lp() + factorial(p) * std::max(mu_x, mu_y);
  SaddleProblem out = problem.derived(
      problem.name() + "_eps",
      [=](const Vec& z, int order, Derivs& d) {
        add_regularizers(z, order, d, nx, p, x0, mu_x, y0, -mu_y);
      },
      L1, Lp);
  const double scale = std::pow(0.5, p - 1);
  out.mu_x = problem.mu_x + mu_x * scale;
  out.mu_y = problem.mu_y + mu_y * scale;
  return out;
}

SaddleProblem surrogate_g(const SaddleProblem& f_eps, const Vec& x_bar, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("surrogate_g: gamma must be > 0");
  const int p = f_eps.order();
  const int nx = f_eps.nx();
  const double Dx = diameter(f_eps.x_domain());
  const Vec y_dummy = Vec::Zero(f_eps.ny());
  SaddleProblem out = f_eps.derived(
      f_eps.name() + "_g",
      [=](const Vec& z, int order, Derivs& d) {
        add_regularizers(z, order, d, nx, p, x_bar, gamma, y_dummy, 0.0);
      },
      f_eps.L1() + p * gamma * std::pow(Dx, p - 1), f_eps.Lp() + factorial(p) * gamma);
  out.mu_x = f_eps.mu_x + gamma * std::pow(0.5, p - 1);
  out.mu_y = f_eps.mu_y;
  return out;
}

SaddleProblem surrogate_h(const SaddleProblem& f_eps, const Vec& x_bar, const Vec& y_bar,
                          double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("surrogate_h: gamma must be > 0");
  const int p = f_eps.order();
  const int nx = f_eps.nx();
  const double D = std::max(diameter(f_eps.x_domain()), diameter(f_eps.y_domain()));
  SaddleProblem out = f_eps.derived(
      f_eps.name() + "_h",
      [=](const Vec& z, int order, Derivs& d) {
        add_regularizers(z, order, d, nx, p, x_bar, gamma, y_bar, -gamma);
      },
      f_eps.L1() + p * gamma * std::pow(D, p - 1), f_eps.Lp() + factorial(p) * gamma);
  out.mu_x = f_eps.mu_x + gamma * std::pow(0.5, p - 1);
  out.mu_y = f_eps.mu_y + gamma * std::pow(0.5, p - 1);
  return out;
}

// ---------------------------------------------------------------------------
// Separable games

namespace {

double phi(double t, double s, double a, int k) {
  return s / (k + 1) * std::pow(std::abs(t - a), k + 1);
}
double dphi(double t, double s, double a, int k) {
  return k == 1 ? s * (t - a) : s * std::abs(t - a) * (t - a);
}
double ddphi(double t, double s, double a, int k) {
  return k == 1 ? s : 2.0 * s * std::abs(t - a);
}

// max over t in [lo, hi] of coef*t - phi(t).
double max1d(double coef, double s, double a, int k, double lo, double hi) {
  double t;
  if (s == 0.0) {
    t = coef >= 0.0 ? hi : lo;
  } else {
    const double step = k == 1 ? coef / s : std::copysign(std::sqrt(std::abs(coef) / s), coef);
    t = std::clamp(a + step, lo, hi);
  }
  return coef * t - phi(t, s, a, k);
}

}  // namespace

SaddleProblem separable_game(std::string name, const SeparableGame& g, const Vec& xlo,
                             const Vec& xhi, const Vec& ylo, const Vec& yhi, int p) {
  const int nx = static_cast<int>(g.A.rows());
  const int ny = static_cast<int>(g.A.cols());
  if (xlo.size() != nx || ylo.size() != ny || g.b.size() != nx || g.c.size() != ny ||
      g.sx.size() != nx || g.ax.size() != nx || g.sy.size() != ny || g.ay.size() != ny) {
    throw std::invalid_argument("separable_game: inconsistent sizes");
  }
  if (g.k != 1 && g.k != 2) throw std::invalid_argument("separable_game: k must be 1 or 2");
  const int k = g.k;
  auto oracle = [g, nx, ny, k](const Vec& z, int order) {
    const auto x = z.head(nx);
    const auto y = z.tail(ny);
    const Vec Ay = g.A * y;
    const Vec Atx = g.A.transpose() * x;
    Derivs d;
    d.value = x.dot(Ay) + g.b.dot(x) + g.c.dot(y);
    for (int i = 0; i < nx; ++i) d.value += phi(x[i], g.sx[i], g.ax[i], k);
    for (int j = 0; j < ny; ++j) d.value -= phi(y[j], g.sy[j], g.ay[j], k);
    if (order >= 1) {
      d.grad.resize(nx + ny);
      for (int i = 0; i < nx; ++i) d.grad[i] = dphi(x[i], g.sx[i], g.ax[i], k) + Ay[i] + g.b[i];
      for (int j = 0; j < ny; ++j) {
        d.grad[nx + j] = Atx[j] + g.c[j] - dphi(y[j], g.sy[j], g.ay[j], k);
      }
    }
    if (order >= 2) {
      d.hess = Mat::Zero(nx + ny, nx + ny);
      for (int i = 0; i < nx; ++i) d.hess(i, i) = ddphi(x[i], g.sx[i], g.ax[i], k);
      for (int j = 0; j < ny; ++j) d.hess(nx + j, nx + j) = -ddphi(y[j], g.sy[j], g.ay[j], k);
      d.hess.topRightCorner(nx, ny) = g.A;
      d.hess.bottomLeftCorner(ny, nx) = g.A.transpose();
    }
    return d;
  };
  // Lipschitz constants over the boxes.
  double curv = 0.0;
  double third = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double r = std::max(std::abs(xlo[i] - g.ax[i]), std::abs(xhi[i] - g.ax[i]));
    curv = std::max(curv, ddphi(g.ax[i] + r, g.sx[i], g.ax[i], k));
    if (k == 2) third = std::max(third, 2.0 * g.sx[i]);
  }
  for (int j = 0; j < ny; ++j) {
    const double r = std::max(std::abs(ylo[j] - g.ay[j]), std::abs(yhi[j] - g.ay[j]));
    curv = std::max(curv, ddphi(g.ay[j] + r, g.sy[j], g.ay[j], k));
    if (k == 2) third = std::max(third, 2.0 * g.sy[j]);
  }
  const double L1 = std::max(spectral_norm(g.A) + curv, 1e-12);
  SaddleProblem prob(std::move(name), Domain::box(xlo, xhi), Domain::box(ylo, yhi), p, L1,
                     p == 1 ? L1 : third, oracle);
  if (p == 1 && k == 1) {
    prob.mu_x = g.sx.size() ? g.sx.minCoeff() : 0.0;
    prob.mu_y = g.sy.size() ? g.sy.minCoeff() : 0.0;
  }
  prob.closed_form_gap = [g, nx, ny, k, xlo, xhi, ylo, yhi](const Vec& z) {
    const Vec x = z.head(nx);
    const Vec y = z.tail(ny);
    const Vec wy = g.A.transpose() * x + g.c;  // coefficient of y
    const Vec wx = g.A * y + g.b;              // coefficient of x
    double upper = g.b.dot(x);
    for (int i = 0; i < nx; ++i) upper += phi(x[i], g.sx[i], g.ax[i], k);
    for (int j = 0; j < ny; ++j) upper += max1d(wy[j], g.sy[j], g.ay[j], k, ylo[j], yhi[j]);
    double lower = g.c.dot(y);
    for (int j = 0; j < ny; ++j) lower -= phi(y[j], g.sy[j], g.ay[j], k);
    for (int i = 0; i < nx; ++i) lower -= max1d(-wx[i], g.sx[i], g.ax[i], k, xlo[i], xhi[i]);
    return upper - lower;
  };
  return prob;
}

// ---------------------------------------------------------------------------
// Hard instances

SaddleProblem hard_instance(int p, int T, double Lp, double dz, HardInstanceInfo* info) {
  if (p != 1 && p != 2) throw std::invalid_argument("hard_instance: p must be 1 or 2");
  if (T < 1) throw std::invalid_argument("hard_instance: T must be >= 1");
  if (!(Lp > 0.0)) throw std::invalid_argument("hard_instance: Lp must be > 0");
  const int n = T + 1;
  const double d_bar = std::sqrt(2.0 * n);
  const bool scaled = dz > 0.0;
  const double beta = scaled ? d_bar / dz : 1.0;
  const double c = Lp / (std::pow(2.0, p + 1) * factorial(p));
  // Chain term k (0..T): y_{k+1} * d_k^p with d_0 = 1 - x_1, d_k = x_k - x_{k+1}.
  auto oracle = [=](const Vec& z, int order) {
    const Vec x = beta * z.head(n);
    const Vec y = beta * z.tail(n);
    Derivs d;
    d.grad = Vec::Zero(2 * n);
    if (order >= 2) d.hess = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
      const double dk = (k == 0) ? 1.0 - x[0] : x[k - 1] - x[k];
      const double dp = std::pow(dk, p);
      const double dp1 = p == 1 ? 1.0 : dk;  // d^{p-1}
      d.value += c * y[k] * dp;
      if (order >= 1) {
        // d(d_k)/dx: k == 0 -> -e_0; else e_{k-1} - e_k.
        d.grad[n + k] += c * dp;
        if (k == 0) {
          d.grad[0] -= c * y[k] * p * dp1;
        } else {
          d.grad[k - 1] += c * y[k] * p * dp1;
          d.grad[k] -= c * y[k] * p * dp1;
        }
      }
      if (order >= 2) {
        const double g = c * p * dp1;  // d^2/(dx dy_k) along d(d_k)/dx
        const double hxx = p == 2 ? 2.0 * c * y[k] : 0.0;
        if (k == 0) {
          d.hess(0, n) -= g;
          d.hess(n, 0) -= g;
          d.hess(0, 0) += hxx;
        } else {
          d.hess(k - 1, n + k) += g;
          d.hess(n + k, k - 1) += g;
          d.hess(k, n + k) -= g;
          d.hess(n + k, k) -= g;
          d.hess(k - 1, k - 1) += hxx;
          d.hess(k, k) += hxx;
          d.hess(k - 1, k) -= hxx;
          d.hess(k, k - 1) -= hxx;
        }
      }
    }
    const double s = std::pow(beta, p + 1);
    d.value /= s;
    if (order >= 1) d.grad *= beta / s;
    if (order >= 2) d.hess *= beta * beta / s;
    return d;
  };
  // Hessian of the unscaled instance: coupling entries c*p*d^{p-1} (|.| <= c*p)
  // along a chain, plus 2c*y blocks for p=2; the bound below covers both.
  const double L1_bar = c * (4.0 * p + 8.0 * (p - 1));
  const double L1 = L1_bar / std::pow(beta, p - 1);
  Domain X = Domain::custom(OrderedBox::uniform(n, 0.0, 1.0));
  Domain Y = Domain::cube(n, 0.0, 1.0);
  if (scaled) {
    X = scale_domain(X, beta);
    Y = scale_domain(Y, beta);
  }
  std::ostringstream name;
  name << "hard_new_p" << p << "_T" << T;
  SaddleProblem prob(name.str(), X, Y, p, p == 1 ? Lp : L1, Lp, oracle);
  if (info) *info = HardInstanceInfo{T, p, Lp, beta, d_bar};
  return prob;
}

SaddleProblem lin_hard_instance(int p, int T, double Lp, LinInstanceInfo* info) {
  if (p != 1 && p != 2) throw std::invalid_argument("lin_hard_instance: p must be 1 or 2");
  if (T < 1) throw std::invalid_argument("lin_hard_instance: T must be >= 1");
  const int n = 4 * T + 1;
  const double c = Lp / (std::pow(2.0, p + 1) * factorial(p + 1));
  auto pw = [](double t, int e) { return std::pow(t, e); };
  auto oracle = [=](const Vec& z, int order) {
    const Vec x = z.head(n);
    const Vec y = z.tail(n);
    Derivs d;
    d.grad = Vec::Zero(2 * n);
    if (order >= 2) d.hess = Mat::Zero(2 * n, 2 * n);
    // Chain terms y_j * base_j^p, base_j = x_j - x_{j+1} (j < 4T) or x_j.
    for (int j = 0; j < n; ++j) {
      const bool diff = j < n - 2;
      const double base = diff ? x[j] - x[j + 1] : x[j];
      const double bp = pw(base, p);
      const double bp1 = p == 1 ? 1.0 : base;
      d.value += y[j] * bp;
      if (order >= 1) {
        d.grad[n + j] += bp;
        d.grad[j] += y[j] * p * bp1;
        if (diff) d.grad[j + 1] -= y[j] * p * bp1;
      }
      if (order >= 2) {
        const double g = p * bp1;
        d.hess(j, n + j) += g;
        d.hess(n + j, j) += g;
        if (diff) {
          d.hess(j + 1, n + j) -= g;
          d.hess(n + j, j + 1) -= g;
        }
        if (p == 2) {
          d.hess(j, j) += 2.0 * y[j];
          if (diff) {
            d.hess(j + 1, j + 1) += 2.0 * y[j];
            d.hess(j, j + 1) -= 2.0 * y[j];
            d.hess(j + 1, j) -= 2.0 * y[j];
          }
        }
      }
    }
    // Power terms in y: +y_i^{p+1} for i <= 4T-1, -(1/(p(p+1))) y_i^{p+1} for 2 <= i <= 4T.
    for (int j = 0; j < n - 1; ++j) {
      double coef = 0.0;
      if (j <= n - 3) coef += 1.0;
      if (j >= 1) coef -= 1.0 / (p * (p + 1.0));
      if (coef == 0.0) continue;
      d.value += coef * pw(y[j], p + 1);
      if (order >= 1) d.grad[n + j] += coef * (p + 1) * pw(y[j], p);
      if (order >= 2) d.hess(n + j, n + j) += coef * (p + 1) * p * pw(y[j], p - 1);
    }
    // Affine term -(x_1 - 4T + 1/p) y_1.
    const double a = x[0] - 4.0 * T + 1.0 / p;
    d.value -= a * y[0];
    if (order >= 1) {
      d.grad[0] -= y[0];
      d.grad[n] -= a;
    }
    if (order >= 2) {
      d.hess(0, n) -= 1.0;
      d.hess(n, 0) -= 1.0;
    }
    d.value *= c;
    if (order >= 1) d.grad *= c;
    if (order >= 2) d.hess *= c;
    return d;
  };
  Vec xhi(n);
  for (int i = 0; i < n; ++i) xhi[i] = 4.0 * T - i;  // 4T - i + 1 with 1-based i
  Vec yhi = Vec::Ones(n);
  yhi[n - 1] = 0.0;
  Domain X = Domain::custom(std::make_shared<const OrderedBox>(Vec::Zero(n), xhi));
  Domain Y = Domain::box(Vec::Zero(n), yhi);
  const double L1 = c * (4.0 * p + 8.0 * (p - 1) * 4.0 * T + 2.0 * (p + 1) * p + 2.0);
  std::ostringstream name;
  name << "hard_lin_p" << p << "_T" << T;
  SaddleProblem prob(name.str(), X, Y, p, L1, Lp, oracle);
  if (info) {
    *info = LinInstanceInfo{T, 8.0 * std::pow(T, 1.5), std::sqrt(static_cast<double>(T)),
                            Lp * T / (std::pow(2.0, p - 1) * factorial(p + 1))};
  }
  return prob;
}

// ---------------------------------------------------------------------------

SaddleProblem make_problem(const nlohmann::json& spec) {
  const std::string kind = spec.at("problem").get<std::string>();
  const int p = spec.value("p", 1);
  const double Lp = spec.value("Lp", 1.0);
  const double L1 = spec.value("L1", 1.0);
  const auto seed = spec.value("seed", 0ULL);
  if (kind == "hard_new") {
    return hard_instance(p, spec.at("T").get<int>(), Lp, spec.value("DZ", 0.0));
  }
  if (kind == "hard_lin") return lin_hard_instance(p, spec.at("T").get<int>(), Lp);

  const int n = spec.value("dim", 4);
  if (n < 1) throw std::invalid_argument("dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto random_matrix = [&](double norm) {
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = normal(rng);
    return Mat(A * (norm / spectral_norm(A)));
  };
  SeparableGame g;
  double coupling = L1;
  if (kind == "bilinear") {
    g.k = 1;
    g.sx = Vec::Zero(n);
    g.sy = Vec::Zero(n);
  } else if (kind == "quadratic") {
    g.k = 1;
    coupling = 0.5 * L1;
    g.sx.resize(n);
    g.sy.resize(n);
    for (int i = 0; i < n; ++i) g.sx[i] = (0.2 + 0.8 * unif(rng)) * 0.5 * L1;
    for (int i = 0; i < n; ++i) g.sy[i] = (0.2 + 0.8 * unif(rng)) * 0.5 * L1;
  } else if (kind == "power") {
    g.k = 2;
    coupling = 0.5 * L1;
    g.sx = Vec::Constant(n, 0.5 * Lp);
    g.sy = Vec::Constant(n, 0.5 * Lp);
  } else {
    throw std::invalid_argument("unknown problem kind: " + kind);
  }
  g.A = random_matrix(coupling);
  Vec xs(n), ys(n);
  for (int i = 0; i < n; ++i) xs[i] = unif(rng) - 0.5;
  for (int i = 0; i < n; ++i) ys[i] = unif(rng) - 0.5;
  // Interior saddle at (xs, ys): shift the linear terms so F(xs, ys) = 0.
  g.ax = xs;
  g.ay = ys;
  g.b = -g.A * ys;
  g.c = -g.A.transpose() * xs;
  const Vec lo = Vec::Constant(n, -1.0);
  const Vec hi = Vec::Constant(n, 1.0);
  std::ostringstream name;
  name << kind << "_p" << p << "_n" << n << "_s" << seed;
  SaddleProblem prob = separable_game(name.str(), g, lo, hi, lo, hi, p);
  Vec zs(2 * n);
  zs << xs, ys;
  prob.known_saddle = zs;
  return prob;
}

// ---------------------------------------------------------------------------

GapEstimate duality_gap(const SaddleProblem& problem, const Vec& z, const InnerSolver* solver) {
  if (!contains(problem.domain(), z)) throw std::invalid_argument("duality_gap: z outside domain");
  if (problem.closed_form_gap) return GapEstimate{problem.closed_form_gap(z), 0.0};
  if (solver == nullptr || !*solver) {
    throw std::invalid_argument("duality_gap: no closed form and no inner solver for " +
                                problem.name());
  }
  const Vec x = problem.x_part(z);
  const Vec y = problem.y_part(z);
  const FunctionView hy = slice_y_neg(problem, x);
  const FunctionView hx = slice_x(problem, y);
  const Vec y_hat = (*solver)(hy, y);
  const Vec x_hat = (*solver)(hx, x);
  const Derivs dy = hy.eval(y_hat, 1);
  const Derivs dx = hx.eval(x_hat, 1);
  // Each inner value is within residual * diameter of its optimum.
  const double err = tangent_residual(hy.domain, y_hat, dy.grad) * diameter(hy.domain) +
                     tangent_residual(hx.domain, x_hat, dx.grad) * diameter(hx.domain);
  return GapEstimate{-dy.value - dx.value, err};
}

DerivativeReport check_derivatives(const SaddleProblem& problem, const Vec& z, double tol) {
  DerivativeReport rep;
  const int order = problem.order();
  const Derivs d = problem.eval(z, order);
  const double scale =
      std::max({1.0, std::abs(d.value), d.grad.lpNorm<Eigen::Infinity>()});
  const double tolerance = tol > 0.0 ? tol : std::max(1e-5, 1e-6 * scale);
  for (int i = 0; i < problem.dim(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(z[i]));
    Vec zp = z, zm = z;
    zp[i] += h;
    zm[i] -= h;
    // Fall back to a one-sided difference on a face; a coordinate with no
    // feasible step (fixed by the domain) is skipped.
    const bool up = contains(problem.domain(), zp), down = contains(problem.domain(), zm);
    if (!up && !down) continue;
    if (!up) zp = z;
    if (!down) zm = z;
    const double width = zp[i] - zm[i];
    const Derivs dp = problem.eval(zp, order);
    const Derivs dm = problem.eval(zm, order);
    const double fd = (dp.value - dm.value) / width;
    const double ge = std::abs(fd - d.grad[i]);
    rep.grad_error = std::max(rep.grad_error, ge);
    if (ge > tolerance) {
      rep.ok = false;
      rep.failures.push_back("gradient entry " + std::to_string(i));
    }
    if (order >= 2) {
      const Vec col = (dp.grad - dm.grad) / width;
      const double he = (col - d.hess.col(i)).lpNorm<Eigen::Infinity>();
      rep.hess_error = std::max(rep.hess_error, he);
      if (he > tolerance) {
        rep.ok = false;
        rep.failures.push_back("hessian column " + std::to_string(i));
      }
    }
  }
  return rep;
}

}  // namespace saddle
