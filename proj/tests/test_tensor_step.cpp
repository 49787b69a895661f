#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "saddle/tensor_step.hpp"

using namespace saddle;
using namespace testing_oracles;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

// Scalar operator F(z) = z^3 on a wide interval.
OperatorView cube_op() {
  return OperatorView(Domain::cube(1, -10.0, 10.0), 2, 1.0, 6.0, [](const Vec& z, int order) {
    OperatorEval e;
    e.F = scalar(z[0] * z[0] * z[0]);
    if (order >= 2) e.J = Mat::Constant(1, 1, 3.0 * z[0] * z[0]);
    return e;
  });
}

// Monotone affine operator A z + b with A = PSD + skew part.
struct Affine {
  Mat A;
  Vec b;
  OperatorEval at(const Vec& z) const { return {A * z + b, A}; }
};

Affine random_affine(std::mt19937_64& rng, int n) {
  Mat G(n, n), S(n, n);
  for (int i = 0; i < n; ++i) {
    G.row(i) = random_vec(rng, n, -1.0, 1.0).transpose();
    S.row(i) = random_vec(rng, n, -1.0, 1.0).transpose();
  }
  return {0.3 * G * G.transpose() + (S - S.transpose()), random_vec(rng, n, -2.0, 2.0)};
}

// Root of 1 + 3s + |s|s = 0 by bisection on [-1, 0].
double cubic_model_root() {
  double lo = -1.0, hi = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double m = 0.5 * (lo + hi);
    (1.0 + 3.0 * m + std::abs(m) * m > 0.0 ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

// h(z) = z'Qz/2 + c'z + (w/3)||z - a||^3, Hessian Lipschitz constant 2w.
FunctionView random_cubic_function(std::mt19937_64& rng, const Domain& dom, double w) {
  const int n = dom.dim();
  Mat G(n, n);
  for (int i = 0; i < n; ++i) G.row(i) = random_vec(rng, n, -1.0, 1.0).transpose();
  const Mat Q = G * G.transpose() / n;
  const Vec c = random_vec(rng, n, -1.0, 1.0);
  const Vec a = random_vec(rng, n, -0.5, 0.5);
  FunctionView h;
  h.domain = dom;
  h.p = 2;
  h.L1 = Q.norm() + 2.0 * w * (diameter(dom) + 1.0);
  h.Lp = 2.0 * w;
  h.eval = [Q, c, a, w](const Vec& z, int order) {
    const Derivs r = power_regularizer(z - a, 2, order);
    Derivs d;
    d.value = 0.5 * z.dot(Q * z) + c.dot(z) + w * r.value;
    if (order >= 1) d.grad = Q * z + c + w * r.grad;
    if (order >= 2) d.hess = Q + w * r.hess;
    return d;
  };
  return h;
}

}  // namespace

TEST_CASE("taylor operator") {
  const OperatorView op = cube_op();
  CHECK(taylor_operator(op, scalar(1.0), scalar(2.0), 1)[0] == 1.0);
  CHECK(taylor_operator(op, scalar(1.0), scalar(-7.0), 1)[0] == 1.0);
  CHECK(taylor_operator(op, scalar(1.0), scalar(2.0), 2)[0] == 4.0);
  CHECK_THROWS_AS(taylor_operator(OperatorView(Domain::cube(1, 0.0, 1.0), 1, 1.0, 1.0,
                                               [](const Vec& z, int) { return OperatorEval{z, Mat()}; }),
                                  scalar(0.5), scalar(0.2), 2),
                  std::invalid_argument);
}

TEST_CASE("second-order taylor remainder") {
  std::mt19937_64 rng(61);
  const SaddleProblem prob = make_problem({{"problem", "power"}, {"p", 2}, {"dim", 3}, {"seed", 5}});
  const OperatorView op(prob);
  for (int k = 0; k < 200; ++k) {
    const Vec zb = project(prob.domain(), random_vec(rng, 6, -1.0, 1.0));
    const Vec z = project(prob.domain(), random_vec(rng, 6, -1.0, 1.0));
    const double err = (op.F(z) - taylor_operator(op, zb, z, 2)).norm();
    CHECK(err <= 0.5 * prob.Lp() * (z - zb).squaredNorm() + 1e-12);
  }
}

TEST_CASE("tensor step examples") {
  const Domain wide = Domain::cube(1, -10.0, 10.0);
  const OperatorView identity(wide, 1, 1.0, 1.0, [](const Vec& z, int) { return OperatorEval{z, Mat()}; });
  TensorStepConfig c1;
  c1.q = 1;
  c1.M = 2.0;
  CHECK(tensor_step(identity, wide, scalar(1.0), c1).z[0] == 0.5);

  TensorStepConfig c2;
  c2.q = 2;
  c2.M = 2.0;
  const TensorStepResult r = tensor_step(cube_op(), wide, scalar(1.0), c2);
  CHECK(r.z[0] == doctest::Approx(1.0 + (3.0 - std::sqrt(13.0)) / 2.0).epsilon(1e-10));
  CHECK(r.z[0] == doctest::Approx(1.0 + cubic_model_root()).epsilon(1e-10));
  CHECK_FALSE(r.constrained);

  const Domain box = Domain::cube(2, 0.0, 1.0);
  const OperatorEval outward{Vec::Constant(2, 1.0), Mat::Zero(2, 2)};
  for (int q = 1; q <= 2; ++q) {
    TensorStepConfig c;
    c.q = q;
    c.M = 3.0;
    CHECK(tensor_step(outward, box, Vec::Zero(2), c).z.norm() <= 1e-12);
  }
  c1.M = 0.0;
  CHECK_THROWS_AS(tensor_step(identity, wide, scalar(1.0), c1), std::invalid_argument);
}

TEST_CASE("q=1 step is one projected gradient step") {
  std::mt19937_64 rng(67);
  for (int k = 0; k < 100; ++k) {
    const DomainCase dc = random_domain_case(rng);
    const int n = dc.z.size();
    const Affine A = random_affine(rng, n);
    TensorStepConfig c;
    c.q = 1;
    c.M = 1.7;
    const Vec z = tensor_step(A.at(dc.z), dc.domain, dc.z, c).z;
    CHECK((z - project(dc.domain, dc.z - A.at(dc.z).F / 1.7)).norm() == 0.0);
  }
}

TEST_CASE("q=2 step solves the model VI") {
  std::mt19937_64 rng(71);
  int constrained = 0;
  for (int k = 0; k < 150; ++k) {
    const DomainCase dc = random_domain_case(rng);
    const int n = dc.z.size();
    const Affine A = random_affine(rng, n);
    TensorStepConfig c;
    c.q = 2;
    c.M = 0.5 + 3.0 * (k % 4);
    const OperatorEval at = A.at(dc.z);
    const TensorStepResult r = tensor_step(at, dc.domain, dc.z, c);
    const double target = c.vi_tol * (1.0 + at.F.norm());
    CHECK(r.converged);
    CHECK(contains(dc.domain, r.z));
    const Vec G = model_operator(at, dc.z, r.z, 2, c.M);
    CHECK(tangent_residual(dc.domain, r.z, G) <= target);
    // Independent check through the constraint description of the domain.
    CHECK(brute_tangent_residual(dc.cons, r.z, G) <= target + 1e-8);
    constrained += r.constrained ? 1 : 0;
  }
  CHECK(constrained > 20);
}

TEST_CASE("unconstrained q=2 step satisfies the cubic model equation") {
  std::mt19937_64 rng(73);
  for (int k = 0; k < 50; ++k) {
    const Affine A = random_affine(rng, 5);
    const Domain huge = Domain::ball(Vec::Zero(5), 1e6);
    const Vec zb = random_vec(rng, 5, -1.0, 1.0);
    TensorStepConfig c;
    c.q = 2;
    c.M = 1.0 + k % 3;
    const OperatorEval at = A.at(zb);
    const TensorStepResult r = tensor_step(at, huge, zb, c);
    const Vec s = r.z - zb;
    CHECK_FALSE(r.constrained);
    CHECK((at.F + at.J * s + 0.5 * c.M * s.norm() * s).norm() <= 1e-9 * (1.0 + at.F.norm()));
  }
}

TEST_CASE("prox certificate examples") {
  FunctionView h;
  h.domain = Domain::cube(1, -10.0, 10.0);
  h.p = 1;
  h.L1 = h.Lp = 1.0;
  h.eval = [](const Vec& z, int order) {
    Derivs d;
    d.value = 0.5 * z.squaredNorm();
    if (order >= 1) d.grad = z;
    if (order >= 2) d.hess = Mat::Identity(1, 1);
    return d;
  };
  TensorStepConfig c;
  c.q = 1;
  c.M = 2.0;
  const ProxCertificate cert = iprox_via_tensor(h, scalar(1.0), 1.0, 0.0, c);
  CHECK(cert.z[0] == 0.5);
  CHECK(cert.lambda == 1.0);
  CHECK(cert.residual == 0.0);
  CHECK(cert.ok);

  // The constrained minimizer is a fixed point.
  h.domain = Domain::cube(1, 1.0, 2.0);
  const ProxCertificate at_min = iprox_via_tensor(h, scalar(1.0), 1.0, 0.0, c);
  CHECK(at_min.z[0] == 1.0);
  CHECK(at_min.residual <= 1e-12);
  CHECK(at_min.ok);
}

TEST_CASE("prox certificate on random cubic-regularized quadratics") {
  std::mt19937_64 rng(79);
  for (int k = 0; k < 100; ++k) {
    const Domain dom = k % 2 == 0 ? Domain::ball(Vec::Zero(4), 1e3) : Domain::cube(4, -1.0, 1.0);
    const FunctionView h = random_cubic_function(rng, dom, 0.5);
    const Vec zb = project(dom, random_vec(rng, 4, -1.2, 1.2));
    TensorStepConfig c;
    c.q = 2;
    c.M = 2.0 * h.Lp;
    const ProxCertificate cert = iprox_via_tensor(h, zb, h.Lp, 0.0, c);
    CHECK(cert.ok);
    CHECK(cert.residual <= 0.5 * cert.lambda * (cert.z - zb).norm() + 1e-6);
    // u lies in the normal cone: sampled feasible directions.
    for (int j = 0; j < 100; ++j) {
      const Vec zp = project(dom, random_vec(rng, 4, -2.0, 2.0));
      CHECK(cert.u.dot(zp - cert.z) <= 1e-9);
    }
  }
}

TEST_CASE("prox certificate for first-order steps") {
  std::mt19937_64 rng(83);
  for (int k = 0; k < 100; ++k) {
    const Domain dom = Domain::cube(4, -1.0, 1.0);
    const FunctionView h = random_cubic_function(rng, dom, 0.0);
    const Vec zb = project(dom, random_vec(rng, 4, -1.2, 1.2));
    TensorStepConfig c;
    c.q = 1;
    c.M = 2.0 * h.L1;
    const ProxCertificate cert = iprox_via_tensor(h, zb, c.M, 0.0, c);
    CHECK(cert.ok);
    CHECK(cert.residual <= 0.5 * cert.lambda * (cert.z - zb).norm() + 1e-12);
  }
}
