#include "saddle/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace saddle {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dim(const Domain& d, const Vec& p) {
  if (p.size() != d.dim()) {
    throw std::invalid_argument("dimension mismatch: domain " + std::to_string(d.dim()) +
                                ", point " + std::to_string(p.size()));
  }
}

int left_dim(const Product& pr) { return pr.left->dim(); }

}  // namespace

Domain Domain::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in size");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("box requires lo <= hi");
  }
  const int n = static_cast<int>(lo.size());
  return Domain(Box{std::move(lo), std::move(hi)}, n);
}

Domain Domain::cube(int n, double lo, double hi) {
  return box(Vec::Constant(n, lo), Vec::Constant(n, hi));
}

Domain Domain::ball(Vec center, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
  const int n = static_cast<int>(center.size());
  return Domain(Ball{std::move(center), radius}, n);
}

Domain Domain::product(const Domain& left, const Domain& right) {
  const int n = left.dim() + right.dim();
  return Domain(Product{std::make_shared<const Domain>(left), std::make_shared<const Domain>(right)},
                n);
}

Domain Domain::custom(std::shared_ptr<const ConvexSet> set) {
  if (!set) throw std::invalid_argument("null custom set");
  const int n = set->dim();
  return Domain(Custom{std::move(set)}, n);
}

Vec project(const Domain& d, const Vec& p) {
  check_dim(d, p);
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vec { return p.cwiseMax(b.lo).cwiseMin(b.hi); },
          [&](const Ball& b) -> Vec {
            const Vec w = p - b.center;
            const double n = w.norm();
            if (n <= b.radius) return p;
            return b.center + (b.radius / n) * w;
          },
          [&](const Product& pr) -> Vec {
            const int nl = left_dim(pr);
            Vec out(p.size());
            out.head(nl) = project(*pr.left, p.head(nl));
            out.tail(p.size() - nl) = project(*pr.right, p.tail(p.size() - nl));
            return out;
          },
          [&](const Custom& c) -> Vec { return c.set->project(p); }},
      d.variant());
}

Mat project_jacobian(const Domain& d, const Vec& p) {
  check_dim(d, p);
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Mat {
            Vec diag(p.size());
            for (Eigen::Index i = 0; i < p.size(); ++i) {
              diag[i] = (p[i] > b.lo[i] && p[i] < b.hi[i]) ? 1.0 : 0.0;
            }
            return diag.asDiagonal();
          },
          [&](const Ball& b) -> Mat {
            const Vec w = p - b.center;
            const double n = w.norm();
            const Eigen::Index k = p.size();
            if (n <= b.radius) return Mat::Identity(k, k);
            const Vec e = w / n;
            return (b.radius / n) * (Mat::Identity(k, k) - e * e.transpose());
          },
          [&](const Product& pr) -> Mat {
            const int nl = left_dim(pr);
            const Eigen::Index nr = p.size() - nl;
            Mat out = Mat::Zero(p.size(), p.size());
            out.topLeftCorner(nl, nl) = project_jacobian(*pr.left, p.head(nl));
            out.bottomRightCorner(nr, nr) = project_jacobian(*pr.right, p.tail(nr));
            return out;
          },
          [&](const Custom& c) -> Mat { return c.set->project_jacobian(p); }},
      d.variant());
}

Vec project_tangent(const Domain& d, const Vec& z, const Vec& v) {
  check_dim(d, z);
  check_dim(d, v);
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vec {
            Vec t = v;
            for (Eigen::Index i = 0; i < z.size(); ++i) {
              if (z[i] <= b.lo[i] + kActiveTol && t[i] < 0.0) t[i] = 0.0;
              if (z[i] >= b.hi[i] - kActiveTol && t[i] > 0.0) t[i] = 0.0;
            }
            return t;
          },
          [&](const Ball& b) -> Vec {
            if (b.radius <= 0.0) return Vec::Zero(v.size());
            const Vec w = z - b.center;
            const double n = w.norm();
            if (n < b.radius - kActiveTol) return v;
            const Vec e = w / n;
            const double radial = e.dot(v);
            if (radial <= 0.0) return v;
            return v - radial * e;
          },
          [&](const Product& pr) -> Vec {
            const int nl = left_dim(pr);
            const Eigen::Index nr = z.size() - nl;
            Vec out(z.size());
            out.head(nl) = project_tangent(*pr.left, z.head(nl), v.head(nl));
            out.tail(nr) = project_tangent(*pr.right, z.tail(nr), v.tail(nr));
            return out;
          },
          [&](const Custom& c) -> Vec { return c.set->project_tangent(z, v); }},
      d.variant());
}

Vec normal_component(const Domain& d, const Vec& z, const Vec& v) {
  return v - project_tangent(d, z, v);
}

double tangent_residual(const Domain& d, const Vec& z, const Vec& Fz) {
  if (!contains(d, z, kMembershipTol)) {
    throw std::invalid_argument("tangent_residual: point outside domain");
  }
  return project_tangent(d, z, -Fz).norm();
}

bool contains(const Domain& d, const Vec& z, double tol) {
  check_dim(d, z);
  if (!z.allFinite()) return false;
  return std::visit(
      Overloaded{
          [&](const Box& b) -> bool {
            return ((z - b.lo).array() >= -tol).all() && ((b.hi - z).array() >= -tol).all();
          },
          [&](const Ball& b) -> bool { return (z - b.center).norm() <= b.radius + tol; },
          [&](const Product& pr) -> bool {
            const int nl = left_dim(pr);
            return contains(*pr.left, z.head(nl), tol) &&
                   contains(*pr.right, z.tail(z.size() - nl), tol);
          },
          [&](const Custom& c) -> bool { return c.set->contains(z, tol); }},
      d.variant());
}

double diameter(const Domain& d) {
  return std::visit(Overloaded{[](const Box& b) { return (b.hi - b.lo).norm(); },
                               [](const Ball& b) { return 2.0 * b.radius; },
                               [](const Product& pr) {
                                 const double l = diameter(*pr.left);
                                 const double r = diameter(*pr.right);
                                 return std::sqrt(l * l + r * r);
                               },
                               [](const Custom& c) { return c.set->diameter(); }},
                    d.variant());
}

Domain scale_domain(const Domain& d, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("scale_domain: beta must be > 0");
  return std::visit(
      Overloaded{[&](const Box& b) { return Domain::box(b.lo / beta, b.hi / beta); },
                 [&](const Ball& b) { return Domain::ball(b.center / beta, b.radius / beta); },
                 [&](const Product& pr) {
                   return Domain::product(scale_domain(*pr.left, beta),
                                          scale_domain(*pr.right, beta));
                 },
                 [&](const Custom& c) { return Domain::custom(c.set->scaled(beta)); }},
      d.variant());
}

namespace {
std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }
Vec from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}
}  // namespace

nlohmann::json to_json(const Domain& d) {
  return std::visit(
      Overloaded{[](const Box& b) -> nlohmann::json {
                   return {{"type", "box"}, {"lo", to_std(b.lo)}, {"hi", to_std(b.hi)}};
                 },
                 [](const Ball& b) -> nlohmann::json {
                   return {{"type", "ball"}, {"center", to_std(b.center)}, {"radius", b.radius}};
                 },
                 [](const Product& pr) -> nlohmann::json {
                   return {{"type", "product"},
                           {"left", to_json(*pr.left)},
                           {"right", to_json(*pr.right)}};
                 },
                 [](const Custom&) -> nlohmann::json {
                   throw std::invalid_argument("custom domains are not serializable");
                 }},
      d.variant());
}

Domain domain_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "box") {
    return Domain::box(from_std(j.at("lo").get<std::vector<double>>()),
                       from_std(j.at("hi").get<std::vector<double>>()));
  }
  if (type == "ball") {
    return Domain::ball(from_std(j.at("center").get<std::vector<double>>()),
                        j.at("radius").get<double>());
  }
  if (type == "product") {
    return Domain::product(domain_from_json(j.at("left")), domain_from_json(j.at("right")));
  }
  throw std::invalid_argument("unknown domain type: " + type);
}

}  // namespace saddle
