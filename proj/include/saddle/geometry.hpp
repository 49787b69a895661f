// Compact convex domains: projection, tangent-cone projection, diameter,
// scaling and the tangent residual min_{c in N(z)} ||F + c||.
#pragma once

#include <memory>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "json.hpp"

namespace saddle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kMembershipTol = 1e-10;
inline constexpr double kActiveTol = 1e-9;

// Extension hook for sets that are not boxes or balls (the ordered
// polytopes of the hard instances live in problems).
class ConvexSet {
 public:
  virtual ~ConvexSet() = default;
  virtual int dim() const = 0;
  virtual Vec project(const Vec& p) const = 0;
  // Jacobian of the projection at p (piecewise-affine sets: one selection).
  virtual Mat project_jacobian(const Vec& p) const = 0;
  // Projection of v onto the tangent cone at z.
  virtual Vec project_tangent(const Vec& z, const Vec& v) const = 0;
  virtual bool contains(const Vec& z, double tol) const = 0;
  virtual double diameter() const = 0;
  virtual std::shared_ptr<const ConvexSet> scaled(double beta) const = 0;
  virtual std::string name() const = 0;
};

class Domain;

struct Box {
  Vec lo, hi;
};
struct Ball {
  Vec center;
  double radius = 0.0;
};
struct Product {
  std::shared_ptr<const Domain> left, right;
};
struct Custom {
  std::shared_ptr<const ConvexSet> set;
};

class Domain {
 public:
  using Variant = std::variant<Box, Ball, Product, Custom>;

  Domain() : v_(Box{}), dim_(0) {}  // empty set placeholder

  static Domain box(Vec lo, Vec hi);
  static Domain cube(int n, double lo, double hi);
  static Domain ball(Vec center, double radius);
  static Domain product(const Domain& left, const Domain& right);
  static Domain custom(std::shared_ptr<const ConvexSet> set);

  int dim() const { return dim_; }
  const Variant& variant() const { return v_; }

 private:
  Domain(Variant v, int dim) : v_(std::move(v)), dim_(dim) {}
  Variant v_;
  int dim_ = 0;
};

Vec project(const Domain& d, const Vec& p);
Mat project_jacobian(const Domain& d, const Vec& p);
Vec project_tangent(const Domain& d, const Vec& z, const Vec& v);
// Component of v in the normal cone at z: v - project_tangent(z, v).
Vec normal_component(const Domain& d, const Vec& z, const Vec& v);
double tangent_residual(const Domain& d, const Vec& z, const Vec& Fz);
bool contains(const Domain& d, const Vec& z, double tol = kMembershipTol);
double diameter(const Domain& d);
Domain scale_domain(const Domain& d, double beta);

nlohmann::json to_json(const Domain& d);
Domain domain_from_json(const nlohmann::json& j);

}  // namespace saddle
