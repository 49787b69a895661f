// Ordered polytope {x_1 >= x_2 >= ... >= x_n, lo_i <= x_i <= hi_i}, the
// constraint set of the chain-structured hard instances.
#pragma once

#include "saddle/geometry.hpp"

namespace saddle {

// Nonincreasing isotonic regression (pool adjacent violators), O(n).
Vec isotonic_nonincreasing(const Vec& v);

class OrderedBox final : public ConvexSet {
 public:
  OrderedBox(Vec lo, Vec hi);
  static std::shared_ptr<const OrderedBox> uniform(int n, double lo, double hi);

  int dim() const override { return static_cast<int>(lo_.size()); }
  Vec project(const Vec& p) const override;
  Mat project_jacobian(const Vec& p) const override;
  Vec project_tangent(const Vec& z, const Vec& v) const override;
  bool contains(const Vec& z, double tol) const override;
  double diameter() const override;
  std::shared_ptr<const ConvexSet> scaled(double beta) const override;
  std::string name() const override { return "ordered_box"; }

  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

 private:
  bool constant_bounds() const;
  Vec lo_, hi_;
  bool constant_;
};

}  // namespace saddle
