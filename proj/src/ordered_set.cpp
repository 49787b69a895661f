#include "saddle/ordered_set.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace saddle {

Vec isotonic_nonincreasing(const Vec& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sum;
  std::vector<Eigen::Index> count;
  sum.reserve(n);
  count.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sum.push_back(v[i]);
    count.push_back(1);
    // Merge while the previous block mean is below the new block mean.
    while (sum.size() > 1) {
      const std::size_t k = sum.size() - 1;
      const double cur = sum[k] / static_cast<double>(count[k]);
      const double prev = sum[k - 1] / static_cast<double>(count[k - 1]);
      if (prev >= cur) break;
      sum[k - 1] += sum[k];
      count[k - 1] += count[k];
      sum.pop_back();
      count.pop_back();
    }
  }
  Vec out(n);
  Eigen::Index pos = 0;
  for (std::size_t b = 0; b < sum.size(); ++b) {
    const double mean = sum[b] / static_cast<double>(count[b]);
    for (Eigen::Index j = 0; j < count[b]; ++j) out[pos++] = mean;
  }
  return out;
}

namespace {

// Dykstra's alternating projections onto the intersection of two convex sets.
Vec dykstra(const Vec& v, const std::function<Vec(const Vec&)>& p1,
            const std::function<Vec(const Vec&)>& p2) {
  Vec x = v;
  Vec p = Vec::Zero(v.size());
  Vec q = Vec::Zero(v.size());
  const double scale = 1.0 + v.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 100000; ++it) {
    const Vec y = p1(x + p);
    p = x + p - y;
    const Vec xn = p2(y + q);
    q = y + q - xn;
    const double change = (xn - x).lpNorm<Eigen::Infinity>();
    x = xn;
    if (change <= 1e-15 * scale && (y - x).lpNorm<Eigen::Infinity>() <= 1e-14 * scale) break;
  }
  return x;
}

// Maximal runs of consecutive coordinates tied within tol.
std::vector<std::pair<Eigen::Index, Eigen::Index>> tied_blocks(const Vec& z, double tol) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= z.size(); ++i) {
    if (i == z.size() || z[i - 1] - z[i] > tol) {
      blocks.emplace_back(start, i);
      start = i;
    }
  }
  return blocks;
}

}  // namespace

OrderedBox::OrderedBox(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.size() == 0) {
    throw std::invalid_argument("ordered box: bound sizes differ or empty");
  }
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    if (!(lo_[i] <= hi_[i])) throw std::invalid_argument("ordered box: lo > hi");
    if (i > 0 && (lo_[i] > lo_[i - 1] || hi_[i] > hi_[i - 1])) {
      throw std::invalid_argument("ordered box: bounds must be nonincreasing");
    }
  }
  constant_ = constant_bounds();
}

std::shared_ptr<const OrderedBox> OrderedBox::uniform(int n, double lo, double hi) {
  return std::make_shared<const OrderedBox>(Vec::Constant(n, lo), Vec::Constant(n, hi));
}

bool OrderedBox::constant_bounds() const {
  return (lo_.array() == lo_[0]).all() && (hi_.array() == hi_[0]).all();
}

Vec OrderedBox::project(const Vec& p) const {
  if (p.size() != lo_.size()) throw std::invalid_argument("ordered box: dimension mismatch");
  if (constant_) return isotonic_nonincreasing(p).cwiseMax(lo_).cwiseMin(hi_);
  return dykstra(
      p, [](const Vec& w) { return isotonic_nonincreasing(w); },
      [this](const Vec& w) { return Vec(w.cwiseMax(lo_).cwiseMin(hi_)); });
}

Mat OrderedBox::project_jacobian(const Vec& p) const {
  const Vec x = project(p);
  const Eigen::Index n = x.size();
  Mat J = Mat::Zero(n, n);
  const double tol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
  for (const auto& [b, e] : tied_blocks(x, tol)) {
    bool at_bound = false;
    for (Eigen::Index i = b; i < e; ++i) {
      if (x[i] <= lo_[i] + tol || x[i] >= hi_[i] - tol) at_bound = true;
    }
    if (at_bound) continue;
    J.block(b, b, e - b, e - b).setConstant(1.0 / static_cast<double>(e - b));
  }
  return J;
}

Vec OrderedBox::project_tangent(const Vec& z, const Vec& v) const {
  const auto blocks = tied_blocks(z, kActiveTol);
  auto cone_proj = [&](const Vec& w) {
    Vec out = w;
    for (const auto& [b, e] : blocks) {
      out.segment(b, e - b) = isotonic_nonincreasing(w.segment(b, e - b));
    }
    return out;
  };
  const Eigen::Index n = z.size();
  Eigen::VectorXi sign = Eigen::VectorXi::Zero(n);  // +1: d >= 0, -1: d <= 0, 2: d = 0
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool low = z[i] <= lo_[i] + kActiveTol;
    const bool up = z[i] >= hi_[i] - kActiveTol;
    sign[i] = (low && up) ? 2 : low ? 1 : up ? -1 : 0;
  }
  auto sign_proj = [&](const Vec& w) {
    Vec out = w;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (sign[i] == 2) out[i] = 0.0;
      else if (sign[i] == 1) out[i] = std::max(out[i], 0.0);
      else if (sign[i] == -1) out[i] = std::min(out[i], 0.0);
    }
    return out;
  };
  // A tied block shares one sign pattern when the bounds are constant, so
  // clipping the blockwise isotonic fit is exact.
  bool uniform_sign = constant_;
  for (const auto& [b, e] : blocks) {
    for (Eigen::Index i = b + 1; i < e; ++i) {
      if (sign[i] != sign[b]) uniform_sign = false;
    }
  }
  if (uniform_sign) return sign_proj(cone_proj(v));
  return dykstra(v, cone_proj, sign_proj);
}

bool OrderedBox::contains(const Vec& z, double tol) const {
  if (z.size() != lo_.size() || !z.allFinite()) return false;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] < lo_[i] - tol || z[i] > hi_[i] + tol) return false;
    if (i > 0 && z[i] > z[i - 1] + tol) return false;
  }
  return true;
}

double OrderedBox::diameter() const { return (hi_ - lo_).norm(); }

std::shared_ptr<const ConvexSet> OrderedBox::scaled(double beta) const {
  if (!(beta > 0.0)) throw std::invalid_argument("scale: beta must be > 0");
  return std::make_shared<const OrderedBox>(lo_ / beta, hi_ / beta);
}

}  // namespace saddle
