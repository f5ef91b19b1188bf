#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace archviz {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2d = Point2<double>;

template <typename Scalar>
using Polyline = std::vector<Point2<Scalar>, Eigen::aligned_allocator<Point2<Scalar>>>;

using Polyline2d = Polyline<double>;

template <typename Scalar>
struct Box2 {
  Point2<Scalar> min{Point2<Scalar>::Constant(std::numeric_limits<Scalar>::max())};
  Point2<Scalar> max{Point2<Scalar>::Constant(std::numeric_limits<Scalar>::lowest())};

  bool empty() const { return (min.array() > max.array()).any(); }
  void extend(const Point2<Scalar>& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Box2& other) {
    if (other.empty()) return;
    extend(other.min);
    extend(other.max);
  }
  bool contains(const Point2<Scalar>& p, Scalar tol = Scalar(0)) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
  Point2<Scalar> size() const { return max - min; }
};

using Box2d = Box2<double>;

/// z-component of (b - a) x (c - a).
template <typename Scalar>
Scalar orientation(const Point2<Scalar>& a, const Point2<Scalar>& b, const Point2<Scalar>& c) {
  const Point2<Scalar> ab = b - a;
  const Point2<Scalar> ac = c - a;
  return ab.x() * ac.y() - ab.y() * ac.x();
}

template <typename Scalar>
bool on_segment(const Point2<Scalar>& a, const Point2<Scalar>& b, const Point2<Scalar>& p,
                Scalar eps) {
  return std::abs(orientation(a, b, p)) <= eps &&
         p.x() >= std::min(a.x(), b.x()) - eps && p.x() <= std::max(a.x(), b.x()) + eps &&
         p.y() >= std::min(a.y(), b.y()) - eps && p.y() <= std::max(a.y(), b.y()) + eps;
}

/// Closed-segment intersection test, collinear overlap included.
template <typename Scalar>
bool segments_intersect(const Point2<Scalar>& p1, const Point2<Scalar>& p2,
                        const Point2<Scalar>& q1, const Point2<Scalar>& q2,
                        Scalar eps = Scalar(1e-9)) {
  const Scalar d1 = orientation(q1, q2, p1);
  const Scalar d2 = orientation(q1, q2, p2);
  const Scalar d3 = orientation(p1, p2, q1);
  const Scalar d4 = orientation(p1, p2, q2);
  if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
      ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)))
    return true;
  return on_segment(q1, q2, p1, eps) || on_segment(q1, q2, p2, eps) ||
         on_segment(p1, p2, q1, eps) || on_segment(p1, p2, q2, eps);
}

/// True when no two non-adjacent polygon edges touch and adjacent edges
/// meet only at their shared vertex.
template <typename Scalar>
bool polygon_is_simple(const Polyline<Scalar>& poly, Scalar eps = Scalar(1e-9)) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a1 = poly[i];
    const auto& a2 = poly[(i + 1) % n];
    if ((a2 - a1).norm() <= eps) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b1 = poly[j];
      const auto& b2 = poly[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their common vertex: reject folds back.
        const auto& shared = j == i + 1 ? a2 : a1;
        const auto& other_a = j == i + 1 ? a1 : a2;
        const auto& other_b = j == i + 1 ? b2 : b1;
        if (std::abs(orientation(shared, other_a, other_b)) <= eps &&
            (other_a - shared).dot(other_b - shared) > 0)
          return false;
        continue;
      }
      if (segments_intersect(a1, a2, b1, b2, eps)) return false;
    }
  }
  return true;
}

template <typename Scalar>
Scalar polygon_signed_area(const Polyline<Scalar>& poly) {
  Scalar area = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  return area / Scalar(2);
}

}  // namespace archviz
