#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace stlcbot {

using Vec2 = Eigen::Vector2d;

/// Axis-aligned box given by centre and strictly positive half extents.
struct Box {
  Vec2 center = Vec2::Zero();
  Vec2 half = Vec2::Ones();

  Vec2 lower() const { return center - half; }
  Vec2 upper() const { return center + half; }
  bool contains(const Vec2& p) const {
    return ((p - center).cwiseAbs().array() <= half.array()).all();
  }
  bool contains(const Box& b) const {
    return (b.lower().array() >= lower().array()).all() &&
           (b.upper().array() <= upper().array()).all();
  }
  static Box from_corners(const Vec2& lo, const Vec2& hi) {
    return Box{0.5 * (lo + hi), 0.5 * (hi - lo)};
  }
  friend bool operator==(const Box&, const Box&) = default;
};

inline double norm_inf(const Vec2& v) { return v.cwiseAbs().maxCoeff(); }

/// inf over the box of the max-norm distance; zero inside.
inline double dist_inf(const Vec2& p, const Box& b) {
  const Vec2 gap = ((p - b.center).cwiseAbs() - b.half).cwiseMax(0.0);
  return gap.maxCoeff();
}

}  // namespace stlcbot
