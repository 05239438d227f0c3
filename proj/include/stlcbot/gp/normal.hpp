#pragma once

#include <cmath>
#include <numbers>

namespace stlcbot::gp {

/// Standard normal density; saturates to 0 for |z| > 8.
template <typename Scalar>
Scalar normal_pdf(Scalar z) {
  using std::abs;
  using std::exp;
  if (abs(z) > Scalar(8)) return Scalar(0);
  return exp(Scalar(-0.5) * z * z) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// Standard normal CDF through erfc; saturates to 0 / 1 outside [-8, 8].
template <typename Scalar>
Scalar normal_cdf(Scalar z) {
  using std::erfc;
  if (z > Scalar(8)) return Scalar(1);
  if (z < Scalar(-8)) return Scalar(0);
  return Scalar(0.5) * erfc(-z / std::numbers::sqrt2_v<Scalar>);
}

}  // namespace stlcbot::gp
