#pragma once

#include "stlcbot/gp/gaussian_process.hpp"
#include "stlcbot/gp/normal.hpp"

#include <span>

namespace stlcbot::gp {

/// Expected improvement below `best` for a Gaussian posterior; zero when the
/// posterior is degenerate.
template <typename Scalar>
Scalar expected_improvement(Scalar mean, Scalar variance, Scalar best) {
  if (!(variance > Scalar(0))) return Scalar(0);
  const Scalar sigma = std::sqrt(variance);
  const Scalar z = (best - mean) / sigma;
  const Scalar ei = sigma * (z * normal_cdf(z) + normal_pdf(z));
  return ei > Scalar(0) ? ei : Scalar(0);
}

template <typename Scalar, typename Derived>
Scalar expected_improvement(const GaussianProcess<Scalar>& objective, const Eigen::MatrixBase<Derived>& u,
                            Scalar best) {
  const auto p = objective.predict(u);
  return expected_improvement(p.mean, p.variance, best);
}

/// P(c_k(u) <= 0) for one constraint posterior.
template <typename Scalar>
Scalar satisfaction_probability(Scalar mean, Scalar variance) {
  if (!(variance > Scalar(0))) return mean <= Scalar(0) ? Scalar(1) : Scalar(0);
  return normal_cdf(-mean / std::sqrt(variance));
}

template <typename Scalar, typename Derived>
Scalar feasibility_probability(std::span<const GaussianProcess<Scalar>> constraints,
                               const Eigen::MatrixBase<Derived>& u) {
  Scalar p(1);
  for (const auto& gp : constraints) {
    const auto pr = gp.predict(u);
    p *= satisfaction_probability(pr.mean, pr.variance);
  }
  return p;
}

template <typename Scalar, typename Derived>
Scalar cei(const GaussianProcess<Scalar>& objective, std::span<const GaussianProcess<Scalar>> constraints,
           const Eigen::MatrixBase<Derived>& u, Scalar best) {
  const Scalar ei = expected_improvement(objective, u, best);
  if (ei == Scalar(0)) return Scalar(0);
  return ei * feasibility_probability(constraints, u);
}

}  // namespace stlcbot::gp
