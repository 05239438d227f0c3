#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary. Nothing here calls into the library under test except to
// build inputs.

#include "stlcbot/stl/formula.hpp"
#include "stlcbot/stl/signal.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using stlcbot::stl::Formula;
using stlcbot::stl::Interval;
using stlcbot::stl::Predicate;

// ---------------------------------------------------------------------------
// Random STL formulas and signals

/// Random formula over robots {0, 1} whose windows, evaluated at t = 0, never
/// read past `span` seconds. Intervals are multiples of `dt`, sometimes offset
/// by a fraction of a step to exercise grid rounding.
class FormulaGenerator {
 public:
  FormulaGenerator(std::uint64_t seed, double span, double dt) : rng_(seed), span_(span), dt_(dt) {}

  Formula make(int depth) { return node(depth, span_); }

 private:
  Formula node(int depth, double budget) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 7);
    switch (pick(rng_)) {
      case 0:
        return leaf();
      case 1:
        return Formula::negation(node(depth - 1, budget));
      case 2:
        return Formula::conjunction(node(depth - 1, budget), node(depth - 1, budget));
      case 3:
        return Formula::disjunction(node(depth - 1, budget), node(depth - 1, budget));
      case 4:
      case 5: {
        const Interval iv = interval(budget);
        const Formula body = node(depth - 1, budget - iv.hi);
        return pick(rng_) % 2 == 0 ? Formula::always(iv, body) : Formula::eventually(iv, body);
      }
      case 6: {
        const Interval iv = interval(budget);
        return Formula::until(iv, node(depth - 1, budget - iv.hi), node(depth - 1, budget - iv.hi));
      }
      default:
        return leaf();
    }
  }

  Interval interval(double budget) {
    const long steps = std::max(0L, static_cast<long>(std::floor(budget / dt_ + 1e-9)));
    std::uniform_int_distribution<long> pick(0, steps);
    long a = pick(rng_);
    long b = pick(rng_);
    if (a > b) std::swap(a, b);
    double lo = static_cast<double>(a) * dt_;
    double hi = static_cast<double>(b) * dt_;
    // Occasionally shift the bounds off the grid (still inside the budget);
    // two spare steps keep the inward-rounded window non-empty.
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    if (frac(rng_) < 0.2 && b >= a + 2) {
      lo += 0.4 * dt_ * frac(rng_);
      hi -= 0.4 * dt_ * frac(rng_);
    }
    return {lo, hi};
  }

  Formula leaf() {
    std::uniform_int_distribution<int> kind(0, 5);
    std::uniform_int_distribution<int> robot(0, 1);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    std::uniform_real_distribution<double> thr(0.0, 2.5);
    const int r = robot(rng_);
    switch (kind(rng_)) {
      case 0:
        return Formula::atom(Predicate::dist_to_point(r, {coord(rng_), coord(rng_)}, thr(rng_)));
      case 1:
        return Formula::atom(Predicate::dist_to_box(r, {coord(rng_), coord(rng_)},
                                                    {0.2 + std::abs(coord(rng_)) / 3, 0.2 + std::abs(coord(rng_)) / 3},
                                                    thr(rng_)));
      case 2:
        return Formula::atom(Predicate::pairwise(r, 1 - r, thr(rng_)));
      case 3: {
        const double a = coord(rng_);
        return Formula::atom(Predicate::half_space(r, {std::cos(a), std::sin(a)}, coord(rng_) / 2));
      }
      case 4:
        return Formula::atom(Predicate::within_goal(r, {coord(rng_), coord(rng_)}, thr(rng_)));
      default:
        return Formula::truth();
    }
  }

  std::mt19937_64 rng_;
  double span_;
  double dt_;
};

/// Piecewise-constant two-robot position signal (columns x0 y0 x1 y1).
inline stlcbot::stl::Signal random_signal(std::mt19937_64& rng, int samples, double dt) {
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::uniform_int_distribution<int> run(1, 6);
  Eigen::MatrixXd m(samples, 4);
  int k = 0;
  while (k < samples) {
    const Eigen::RowVector4d v(coord(rng), coord(rng), coord(rng), coord(rng));
    for (int len = run(rng); len > 0 && k < samples; --len) m.row(k++) = v;
  }
  return stlcbot::stl::Signal(m, dt);
}

// ---------------------------------------------------------------------------
// Gaussian-process regression through an explicit matrix inverse, in
// extended precision.

struct NaivePosterior {
  double mean;
  double variance;
};

inline NaivePosterior naive_gp_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         double signal_variance, const Eigen::VectorXd& lengthscales,
                                         double noise, const Eigen::VectorXd& query) {
  using LD = long double;
  using MatL = Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<LD, Eigen::Dynamic, 1>;
  auto k = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    LD r2 = 0;
    for (Eigen::Index d = 0; d < a.size(); ++d) {
      const LD s = (static_cast<LD>(a(d)) - static_cast<LD>(b(d))) / static_cast<LD>(lengthscales(d));
      r2 += s * s;
    }
    return static_cast<LD>(signal_variance) * std::exp(LD(-0.5) * r2);
  };
  const Eigen::Index n = x.rows();
  MatL kn(n, n);
  VecL ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kn(i, j) = k(x.row(i).transpose(), x.row(j).transpose());
    kn(i, i) += static_cast<LD>(noise);
    ks(i) = k(x.row(i).transpose(), query);
  }
  const MatL inv = kn.inverse();
  const VecL yl = y.cast<LD>();
  const LD mean = ks.dot(inv * yl);
  LD var = static_cast<LD>(signal_variance) - ks.dot(inv * ks);
  if (var < 0) var = 0;
  return {static_cast<double>(mean), static_cast<double>(var)};
}

}  // namespace oracle
