#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stlcbot::gp {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// ARD squared-exponential hyperparameters.
template <typename Scalar>
struct KernelHyperparams {
  static constexpr Scalar kNoiseFloor = Scalar(1e-8);

  Scalar signal_variance = Scalar(1);
  Vector<Scalar> lengthscales;
  Scalar noise_variance = Scalar(1e-4);

  static KernelHyperparams isotropic(Eigen::Index dim, Scalar lengthscale,
                                     Scalar signal_variance = Scalar(1),
                                     Scalar noise_variance = Scalar(1e-4)) {
    return {signal_variance, Vector<Scalar>::Constant(dim, lengthscale), noise_variance};
  }

  void validate(Eigen::Index dim) const {
    if (lengthscales.size() != dim)
      throw std::invalid_argument("kernel needs one lengthscale per input dimension");
    if (!(signal_variance > Scalar(0))) throw std::invalid_argument("signal variance must be positive");
    if (!(lengthscales.array() > Scalar(0)).all()) throw std::invalid_argument("lengthscales must be positive");
    if (!(noise_variance >= kNoiseFloor)) throw std::invalid_argument("noise variance below the jitter floor");
  }
};

template <typename Scalar, typename DerivedU, typename DerivedV>
Scalar kernel(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v,
              const KernelHyperparams<Scalar>& h) {
  using std::exp;
  Scalar r2(0);
  for (Eigen::Index d = 0; d < h.lengthscales.size(); ++d) {
    const Scalar s = (u(d) - v(d)) / h.lengthscales(d);
    r2 += s * s;
  }
  return h.signal_variance * exp(Scalar(-0.5) * r2);
}

/// Cross-covariance between the rows of `a` and the rows of `b`.
template <typename Scalar, typename DerivedA, typename DerivedB>
Matrix<Scalar> gram(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                    const KernelHyperparams<Scalar>& h) {
  Matrix<Scalar> k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = kernel(a.row(i), b.row(j), h);
  return k;
}

class IllConditioned : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct Prediction {
  Scalar mean;
  Scalar variance;
  Scalar stddev() const { return std::sqrt(variance); }
};

/// Exact GP regression with zero prior mean. Rows of `inputs` are training
/// points. Immutable once fitted.
template <typename Scalar>
class GaussianProcess {
 public:
  static constexpr int kJitterRetries = 3;

  GaussianProcess(Matrix<Scalar> inputs, Vector<Scalar> targets, KernelHyperparams<Scalar> hyper)
      : inputs_(std::move(inputs)), targets_(std::move(targets)), hyper_(std::move(hyper)) {
    if (inputs_.rows() < 1) throw std::invalid_argument("GP needs at least one training point");
    if (inputs_.rows() != targets_.size()) throw std::invalid_argument("GP inputs and targets disagree in length");
    if (!inputs_.allFinite() || !targets_.allFinite()) throw std::invalid_argument("GP training data must be finite");
    hyper_.validate(inputs_.cols());

    const Matrix<Scalar> k = gram(inputs_, inputs_, hyper_);
    Scalar noise = hyper_.noise_variance;
    for (int attempt = 0; attempt <= kJitterRetries; ++attempt) {
      Matrix<Scalar> kn = k;
      kn.diagonal().array() += noise;
      llt_.compute(kn);
      if (llt_.info() == Eigen::Success) {
        effective_noise_ = noise;
        alpha_ = llt_.solve(targets_);
        return;
      }
      noise *= Scalar(10);
    }
    throw IllConditioned("covariance factorisation failed after " + std::to_string(kJitterRetries) +
                         " jitter escalations");
  }

  template <typename Derived>
  Prediction<Scalar> predict(const Eigen::MatrixBase<Derived>& u) const {
    const RowVector<Scalar> ks = gram(u.derived().transpose().eval(), inputs_, hyper_);
    const Scalar mean = ks.dot(alpha_);
    const Vector<Scalar> v = llt_.matrixL().solve(ks.transpose());
    Scalar var = hyper_.signal_variance - v.squaredNorm();
    if (var < Scalar(0)) var = Scalar(0);
    return {mean, var};
  }

  Scalar log_marginal_likelihood() const {
    const auto& l = llt_.matrixLLT();
    const Scalar log_det = Scalar(2) * l.diagonal().array().log().sum();
    const auto n = static_cast<Scalar>(targets_.size());
    return Scalar(-0.5) * targets_.dot(alpha_) - Scalar(0.5) * log_det -
           Scalar(0.5) * n * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  }

  const Matrix<Scalar>& inputs() const { return inputs_; }
  const Vector<Scalar>& targets() const { return targets_; }
  const KernelHyperparams<Scalar>& hyper() const { return hyper_; }
  const Vector<Scalar>& alpha() const { return alpha_; }
  /// Diagonal term actually used (noise after any jitter escalation).
  Scalar effective_noise() const { return effective_noise_; }

 private:
  Matrix<Scalar> inputs_;
  Vector<Scalar> targets_;
  KernelHyperparams<Scalar> hyper_;
  Eigen::LLT<Matrix<Scalar>> llt_;
  Vector<Scalar> alpha_;
  Scalar effective_noise_{};
};

template <typename Scalar>
GaussianProcess<Scalar> fit(Matrix<Scalar> inputs, Vector<Scalar> targets, KernelHyperparams<Scalar> hyper) {
  return GaussianProcess<Scalar>(std::move(inputs), std::move(targets), std::move(hyper));
}

/// Grid refinement of a common lengthscale multiplier by log marginal likelihood.
template <typename Scalar>
KernelHyperparams<Scalar> refine_lengthscales(const Matrix<Scalar>& inputs, const Vector<Scalar>& targets,
                                              const KernelHyperparams<Scalar>& start) {
  static constexpr Scalar kGrid[] = {Scalar(0.25), Scalar(0.5), Scalar(1), Scalar(2), Scalar(4)};
  KernelHyperparams<Scalar> best = start;
  Scalar best_lml = -std::numeric_limits<Scalar>::infinity();
  for (Scalar m : kGrid) {
    KernelHyperparams<Scalar> h = start;
    h.lengthscales *= m;
    try {
      const Scalar lml = GaussianProcess<Scalar>(inputs, targets, h).log_marginal_likelihood();
      if (lml > best_lml) {
        best_lml = lml;
        best = h;
      }
    } catch (const IllConditioned&) {
    }
  }
  return best;
}

/// Observations of one BO window: control rows, costs and constraint margins.
template <typename Scalar>
class Dataset {
 public:
  Dataset(Eigen::Index control_dim, Eigen::Index constraint_count)
      : controls_(0, control_dim), constraints_(0, constraint_count) {}

  template <typename DU, typename DC>
  void add(const Eigen::MatrixBase<DU>& u, Scalar cost, const Eigen::MatrixBase<DC>& c) {
    if (u.size() != controls_.cols() || c.size() != constraints_.cols())
      throw std::invalid_argument("dataset record dimensions disagree");
    const Eigen::Index n = size();
    controls_.conservativeResize(n + 1, Eigen::NoChange);
    costs_.conservativeResize(n + 1);
    constraints_.conservativeResize(n + 1, Eigen::NoChange);
    controls_.row(n) = u.derived().transpose();
    costs_(n) = cost;
    constraints_.row(n) = c.derived().transpose();
  }

  Eigen::Index size() const { return controls_.rows(); }
  Eigen::Index control_dim() const { return controls_.cols(); }
  Eigen::Index constraint_count() const { return constraints_.cols(); }
  const Matrix<Scalar>& controls() const { return controls_; }
  const Vector<Scalar>& costs() const { return costs_; }
  const Matrix<Scalar>& constraints() const { return constraints_; }

 private:
  Matrix<Scalar> controls_;
  Vector<Scalar> costs_;
  Matrix<Scalar> constraints_;
};

}  // namespace stlcbot::gp
