#ifndef TDVARMA_MODEL_HPP
#define TDVARMA_MODEL_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/errors.hpp"
#include "tdvarma/jet.hpp"
#include "tdvarma/timefn.hpp"

namespace tdvarma {

inline constexpr int kMaxDimension = 8;
inline constexpr int kMaxOrder = 4;
inline constexpr int kDefaultCheckHorizon = 400;

enum class Block { A, B, G };

inline const char* to_string(Block b) {
  switch (b) {
    case Block::A: return "A";
    case Block::B: return "B";
    case Block::G: return "g";
  }
  return "?";
}

/// Names, block partition (A, B, g), optional true value and box bounds of theta.
template <typename Scalar>
struct ParamLayout {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<std::string> names;
  int a_block = 0;
  int b_block = 0;
  int g_block = 0;
  std::optional<Vector> true_value;
  Vector lower;
  Vector upper;

  int size() const { return a_block + b_block + g_block; }

  Block block_of(int i) const {
    if (i < a_block) return Block::A;
    if (i < a_block + b_block) return Block::B;
    return Block::G;
  }

  bool has_bounds() const { return lower.size() == size(); }

  void set_unbounded() {
    lower = Vector::Constant(size(), -std::numeric_limits<Scalar>::infinity());
    upper = Vector::Constant(size(), std::numeric_limits<Scalar>::infinity());
  }

  bool in_bounds(const Vector& theta) const {
    if (!has_bounds()) return true;
    for (int i = 0; i < size(); ++i)
      if (!(theta[i] >= lower[i] && theta[i] <= upper[i])) return false;
    return true;
  }

  Vector project(Vector theta) const {
    if (!has_bounds()) return theta;
    for (int i = 0; i < size(); ++i) theta[i] = std::min(std::max(theta[i], lower[i]), upper[i]);
    return theta;
  }

  void validate() const {
    if (a_block < 0 || b_block < 0 || g_block < 0) throw ConfigError("negative parameter block size");
    if (static_cast<int>(names.size()) != size()) {
      throw ConfigError("layout has " + std::to_string(names.size()) + " names but blocks sum to " +
                        std::to_string(size()));
    }
    if (true_value && true_value->size() != size()) throw ConfigError("true_value length does not match layout");
    if (lower.size() != 0 || upper.size() != 0) {
      if (lower.size() != size() || upper.size() != size()) throw ConfigError("bounds length does not match layout");
      for (int i = 0; i < size(); ++i)
        if (!(lower[i] <= upper[i])) throw ConfigError("empty bound interval for parameter " + names[i]);
      if (true_value && !in_bounds(*true_value)) throw ConfigError("true_value lies outside the bounds");
    }
  }
};

/// Observed series x_1..x_n, stored n x r.
template <typename Scalar>
struct Series {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix values;

  Series() = default;
  explicit Series(Matrix v) : values(std::move(v)) {
    if (values.rows() < 1) throw ContractError("series needs n >= 1");
    if (!values.allFinite()) throw ContractError("series contains non-finite values");
  }
  int n() const { return static_cast<int>(values.rows()); }
  int r() const { return static_cast<int>(values.cols()); }
  /// x_t for 1 <= t <= n.
  auto x(int t) const { return values.row(t - 1).transpose(); }
};

/// x_t = sum_i A_ti x_{t-i} + g_t eps_t + sum_j B_tj g_{t-j} eps_{t-j}, eps_t ~ (0, Sigma),
/// with zero values before t = 1.
template <typename Scalar>
class Model {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using VectorRef = Eigen::Ref<const Vector>;
  using Function = MatrixTimeFunction<Scalar>;

  Model(int r, std::vector<Function> a, std::vector<Function> b, Function g, Matrix sigma, ParamLayout<Scalar> layout,
        int check_horizon = kDefaultCheckHorizon)
      : r_(r), a_(std::move(a)), b_(std::move(b)), g_(std::move(g)), sigma_(std::move(sigma)), layout_(std::move(layout)) {
    if (r_ < 1 || r_ > kMaxDimension) throw ConfigError("dimension r must lie in 1..8, got " + std::to_string(r_));
    if (p() > kMaxOrder || q() > kMaxOrder) throw ConfigError("orders p, q must not exceed 4");
    layout_.validate();
    check_function(g_, "g", Block::G);
    for (std::size_t i = 0; i < a_.size(); ++i) check_function(a_[i], "A" + std::to_string(i + 1), Block::A);
    for (std::size_t j = 0; j < b_.size(); ++j) check_function(b_[j], "B" + std::to_string(j + 1), Block::B);
    set_sigma(sigma_);
    if (layout_.true_value) check_g_invertible(*layout_.true_value, check_horizon);
  }

  int r() const { return r_; }
  int p() const { return static_cast<int>(a_.size()); }
  int q() const { return static_cast<int>(b_.size()); }
  int m() const { return layout_.size(); }

  const Function& A(int i) const { return a_.at(static_cast<std::size_t>(i - 1)); }
  const Function& B(int j) const { return b_.at(static_cast<std::size_t>(j - 1)); }
  const Function& g() const { return g_; }
  const Matrix& sigma() const { return sigma_; }
  const Matrix& sigma_chol() const { return sigma_l_; }
  const ParamLayout<Scalar>& layout() const { return layout_; }

  const Vector& true_value() const {
    if (!layout_.true_value) throw ContractError("model has no true parameter value");
    return *layout_.true_value;
  }

  Model with_sigma(const Matrix& sigma) const {
    Model out = *this;
    out.set_sigma(sigma);
    return out;
  }

  Model with_layout(ParamLayout<Scalar> layout) const {
    Model out = *this;
    layout.validate();
    if (layout.size() != m()) throw ConfigError("replacement layout changes the parameter count");
    out.layout_ = std::move(layout);
    return out;
  }

  /// Throws ConfigError if g_t(theta) is singular for some t in 1..horizon.
  void check_g_invertible(const VectorRef& theta, int horizon) const {
    for (int t = 1; t <= horizon; ++t) {
      const Matrix gt = g_.value(t, theta);
      Eigen::FullPivLU<Matrix> lu(gt);
      if (!lu.isInvertible() || !gt.allFinite()) {
        throw ConfigError("g_t is singular at t=" + std::to_string(t));
      }
    }
  }

 private:
  void check_function(const Function& f, const std::string& what, Block block) const {
    if (f.rows() != r_ || f.cols() != r_) throw ConfigError(what + " must be " + std::to_string(r_) + "x" + std::to_string(r_));
    for (int s : f.slots()) {
      if (s >= m()) throw ConfigError(what + " references parameter slot " + std::to_string(s) + " beyond m");
      if (layout_.block_of(s) != block) {
        throw ConfigError(what + " references parameter " + layout_.names[s] + " from the " +
                          to_string(layout_.block_of(s)) + " block");
      }
    }
  }

  void set_sigma(const Matrix& sigma) {
    if (sigma.rows() != r_ || sigma.cols() != r_) throw ConfigError("Sigma must be r x r");
    if (!sigma.allFinite() || (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * (Scalar(1) + sigma.cwiseAbs().maxCoeff())) {
      throw ConfigError("Sigma must be finite and symmetric");
    }
    sigma_ = Scalar(0.5) * (sigma + sigma.transpose());
    Eigen::LLT<Matrix> llt(sigma_);
    if (llt.info() != Eigen::Success) throw ConfigError("Sigma is not positive definite");
    sigma_l_ = llt.matrixL();
  }

  int r_;
  std::vector<Function> a_;
  std::vector<Function> b_;
  Function g_;
  Matrix sigma_;
  Matrix sigma_l_;
  ParamLayout<Scalar> layout_;
};

using ParamLayoutd = ParamLayout<double>;
using Seriesd = Series<double>;
using Modeld = Model<double>;

/// Sigma_t(theta) = g_t Sigma g_t^T, symmetrized.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sigma_t(
    const Model<Scalar>& model, int t, const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& theta) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix gt = model.g().value(t, theta);
  Matrix s = gt * model.sigma() * gt.transpose();
  return Scalar(0.5) * (s + s.transpose());
}

/// Jet of Sigma_t over the directions of `index`.
template <typename Scalar>
MatrixJet<Scalar> sigma_t_jet(const Model<Scalar>& model, int t,
                              const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& theta,
                              const DerivativeIndexPtr& index) {
  const MatrixJet<Scalar> gj = model.g().jet(t, theta, index);
  MatrixJet<Scalar> s = (gj * model.sigma()) * gj.transpose();
  s.symmetrize();
  return s;
}

/// d Sigma_t / d theta_i (order 1) or d^2 Sigma_t / d theta_i d theta_j (order 2).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sigma_t_deriv(
    const Model<Scalar>& model, int t, const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& theta,
    std::span<const int> indices) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (indices.empty() || indices.size() > 2) {
    throw ContractError("sigma_t_deriv supports orders 1 and 2, requested " + std::to_string(indices.size()));
  }
  for (int i : indices)
    if (i < 0 || i >= model.m()) throw ConfigError("parameter index out of range");
  const auto& g = model.g();
  const Matrix& S = model.sigma();
  if (indices.size() == 1) {
    const Matrix g0 = g.value(t, theta);
    const Matrix gi = g.derivative(t, theta, indices);
    Matrix d = gi * S * g0.transpose();
    return d + d.transpose();
  }
  const int i = indices[0], j = indices[1];
  const std::array<int, 1> ii{i}, jj{j};
  const Matrix g0 = g.value(t, theta);
  const Matrix gi = g.derivative(t, theta, std::span<const int>(ii));
  const Matrix gj = g.derivative(t, theta, std::span<const int>(jj));
  const Matrix gij = g.derivative(t, theta, indices);
  Matrix d = gij * S * g0.transpose() + gi * S * gj.transpose();
  return d + d.transpose();
}

/// Derivatives of Sigma_t^{-1} of order 1..3; throws SingularCovarianceError when Sigma_t is singular.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sigma_t_inv_deriv(
    const Model<Scalar>& model, int t, const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& theta,
    std::span<const int> indices) {
  if (indices.empty() || indices.size() > 3) {
    throw ContractError("sigma_t_inv_deriv supports orders 1..3, requested " + std::to_string(indices.size()));
  }
  std::vector<int> dirs(indices.begin(), indices.end());
  for (int i : dirs)
    if (i < 0 || i >= model.m()) throw ConfigError("parameter index out of range");
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
  auto index = std::make_shared<const DerivativeIndex>(dirs, static_cast<int>(indices.size()));
  const MatrixJet<Scalar> s = sigma_t_jet<Scalar>(model, t, theta, index);
  Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(s.value());
  if (llt.info() != Eigen::Success) throw SingularCovarianceError(t, "");
  return s.inverse().derivative(indices);
}

}  // namespace tdvarma

#endif  // TDVARMA_MODEL_HPP
