#ifndef TDVARMA_REPR_HPP
#define TDVARMA_REPR_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/errors.hpp"
#include "tdvarma/jet.hpp"
#include "tdvarma/model.hpp"

namespace tdvarma {

/// Jets of A_{s,i}(theta) and B_{s,j}(theta) for s = 1..n.
template <typename Scalar>
class CoefficientJets {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  CoefficientJets(const Model<Scalar>& model, const Vector& theta, int n, DerivativeIndexPtr index)
      : index_(std::move(index)), r_(model.r()) {
    a_.resize(static_cast<std::size_t>(model.p()));
    b_.resize(static_cast<std::size_t>(model.q()));
    for (int i = 1; i <= model.p(); ++i) {
      auto& col = a_[static_cast<std::size_t>(i - 1)];
      col.reserve(static_cast<std::size_t>(n));
      for (int s = 1; s <= n; ++s) col.push_back(model.A(i).jet(s, theta, index_));
    }
    for (int j = 1; j <= model.q(); ++j) {
      auto& col = b_[static_cast<std::size_t>(j - 1)];
      col.reserve(static_cast<std::size_t>(n));
      for (int s = 1; s <= n; ++s) col.push_back(model.B(j).jet(s, theta, index_));
    }
  }

  int p() const { return static_cast<int>(a_.size()); }
  int q() const { return static_cast<int>(b_.size()); }
  int r() const { return r_; }
  const DerivativeIndexPtr& index() const { return index_; }
  const MatrixJet<Scalar>& A(int s, int i) const { return a_[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(s - 1)]; }
  const MatrixJet<Scalar>& B(int s, int j) const { return b_[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(s - 1)]; }

 private:
  DerivativeIndexPtr index_;
  int r_;
  std::vector<std::vector<MatrixJet<Scalar>>> a_;
  std::vector<std::vector<MatrixJet<Scalar>>> b_;
};

/// Row t of the pure autoregressive coefficients: pi_{t,1..kmax} with kmax = min(t-1, k_max).
/// Mélard recurrence with the boundary A_{s,0} = -I.
template <typename Scalar>
std::vector<MatrixJet<Scalar>> pi_row(const CoefficientJets<Scalar>& c, int t, int k_max) {
  const int p = c.p(), q = c.q(), r = c.r();
  const int kmax = std::min(t - 1, k_max < 0 ? t - 1 : k_max);
  const int w = std::max(p, q) + 1;
  const auto& idx = c.index();
  std::vector<MatrixJet<Scalar>> pis(static_cast<std::size_t>(w), MatrixJet<Scalar>(idx, r, r));
  std::vector<MatrixJet<Scalar>> tilde(static_cast<std::size_t>(w), MatrixJet<Scalar>(idx, r, r));
  for (int j = 1; j <= p; ++j) pis[static_cast<std::size_t>(j % w)] = c.A(t, j);
  for (int j = 1; j <= q; ++j) tilde[static_cast<std::size_t>(j % w)] = c.B(t, j);

  std::vector<MatrixJet<Scalar>> out;
  out.reserve(static_cast<std::size_t>(std::max(kmax, 0)));
  for (int k = 1; k <= kmax; ++k) {
    const std::size_t sk = static_cast<std::size_t>(k % w);
    MatrixJet<Scalar> tk = std::move(tilde[sk]);
    MatrixJet<Scalar> pk = std::move(pis[sk]);
    pis[sk] = MatrixJet<Scalar>(idx, r, r);
    tilde[sk] = MatrixJet<Scalar>(idx, r, r);
    if (!tk.all_zero()) {
      pk += tk;
      for (int d = 1; d <= p; ++d) pis[static_cast<std::size_t>((k + d) % w)].add_product(tk, c.A(t - k, d), Scalar(-1));
      for (int d = 1; d <= q; ++d) tilde[static_cast<std::size_t>((k + d) % w)].add_product(tk, c.B(t - k, d), Scalar(-1));
    }
    out.push_back(std::move(pk));
  }
  return out;
}

/// Row t of the pure moving-average coefficients psi_{t,0..kmax} (values only), psi_{t0} = I.
/// Mélard recurrence with B_{s,0} = I.
template <typename Scalar>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> psi_row(const CoefficientJets<Scalar>& c, int t,
                                                                           int k_max) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int p = c.p(), q = c.q(), r = c.r();
  const int kmax = std::min(t - 1, k_max < 0 ? t - 1 : k_max);
  const int w = std::max(p, q) + 1;
  std::vector<Matrix> psis(static_cast<std::size_t>(w), Matrix::Zero(r, r));
  std::vector<Matrix> tilde(static_cast<std::size_t>(w), Matrix::Zero(r, r));
  for (int j = 1; j <= q; ++j) psis[static_cast<std::size_t>(j % w)] = c.B(t, j).value();
  for (int j = 1; j <= p; ++j) tilde[static_cast<std::size_t>(j % w)] = c.A(t, j).value();

  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(kmax + 1));
  out.push_back(Matrix::Identity(r, r));
  for (int k = 1; k <= kmax; ++k) {
    const std::size_t sk = static_cast<std::size_t>(k % w);
    Matrix tk = tilde[sk];
    Matrix pk = psis[sk] + tk;
    psis[sk].setZero();
    tilde[sk].setZero();
    for (int d = 1; d <= q; ++d) psis[static_cast<std::size_t>((k + d) % w)].noalias() += tk * c.B(t - k, d).value();
    for (int d = 1; d <= p; ++d) tilde[static_cast<std::size_t>((k + d) % w)].noalias() += tk * c.A(t - k, d).value();
    out.push_back(std::move(pk));
  }
  return out;
}

/// pi_{tk}(theta) for 2 <= t <= n, 1 <= k <= min(t-1, k_max), with derivative layers.
template <typename Scalar>
class PiTable {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  PiTable(int n, int r, DerivativeIndexPtr index, int k_max) : n_(n), r_(r), k_max_(k_max), index_(std::move(index)) {
    rows_.resize(static_cast<std::size_t>(n));
  }

  int n() const { return n_; }
  int k_max() const { return k_max_; }
  const DerivativeIndexPtr& index() const { return index_; }
  int row_length(int t) const { return static_cast<int>(rows_[static_cast<std::size_t>(t - 1)].size()); }

  const MatrixJet<Scalar>& jet(int t, int k) const {
    check(t, k);
    return rows_[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(k - 1)];
  }
  Matrix value(int t, int k) const { return in_range(t, k) ? jet(t, k).value() : Matrix::Zero(r_, r_); }
  Matrix derivative(int t, int k, std::span<const int> indices) const {
    return in_range(t, k) ? jet(t, k).derivative(indices) : Matrix::Zero(r_, r_);
  }
  Matrix derivative(int t, int k, std::initializer_list<int> indices) const {
    return derivative(t, k, std::span<const int>(indices.begin(), indices.size()));
  }

  void set_row(int t, std::vector<MatrixJet<Scalar>> row) { rows_[static_cast<std::size_t>(t - 1)] = std::move(row); }

 private:
  bool in_range(int t, int k) const { return t >= 1 && t <= n_ && k >= 1 && k <= row_length(t); }
  void check(int t, int k) const {
    if (!in_range(t, k)) throw ContractError("pi index (t, k) out of range");
  }

  int n_;
  int r_;
  int k_max_;
  DerivativeIndexPtr index_;
  std::vector<std::vector<MatrixJet<Scalar>>> rows_;
};

template <typename Scalar>
PiTable<Scalar> build_pi(const Model<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta, int n,
                         int max_deriv_order, int k_max = -1) {
  if (n < 1) throw ContractError("build_pi needs n >= 1");
  if (theta.size() != model.m()) throw ConfigError("theta has the wrong length");
  auto index = DerivativeIndex::full(model.m(), max_deriv_order);
  CoefficientJets<Scalar> c(model, theta, n, index);
  PiTable<Scalar> table(n, model.r(), index, k_max);
  for (int t = 1; t <= n; ++t) table.set_row(t, pi_row(c, t, k_max));
  return table;
}

/// psi_{tk}(theta0) for k = 0..t-1 (psi_{t0} = I) together with the derivative
/// moving-average coefficients. Slot 0 of each derivative jet holds psi_{t0k}(theta, theta0);
/// higher slots hold psi_{tik}, psi_{tijk}, psi_{tijlk}.
template <typename Scalar>
class PsiTable {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  PsiTable(int n, int r, DerivativeIndexPtr index, int k_max) : n_(n), r_(r), k_max_(k_max), index_(std::move(index)) {
    base_.resize(static_cast<std::size_t>(n));
    deriv_.resize(static_cast<std::size_t>(n));
  }

  int n() const { return n_; }
  int r() const { return r_; }
  int k_max() const { return k_max_; }
  const DerivativeIndexPtr& index() const { return index_; }

  /// psi_{tk}(theta0); zero beyond the stored range.
  Matrix psi(int t, int k) const {
    const auto& row = base_[static_cast<std::size_t>(t - 1)];
    if (k < 0 || k >= static_cast<int>(row.size())) return Matrix::Zero(r_, r_);
    return row[static_cast<std::size_t>(k)];
  }
  const std::vector<Matrix>& psi_row(int t) const { return base_[static_cast<std::size_t>(t - 1)]; }

  int deriv_length(int t) const { return static_cast<int>(deriv_[static_cast<std::size_t>(t - 1)].size()); }
  const MatrixJet<Scalar>& jet(int t, int k) const {
    if (t < 1 || t > n_ || k < 1 || k > deriv_length(t)) throw ContractError("psi derivative index out of range");
    return deriv_[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(k - 1)];
  }
  /// psi_{t0k}(theta, theta0).
  Matrix psi0(int t, int k) const { return k >= 1 && k <= deriv_length(t) ? jet(t, k).value() : Matrix::Zero(r_, r_); }
  /// psi_{t,indices,k}(theta, theta0).
  Matrix derivative(int t, std::span<const int> indices, int k) const {
    return k >= 1 && k <= deriv_length(t) ? jet(t, k).derivative(indices) : Matrix::Zero(r_, r_);
  }
  Matrix derivative(int t, std::initializer_list<int> indices, int k) const {
    return derivative(t, std::span<const int>(indices.begin(), indices.size()), k);
  }

  void set_psi_row(int t, std::vector<Matrix> row) { base_[static_cast<std::size_t>(t - 1)] = std::move(row); }
  void set_deriv_row(int t, std::vector<MatrixJet<Scalar>> row) { deriv_[static_cast<std::size_t>(t - 1)] = std::move(row); }

 private:
  int n_;
  int r_;
  int k_max_;
  DerivativeIndexPtr index_;
  std::vector<std::vector<Matrix>> base_;
  std::vector<std::vector<MatrixJet<Scalar>>> deriv_;
};

/// Streams derivative rows psi_{t.k}(theta_eval, theta_truth) for t = 1..n without storing them.
template <typename Scalar>
class PsiDerivativeStream {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  PsiDerivativeStream(const Model<Scalar>& model, const Vector& theta_eval, const Vector& theta_truth, int n,
                      int max_deriv_order, int k_max = -1)
      : n_(n), r_(model.r()), k_max_(k_max), index_(DerivativeIndex::full(model.m(), max_deriv_order)),
        eval_(model, theta_eval, n, index_),
        truth_(model, theta_truth, n, DerivativeIndex::full(model.m(), 0)) {
    if (n < 1) throw ContractError("psi tables need n >= 1");
    if (theta_eval.size() != model.m() || theta_truth.size() != model.m()) throw ConfigError("theta has the wrong length");
    base_.reserve(static_cast<std::size_t>(n));
    for (int t = 1; t <= n; ++t) base_.push_back(tdvarma::psi_row(truth_, t, k_max));
  }

  int n() const { return n_; }
  const DerivativeIndexPtr& index() const { return index_; }
  const std::vector<Matrix>& psi_row(int t) const { return base_[static_cast<std::size_t>(t - 1)]; }
  std::vector<Matrix> take_psi_row(int t) { return std::move(base_[static_cast<std::size_t>(t - 1)]); }

  /// Entries k = 1..min(t-1, k_max) of row t.
  std::vector<MatrixJet<Scalar>> deriv_row(int t) const {
    const std::vector<MatrixJet<Scalar>> pis = pi_row(eval_, t, k_max_);
    const int kmax = static_cast<int>(pis.size());
    const auto& own = psi_row(t);
    std::vector<MatrixJet<Scalar>> out;
    out.reserve(static_cast<std::size_t>(kmax));
    for (int k = 1; k <= kmax; ++k) {
      MatrixJet<Scalar> jet(index_, r_, r_);
      jet.set(0, own[static_cast<std::size_t>(k)]);
      for (int u = 1; u <= k; ++u) {
        const MatrixJet<Scalar>& pu = pis[static_cast<std::size_t>(u - 1)];
        if (pu.all_zero()) continue;
        const auto& prev = psi_row(t - u);
        const int kk = k - u;
        if (kk >= static_cast<int>(prev.size())) continue;
        jet.add_product(pu, prev[static_cast<std::size_t>(kk)], Scalar(-1));
      }
      out.push_back(std::move(jet));
    }
    return out;
  }

 private:
  int n_;
  int r_;
  int k_max_;
  DerivativeIndexPtr index_;
  CoefficientJets<Scalar> eval_;
  CoefficientJets<Scalar> truth_;
  std::vector<std::vector<Matrix>> base_;
};

template <typename Scalar>
PsiTable<Scalar> build_psi(const Model<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta_eval,
                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta_truth, int n, int max_deriv_order,
                           int k_max = -1) {
  PsiDerivativeStream<Scalar> stream(model, theta_eval, theta_truth, n, max_deriv_order, k_max);
  PsiTable<Scalar> table(n, model.r(), stream.index(), k_max);
  for (int t = 1; t <= n; ++t) table.set_deriv_row(t, stream.deriv_row(t));
  for (int t = 1; t <= n; ++t) table.set_psi_row(t, stream.take_psi_row(t));
  return table;
}

/// psi_{tk} = B_{tk} + sum_i A_{ti} psi_{t-i,k-i}, computed by direct convolution; rows[t-1][k] for k = 0..t-1.
template <typename Scalar>
std::vector<std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>> psi_by_convolution(
    const Model<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta, int n) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int r = model.r();
  std::vector<std::vector<Matrix>> rows(static_cast<std::size_t>(n));
  for (int t = 1; t <= n; ++t) {
    std::vector<Matrix> a, b;
    for (int i = 1; i <= model.p(); ++i) a.push_back(model.A(i).value(t, theta));
    for (int j = 1; j <= model.q(); ++j) b.push_back(model.B(j).value(t, theta));
    auto& row = rows[static_cast<std::size_t>(t - 1)];
    row.push_back(Matrix::Identity(r, r));
    for (int k = 1; k <= t - 1; ++k) {
      Matrix v = k <= model.q() ? b[static_cast<std::size_t>(k - 1)] : Matrix::Zero(r, r);
      for (int i = 1; i <= std::min(model.p(), k); ++i)
        v.noalias() += a[static_cast<std::size_t>(i - 1)] * rows[static_cast<std::size_t>(t - i - 1)][static_cast<std::size_t>(k - i)];
      row.push_back(std::move(v));
    }
  }
  return rows;
}

/// pi_{tk} = A_{tk} + B_{tk} - sum_{j<k} B_{tj} pi_{t-j,k-j}; rows[t-1][k-1] for k = 1..t-1.
template <typename Scalar>
std::vector<std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>> pi_by_convolution(
    const Model<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta, int n) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int r = model.r();
  std::vector<std::vector<Matrix>> rows(static_cast<std::size_t>(n));
  for (int t = 1; t <= n; ++t) {
    std::vector<Matrix> b;
    for (int j = 1; j <= model.q(); ++j) b.push_back(model.B(j).value(t, theta));
    auto& row = rows[static_cast<std::size_t>(t - 1)];
    for (int k = 1; k <= t - 1; ++k) {
      Matrix v = Matrix::Zero(r, r);
      if (k <= model.p()) v += model.A(k).value(t, theta);
      if (k <= model.q()) v += b[static_cast<std::size_t>(k - 1)];
      for (int j = 1; j <= std::min(model.q(), k - 1); ++j)
        v.noalias() -= b[static_cast<std::size_t>(j - 1)] * rows[static_cast<std::size_t>(t - j - 1)][static_cast<std::size_t>(k - j - 1)];
      row.push_back(std::move(v));
    }
  }
  return rows;
}

/// Closed form for tdVARMA(1,1): psi_{tk} = A_t A_{t-1} ... A_{t-k+2} (A_{t-k+1} + B_{t-k+1}).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> varma11_psi_closed(
    const Model<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta, int t, int k) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (model.p() != 1 || model.q() > 1) throw ContractError("closed psi form needs a tdVARMA(1,1) or tdVAR(1) model");
  if (k < 1 || k > t - 1) throw ContractError("closed psi form needs 1 <= k <= t-1");
  const int r = model.r();
  Matrix prod = Matrix::Identity(r, r);
  for (int l = 0; l <= k - 2; ++l) prod = prod * model.A(1).value(t - l, theta);
  Matrix last = model.A(1).value(t - k + 1, theta);
  if (model.q() == 1) last += model.B(1).value(t - k + 1, theta);
  return prod * last;
}

/// Closed form for tdVARMA(1,1): pi_{tk} = (-1)^{k-1} B_t ... B_{t-k+2} (A_{t-k+1} + B_{t-k+1}).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> varma11_pi_closed(
    const Model<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta, int t, int k) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (model.p() != 1 || model.q() > 1) throw ContractError("closed pi form needs a tdVARMA(1,1) or tdVAR(1) model");
  if (k < 1 || k > t - 1) throw ContractError("closed pi form needs 1 <= k <= t-1");
  const int r = model.r();
  if (model.q() == 0) return k == 1 ? Matrix(model.A(1).value(t, theta)) : Matrix(Matrix::Zero(r, r));
  Matrix prod = Matrix::Identity(r, r);
  for (int l = 0; l <= k - 2; ++l) prod = prod * model.B(1).value(t - l, theta);
  const Matrix last = model.A(1).value(t - k + 1, theta) + model.B(1).value(t - k + 1, theta);
  const Scalar sign = (k % 2 == 1) ? Scalar(1) : Scalar(-1);
  return sign * (prod * last);
}

/// Amplitudes and frequencies of an upper-triangular bivariate tdVAR(1) with
/// A_t = [[a11 sin(w1 t), a12], [0, a22 sin(w2 t)]].
template <typename Scalar>
struct TriangularVar1Shape {
  Scalar a11, a12, a22, w1, w2;
};

template <typename Scalar>
TriangularVar1Shape<Scalar> triangular_var1_shape(const Model<Scalar>& model,
                                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta) {
  if (model.r() != 2 || model.p() != 1 || model.q() != 0) {
    throw ContractError("expected a bivariate tdVAR(1) model");
  }
  const auto& A = model.A(1);
  auto is_sine = [](const TimeFunction<Scalar>& f) {
    return f.kind() == TimeFunctionKind::sine && !f.second().is_parameter() && f.second().value == Scalar(0);
  };
  auto is_time_constant = [](const TimeFunction<Scalar>& f) {
    return f.kind() == TimeFunctionKind::constant ||
           (f.kind() == TimeFunctionKind::linear && !f.second().is_parameter() && f.second().value == Scalar(0));
  };
  if (!is_sine(A(0, 0)) || !is_sine(A(1, 1)) || !is_time_constant(A(0, 1)) || A(1, 0).kind() != TimeFunctionKind::constant ||
      A(1, 0).first().value != Scalar(0)) {
    throw ContractError("model is not of the upper-triangular sinusoidal tdVAR(1) shape");
  }
  return {A(0, 0).first().resolve(theta), A(0, 1).value(1, theta), A(1, 1).first().resolve(theta), A(0, 0).omega(),
          A(1, 1).omega()};
}

/// A_t^{(k-1)} = A_{t-1} A_{t-2} ... A_{t-k+1} for the upper-triangular sinusoidal tdVAR(1),
/// entrywise: diagonal products of sines and the mixed sum for the (1,2) entry.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> triangular_A_power(const TriangularVar1Shape<Scalar>& sh, int t, int k) {
  if (k < 1 || k > t) throw ContractError("A power needs 1 <= k <= t");
  const int len = k - 1;
  const auto at = [](int i) { return static_cast<std::size_t>(i); };
  // d1[l] = a11 sin(w1 (t-l)), d2[l] = a22 sin(w2 (t-l)), l = 1..k-1
  std::vector<Scalar> d1(at(len + 2), Scalar(1)), d2(at(len + 2), Scalar(1));
  for (int l = 1; l <= len; ++l) {
    d1[at(l)] = sh.a11 * std::sin(sh.w1 * static_cast<Scalar>(t - l));
    d2[at(l)] = sh.a22 * std::sin(sh.w2 * static_cast<Scalar>(t - l));
  }
  // prefix[f] = prod_{l<f} d1[l], suffix[f] = prod_{l>f} d2[l]
  std::vector<Scalar> prefix(at(len + 2), Scalar(1)), suffix(at(len + 2), Scalar(1));
  for (int f = 2; f <= len + 1; ++f) prefix[at(f)] = prefix[at(f - 1)] * d1[at(f - 1)];
  for (int f = len - 1; f >= 0; --f) suffix[at(f)] = suffix[at(f + 1)] * d2[at(f + 1)];
  Scalar off(0);
  for (int f = 1; f <= len; ++f) off += prefix[at(f)] * sh.a12 * suffix[at(f)];
  Eigen::Matrix<Scalar, 2, 2> out;
  out << prefix[at(len + 1)], off, Scalar(0), suffix[0];
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> var1_A_power(const Model<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta,
                                         int t, int k) {
  return triangular_A_power(triangular_var1_shape(model, theta), t, k);
}

}  // namespace tdvarma

#endif  // TDVARMA_REPR_HPP
