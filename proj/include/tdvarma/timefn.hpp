#ifndef TDVARMA_TIMEFN_HPP
#define TDVARMA_TIMEFN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/errors.hpp"
#include "tdvarma/jet.hpp"

namespace tdvarma {

/// A coefficient that is either a fixed constant or a slot into the parameter vector.
template <typename Scalar>
struct Coefficient {
  Scalar value = Scalar(0);
  int slot = -1;

  static Coefficient fixed(Scalar v) { return {v, -1}; }
  static Coefficient parameter(int s) { return {Scalar(0), s}; }

  bool is_parameter() const { return slot >= 0; }
  Scalar resolve(const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& theta) const {
    if (slot < 0) return value;
    if (slot >= theta.size()) {
      throw ConfigError("parameter slot " + std::to_string(slot) + " out of range for theta of length " +
                        std::to_string(theta.size()));
    }
    return theta[slot];
  }
};

enum class TimeFunctionKind { constant, linear, sine, exp_sine, sum, product };

inline const char* to_string(TimeFunctionKind kind) {
  switch (kind) {
    case TimeFunctionKind::constant: return "constant";
    case TimeFunctionKind::linear: return "linear";
    case TimeFunctionKind::sine: return "sine";
    case TimeFunctionKind::exp_sine: return "exp_sine";
    case TimeFunctionKind::sum: return "sum";
    case TimeFunctionKind::product: return "product";
  }
  return "?";
}

/// Scalar deterministic function of time t >= 1 and of theta, smooth in theta to
/// third order. Primitives:
///   constant   c
///   linear     u + v*t
///   sine       u * sin(omega*t + v)
///   exp_sine   exp(-u * sin(omega*t + phase))
/// where u and v are Coefficients (constant or parameter). Composites add or
/// multiply two functions.
template <typename Scalar>
class TimeFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using VectorRef = Eigen::Ref<const Vector>;

  TimeFunction() : TimeFunction(constant(Scalar(0))) {}

  static TimeFunction constant(Scalar c) {
    TimeFunction f(TimeFunctionKind::constant);
    f.u_ = Coefficient<Scalar>::fixed(c);
    f.finish();
    return f;
  }
  static TimeFunction parameter(int slot) {
    return linear(Coefficient<Scalar>::parameter(slot), Coefficient<Scalar>::fixed(Scalar(0)));
  }
  static TimeFunction linear(Coefficient<Scalar> intercept, Coefficient<Scalar> slope) {
    TimeFunction f(TimeFunctionKind::linear);
    f.u_ = intercept;
    f.v_ = slope;
    f.finish();
    return f;
  }
  static TimeFunction sine(Coefficient<Scalar> amplitude, Scalar omega, Coefficient<Scalar> phase) {
    TimeFunction f(TimeFunctionKind::sine);
    f.u_ = amplitude;
    f.v_ = phase;
    f.omega_ = omega;
    f.finish();
    return f;
  }
  static TimeFunction exp_sine(Coefficient<Scalar> rate, Scalar omega, Scalar phase = Scalar(0)) {
    TimeFunction f(TimeFunctionKind::exp_sine);
    f.u_ = rate;
    f.omega_ = omega;
    f.phase_ = phase;
    f.finish();
    return f;
  }
  static TimeFunction sum(TimeFunction a, TimeFunction b) { return composite(TimeFunctionKind::sum, std::move(a), std::move(b)); }
  static TimeFunction product(TimeFunction a, TimeFunction b) {
    return composite(TimeFunctionKind::product, std::move(a), std::move(b));
  }

  TimeFunctionKind kind() const { return kind_; }
  const Coefficient<Scalar>& first() const { return u_; }
  const Coefficient<Scalar>& second() const { return v_; }
  Scalar omega() const { return omega_; }
  Scalar phase() const { return phase_; }
  const TimeFunction& lhs() const { return *lhs_; }
  const TimeFunction& rhs() const { return *rhs_; }
  bool is_composite() const { return lhs_ != nullptr; }

  /// Sorted, de-duplicated parameter slots this function depends on.
  const std::vector<int>& slots() const { return slots_; }
  bool depends_on(int slot) const { return std::binary_search(slots_.begin(), slots_.end(), slot); }
  bool is_constant_in_theta() const { return slots_.empty(); }

  Scalar value(int t, const VectorRef& theta) const {
    const std::array<int, 3> none{};
    return derivative(t, theta, std::span<const int>(none.data(), 0));
  }

  /// Exact partial derivative d^k f / d theta_{i1} ... d theta_{ik}, k = indices.size() <= 3.
  Scalar derivative(int t, const VectorRef& theta, std::span<const int> indices) const {
    if (indices.size() > 3) {
      throw ContractError("time-function derivatives are available up to order 3, requested " +
                          std::to_string(indices.size()));
    }
    check_slots(theta);
    std::array<int, 3> sorted{};
    std::copy(indices.begin(), indices.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.begin() + static_cast<long>(indices.size()));
    return derivative_sorted(t, theta, std::span<const int>(sorted.data(), indices.size()));
  }

 private:
  explicit TimeFunction(TimeFunctionKind k) : kind_(k) {}

  static TimeFunction composite(TimeFunctionKind k, TimeFunction a, TimeFunction b) {
    if (a.is_composite() || b.is_composite()) {
      throw ConfigError("composite time functions combine at most two primitives");
    }
    TimeFunction f(k);
    f.lhs_ = std::make_shared<const TimeFunction>(std::move(a));
    f.rhs_ = std::make_shared<const TimeFunction>(std::move(b));
    f.finish();
    return f;
  }

  void finish() {
    slots_.clear();
    if (lhs_) {
      slots_ = lhs_->slots_;
      slots_.insert(slots_.end(), rhs_->slots_.begin(), rhs_->slots_.end());
    } else {
      if (u_.is_parameter()) slots_.push_back(u_.slot);
      if (v_.is_parameter()) slots_.push_back(v_.slot);
    }
    std::sort(slots_.begin(), slots_.end());
    slots_.erase(std::unique(slots_.begin(), slots_.end()), slots_.end());
  }

  void check_slots(const VectorRef& theta) const {
    if (!slots_.empty() && slots_.back() >= theta.size()) {
      throw ConfigError("parameter slot " + std::to_string(slots_.back()) + " out of range for theta of length " +
                        std::to_string(theta.size()));
    }
  }

  // d^(a+b) f / du^a dv^b for a primitive.
  Scalar local_partial(int t, const VectorRef& theta, int a, int b) const {
    const Scalar u = u_.resolve(theta);
    const Scalar v = v_.resolve(theta);
    const Scalar ts = static_cast<Scalar>(t);
    switch (kind_) {
      case TimeFunctionKind::constant:
        return (a == 0 && b == 0) ? u : Scalar(0);
      case TimeFunctionKind::linear:
        if (a == 0 && b == 0) return u + v * ts;
        if (a == 1 && b == 0) return Scalar(1);
        if (a == 0 && b == 1) return ts;
        return Scalar(0);
      case TimeFunctionKind::sine: {
        if (a >= 2) return Scalar(0);
        // d^b/dv^b sin(x) = sin(x + b*pi/2)
        const Scalar x = omega_ * ts + v + static_cast<Scalar>(b) * std::numbers::pi_v<Scalar> / Scalar(2);
        return a == 0 ? u * std::sin(x) : std::sin(x);
      }
      case TimeFunctionKind::exp_sine: {
        if (b > 0) return Scalar(0);
        const Scalar s = std::sin(omega_ * ts + phase_);
        return std::pow(-s, a) * std::exp(-u * s);
      }
      default:
        break;
    }
    return Scalar(0);
  }

  Scalar derivative_sorted(int t, const VectorRef& theta, std::span<const int> idx) const {
    for (int i : idx)
      if (!depends_on(i)) return Scalar(0);
    if (kind_ == TimeFunctionKind::sum) {
      return lhs_->derivative_sorted(t, theta, idx) + rhs_->derivative_sorted(t, theta, idx);
    }
    if (kind_ == TimeFunctionKind::product) {
      Scalar total(0);
      const auto k = idx.size();
      for (unsigned mask = 0; mask < (1u << k); ++mask) {
        std::array<int, 3> a{}, b{};
        std::size_t na = 0, nb = 0;
        for (std::size_t p = 0; p < k; ++p) {
          if (mask & (1u << p)) {
            a[na++] = idx[p];
          } else {
            b[nb++] = idx[p];
          }
        }
        total += lhs_->derivative_sorted(t, theta, std::span<const int>(a.data(), na)) *
                 rhs_->derivative_sorted(t, theta, std::span<const int>(b.data(), nb));
      }
      return total;
    }
    // Chain rule over the local variables u, v: each requested index maps to
    // every local variable that carries that slot.
    Scalar total(0);
    accumulate_assignments(t, theta, idx, 0, 0, 0, total);
    return total;
  }

  void accumulate_assignments(int t, const VectorRef& theta, std::span<const int> idx, std::size_t pos, int a, int b,
                              Scalar& total) const {
    if (pos == idx.size()) {
      total += local_partial(t, theta, a, b);
      return;
    }
    if (u_.slot == idx[pos]) accumulate_assignments(t, theta, idx, pos + 1, a + 1, b, total);
    if (v_.slot == idx[pos]) accumulate_assignments(t, theta, idx, pos + 1, a, b + 1, total);
  }

  TimeFunctionKind kind_ = TimeFunctionKind::constant;
  Coefficient<Scalar> u_{};
  Coefficient<Scalar> v_{};
  Scalar omega_ = Scalar(0);
  Scalar phase_ = Scalar(0);
  std::shared_ptr<const TimeFunction> lhs_;
  std::shared_ptr<const TimeFunction> rhs_;
  std::vector<int> slots_;
};

/// rows x cols grid of TimeFunctions: a matrix-valued coefficient A_t(theta).
template <typename Scalar>
class MatrixTimeFunction {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using VectorRef = Eigen::Ref<const Vector>;

  MatrixTimeFunction() = default;

  MatrixTimeFunction(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw ConfigError("negative matrix-function dimension");
    entries_.assign(static_cast<std::size_t>(rows) * cols, TimeFunction<Scalar>::constant(Scalar(0)));
  }

  static MatrixTimeFunction constant(const Matrix& m) {
    MatrixTimeFunction f(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int i = 0; i < f.rows_; ++i)
      for (int j = 0; j < f.cols_; ++j) f.set(i, j, TimeFunction<Scalar>::constant(m(i, j)));
    return f;
  }
  static MatrixTimeFunction identity(int r) { return constant(Matrix::Identity(r, r)); }
  static MatrixTimeFunction zero(int r) { return constant(Matrix::Zero(r, r)); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  const TimeFunction<Scalar>& operator()(int i, int j) const { return entries_[flat(i, j)]; }

  void set(int i, int j, TimeFunction<Scalar> f) {
    entries_[flat(i, j)] = std::move(f);
    slots_.clear();
    for (const auto& e : entries_) slots_.insert(slots_.end(), e.slots().begin(), e.slots().end());
    std::sort(slots_.begin(), slots_.end());
    slots_.erase(std::unique(slots_.begin(), slots_.end()), slots_.end());
  }

  const std::vector<int>& slots() const { return slots_; }
  bool depends_on(int slot) const { return std::binary_search(slots_.begin(), slots_.end(), slot); }
  bool is_constant_in_theta() const { return slots_.empty(); }

  Matrix value(int t, const VectorRef& theta) const {
    check_time(t);
    Matrix out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(i, j) = entries_[flat(i, j)].value(t, theta);
    return out;
  }

  /// Exact derivative of order indices.size() (1..3).
  Matrix derivative(int t, const VectorRef& theta, std::span<const int> indices) const {
    check_time(t);
    if (indices.size() > 3) {
      throw ContractError("matrix-function derivatives are available up to order 3, requested " +
                          std::to_string(indices.size()));
    }
    Matrix out = Matrix::Zero(rows_, cols_);
    for (int i : indices)
      if (!depends_on(i)) return out;
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(i, j) = entries_[flat(i, j)].derivative(t, theta, indices);
    return out;
  }

  Matrix derivative(int t, const VectorRef& theta, std::initializer_list<int> indices) const {
    return derivative(t, theta, std::span<const int>(indices.begin(), indices.size()));
  }

  /// Value and all tracked derivatives at time t.
  MatrixJet<Scalar> jet(int t, const VectorRef& theta, const DerivativeIndexPtr& index) const {
    check_time(t);
    MatrixJet<Scalar> out(index, rows_, cols_);
    out.set(0, value(t, theta));
    for (int s = 1; s < index->num_slots(); ++s) {
      const std::vector<int> tup = index->global_tuple(s);
      bool relevant = true;
      for (int i : tup) relevant = relevant && depends_on(i);
      if (!relevant) continue;
      Matrix d = derivative(t, theta, std::span<const int>(tup));
      if (!d.isZero(Scalar(0))) out.set(s, std::move(d));
    }
    return out;
  }

 private:
  std::size_t flat(int i, int j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw ContractError("matrix-function entry out of range");
    return static_cast<std::size_t>(i) * cols_ + j;
  }
  static void check_time(int t) {
    if (t < 1) throw ContractError("time functions are evaluated at t >= 1, got t=" + std::to_string(t));
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<TimeFunction<Scalar>> entries_;
  std::vector<int> slots_;
};

using TimeFunctiond = TimeFunction<double>;
using MatrixTimeFunctiond = MatrixTimeFunction<double>;

}  // namespace tdvarma

#endif  // TDVARMA_TIMEFN_HPP
