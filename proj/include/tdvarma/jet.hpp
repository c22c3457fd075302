#ifndef TDVARMA_JET_HPP
#define TDVARMA_JET_HPP

#include <algorithm>
#include <array>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdvarma/errors.hpp"

namespace tdvarma {

/// Enumerates the symmetric partial derivatives of order 0..3 with respect to a
/// chosen set of parameter directions. Slot 0 is the value; higher slots hold
/// sorted index tuples, so d2/(di dj) and d2/(dj di) share one slot.
class DerivativeIndex {
 public:
  static constexpr int kMaxOrder = 3;

  DerivativeIndex(std::vector<int> directions, int max_order)
      : directions_(std::move(directions)), max_order_(max_order) {
    if (max_order_ < 0 || max_order_ > kMaxOrder) {
      throw ContractError("derivative order must lie in 0..3, got " + std::to_string(max_order_));
    }
    const int d = static_cast<int>(directions_.size());
    int max_global = -1;
    for (int g : directions_) {
      if (g < 0) throw ContractError("negative parameter index in derivative directions");
      max_global = std::max(max_global, g);
    }
    local_of_.assign(static_cast<std::size_t>(max_global + 1), -1);
    for (int a = 0; a < d; ++a) {
      if (local_of_[directions_[a]] != -1) throw ContractError("duplicate derivative direction");
      local_of_[directions_[a]] = a;
    }
    if (max_order_ == 3 && static_cast<long long>(d) * d * d > (1LL << 22)) {
      throw ContractError("too many parameters for third-order derivative tables");
    }

    tuples_.push_back({0, {-1, -1, -1}});
    for (int ord = 1; ord <= max_order_; ++ord) {
      std::size_t dense = 1;
      for (int k = 0; k < ord; ++k) dense *= static_cast<std::size_t>(d);
      lookup_[ord].assign(dense, -1);
      first_slot_[ord] = static_cast<int>(tuples_.size());
      std::array<int, 3> tup{0, 0, 0};
      enumerate_sorted(ord, 0, 0, tup);
      count_[ord] = static_cast<int>(tuples_.size()) - first_slot_[ord];
    }
    count_[0] = 1;
    build_leibniz();
  }

  /// All parameters 0..m-1 as directions.
  static std::shared_ptr<const DerivativeIndex> full(int m, int max_order) {
    std::vector<int> dirs(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) dirs[i] = i;
    return std::make_shared<const DerivativeIndex>(std::move(dirs), max_order);
  }

  int max_order() const { return max_order_; }
  int num_directions() const { return static_cast<int>(directions_.size()); }
  const std::vector<int>& directions() const { return directions_; }
  int num_slots() const { return static_cast<int>(tuples_.size()); }
  int order_of(int slot) const { return tuples_[slot].order; }
  int first_slot(int order) const { return order == 0 ? 0 : first_slot_[order]; }
  int count(int order) const { return count_[order]; }

  /// Global parameter indices of the tuple held in `slot` (sorted ascending by local position).
  std::vector<int> global_tuple(int slot) const {
    std::vector<int> out;
    for (int k = 0; k < tuples_[slot].order; ++k) out.push_back(directions_[tuples_[slot].local[k]]);
    return out;
  }

  /// Local direction position of a global index, -1 if not a direction.
  int local(int global) const {
    if (global < 0 || global >= static_cast<int>(local_of_.size())) return -1;
    return local_of_[global];
  }

  /// Slot of a tuple of global indices in any order; -1 if some index is not a direction
  /// or the order exceeds max_order().
  int slot_of(std::span<const int> globals) const {
    const int ord = static_cast<int>(globals.size());
    if (ord == 0) return 0;
    if (ord > max_order_) return -1;
    std::array<int, 3> loc{0, 0, 0};
    for (int k = 0; k < ord; ++k) {
      loc[k] = local(globals[k]);
      if (loc[k] < 0) return -1;
    }
    std::sort(loc.begin(), loc.begin() + ord);
    return lookup_[ord][dense_key(loc, ord)];
  }

  /// Pairs (slotA, slotB) over all subsets of the tuple's positions: A takes the
  /// subset, B the complement. Slot 0 stands for the empty subset.
  const std::vector<std::pair<int, int>>& leibniz(int slot) const { return leibniz_[slot]; }

 private:
  struct Tuple {
    int order;
    std::array<int, 3> local;
  };

  std::size_t dense_key(const std::array<int, 3>& loc, int ord) const {
    std::size_t key = 0;
    const auto d = directions_.size();
    for (int k = 0; k < ord; ++k) key = key * d + static_cast<std::size_t>(loc[k]);
    return key;
  }

  void enumerate_sorted(int ord, int pos, int start, std::array<int, 3>& tup) {
    if (pos == ord) {
      lookup_[ord][dense_key(tup, ord)] = static_cast<int>(tuples_.size());
      tuples_.push_back({ord, tup});
      return;
    }
    for (int a = start; a < static_cast<int>(directions_.size()); ++a) {
      tup[pos] = a;
      enumerate_sorted(ord, pos + 1, a, tup);
    }
  }

  int slot_of_local(std::array<int, 3> loc, int ord) const {
    if (ord == 0) return 0;
    std::sort(loc.begin(), loc.begin() + ord);
    return lookup_[ord][dense_key(loc, ord)];
  }

  void build_leibniz() {
    leibniz_.resize(tuples_.size());
    for (std::size_t s = 0; s < tuples_.size(); ++s) {
      const Tuple& tu = tuples_[s];
      for (unsigned mask = 0; mask < (1u << tu.order); ++mask) {
        std::array<int, 3> a{0, 0, 0}, b{0, 0, 0};
        int na = 0, nb = 0;
        for (int k = 0; k < tu.order; ++k) {
          if (mask & (1u << k)) {
            a[na++] = tu.local[k];
          } else {
            b[nb++] = tu.local[k];
          }
        }
        leibniz_[s].emplace_back(slot_of_local(a, na), slot_of_local(b, nb));
      }
    }
  }

  std::vector<int> directions_;
  int max_order_;
  std::vector<int> local_of_;
  std::vector<Tuple> tuples_;
  std::array<std::vector<int>, 4> lookup_;
  std::array<int, 4> first_slot_{0, 0, 0, 0};
  std::array<int, 4> count_{0, 0, 0, 0};
  std::vector<std::vector<std::pair<int, int>>> leibniz_;
};

using DerivativeIndexPtr = std::shared_ptr<const DerivativeIndex>;

/// A matrix together with its symmetric partial derivatives up to the order of its
/// DerivativeIndex. Identically-zero components are stored as empty matrices and
/// skipped by the arithmetic.
template <typename Scalar>
class MatrixJet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MatrixJet() = default;

  MatrixJet(DerivativeIndexPtr index, Eigen::Index rows, Eigen::Index cols)
      : index_(std::move(index)), rows_(rows), cols_(cols) {
    parts_.resize(static_cast<std::size_t>(index_->num_slots()));
  }

  static MatrixJet constant(DerivativeIndexPtr index, const Matrix& value) {
    MatrixJet jet(std::move(index), value.rows(), value.cols());
    jet.parts_[0] = value;
    return jet;
  }

  const DerivativeIndexPtr& index() const { return index_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  int num_slots() const { return static_cast<int>(parts_.size()); }

  bool is_zero(int slot) const { return parts_[slot].size() == 0; }
  bool all_zero() const {
    return std::all_of(parts_.begin(), parts_.end(), [](const Matrix& p) { return p.size() == 0; });
  }

  /// Stored component; only valid when !is_zero(slot).
  const Matrix& raw(int slot) const { return parts_[slot]; }

  Matrix at(int slot) const {
    if (slot < 0 || is_zero(slot)) return Matrix::Zero(rows_, cols_);
    return parts_[slot];
  }
  Matrix value() const { return at(0); }

  /// Component for a tuple of global parameter indices (zero when the tuple is not tracked).
  Matrix derivative(std::span<const int> globals) const { return at(index_->slot_of(globals)); }

  Matrix& ref(int slot) {
    if (parts_[slot].size() == 0) parts_[slot] = Matrix::Zero(rows_, cols_);
    return parts_[slot];
  }

  void set(int slot, Matrix m) { parts_[slot] = std::move(m); }
  void clear(int slot) { parts_[slot].resize(0, 0); }

  MatrixJet& operator+=(const MatrixJet& o) {
    for (int s = 0; s < num_slots(); ++s)
      if (!o.is_zero(s)) ref(s) += o.parts_[s];
    return *this;
  }
  MatrixJet& operator-=(const MatrixJet& o) {
    for (int s = 0; s < num_slots(); ++s)
      if (!o.is_zero(s)) ref(s) -= o.parts_[s];
    return *this;
  }

  /// this += sign * (a * b), expanded by the Leibniz rule.
  void add_product(const MatrixJet& a, const MatrixJet& b, Scalar sign = Scalar(1)) {
    for (int s = 0; s < num_slots(); ++s) {
      for (const auto& [sa, sb] : index_->leibniz(s)) {
        if (a.is_zero(sa) || b.is_zero(sb)) continue;
        ref(s).noalias() += sign * (a.parts_[sa] * b.parts_[sb]);
      }
    }
  }

  /// this += sign * (a * b) where b is a constant matrix.
  void add_product(const MatrixJet& a, const Matrix& b, Scalar sign = Scalar(1)) {
    for (int s = 0; s < num_slots(); ++s)
      if (!a.is_zero(s)) ref(s).noalias() += sign * (a.parts_[s] * b);
  }

  /// this += sign * (a * b) where a is a constant matrix.
  void add_product(const Matrix& a, const MatrixJet& b, Scalar sign = Scalar(1)) {
    for (int s = 0; s < num_slots(); ++s)
      if (!b.is_zero(s)) ref(s).noalias() += sign * (a * b.parts_[s]);
  }

  friend MatrixJet operator*(const MatrixJet& a, const MatrixJet& b) {
    MatrixJet out(a.index_, a.rows_, b.cols_);
    out.add_product(a, b);
    return out;
  }
  friend MatrixJet operator*(const Matrix& a, const MatrixJet& b) {
    MatrixJet out(b.index_, a.rows(), b.cols_);
    out.add_product(a, b);
    return out;
  }
  friend MatrixJet operator*(const MatrixJet& a, const Matrix& b) {
    MatrixJet out(a.index_, a.rows_, b.cols());
    out.add_product(a, b);
    return out;
  }

  MatrixJet transpose() const {
    MatrixJet out(index_, cols_, rows_);
    for (int s = 0; s < num_slots(); ++s)
      if (!is_zero(s)) out.parts_[s] = parts_[s].transpose();
    return out;
  }

  /// (M + M^T)/2 on every component.
  void symmetrize() {
    for (auto& p : parts_)
      if (p.size() != 0) p = (0.5 * (p + p.transpose())).eval();
  }

  /// Jet of the matrix inverse, from differentiating M * M^{-1} = I:
  /// S_K = -S * sum over nonempty A of M_A * S_{K\A}.
  MatrixJet inverse() const {
    if (rows_ != cols_) throw ContractError("inverse of a non-square jet");
    Eigen::PartialPivLU<Matrix> lu(value());
    const Matrix s0 = lu.inverse();
    if (!s0.allFinite() || std::abs(lu.determinant()) == Scalar(0)) {
      throw NumericalError("singular matrix in jet inverse");
    }
    MatrixJet out(index_, rows_, cols_);
    out.parts_[0] = s0;
    for (int s = 1; s < num_slots(); ++s) {
      Matrix acc = Matrix::Zero(rows_, cols_);
      bool any = false;
      for (const auto& [sa, sb] : index_->leibniz(s)) {
        if (sa == 0) continue;
        if (is_zero(sa) || out.is_zero(sb)) continue;
        acc.noalias() += parts_[sa] * out.parts_[sb];
        any = true;
      }
      if (any) out.parts_[s] = -s0 * acc;
    }
    return out;
  }

 private:
  DerivativeIndexPtr index_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Matrix> parts_;
};

}  // namespace tdvarma

#endif  // TDVARMA_JET_HPP
