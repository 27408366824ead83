#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace formcalc {

/// Largest ambient dimension supported by the component tables.
inline constexpr int kMaxDim = 8;

/// Strictly increasing tuple of axes labelling the basis covector dx^I.
///
/// Axes are 0-based internally (axis a is the coordinate x_{a+1}); the set is
/// stored as a bit mask so that ordering, membership and complements are
/// single integer operations.
class MultiIndex {
 public:
  MultiIndex() = default;

  /// Build from 0-based axes; throws std::invalid_argument unless strictly increasing.
  explicit MultiIndex(const std::vector<int>& axes);

  static MultiIndex from_mask(std::uint32_t mask);

  std::uint32_t mask() const { return mask_; }
  int rank() const;
  bool contains(int axis) const { return (mask_ >> axis) & 1u; }
  bool disjoint(MultiIndex other) const { return (mask_ & other.mask_) == 0; }

  std::vector<int> axes() const;

  MultiIndex with(int axis) const;
  MultiIndex without(int axis) const;
  MultiIndex complement(int dim) const;
  MultiIndex merged(MultiIndex other) const { return from_mask(mask_ | other.mask_); }

  /// 1-based label, e.g. "dx^{13}" for axes {0, 2}; "1" for the empty index.
  std::string label() const;

  friend bool operator==(MultiIndex a, MultiIndex b) { return a.mask_ == b.mask_; }

 private:
  std::uint32_t mask_ = 0;
};

/// Sign of the permutation sorting the concatenation (I, J) into increasing
/// order; 0 if I and J overlap. Every operator sign (wedge, star, R, T, the
/// normal-derivative formulas) goes through this routine.
int merge_sign(MultiIndex first, MultiIndex second);

/// Binomial coefficient C(n, k); 0 outside 0 <= k <= n.
std::size_t binomial(int n, int k);

/// Component table for rank-q forms in N dimensions: lexicographic order over
/// strictly increasing tuples, plus the inverse lookup mask -> position.
class IndexTable {
 public:
  IndexTable(int dim, int rank);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return basis_.size(); }
  const std::vector<MultiIndex>& basis() const { return basis_; }
  MultiIndex operator[](std::size_t c) const { return basis_[c]; }

  /// Position of I in the table; -1 if I has the wrong rank or leaves the dimension.
  int position(MultiIndex index) const;

 private:
  int dim_;
  int rank_;
  std::vector<MultiIndex> basis_;
  std::vector<int> lookup_;
};

/// Shared immutable table for (dim, rank); valid for 0 <= rank <= dim <= kMaxDim.
const IndexTable& index_table(int dim, int rank);

}  // namespace formcalc
