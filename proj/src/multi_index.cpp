#include "formcalc/multi_index.hpp"

#include <array>
#include <bit>
#include <memory>
#include <stdexcept>

namespace formcalc {

MultiIndex::MultiIndex(const std::vector<int>& axes) {
  int previous = -1;
  for (int a : axes) {
    if (a <= previous || a < 0 || a >= 32) {
      throw std::invalid_argument("MultiIndex: axes must be strictly increasing and non-negative");
    }
    mask_ |= 1u << a;
    previous = a;
  }
}

MultiIndex MultiIndex::from_mask(std::uint32_t mask) {
  MultiIndex index;
  index.mask_ = mask;
  return index;
}

int MultiIndex::rank() const { return std::popcount(mask_); }

std::vector<int> MultiIndex::axes() const {
  std::vector<int> out;
  for (int a = 0; a < 32; ++a) {
    if (contains(a)) out.push_back(a);
  }
  return out;
}

MultiIndex MultiIndex::with(int axis) const { return from_mask(mask_ | (1u << axis)); }

MultiIndex MultiIndex::without(int axis) const { return from_mask(mask_ & ~(1u << axis)); }

MultiIndex MultiIndex::complement(int dim) const {
  const std::uint32_t full = dim >= 32 ? ~0u : ((1u << dim) - 1u);
  return from_mask(full & ~mask_);
}

std::string MultiIndex::label() const {
  if (mask_ == 0) return "1";
  std::string s = "dx^{";
  for (int a : axes()) s += std::to_string(a + 1);
  s += "}";
  return s;
}

int merge_sign(MultiIndex first, MultiIndex second) {
  if (!first.disjoint(second)) return 0;
  // inversions: pairs (i in first, j in second) with i > j
  int inversions = 0;
  for (int j : second.axes()) {
    const std::uint32_t above = j >= 31 ? 0u : (~0u << (j + 1));
    inversions += std::popcount(first.mask() & above);
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  std::size_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  }
  return result;
}

IndexTable::IndexTable(int dim, int rank) : dim_(dim), rank_(rank) {
  if (dim < 0 || dim > kMaxDim || rank < 0 || rank > dim) {
    throw std::invalid_argument("IndexTable: need 0 <= rank <= dim <= kMaxDim");
  }
  lookup_.assign(std::size_t{1} << dim, -1);
  // lexicographic enumeration of strictly increasing tuples
  std::vector<int> tuple(rank);
  for (int i = 0; i < rank; ++i) tuple[i] = i;
  while (true) {
    MultiIndex index(tuple);
    lookup_[index.mask()] = static_cast<int>(basis_.size());
    basis_.push_back(index);
    int i = rank - 1;
    while (i >= 0 && tuple[i] == dim - rank + i) --i;
    if (i < 0) break;
    ++tuple[i];
    for (int j = i + 1; j < rank; ++j) tuple[j] = tuple[j - 1] + 1;
  }
}

int IndexTable::position(MultiIndex index) const {
  if (index.mask() >= lookup_.size()) return -1;
  return lookup_[index.mask()];
}

const IndexTable& index_table(int dim, int rank) {
  static const auto tables = [] {
    std::vector<std::unique_ptr<IndexTable>> all;
    for (int d = 0; d <= kMaxDim; ++d) {
      for (int q = 0; q <= d; ++q) all.push_back(std::make_unique<IndexTable>(d, q));
    }
    return all;
  }();
  if (dim < 0 || dim > kMaxDim || rank < 0 || rank > dim) {
    throw std::invalid_argument("index_table: need 0 <= rank <= dim <= kMaxDim");
  }
  // tables are stored dimension by dimension, (d+1) ranks each
  const std::size_t offset = static_cast<std::size_t>(dim) * (dim + 1) / 2;
  return *tables[offset + rank];
}

}  // namespace formcalc
