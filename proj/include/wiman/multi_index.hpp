#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace wiman {

// n = (n_1, ..., n_p) in Z_+^p together with its order |n| = sum n_j.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<std::int32_t> entries);
  MultiIndex(std::initializer_list<std::int32_t> entries)
      : MultiIndex(std::vector<std::int32_t>(entries)) {}

  std::span<const std::int32_t> entries() const { return entries_; }
  int dimension() const { return static_cast<int>(entries_.size()); }
  std::int64_t order() const { return order_; }
  std::int32_t operator[](int j) const { return entries_[static_cast<std::size_t>(j)]; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  // Plain lexicographic order on the entries.
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
    return a.entries_ <=> b.entries_;
  }

 private:
  std::vector<std::int32_t> entries_;
  std::int64_t order_ = 0;
};

// Graded-lexicographic order: by |n| first, ties broken lexicographically.
bool graded_lex_less(std::span<const std::int32_t> a, std::span<const std::int32_t> b);

// Position of n in the graded-lexicographic enumeration of Z_+^p (0-based).
// Throws DomainError if the rank does not fit in 64 bits.
std::uint64_t graded_lex_rank(std::span<const std::int32_t> n);

// Flat, append-only table of multi-indices of one dimension. Series and
// draws share one table so that coefficient arrays can be zipped by position.
class IndexTable {
 public:
  explicit IndexTable(int dimension);

  void push_back(std::span<const std::int32_t> n);
  void reserve(std::size_t count);

  int dimension() const { return dimension_; }
  std::size_t size() const { return orders_.size(); }
  bool empty() const { return orders_.empty(); }

  std::span<const std::int32_t> operator[](std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(dimension_),
            static_cast<std::size_t>(dimension_)};
  }
  std::int64_t order(std::size_t i) const { return orders_[i]; }
  MultiIndex index(std::size_t i) const;

  // Largest |n| and largest single entry along an axis; 0 for an empty table.
  std::int64_t max_order() const;
  std::int32_t max_entry(int axis) const;

  // True when entries are strictly increasing in graded-lex order.
  bool is_canonical() const;
  // Binary search; requires a canonical table.
  std::optional<std::size_t> find(std::span<const std::int32_t> n) const;

  friend bool operator==(const IndexTable&, const IndexTable&) = default;

 private:
  int dimension_;
  std::vector<std::int32_t> data_;
  std::vector<std::int64_t> orders_;
};

}  // namespace wiman
