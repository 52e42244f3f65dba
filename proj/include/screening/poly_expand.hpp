#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace screening {

// multiset: every multiset of size <= degree (x1*x1 allowed), the count the
// degree-3 expansion of 63 features to 45760 columns uses.
// dedup: square-free monomials only; on 0/1 inputs x*x == x so the multiset
// extra columns duplicate lower-order ones.
enum class ExpansionMode { Multiset, Dedup };

std::string_view to_string(ExpansionMode m);
ExpansionMode expansion_mode_from_string(std::string_view s);

// Exact number of expanded columns, including the bias (empty monomial).
// Throws UsageError for d < 1 or degree < 1, and on overflow of uint64.
std::uint64_t expanded_dimension(std::uint64_t d, int degree, ExpansionMode mode);

struct SparseVector {
  std::vector<std::uint32_t> indices;  // strictly increasing; all values are 1
  std::size_t dim = 0;
};

// Bijection between expanded column indices and monomials. Columns are ordered
// by (size, sorted variable indices) lexicographically, so column 0 is the
// bias and columns 1..d are the linear terms.
class MonomialIndex {
 public:
  MonomialIndex(std::size_t base_dim, int degree, ExpansionMode mode);

  std::size_t base_dim() const { return base_dim_; }
  int degree() const { return degree_; }
  ExpansionMode mode() const { return mode_; }
  std::size_t total() const { return total_; }

  // Sorted variable indices (non-decreasing for multiset, increasing for dedup).
  std::vector<std::uint32_t> monomial_of(std::size_t index) const;

  // Accepts any variable order; throws UsageError when the monomial is
  // oversized, references a variable >= base_dim, or repeats a variable in
  // dedup mode ("not canonical").
  std::size_t index_of(std::span<const std::uint32_t> monomial) const;

  // Nonzero columns of the expansion of a 0/1 row.
  SparseVector expand(std::span<const std::uint8_t> row) const;

  // "bias", "x12", "x3*x7*x40".
  std::string column_name(std::size_t index) const;

 private:
  // Rank of a strictly increasing k-combination over n symbols, in lex order.
  std::uint64_t combination_rank(std::span<const std::uint32_t> combo, std::size_t k) const;
  std::size_t symbols(std::size_t k) const;

  std::size_t base_dim_;
  int degree_;
  ExpansionMode mode_;
  std::size_t total_;
  std::vector<std::uint64_t> size_offset_;  // first index of monomials of size k
  // prefix_[k][r][v] = sum over u < v of C(n_k - 1 - u, r) with n_k = symbols(k)
  std::vector<std::vector<std::vector<std::uint64_t>>> prefix_;
};

}  // namespace screening
