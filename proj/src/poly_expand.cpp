#include "screening/poly_expand.hpp"

#include <algorithm>

#include "screening/error.hpp"

namespace screening {

namespace {

// C(n, k) in uint64; throws on overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    result = result * (n - i) / (i + 1);
    if (result > UINT64_MAX) throw UsageError("expanded dimension overflows 64-bit count");
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s;
  if (__builtin_add_overflow(a, b, &s)) throw UsageError("expanded dimension overflows 64-bit count");
  return s;
}

std::uint64_t monomials_of_size(std::uint64_t d, std::uint64_t k, ExpansionMode mode) {
  if (mode == ExpansionMode::Dedup) return binomial(d, k);
  if (k == 0) return 1;
  return binomial(checked_add(d, k - 1), k);
}

}  // namespace

std::string_view to_string(ExpansionMode m) { return m == ExpansionMode::Dedup ? "dedup" : "multiset"; }

ExpansionMode expansion_mode_from_string(std::string_view s) {
  if (s == "multiset") return ExpansionMode::Multiset;
  if (s == "dedup") return ExpansionMode::Dedup;
  throw UsageError("unknown expansion mode '" + std::string(s) + "'");
}

std::uint64_t expanded_dimension(std::uint64_t d, int degree, ExpansionMode mode) {
  if (d < 1) throw UsageError("base dimension must be >= 1");
  if (degree < 1) throw UsageError("degree must be >= 1");
  const auto deg = static_cast<std::uint64_t>(degree);
  if (mode == ExpansionMode::Multiset) return binomial(checked_add(d, deg), deg);
  std::uint64_t total = 0;
  for (std::uint64_t k = 0; k <= std::min(deg, d); ++k) total = checked_add(total, binomial(d, k));
  return total;
}

MonomialIndex::MonomialIndex(std::size_t base_dim, int degree, ExpansionMode mode)
    : base_dim_(base_dim), degree_(degree), mode_(mode) {
  const std::uint64_t total = expanded_dimension(base_dim, degree, mode);
  if (total > UINT32_MAX) throw UsageError("expanded dimension exceeds the 32-bit column index range");
  total_ = static_cast<std::size_t>(total);

  size_offset_.assign(static_cast<std::size_t>(degree) + 2, 0);
  for (int k = 0; k <= degree; ++k)
    size_offset_[k + 1] = size_offset_[k] + monomials_of_size(base_dim, static_cast<std::uint64_t>(k), mode);

  prefix_.resize(static_cast<std::size_t>(degree) + 1);
  for (std::size_t k = 1; k <= static_cast<std::size_t>(degree); ++k) {
    const std::size_t n = symbols(k);
    prefix_[k].resize(k);
    for (std::size_t r = 0; r < k; ++r) {
      auto& p = prefix_[k][r];
      p.assign(n + 1, 0);
      for (std::size_t v = 0; v < n; ++v) p[v + 1] = p[v] + binomial(n - 1 - v, r);
    }
  }
}

std::size_t MonomialIndex::symbols(std::size_t k) const {
  return mode_ == ExpansionMode::Multiset ? base_dim_ + k - 1 : base_dim_;
}

std::uint64_t MonomialIndex::combination_rank(std::span<const std::uint32_t> combo, std::size_t k) const {
  std::uint64_t rank = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& p = prefix_[k][k - 1 - i];
    rank += p[combo[i]] - p[next];
    next = combo[i] + 1;
  }
  return rank;
}

std::vector<std::uint32_t> MonomialIndex::monomial_of(std::size_t index) const {
  if (index >= total_) throw UsageError("monomial index out of range");
  std::size_t k = 0;
  while (index >= size_offset_[k + 1]) ++k;
  std::uint64_t rank = index - size_offset_[k];
  const std::size_t n = symbols(k);
  std::vector<std::uint32_t> combo;
  combo.reserve(k);
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (;; ++v) {
      const std::uint64_t block = binomial(n - 1 - v, k - 1 - i);
      if (rank < block) break;
      rank -= block;
    }
    combo.push_back(v++);
  }
  if (mode_ == ExpansionMode::Multiset)
    for (std::size_t i = 0; i < k; ++i) combo[i] -= static_cast<std::uint32_t>(i);
  return combo;
}

std::size_t MonomialIndex::index_of(std::span<const std::uint32_t> monomial) const {
  const std::size_t k = monomial.size();
  if (k > static_cast<std::size_t>(degree_)) throw UsageError("monomial larger than the expansion degree");
  std::vector<std::uint32_t> combo(monomial.begin(), monomial.end());
  std::sort(combo.begin(), combo.end());
  for (std::size_t i = 0; i < k; ++i) {
    if (combo[i] >= base_dim_) throw UsageError("monomial variable out of range");
    if (mode_ == ExpansionMode::Dedup && i > 0 && combo[i] == combo[i - 1])
      throw UsageError("monomial not canonical: repeated variable in dedup mode");
  }
  if (mode_ == ExpansionMode::Multiset)
    for (std::size_t i = 0; i < k; ++i) combo[i] += static_cast<std::uint32_t>(i);
  return static_cast<std::size_t>(size_offset_[k] + combination_rank(combo, k));
}

SparseVector MonomialIndex::expand(std::span<const std::uint8_t> row) const {
  if (row.size() != base_dim_) throw UsageError("row dimension does not match the monomial index");
  std::vector<std::uint32_t> active;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > 1) throw UsageError("expansion input must be 0/1");
    if (row[j]) active.push_back(static_cast<std::uint32_t>(j));
  }

  SparseVector out;
  out.dim = total_;
  out.indices.push_back(0);
  const std::size_t a = active.size();
  const bool multiset = mode_ == ExpansionMode::Multiset;
  std::vector<std::size_t> pos;
  std::vector<std::uint32_t> combo;
  for (std::size_t k = 1; k <= static_cast<std::size_t>(degree_); ++k) {
    if (!multiset && k > a) break;
    if (a == 0) break;
    // pos enumerates k-tuples of active positions in lex order, non-decreasing
    // (multiset) or increasing (dedup); variable order follows, so indices
    // come out sorted.
    pos.resize(k);
    for (std::size_t i = 0; i < k; ++i) pos[i] = multiset ? 0 : i;
    combo.resize(k);
    while (true) {
      for (std::size_t i = 0; i < k; ++i)
        combo[i] = active[pos[i]] + (multiset ? static_cast<std::uint32_t>(i) : 0U);
      out.indices.push_back(static_cast<std::uint32_t>(size_offset_[k] + combination_rank(combo, k)));
      std::size_t i = k;
      while (i > 0) {
        --i;
        const std::size_t limit = multiset ? a - 1 : a - k + i;
        if (pos[i] < limit) break;
        if (i == 0) {
          i = SIZE_MAX;
          break;
        }
      }
      if (i == SIZE_MAX) break;
      ++pos[i];
      for (std::size_t m = i + 1; m < k; ++m) pos[m] = multiset ? pos[i] : pos[m - 1] + 1;
    }
  }
  return out;
}

std::string MonomialIndex::column_name(std::size_t index) const {
  const auto mono = monomial_of(index);
  if (mono.empty()) return "bias";
  std::string name;
  for (std::size_t i = 0; i < mono.size(); ++i) {
    if (i) name += '*';
    name += 'x' + std::to_string(mono[i]);
  }
  return name;
}

}  // namespace screening
