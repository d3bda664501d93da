#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cadapt/error.hpp"
#include "cadapt/random.hpp"

namespace cadapt {

/// Partition of n rows into k folds.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // fold index per row
  std::uint64_t seed = 0;

  std::vector<std::size_t> rows_in(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < assignments.size(); ++r) {
      if (assignments[r] == fold) rows.push_back(r);
    }
    return rows;
  }

  std::vector<std::size_t> rows_out(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < assignments.size(); ++r) {
      if (assignments[r] != fold) rows.push_back(r);
    }
    return rows;
  }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t a : assignments) ++sizes[a];
    return sizes;
  }
};

/// Seeded Fisher-Yates permutation cut into k contiguous chunks; the first
/// n % k folds get one extra row.
inline FoldPlan MakeFolds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) {
    throw Error(ErrorCode::kInvalidArgument, "fold count must be at least 2");
  }
  if (n < k) {
    throw Error(ErrorCode::kTooFewRows,
                std::to_string(n) + " rows cannot fill " + std::to_string(k) +
                    " folds");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(UniformIndex(rng, i + 1));
    std::swap(perm[i], perm[j]);
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t c = 0; c < size; ++c) plan.assignments[perm[pos++]] = f;
  }
  return plan;
}

}  // namespace cadapt
