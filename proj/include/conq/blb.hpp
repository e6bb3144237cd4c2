#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "conq/sketch.hpp"

namespace conq {

// B bootstrap samples over s user buckets, drawn so that across all samples
// every bucket index (0-based) appears exactly B times.
struct BalancedAssignments {
  std::size_t buckets = 0;
  std::size_t replicates = 0;
  std::vector<std::uint32_t> indices;  // replicates x buckets, row-major

  std::span<const std::uint32_t> replicate(std::size_t r) const {
    return std::span<const std::uint32_t>(indices).subspan(r * buckets, buckets);
  }
  // How many times each bucket is drawn in replicate r.
  std::vector<std::uint32_t> multiplicities(std::size_t r) const;
};

// Seeded uniform permutation of {0 x B, 1 x B, ..., (s-1) x B}, cut into B
// rows of length s. Requires s >= 2 and B >= 2.
BalancedAssignments balanced_assignments(std::size_t buckets, std::size_t replicates,
                                         std::uint64_t seed);

// Bootstrap ECDF at every sketch value for one replicate (a length-s vector
// of bucket indices). Each bucket row is weighted by its multiplicity.
std::vector<double> bootstrap_ecdf(const Sketch& sketch, std::span<const std::uint32_t> replicate);

// Per-value variance of the empirical CDF, estimated from the bootstrap.
struct CdfVariance {
  std::vector<double> values;
  std::vector<double> variances;
};

// Population variance (divisor B) of the B replicate ECDFs at each value,
// centred on the replicate mean at that same value. The result does not
// depend on `threads`.
CdfVariance blb_variance(const Sketch& sketch, std::size_t replicates, std::uint64_t seed,
                         std::size_t threads = 1);

CdfVariance blb_variance(const Sketch& sketch, const BalancedAssignments& assignments,
                         std::size_t threads = 1);

}  // namespace conq
