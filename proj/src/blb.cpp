#include "conq/blb.hpp"

#include <algorithm>
#include <thread>

#include "conq/error.hpp"
#include "conq/rng.hpp"

namespace conq {
namespace {

struct SparseEntry {
  std::uint32_t j;
  std::int64_t count;
};

// Non-zero cells of each bucket row; bucket rows are mostly empty for
// fine-grained sketches.
std::vector<std::vector<SparseEntry>> sparse_rows(const Sketch& sketch) {
  std::vector<std::vector<SparseEntry>> rows(sketch.buckets());
  for (std::size_t i = 0; i < sketch.buckets(); ++i) {
    const auto row = sketch.bucket_row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0) rows[i].push_back({static_cast<std::uint32_t>(j), row[j]});
    }
  }
  return rows;
}

void replicate_ecdf(const std::vector<std::vector<SparseEntry>>& rows,
                    std::span<const std::uint32_t> multiplicity, std::span<std::int64_t> scratch,
                    std::span<double> out) {
  std::fill(scratch.begin(), scratch.end(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::int64_t w = multiplicity[i];
    if (w == 0) continue;
    for (const auto& e : rows[i]) scratch[e.j] += w * e.count;
  }
  std::int64_t total = 0;
  for (auto& c : scratch) {
    total += c;
    c = total;
  }
  if (total == 0) throw Error("bootstrap_ecdf: replicate has zero total weight");
  const auto denom = static_cast<double>(total);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<double>(scratch[j]) / denom;
}

std::vector<std::uint32_t> multiplicity_of(std::span<const std::uint32_t> replicate,
                                           std::size_t buckets) {
  std::vector<std::uint32_t> m(buckets, 0);
  for (auto b : replicate) {
    if (b >= buckets) throw DomainError("bootstrap replicate references a missing bucket");
    ++m[b];
  }
  return m;
}

}  // namespace

std::vector<std::uint32_t> BalancedAssignments::multiplicities(std::size_t r) const {
  return multiplicity_of(replicate(r), buckets);
}

BalancedAssignments balanced_assignments(std::size_t buckets, std::size_t replicates,
                                         std::uint64_t seed) {
  if (buckets < 2) throw ConfigError("balanced_assignments: need at least 2 buckets");
  if (replicates < 2) throw ConfigError("balanced_assignments: need at least 2 replicates");
  BalancedAssignments out;
  out.buckets = buckets;
  out.replicates = replicates;
  out.indices.resize(buckets * replicates);
  for (std::size_t b = 0; b < buckets; ++b) {
    std::fill_n(out.indices.begin() + static_cast<std::ptrdiff_t>(b * replicates), replicates,
                static_cast<std::uint32_t>(b));
  }
  Rng rng(seed);
  portable_shuffle(std::span<std::uint32_t>(out.indices), rng);
  return out;
}

std::vector<double> bootstrap_ecdf(const Sketch& sketch, std::span<const std::uint32_t> replicate) {
  const auto rows = sparse_rows(sketch);
  const auto m = multiplicity_of(replicate, sketch.buckets());
  std::vector<std::int64_t> scratch(sketch.size());
  std::vector<double> out(sketch.size());
  replicate_ecdf(rows, m, scratch, out);
  return out;
}

CdfVariance blb_variance(const Sketch& sketch, const BalancedAssignments& assignments,
                         std::size_t threads) {
  if (assignments.buckets != sketch.buckets()) {
    throw ConfigError("blb_variance: assignments were drawn for a different bucket count");
  }
  const std::size_t k = sketch.size();
  const std::size_t b = assignments.replicates;
  const auto rows = sparse_rows(sketch);

  // Replicate ECDFs are stored, then reduced in replicate order, so the
  // result is identical for any thread count.
  std::vector<double> replicate_cdfs(b * k);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<std::int64_t> scratch(k);
    for (std::size_t r = begin; r < end; ++r) {
      const auto m = assignments.multiplicities(r);
      replicate_ecdf(rows, m, scratch, std::span<double>(replicate_cdfs).subspan(r * k, k));
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, b);
  if (threads == 1) {
    work(0, b);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (b + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(b, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  CdfVariance out;
  out.values.assign(sketch.values().begin(), sketch.values().end());
  std::vector<double> mean(k, 0.0);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < k; ++j) mean[j] += replicate_cdfs[r * k + j];
  }
  for (auto& m : mean) m /= static_cast<double>(b);
  out.variances.assign(k, 0.0);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = replicate_cdfs[r * k + j] - mean[j];
      out.variances[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    bool all_equal = true;
    for (std::size_t r = 1; r < b && all_equal; ++r) {
      all_equal = replicate_cdfs[r * k + j] == replicate_cdfs[j];
    }
    // Exactly zero when the replicates agree; the mean can carry rounding.
    out.variances[j] = all_equal ? 0.0 : out.variances[j] / static_cast<double>(b);
  }
  return out;
}

CdfVariance blb_variance(const Sketch& sketch, std::size_t replicates, std::uint64_t seed,
                         std::size_t threads) {
  return blb_variance(sketch, balanced_assignments(sketch.buckets(), replicates, seed), threads);
}

}  // namespace conq
