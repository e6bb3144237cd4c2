#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace conq {

enum class Variant { Control, Treatment };

// One metric observation tied to a user and an experiment arm.
struct EventRecord {
  std::string user_id;
  Variant variant = Variant::Control;
  std::string metric;
  double value = 0.0;
  std::optional<std::string> segment;
};

// Natural log of `value`, rounded half-to-even to `digits` decimals.
// Throws DomainError for value <= 0 or digits < 0.
double log_scale(double value, int digits);

// The same rounding expressed as an integer count of 10^-digits steps.
std::int64_t log_scale_ticks(double value, int digits);

struct SketchOptions {
  int digits = 2;
  std::size_t buckets = 100;
  std::uint64_t seed = 0;
};

// Grouped count table for one arm: sorted unique rounded log values and,
// for every user bucket, how many events fell on each value.
class Sketch {
 public:
  // `bucket_counts` is row-major, one row of size values.size() per bucket.
  Sketch(std::vector<double> values, std::vector<std::int64_t> bucket_counts,
         std::vector<std::size_t> bucket_users, int digits);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::size_t buckets() const { return bucket_users_.size(); }
  int digits() const { return digits_; }

  std::span<const std::int64_t> bucket_row(std::size_t bucket) const {
    return std::span<const std::int64_t>(bucket_counts_).subspan(bucket * size(), size());
  }
  std::int64_t count(std::size_t bucket, std::size_t j) const {
    return bucket_counts_[bucket * size() + j];
  }
  std::span<const std::int64_t> bucket_counts() const { return bucket_counts_; }
  std::span<const std::int64_t> total_counts() const { return total_counts_; }
  std::span<const std::size_t> bucket_users() const { return bucket_users_; }
  std::int64_t bucket_events(std::size_t bucket) const { return bucket_events_[bucket]; }

  std::int64_t n_events() const { return n_events_; }
  std::size_t n_users() const { return n_users_; }

 private:
  std::vector<double> values_;
  std::vector<std::int64_t> bucket_counts_;
  std::vector<std::int64_t> total_counts_;
  std::vector<std::int64_t> bucket_events_;
  std::vector<std::size_t> bucket_users_;
  std::int64_t n_events_ = 0;
  std::size_t n_users_ = 0;
  int digits_ = 0;
};

// Builds a sketch from events already grouped per user, in a canonical user
// order. Users are shuffled with `opts.seed` and dealt round-robin into
// `opts.buckets` buckets, so bucket sizes differ by at most one.
Sketch build_sketch(std::span<const std::vector<double>> users, const SketchOptions& opts);

// Groups `events` by user_id (ordered by id) and delegates to the above.
// All events are taken as belonging to one arm; `variant` is not inspected.
Sketch build_sketch(std::span<const EventRecord> events, const SketchOptions& opts);

// Empirical CDF evaluated at every unique sketch value.
struct Ecdf {
  std::vector<double> values;
  std::vector<double> cum_fractions;
};

Ecdf ecdf(const Sketch& sketch);

// Index of the smallest value whose cumulative fraction is >= p.
std::size_t quantile_index(const Ecdf& ecdf, double p);

// inf{x : F_n(x) >= p} on the log scale. Requires 0 < p <= 1.
double quantile(const Ecdf& ecdf, double p);

}  // namespace conq
