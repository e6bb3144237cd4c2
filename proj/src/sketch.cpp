#include "conq/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "conq/error.hpp"
#include "conq/rng.hpp"

namespace conq {
namespace {

double pow10(int digits) { return std::pow(10.0, digits); }

// Round half to even without touching the floating-point environment.
double round_half_even(double x) {
  const double r = std::round(x);
  if (std::abs(x - std::trunc(x)) == 0.5) {
    return 2.0 * std::round(x / 2.0);
  }
  return r;
}

}  // namespace

std::int64_t log_scale_ticks(double value, int digits) {
  if (digits < 0) throw DomainError("log_scale: digits must be >= 0");
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError("log_scale: metric value must be positive and finite, got " +
                      std::to_string(value));
  }
  return static_cast<std::int64_t>(round_half_even(std::log(value) * pow10(digits)));
}

double log_scale(double value, int digits) {
  return static_cast<double>(log_scale_ticks(value, digits)) / pow10(digits);
}

Sketch::Sketch(std::vector<double> values, std::vector<std::int64_t> bucket_counts,
               std::vector<std::size_t> bucket_users, int digits)
    : values_(std::move(values)),
      bucket_counts_(std::move(bucket_counts)),
      bucket_users_(std::move(bucket_users)),
      digits_(digits) {
  const std::size_t k = values_.size();
  const std::size_t s = bucket_users_.size();
  if (k == 0) throw DataError("sketch: no values");
  if (s == 0) throw ConfigError("sketch: at least one bucket is required");
  if (bucket_counts_.size() != k * s) {
    throw DataError("sketch: count matrix shape does not match values x buckets");
  }
  for (std::size_t j = 1; j < k; ++j) {
    if (!(values_[j - 1] < values_[j])) throw DataError("sketch: values must be strictly increasing");
  }
  total_counts_.assign(k, 0);
  bucket_events_.assign(s, 0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = bucket_counts_[i * k + j];
      if (c < 0) throw DataError("sketch: negative count");
      total_counts_[j] += c;
      bucket_events_[i] += c;
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (total_counts_[j] == 0) throw DataError("sketch: value with zero total count");
  }
  n_events_ = std::accumulate(total_counts_.begin(), total_counts_.end(), std::int64_t{0});
  n_users_ = std::accumulate(bucket_users_.begin(), bucket_users_.end(), std::size_t{0});
}

Sketch build_sketch(std::span<const std::vector<double>> users, const SketchOptions& opts) {
  if (opts.digits < 0) throw ConfigError("build_sketch: digits must be >= 0");
  if (opts.buckets == 0) throw ConfigError("build_sketch: bucket count must be >= 1");
  if (users.empty()) throw DataError("build_sketch: no events");
  if (users.size() < opts.buckets) {
    throw ConfigError("build_sketch: " + std::to_string(users.size()) + " users cannot fill " +
                      std::to_string(opts.buckets) + " buckets");
  }

  std::vector<std::size_t> order(users.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(opts.seed);
  portable_shuffle(std::span<std::size_t>(order), rng);

  const std::size_t s = opts.buckets;
  // Bucket of each user: position in the shuffled order modulo s.
  std::vector<std::size_t> bucket_of(users.size());
  std::vector<std::size_t> bucket_users(s, 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    bucket_of[order[pos]] = pos % s;
    ++bucket_users[pos % s];
  }

  std::vector<std::int64_t> ticks_seen;
  std::vector<std::pair<std::int64_t, std::size_t>> cells;  // (tick, bucket)
  for (std::size_t u = 0; u < users.size(); ++u) {
    if (users[u].empty()) throw DataError("build_sketch: user without events");
    for (double v : users[u]) {
      std::int64_t tick = 0;
      try {
        tick = log_scale_ticks(v, opts.digits);
      } catch (const DomainError& e) {
        throw DomainError(std::string(e.what()) + " (user index " + std::to_string(u) + ")");
      }
      cells.emplace_back(tick, bucket_of[u]);
      ticks_seen.push_back(tick);
    }
  }
  std::sort(ticks_seen.begin(), ticks_seen.end());
  ticks_seen.erase(std::unique(ticks_seen.begin(), ticks_seen.end()), ticks_seen.end());

  const std::size_t k = ticks_seen.size();
  std::vector<std::int64_t> counts(s * k, 0);
  for (const auto& [tick, bucket] : cells) {
    const auto j = static_cast<std::size_t>(
        std::lower_bound(ticks_seen.begin(), ticks_seen.end(), tick) - ticks_seen.begin());
    ++counts[bucket * k + j];
  }
  const double scale = pow10(opts.digits);
  std::vector<double> values(k);
  std::transform(ticks_seen.begin(), ticks_seen.end(), values.begin(),
                 [scale](std::int64_t t) { return static_cast<double>(t) / scale; });
  return Sketch(std::move(values), std::move(counts), std::move(bucket_users), opts.digits);
}

Sketch build_sketch(std::span<const EventRecord> events, const SketchOptions& opts) {
  if (events.empty()) throw DataError("build_sketch: no events");
  std::map<std::string, std::vector<double>> by_user;
  for (const auto& e : events) {
    if (e.user_id.empty()) throw DataError("build_sketch: empty user_id");
    if (!(e.value > 0.0) || !std::isfinite(e.value)) {
      throw DomainError("build_sketch: non-positive value " + std::to_string(e.value) +
                        " for user '" + e.user_id + "'");
    }
    by_user[e.user_id].push_back(e.value);
  }
  std::vector<std::vector<double>> users;
  users.reserve(by_user.size());
  for (auto& [id, values] : by_user) users.push_back(std::move(values));
  return build_sketch(std::span<const std::vector<double>>(users), opts);
}

Ecdf ecdf(const Sketch& sketch) {
  Ecdf out;
  out.values.assign(sketch.values().begin(), sketch.values().end());
  out.cum_fractions.resize(sketch.size());
  const auto n = static_cast<double>(sketch.n_events());
  std::int64_t cum = 0;
  const auto totals = sketch.total_counts();
  for (std::size_t j = 0; j < totals.size(); ++j) {
    cum += totals[j];
    out.cum_fractions[j] = static_cast<double>(cum) / n;
  }
  return out;
}

std::size_t quantile_index(const Ecdf& ecdf, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw DomainError("quantile: probability must lie in (0, 1], got " + std::to_string(p));
  }
  const auto& f = ecdf.cum_fractions;
  const auto it = std::lower_bound(f.begin(), f.end(), p);
  if (it == f.end()) return f.size() - 1;
  return static_cast<std::size_t>(it - f.begin());
}

double quantile(const Ecdf& ecdf, double p) { return ecdf.values[quantile_index(ecdf, p)]; }

}  // namespace conq
