#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "conq/baseline.hpp"
#include "conq/blb.hpp"
#include "conq/qte.hpp"
#include "conq/sketch.hpp"
#include "conq/woodruff.hpp"

namespace conq {

enum class Method { Conq, Delta };

struct ConqConfig {
  int digits = 2;
  std::size_t buckets = 100;
  std::size_t bootstraps = 200;
  double alpha = 0.05;
  std::vector<double> grid = default_grid();
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // bootstrap threads per arm

  // Throws ConfigError on out-of-range settings.
  void validate() const;
};

// Everything computed for one arm. The grid analysis is the CONQ output;
// sketch and nu are shared with the density baseline.
struct ArmAnalysis {
  Sketch sketch;
  Ecdf cdf;
  CdfVariance nu;
  QuantileSeKnots knots;
  GridAnalysis grid;
};

// Sketch, bootstrap, Woodruff SE and grid interpolation for one arm.
// `seed` drives both bucketing and the bootstrap.
ArmAnalysis analyze_arm(std::span<const std::vector<double>> users, const ConqConfig& cfg,
                        std::uint64_t seed);
ArmAnalysis analyze_arm(std::span<const EventRecord> events, const ConqConfig& cfg,
                        std::uint64_t seed);

// Seeds used for each arm, derived from the config seed.
std::uint64_t arm_seed(std::uint64_t seed, Variant variant);

struct ExperimentAnalysis {
  ArmAnalysis control;
  ArmAnalysis treatment;
};

ExperimentAnalysis analyze_experiment(std::span<const std::vector<double>> control,
                                      std::span<const std::vector<double>> treatment,
                                      const ConqConfig& cfg);

// CONQ rows on cfg.grid.
std::vector<QteRow> conq_rows(const ExperimentAnalysis& a, const ConqConfig& cfg);

// Density baseline rows on cfg.grid, reusing the bootstrap CDF variance.
std::vector<QteRow> delta_rows(const ExperimentAnalysis& a, const ConqConfig& cfg,
                               const KdeConfig& kde);

}  // namespace conq
