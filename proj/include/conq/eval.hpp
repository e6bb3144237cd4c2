#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "conq/baseline.hpp"
#include "conq/pipeline.hpp"

namespace conq {

// Synthetic clustered experiment: per user i, M_i events with values
// exp(location + u_i + e_ij), u_i ~ N(0, user_effect_scale^2) and
// e_ij ~ N(0, log_scale^2). Treatment values are multiplied by `effect`.
struct SimConfig {
  enum class EventCount { Fixed, Geometric };

  std::size_t n_users = 2000;  // per arm
  EventCount event_count = EventCount::Geometric;
  double events_mean = 5.0;  // M_i for Fixed; mean of M_i >= 1 for Geometric
  double log_location = 5.0;
  double log_scale = 1.0;
  double user_effect_scale = 0.3;
  double effect = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Events grouped per user for each arm.
struct SimulatedExperiment {
  std::vector<std::vector<double>> control;
  std::vector<std::vector<double>> treatment;
};

SimulatedExperiment simulate_experiment(const SimConfig& cfg);

// Benjamini-Hochberg step-up: indices (into p_values, ascending) of the
// rejected hypotheses at FDR level alpha.
std::vector<std::size_t> bh_adjust(std::span<const double> p_values, double alpha);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct AaCell {
  std::size_t discoveries = 0;
  double percent = 0.0;
};

// False discoveries per percentile (rows) and nominal FDR level (columns).
struct AaTable {
  std::vector<double> percentiles;
  std::vector<double> alphas;
  std::size_t total_tests = 0;  // p-values per percentile
  std::vector<std::vector<AaCell>> cells;
};

struct AaStudyOptions {
  std::size_t n_metrics = 5;
  std::size_t n_pairs = 20;
  std::vector<double> grid = make_grid(20.0, 95.0, 5.0);
  std::vector<double> alphas = {0.05, 0.1, 0.2};
  SimConfig sim;        // effect must be 1
  ConqConfig conq;      // grid is replaced by `grid`
  std::size_t threads = 1;
};

// Metric m uses the template with log_scale multiplied by (1 + 0.25 m) and
// its own seed stream, so metrics differ in spread as well as draws.
SimConfig metric_config(const SimConfig& base, std::size_t metric);

AaTable aa_study(const AaStudyOptions& opts);

struct ComparisonRow {
  std::size_t rep = 0;
  double percentile = 0.0;
  double effect = 1.0;
  double p_conq = 1.0;
  double p_other = 1.0;
};

struct SweepRow {
  double percentile = 0.0;
  double threshold = 0.0;
  double prop_conq = 0.0;
  double prop_other = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<SweepRow> sweep;
  std::vector<double> correlations;  // Spearman per percentile
};

struct CompareOptions {
  std::size_t n_reps = 200;
  std::vector<double> percentiles = {0.5, 0.9};
  std::vector<double> effects = {1.0};  // cycled across replicates
  std::vector<double> thresholds = {0.0001, 0.001, 0.01, 0.05, 0.1, 0.2};
  Method other = Method::Delta;
  KdeConfig kde = KdeConfig::normal_reference();
  SimConfig sim;
  ConqConfig conq;  // grid is replaced by `percentiles`
  std::size_t threads = 1;
};

// Runs CONQ and a second method on identical simulated data per replicate.
Comparison compare_methods(const CompareOptions& opts);

// Runs `job(i)` for i in [0, n) on up to `threads` workers.
template <typename Job>
void parallel_for(std::size_t n, std::size_t threads, Job&& job);

}  // namespace conq

#include "conq/detail/parallel.hpp"
