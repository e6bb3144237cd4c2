#include "conq/pipeline.hpp"

#include <cmath>

#include "conq/error.hpp"
#include "conq/rng.hpp"

namespace conq {

void ConqConfig::validate() const {
  if (digits < 0) throw ConfigError("digits must be >= 0");
  if (buckets < 2) throw ConfigError("bucket count must be >= 2");
  if (bootstraps < 2) throw ConfigError("bootstrap count must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (grid.empty()) throw ConfigError("grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0)) throw ConfigError("grid points must lie in (0, 1)");
    if (i > 0 && !(grid[i - 1] < grid[i])) throw ConfigError("grid must be strictly ascending");
  }
}

std::uint64_t arm_seed(std::uint64_t seed, Variant variant) {
  return derive_seed(seed, variant == Variant::Control ? "control" : "treatment");
}

namespace {

ArmAnalysis finish_arm(Sketch sketch, const ConqConfig& cfg, std::uint64_t seed) {
  auto cdf = ecdf(sketch);
  auto nu = blb_variance(sketch, cfg.bootstraps, derive_seed(seed, "bootstrap"), cfg.threads);
  auto knots = woodruff_se(cdf, nu);
  auto grid = interpolate_to_grid(cdf, knots, cfg.grid);
  return ArmAnalysis{std::move(sketch), std::move(cdf), std::move(nu), std::move(knots),
                     std::move(grid)};
}

SketchOptions sketch_options(const ConqConfig& cfg, std::uint64_t seed) {
  return SketchOptions{cfg.digits, cfg.buckets, derive_seed(seed, "buckets")};
}

}  // namespace

ArmAnalysis analyze_arm(std::span<const std::vector<double>> users, const ConqConfig& cfg,
                        std::uint64_t seed) {
  cfg.validate();
  return finish_arm(build_sketch(users, sketch_options(cfg, seed)), cfg, seed);
}

ArmAnalysis analyze_arm(std::span<const EventRecord> events, const ConqConfig& cfg,
                        std::uint64_t seed) {
  cfg.validate();
  return finish_arm(build_sketch(events, sketch_options(cfg, seed)), cfg, seed);
}

ExperimentAnalysis analyze_experiment(std::span<const std::vector<double>> control,
                                      std::span<const std::vector<double>> treatment,
                                      const ConqConfig& cfg) {
  return ExperimentAnalysis{analyze_arm(control, cfg, arm_seed(cfg.seed, Variant::Control)),
                            analyze_arm(treatment, cfg, arm_seed(cfg.seed, Variant::Treatment))};
}

std::vector<QteRow> conq_rows(const ExperimentAnalysis& a, const ConqConfig& cfg) {
  return qte_grid(a.control.grid, a.treatment.grid, cfg.alpha);
}

std::vector<QteRow> delta_rows(const ExperimentAnalysis& a, const ConqConfig& cfg,
                               const KdeConfig& kde) {
  std::vector<QteRow> rows;
  rows.reserve(cfg.grid.size());
  for (double p : cfg.grid) {
    rows.push_back(delta_qte(a.control.sketch, a.control.nu, a.treatment.sketch, a.treatment.nu,
                             p, kde, cfg.alpha));
  }
  return rows;
}

}  // namespace conq
