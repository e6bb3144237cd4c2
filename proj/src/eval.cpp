#include "conq/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "conq/error.hpp"
#include "conq/rng.hpp"

namespace conq {

void SimConfig::validate() const {
  if (n_users == 0) throw ConfigError("simulation: n_users must be positive");
  if (!(events_mean >= 1.0)) throw ConfigError("simulation: mean events per user must be >= 1");
  if (log_scale < 0.0 || user_effect_scale < 0.0) {
    throw ConfigError("simulation: scales must be >= 0");
  }
  if (!(effect > 0.0)) throw ConfigError("simulation: effect must be positive");
}

namespace {

std::vector<std::vector<double>> simulate_arm(const SimConfig& cfg, double effect, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::geometric_distribution<int> extra(1.0 / cfg.events_mean);
  const auto fixed = static_cast<int>(std::lround(cfg.events_mean));
  const double shift = std::log(effect);

  std::vector<std::vector<double>> users(cfg.n_users);
  for (auto& events : users) {
    const int m = cfg.event_count == SimConfig::EventCount::Fixed ? fixed : 1 + extra(rng);
    const double user_effect = cfg.user_effect_scale * noise(rng);
    events.resize(static_cast<std::size_t>(m));
    for (auto& v : events) {
      v = std::exp(cfg.log_location + user_effect + cfg.log_scale * noise(rng) + shift);
    }
  }
  return users;
}

}  // namespace

SimulatedExperiment simulate_experiment(const SimConfig& cfg) {
  cfg.validate();
  Rng control_rng(derive_seed(cfg.seed, "sim-control"));
  Rng treatment_rng(derive_seed(cfg.seed, "sim-treatment"));
  SimulatedExperiment out;
  out.control = simulate_arm(cfg, 1.0, control_rng);
  out.treatment = simulate_arm(cfg, cfg.effect, treatment_rng);
  return out;
}

std::vector<std::size_t> bh_adjust(std::span<const double> p_values, double alpha) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bh_adjust: p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::size_t k = 0;
  for (std::size_t r = m; r >= 1; --r) {
    if (p_values[order[r - 1]] <= static_cast<double>(r) * alpha / static_cast<double>(m)) {
      k = r;
      break;
    }
  }
  std::vector<std::size_t> rejected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(rejected.begin(), rejected.end());
  return rejected;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("spearman: length mismatch");
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

SimConfig metric_config(const SimConfig& base, std::size_t metric) {
  SimConfig cfg = base;
  cfg.log_scale = base.log_scale * (1.0 + 0.25 * static_cast<double>(metric));
  cfg.seed = derive_seed(base.seed, "metric-" + std::to_string(metric));
  return cfg;
}

AaTable aa_study(const AaStudyOptions& opts) {
  if (opts.sim.effect != 1.0) throw ConfigError("aa_study: simulated effect must be 1.0");
  if (opts.n_metrics == 0 || opts.n_pairs == 0) throw ConfigError("aa_study: empty study");
  for (double a : opts.alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("aa_study: alphas must lie in (0, 1)");
  }
  ConqConfig conq = opts.conq;
  conq.grid = opts.grid;
  conq.validate();

  const std::size_t jobs = opts.n_metrics * opts.n_pairs;
  const std::size_t g = opts.grid.size();
  std::vector<double> p(jobs * g, 1.0);  // job-major
  parallel_for(jobs, opts.threads, [&](std::size_t job) {
    const std::size_t metric = job / opts.n_pairs;
    const std::size_t pair = job % opts.n_pairs;
    SimConfig sim = metric_config(opts.sim, metric);
    sim.seed = derive_seed(sim.seed, pair);
    ConqConfig run = conq;
    run.seed = derive_seed(derive_seed(opts.conq.seed, metric), pair);
    run.threads = 1;
    const auto data = simulate_experiment(sim);
    const auto rows = conq_rows(analyze_experiment(data.control, data.treatment, run), run);
    for (std::size_t i = 0; i < g; ++i) p[job * g + i] = rows[i].p_value;
  });

  AaTable table;
  table.percentiles = opts.grid;
  table.alphas = opts.alphas;
  table.total_tests = jobs;
  table.cells.assign(g, std::vector<AaCell>(opts.alphas.size()));
  std::vector<double> column(jobs);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t job = 0; job < jobs; ++job) column[job] = p[job * g + i];
    for (std::size_t a = 0; a < opts.alphas.size(); ++a) {
      const auto rejected = bh_adjust(column, opts.alphas[a]);
      table.cells[i][a].discoveries = rejected.size();
      table.cells[i][a].percent =
          100.0 * static_cast<double>(rejected.size()) / static_cast<double>(jobs);
    }
  }
  return table;
}

Comparison compare_methods(const CompareOptions& opts) {
  if (opts.n_reps == 0) throw ConfigError("compare: need at least one replicate");
  if (opts.effects.empty()) throw ConfigError("compare: effect list is empty");
  ConqConfig conq = opts.conq;
  conq.grid = opts.percentiles;
  conq.validate();

  const std::size_t np = opts.percentiles.size();
  Comparison out;
  out.rows.resize(opts.n_reps * np);
  parallel_for(opts.n_reps, opts.threads, [&](std::size_t rep) {
    SimConfig sim = opts.sim;
    sim.effect = opts.effects[rep % opts.effects.size()];
    sim.seed = derive_seed(opts.sim.seed, rep);
    ConqConfig run = conq;
    run.seed = derive_seed(opts.conq.seed, rep);
    run.threads = 1;
    const auto data = simulate_experiment(sim);
    const auto analysis = analyze_experiment(data.control, data.treatment, run);
    const auto first = conq_rows(analysis, run);
    const auto second =
        opts.other == Method::Delta ? delta_rows(analysis, run, opts.kde) : conq_rows(analysis, run);
    for (std::size_t i = 0; i < np; ++i) {
      out.rows[rep * np + i] = {rep, opts.percentiles[i], sim.effect, first[i].p_value,
                                second[i].p_value};
    }
  });

  for (std::size_t i = 0; i < np; ++i) {
    std::vector<double> a, b;
    for (std::size_t rep = 0; rep < opts.n_reps; ++rep) {
      a.push_back(out.rows[rep * np + i].p_conq);
      b.push_back(out.rows[rep * np + i].p_other);
    }
    out.correlations.push_back(spearman(a, b));
    for (double t : opts.thresholds) {
      const auto n = static_cast<double>(opts.n_reps);
      const auto hits_a = std::count_if(a.begin(), a.end(), [t](double v) { return v < t; });
      const auto hits_b = std::count_if(b.begin(), b.end(), [t](double v) { return v < t; });
      out.sweep.push_back({opts.percentiles[i], t, static_cast<double>(hits_a) / n,
                           static_cast<double>(hits_b) / n});
    }
  }
  return out;
}

}  // namespace conq
