// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "conq/baseline.hpp"
#include "conq/blb.hpp"
#include "conq/commands.hpp"
#include "conq/eval.hpp"
#include "conq/normal.hpp"
#include "conq/pipeline.hpp"
#include "conq/qte.hpp"
#include "conq/rng.hpp"
#include "conq/sketch.hpp"

using namespace conq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Simulation template shared by the study criteria: 2,000 users per arm,
// geometric events with mean 5, user-effect scale 0.3, log-scale sigma 1.
SimConfig study_sim() {
  SimConfig s;
  s.n_users = 2000;
  s.event_count = SimConfig::EventCount::Geometric;
  s.events_mean = 5.0;
  s.user_effect_scale = 0.3;
  s.log_location = 5.0;
  s.log_scale = 1.0;
  return s;
}

ConqConfig study_conq() {
  ConqConfig c;
  c.digits = 3;
  c.buckets = 100;
  c.bootstraps = 200;
  return c;
}

Outcome balanced_exactness() {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = balanced_assignments(100, 200, derive_seed(seed, "acceptance"));
    std::vector<std::size_t> count(100, 0);
    for (auto i : a.indices) ++count[i];
    for (std::size_t b = 0; b < 100; ++b) {
      if (count[b] != 200) {
        return {false, "seed " + std::to_string(seed) + " bucket " + std::to_string(b) +
                           " appears " + std::to_string(count[b]) + " times"};
      }
    }
  }
  return {true, "10 seeds, every bucket drawn exactly 200 times"};
}

Outcome iid_variance() {
  const std::size_t n = 10000;
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(derive_seed(seed, "iid"));
    std::lognormal_distribution<double> value(0.0, 1.0);
    std::vector<std::vector<double>> users(n);
    for (auto& u : users) u = {value(rng)};
    const auto sketch = build_sketch(std::span<const std::vector<double>>(users), {4, 100, seed});
    const auto nu = blb_variance(sketch, 200, derive_seed(seed, "boot"), worker_count());
    sum += nu.variances[quantile_index(ecdf(sketch), 0.5)];
  }
  const double mean = sum / 20.0;
  const double target = 0.25 / static_cast<double>(n);
  const double rel = std::abs(mean / target - 1.0);
  return {rel <= 0.25, "mean nu at median " + fmt("%.4g", mean) + " vs " + fmt("%.4g", target) +
                           " (rel err " + fmt("%.3f", rel) + ", tol 0.25)"};
}

// Exact bootstrap variance of the ECDF: every multiset of s draws from the s
// buckets, weighted by its multinomial probability.
std::vector<double> multiset_variance(const Sketch& sketch) {
  const std::size_t s = sketch.buckets();
  const std::size_t k = sketch.size();
  std::vector<double> ex(k, 0.0), ex2(k, 0.0);
  std::vector<std::size_t> mult(s, 0);
  std::vector<double> factorial(s + 1, 1.0);
  for (std::size_t i = 1; i <= s; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);
  const double total_draws = std::pow(static_cast<double>(s), static_cast<double>(s));

  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t b, std::size_t left) {
    if (b + 1 == s) {
      mult[b] = left;
      double ways = factorial[s];
      for (auto m : mult) ways /= factorial[m];
      const double w = ways / total_draws;
      double events = 0.0;
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          events += static_cast<double>(mult[i]) * static_cast<double>(sketch.count(i, j));
        }
      }
      double cum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < s; ++i) cum += static_cast<double>(mult[i]) * static_cast<double>(sketch.count(i, j));
        const double f = cum / events;
        ex[j] += w * f;
        ex2[j] += w * f * f;
      }
      return;
    }
    for (std::size_t m = 0; m <= left; ++m) {
      mult[b] = m;
      rec(b + 1, left - m);
    }
  };
  rec(0, s);
  std::vector<double> var(k);
  for (std::size_t j = 0; j < k; ++j) var[j] = std::max(0.0, ex2[j] - ex[j] * ex[j]);
  return var;
}

Outcome blb_vs_oracle() {
  double worst = 0.0;
  std::string where;
  for (std::uint64_t trial = 0; trial < 3; ++trial) {
    std::mt19937_64 rng(derive_seed(trial, "oracle"));
    std::vector<std::vector<double>> users(4 + trial * 3);
    for (auto& u : users) {
      u.resize(1 + rng() % 3);
      for (auto& v : u) v = std::exp(0.1 * static_cast<double>(1 + rng() % 8));
    }
    const auto sketch = build_sketch(std::span<const std::vector<double>>(users), {2, 4, trial});
    if (sketch.size() > 8) return {false, "sketch has more than 8 values"};
    const auto oracle = multiset_variance(sketch);
    const auto nu = blb_variance(sketch, 5000, derive_seed(trial, "boot"));
    for (std::size_t j = 0; j < oracle.size(); ++j) {
      double rel;
      if (oracle[j] < 1e-15) {
        rel = nu.variances[j] < 1e-15 ? 0.0 : 1.0;
      } else {
        rel = std::abs(nu.variances[j] / oracle[j] - 1.0);
      }
      if (rel >= worst) {
        worst = rel;
        where = "sketch " + std::to_string(trial) + " value " + std::to_string(j);
      }
    }
  }
  return {worst <= 0.10, "worst rel err " + fmt("%.4f", worst) + " at " + where + " (tol 0.10)"};
}

bool covers_zero(const QteRow& r) { return r.ci_lower <= 0.0 && 0.0 <= r.ci_upper; }

Outcome aa_coverage() {
  const std::size_t reps = 500;
  ConqConfig cfg = study_conq();
  cfg.grid = {0.5, 0.9};
  std::vector<int> covered(reps * 2, 0);
  parallel_for(reps, worker_count(), [&](std::size_t rep) {
    SimConfig sim = study_sim();
    sim.seed = derive_seed(4, rep);
    ConqConfig run = cfg;
    run.seed = derive_seed(40, rep);
    const auto data = simulate_experiment(sim);
    const auto rows = conq_rows(analyze_experiment(data.control, data.treatment, run), run);
    covered[rep * 2] = covers_zero(rows[0]);
    covered[rep * 2 + 1] = covers_zero(rows[1]);
  });
  double rate[2] = {0.0, 0.0};
  for (std::size_t rep = 0; rep < reps; ++rep) {
    rate[0] += covered[rep * 2];
    rate[1] += covered[rep * 2 + 1];
  }
  rate[0] *= 100.0 / reps;
  rate[1] *= 100.0 / reps;
  const bool pass = rate[0] >= 93.0 && rate[0] <= 97.0 && rate[1] >= 93.0 && rate[1] <= 97.0;
  return {pass, "P50 " + fmt("%.1f", rate[0]) + "%, P90 " + fmt("%.1f", rate[1]) +
                    "% over 500 replicates (band [93%, 97%])"};
}

Outcome effect_recovery() {
  const std::size_t reps = 200;
  ConqConfig cfg = study_conq();
  cfg.grid = parse_grid("P20:P95:1");
  const std::size_t g = cfg.grid.size();
  const std::size_t p50 = 30;
  std::vector<double> delta(reps * g);
  std::vector<int> hit(reps, 0);
  parallel_for(reps, worker_count(), [&](std::size_t rep) {
    SimConfig sim = study_sim();
    sim.n_users = 5000;
    sim.effect = 1.10;
    sim.seed = derive_seed(5, rep);
    ConqConfig run = cfg;
    run.seed = derive_seed(50, rep);
    const auto data = simulate_experiment(sim);
    const auto rows = conq_rows(analyze_experiment(data.control, data.treatment, run), run);
    for (std::size_t i = 0; i < g; ++i) delta[rep * g + i] = rows[i].delta_pct;
    hit[rep] = rows[p50].p_value < 0.05;
  });
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < g; ++i) {
    std::vector<double> col(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) col[rep] = delta[rep * g + i];
    std::sort(col.begin(), col.end());
    const double median = 0.5 * (col[reps / 2 - 1] + col[reps / 2]);
    lo = std::min(lo, median);
    hi = std::max(hi, median);
  }
  double power = 0.0;
  for (int h : hit) power += h;
  power *= 100.0 / reps;
  const bool pass = lo >= 9.0 && hi <= 11.0 && power >= 80.0;
  return {pass, "median delta% in [" + fmt("%.2f", lo) + ", " + fmt("%.2f", hi) +
                    "] over P20-P95, P50 power " + fmt("%.1f", power) + "%"};
}

Outcome conq_delta_agreement() {
  CompareOptions o;
  o.n_reps = 200;
  o.percentiles = {0.5, 0.9};
  o.effects = {1.0, 1.01, 1.02, 1.03, 1.05, 1.08};
  o.thresholds = {0.0001, 0.001, 0.01, 0.05, 0.1, 0.2};
  o.other = Method::Delta;
  o.kde = KdeConfig::normal_reference();
  o.sim = study_sim();
  o.sim.seed = 6;
  o.conq = study_conq();
  o.conq.seed = 60;
  o.threads = worker_count();
  const auto c = compare_methods(o);
  double gap = 0.0;
  for (const auto& s : c.sweep) gap = std::max(gap, std::abs(s.prop_conq - s.prop_other));
  gap *= 100.0;
  const double rho = std::min(c.correlations[0], c.correlations[1]);
  const bool pass = rho >= 0.9 && gap <= 3.0;
  return {pass, "Spearman P50 " + fmt("%.3f", c.correlations[0]) + ", P90 " +
                    fmt("%.3f", c.correlations[1]) + "; max discovery gap " + fmt("%.1f", gap) +
                    " pp (tol 3)"};
}

Outcome bandwidth_pathology() {
  SimConfig sim = study_sim();
  sim.effect = 1.02;
  sim.seed = 7;
  ConqConfig cfg;
  cfg.grid = {0.5};
  cfg.seed = 70;
  const auto data = simulate_experiment(sim);
  const auto a = analyze_experiment(data.control, data.treatment, cfg);
  std::vector<KdeConfig> kdes = {KdeConfig::fixed(0.002), KdeConfig::fixed(0.01),
                                 KdeConfig::fixed(0.02), KdeConfig::normal_reference()};
  std::string detail = "p at P50:";
  double lo = 1.0, hi = 0.0;
  for (const auto& k : kdes) {
    const double p = delta_rows(a, cfg, k)[0].p_value;
    detail += " " + k.describe() + "=" + fmt("%.3g", p);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  const double span = lo > 0.0 ? hi / lo : INFINITY;
  return {span >= 10.0, detail + " (span " + fmt("%.3g", span) + "x, need >= 10x)"};
}

Outcome aa_bh_study() {
  AaStudyOptions o;
  o.n_metrics = 5;
  o.n_pairs = 20;
  o.grid = parse_grid("P20:P95:5");
  o.alphas = {0.05, 0.1, 0.2};
  o.sim = study_sim();
  o.sim.seed = 8;
  o.conq = study_conq();
  o.conq.seed = 80;
  o.threads = worker_count();
  const auto t = aa_study(o);
  double worst05 = 0.0, worst20 = 0.0;
  std::size_t zero = 0, cells = 0;
  for (const auto& row : t.cells) {
    worst05 = std::max(worst05, row[0].percent);
    worst20 = std::max(worst20, row[2].percent);
    for (const auto& c : row) {
      zero += c.discoveries == 0;
      ++cells;
    }
  }
  const bool pass = worst05 <= 2.0 && worst20 <= 5.0 && 2 * zero > cells;
  return {pass, "max FD% " + fmt("%.1f", worst05) + " at 0.05, " + fmt("%.1f", worst20) +
                    " at 0.2; " + std::to_string(zero) + "/" + std::to_string(cells) +
                    " cells zero"};
}

Outcome monotone_invariance() {
  std::mt19937_64 rng(derive_seed(9, "monotone"));
  double worst = 0.0;
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::lognormal_distribution<double> value(static_cast<double>(rng() % 8),
                                              0.2 + 0.1 * static_cast<double>(rng() % 20));
    std::vector<std::vector<double>> users(20 + rng() % 300);
    std::vector<double> raw;
    for (auto& u : users) {
      u.resize(1 + rng() % 5);
      for (auto& v : u) raw.push_back(v = value(rng));
    }
    std::sort(raw.begin(), raw.end());
    const auto f = ecdf(build_sketch(std::span<const std::vector<double>>(users), {2, 2, 0}));
    for (int pct = 1; pct <= 100; ++pct) {
      const double p = pct / 100.0;
      std::size_t rank = 1;
      while (static_cast<double>(rank) / static_cast<double>(raw.size()) < p) ++rank;
      const double raw_q = raw[rank - 1];
      const double q = quantile(f, p);
      worst = std::max(worst, std::abs(q - std::log(raw_q)));
      mismatches += q != log_scale(raw_q, 2);
    }
  }
  const bool pass = mismatches == 0 && worst <= 0.01 + 1e-12;
  return {pass, "50 datasets x 100 percentiles, max |log gap| " + fmt("%.5f", worst) +
                    " (ulp 0.01), " + std::to_string(mismatches) + " rank mismatches"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "conq_acceptance_determinism";
  fs::remove_all(base);
  std::ostringstream log;
  std::vector<std::pair<std::string, std::string>> outputs;
  for (std::size_t threads : {1, 1, 4}) {
    AnalyzeOptions o;
    o.input = fs::path(CONQ_TEST_DATA_DIR) / "golden_input.csv";
    o.output_dir = base / std::to_string(outputs.size());
    o.segment_by = true;
    o.conq.buckets = 20;
    o.conq.seed = 11;
    o.threads = threads;
    o.conq.threads = threads;
    if (cmd_analyze(o, log) != 0) return {false, "analyze failed: " + log.str()};
    outputs.emplace_back(slurp(o.output_dir / "qte.csv"), slurp(o.output_dir / "se_curves.csv"));
  }
  const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
  return {same && !outputs[0].first.empty(),
          same ? "3 runs (1, 1, 4 threads) byte-identical, " +
                     std::to_string(outputs[0].first.size()) + " bytes of qte.csv"
               : "outputs differ"};
}

Outcome unit_oracles() {
  const double h = bandwidth_normal_reference(1.0, 2.68, 32);
  std::vector<std::vector<double>> one = {{std::exp(1.0)}};
  const auto s = build_sketch(std::span<const std::vector<double>>(one), {2, 1, 0});
  const double kde = kde_density(s, s.values()[0], 1.0);
  const double p = p_value(1.959964, 1.0);
  const auto bh = bh_adjust(std::vector<double>{0.005, 0.01, 0.03, 0.04}, 0.05);
  const bool pass = std::abs(h - 0.53) <= 1e-12 && std::abs(kde - 0.39894) <= 1e-5 &&
                    std::abs(p - 0.05) <= 1e-4 && bh.size() == 4;
  return {pass, "bandwidth " + fmt("%.15g", h) + ", KDE " + fmt("%.6f", kde) + ", p " +
                    fmt("%.6f", p) + ", BH rejects " + std::to_string(bh.size()) + "/4"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"balanced bootstrap exactness", balanced_exactness},
      {"iid variance reduction", iid_variance},
      {"bootstrap variance vs exhaustive oracle", blb_vs_oracle},
      {"A/A coverage", aa_coverage},
      {"effect recovery", effect_recovery},
      {"CONQ-DELTA agreement", conq_delta_agreement},
      {"bandwidth pathology", bandwidth_pathology},
      {"A/A with BH", aa_bh_study},
      {"monotone transform invariance", monotone_invariance},
      {"determinism", determinism},
      {"unit oracles", unit_oracles},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
