#include "conq/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#include "conq/error.hpp"
#include "conq/plots.hpp"
#include "conq/rng.hpp"

namespace conq {

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("CONQ_OUTPUT_DIR"); env && *env) return env;
  return "conq-results";
}

const char* method_name(Method m) { return m == Method::Conq ? "conq" : "delta"; }

Method parse_method(std::string_view text) {
  if (text == "conq") return Method::Conq;
  if (text == "delta") return Method::Delta;
  throw ConfigError("unknown method '" + std::string(text) + "' (expected conq or delta)");
}

namespace {

struct GroupInput {
  std::vector<EventRecord> control;
  std::vector<EventRecord> treatment;
};

std::uint64_t group_seed(std::uint64_t seed, const GroupKey& key) {
  return derive_seed(seed, key.experiment + '\x1f' + key.metric + '\x1f' + key.segment);
}

GroupResult analyze_group(const GroupKey& key, const GroupInput& input,
                          const AnalyzeOptions& opts) {
  GroupResult result{key, {}, {}, {}};
  if (input.control.empty() || input.treatment.empty()) {
    result.error = input.control.empty() ? "no control (C) rows" : "no treatment (T) rows";
    return result;
  }
  try {
    ConqConfig cfg = opts.conq;
    cfg.seed = group_seed(opts.conq.seed, key);
    ExperimentAnalysis analysis{
        analyze_arm(input.control, cfg, arm_seed(cfg.seed, Variant::Control)),
        analyze_arm(input.treatment, cfg, arm_seed(cfg.seed, Variant::Treatment))};
    result.rows = opts.method == Method::Conq ? conq_rows(analysis, cfg)
                                              : delta_rows(analysis, cfg, opts.kde);
    for (const auto* arm : {&analysis.control, &analysis.treatment}) {
      const char* variant = arm == &analysis.control ? "C" : "T";
      for (std::size_t i = 0; i < arm->grid.grid.size(); ++i) {
        result.se_curves.push_back({key.experiment, key.metric, key.segment, variant,
                                    arm->grid.grid[i], arm->grid.q_log[i], arm->grid.se_log[i]});
      }
    }
  } catch (const Error& e) {
    result.rows.clear();
    result.se_curves.clear();
    result.error = e.what();
  }
  return result;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::vector<GroupResult> analyze_events(const std::vector<ExperimentEvent>& events,
                                        const AnalyzeOptions& opts) {
  opts.conq.validate();
  std::map<GroupKey, GroupInput> groups;
  for (const auto& ev : events) {
    GroupKey key{ev.experiment, ev.event.metric,
                 opts.segment_by ? ev.event.segment.value_or("none") : "all"};
    auto& g = groups[key];
    (ev.event.variant == Variant::Control ? g.control : g.treatment).push_back(ev.event);
  }
  std::vector<std::pair<GroupKey, GroupInput*>> ordered;
  for (auto& [key, input] : groups) ordered.emplace_back(key, &input);

  std::vector<GroupResult> results(ordered.size());
  parallel_for(ordered.size(), opts.threads, [&](std::size_t i) {
    results[i] = analyze_group(ordered[i].first, *ordered[i].second, opts);
  });
  return results;
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& log) {
  const auto ingest = read_events(opts.input, opts.input_options);
  if (!ingest.skipped_lines.empty()) {
    log << "skipped " << ingest.skipped_lines.size() << " malformed row(s)\n";
  }
  if (ingest.dropped_nonpositive > 0) {
    log << "dropped " << ingest.dropped_nonpositive << " row(s) with non-positive values\n";
  }
  const auto results = analyze_events(ingest.events, opts);

  std::filesystem::create_directories(opts.output_dir);
  auto qte = open_output(opts.output_dir / "qte.csv");
  auto se = open_output(opts.output_dir / "se_curves.csv");
  qte << kQteHeader << '\n';
  se << kSeCurveHeader << '\n';
  std::size_t failed = 0;
  std::vector<QteRecord> records;
  std::vector<SeCurvePoint> curves;
  for (const auto& g : results) {
    if (!g.error.empty()) {
      ++failed;
      log << "group " << g.key.experiment << '/' << g.key.metric << '/' << g.key.segment
          << " failed: " << g.error << '\n';
      continue;
    }
    for (const auto& row : g.rows) {
      QteRecord rec{g.key.experiment, g.key.metric, g.key.segment, method_name(opts.method), row};
      write_qte_row(qte, rec);
      if (opts.plots) records.push_back(std::move(rec));
    }
    for (const auto& pt : g.se_curves) write_se_point(se, pt);
    if (opts.plots) curves.insert(curves.end(), g.se_curves.begin(), g.se_curves.end());
  }
  qte.close();
  se.close();

  if (opts.plots) {
    try {
      const auto files = emit_plots(records, curves, opts.output_dir / "plots");
      log << "wrote " << files.size() << " plot(s)\n";
    } catch (const std::exception& e) {
      log << "plotting failed: " << e.what() << '\n';
    }
  }
  log << "analyzed " << results.size() - failed << " of " << results.size() << " group(s)\n";
  return results.empty() || failed == results.size() ? 1 : 0;
}

void write_aa_table(std::ostream& out, const AaTable& table) {
  out << "percentile,total";
  for (double a : table.alphas) out << ",count_" << format_number(a) << ",pct_" << format_number(a);
  out << '\n';
  for (std::size_t i = 0; i < table.percentiles.size(); ++i) {
    out << 'P' << format_number(table.percentiles[i] * 100) << ',' << table.total_tests;
    for (const auto& cell : table.cells[i]) {
      out << ',' << cell.discoveries << ',' << format_number(cell.percent);
    }
    out << '\n';
  }
}

int cmd_aa_validate(const AaValidateOptions& opts, std::ostream& log) {
  const auto table = aa_study(opts.study);
  std::filesystem::create_directories(opts.output_dir);
  auto out = open_output(opts.output_dir / "aa_table.csv");
  write_aa_table(out, table);
  log << "A/A study: " << table.total_tests << " p-values per percentile\n";
  return 0;
}

void write_comparison(std::ostream& pvalues, std::ostream& sweep, const Comparison& c,
                      Method other) {
  const std::string other_name = other == Method::Delta ? "delta" : "conq_repeat";
  pvalues << "rep,percentile,effect,p_conq,p_" << other_name << '\n';
  for (const auto& r : c.rows) {
    pvalues << r.rep << ',' << format_number(r.percentile) << ',' << format_number(r.effect) << ','
            << format_number(r.p_conq) << ',' << format_number(r.p_other) << '\n';
  }
  sweep << "percentile,threshold,prop_conq,prop_" << other_name << '\n';
  for (const auto& s : c.sweep) {
    sweep << format_number(s.percentile) << ',' << format_number(s.threshold) << ','
          << format_number(s.prop_conq) << ',' << format_number(s.prop_other) << '\n';
  }
}

int cmd_compare(const CompareCommandOptions& opts, std::ostream& log) {
  const auto result = compare_methods(opts.compare);
  std::filesystem::create_directories(opts.output_dir);
  auto pvalues = open_output(opts.output_dir / "compare_pvalues.csv");
  auto sweep = open_output(opts.output_dir / "compare_sweep.csv");
  write_comparison(pvalues, sweep, result, opts.compare.other);
  for (std::size_t i = 0; i < opts.compare.percentiles.size(); ++i) {
    log << "P" << format_number(opts.compare.percentiles[i] * 100)
        << " Spearman correlation: " << format_number(result.correlations[i]) << '\n';
  }
  return 0;
}

}  // namespace conq
