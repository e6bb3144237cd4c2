#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "conq/baseline.hpp"
#include "conq/eval.hpp"
#include "conq/io.hpp"
#include "conq/pipeline.hpp"

namespace conq {

// Output directory used when none is given: $CONQ_OUTPUT_DIR, else "conq-results".
std::filesystem::path default_output_dir();

const char* method_name(Method m);
Method parse_method(std::string_view text);

struct AnalyzeOptions {
  std::filesystem::path input;
  std::filesystem::path output_dir = default_output_dir();
  Method method = Method::Conq;
  KdeConfig kde = KdeConfig::normal_reference();
  ConqConfig conq;
  bool segment_by = false;
  InputOptions input_options;
  bool plots = false;
  std::size_t threads = 1;  // concurrent groups
};

struct GroupKey {
  std::string experiment;
  std::string metric;
  std::string segment;
  auto operator<=>(const GroupKey&) const = default;
};

struct GroupResult {
  GroupKey key;
  std::vector<QteRow> rows;
  std::vector<SeCurvePoint> se_curves;
  std::string error;  // empty on success
};

// Groups events by (experiment, metric[, segment]) and runs the selected
// method on each. Seeds derive from (conq.seed, group key), so results do
// not depend on `threads`. Groups are returned in key order.
std::vector<GroupResult> analyze_events(const std::vector<ExperimentEvent>& events,
                                        const AnalyzeOptions& opts);

// Writes qte.csv and se_curves.csv (plus SVG plots with `plots`) to
// output_dir. Returns 0 unless every group failed.
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& log);

struct AaValidateOptions {
  AaStudyOptions study;
  std::filesystem::path output_dir = default_output_dir();
};

void write_aa_table(std::ostream& out, const AaTable& table);

// Writes aa_table.csv.
int cmd_aa_validate(const AaValidateOptions& opts, std::ostream& log);

struct CompareCommandOptions {
  CompareOptions compare;
  std::filesystem::path output_dir = default_output_dir();
};

void write_comparison(std::ostream& pvalues, std::ostream& sweep, const Comparison& c,
                      Method other);

// Writes compare_pvalues.csv and compare_sweep.csv.
int cmd_compare(const CompareCommandOptions& opts, std::ostream& log);

}  // namespace conq
