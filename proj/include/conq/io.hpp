#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "conq/qte.hpp"
#include "conq/sketch.hpp"

namespace conq {

struct ExperimentEvent {
  std::string experiment;
  EventRecord event;
};

struct InputOptions {
  char delimiter = ',';
  bool skip_bad_rows = false;
  // Drop rows whose value is <= 0 instead of failing; they are counted.
  bool drop_nonpositive = false;
};

struct IngestResult {
  std::vector<ExperimentEvent> events;
  std::vector<std::size_t> skipped_lines;  // 1-based, header is line 1
  std::size_t dropped_nonpositive = 0;
};

// Reads `experiment,variant,user_id,metric,value[,segment]` with a header
// row (columns matched by name). Variants are `C` and `T`. Malformed rows
// raise DataError listing their line numbers unless skip_bad_rows is set.
IngestResult read_events(std::istream& in, const InputOptions& opts = {});
IngestResult read_events(const std::filesystem::path& path, const InputOptions& opts = {});

// printf("%.6g"); the fixed numeric format of every output table.
std::string format_number(double v);

std::vector<std::string> split_line(std::string_view line, char delimiter);

inline constexpr std::string_view kQteHeader =
    "experiment,metric,segment,percentile,method,q_control,q_treatment,delta_pct,se_pct,"
    "p_value,ci_lower,ci_upper";

inline constexpr std::string_view kSeCurveHeader =
    "experiment,metric,segment,variant,percentile,q_log,se_log";

struct QteRecord {
  std::string experiment;
  std::string metric;
  std::string segment;
  std::string method;
  QteRow row;
};

void write_qte_row(std::ostream& out, const QteRecord& rec);

// Reads a table produced by write_qte_row (header included).
std::vector<QteRecord> read_qte_table(const std::filesystem::path& path);

struct SeCurvePoint {
  std::string experiment;
  std::string metric;
  std::string segment;
  std::string variant;  // "C" or "T"
  double percentile = 0.0;
  double q_log = 0.0;
  double se_log = 0.0;
};

void write_se_point(std::ostream& out, const SeCurvePoint& p);
std::vector<SeCurvePoint> read_se_curves(const std::filesystem::path& path);

}  // namespace conq
