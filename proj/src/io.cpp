#include "conq/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "conq/error.hpp"

namespace conq {
namespace {

std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string describe_lines(const std::vector<std::size_t>& lines) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(lines.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) out += ", ";
    out += std::to_string(lines[i]);
  }
  if (lines.size() > shown) out += ", ... (" + std::to_string(lines.size()) + " total)";
  return out;
}

}  // namespace

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(strip(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

IngestResult read_events(std::istream& in, const InputOptions& opts) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("input is empty (missing header row)");
  const auto header = split_line(line, opts.delimiter);

  enum Col { kExperiment, kVariant, kUser, kMetric, kValue, kSegment, kCount };
  static constexpr std::array<std::string_view, kCount> names = {
      "experiment", "variant", "user_id", "metric", "value", "segment"};
  std::array<std::optional<std::size_t>, kCount> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::size_t c = 0; c < kCount; ++c) {
      if (header[i] == names[c]) index[c] = i;
    }
  }
  for (std::size_t c = 0; c < kSegment; ++c) {
    if (!index[c]) throw DataError("input header is missing column '" + std::string(names[c]) + "'");
  }

  IngestResult result;
  std::vector<std::size_t> bad;
  std::vector<std::size_t> nonpositive;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto fields = split_line(line, opts.delimiter);
    if (fields.size() != header.size()) {
      bad.push_back(line_no);
      continue;
    }
    ExperimentEvent ev;
    ev.experiment = fields[*index[kExperiment]];
    const auto& variant = fields[*index[kVariant]];
    ev.event.user_id = fields[*index[kUser]];
    ev.event.metric = fields[*index[kMetric]];
    const auto value = parse_double(fields[*index[kValue]]);
    const bool variant_ok = variant == "C" || variant == "T";
    if (!variant_ok || !value || ev.experiment.empty() || ev.event.user_id.empty() ||
        ev.event.metric.empty() || !std::isfinite(*value)) {
      bad.push_back(line_no);
      continue;
    }
    if (*value <= 0.0) {
      nonpositive.push_back(line_no);
      continue;
    }
    ev.event.variant = variant == "C" ? Variant::Control : Variant::Treatment;
    ev.event.value = *value;
    if (index[kSegment] && !fields[*index[kSegment]].empty()) {
      ev.event.segment = fields[*index[kSegment]];
    }
    result.events.push_back(std::move(ev));
  }

  if (!bad.empty()) {
    if (!opts.skip_bad_rows) throw DataError("malformed input rows at lines " + describe_lines(bad));
    result.skipped_lines = bad;
  }
  if (!nonpositive.empty()) {
    if (!opts.drop_nonpositive) {
      throw DomainError("non-positive metric values at lines " + describe_lines(nonpositive));
    }
    result.dropped_nonpositive = nonpositive.size();
  }
  return result;
}

IngestResult read_events(const std::filesystem::path& path, const InputOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path.string() + "'");
  return read_events(in, opts);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_qte_row(std::ostream& out, const QteRecord& rec) {
  const auto& r = rec.row;
  out << rec.experiment << ',' << rec.metric << ',' << rec.segment << ','
      << format_number(r.percentile) << ',' << rec.method << ',' << format_number(r.q_control)
      << ',' << format_number(r.q_treatment) << ',' << format_number(r.delta_pct) << ','
      << format_number(r.se_pct) << ',' << format_number(r.p_value) << ','
      << format_number(r.ci_lower) << ',' << format_number(r.ci_upper) << '\n';
}

namespace {

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 std::string_view expected_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || strip(line) != expected_header) {
    throw DataError("'" + path.string() + "' does not have the expected header");
  }
  const auto width = split_line(expected_header, ',').size();
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    auto fields = split_line(line, ',');
    if (fields.size() != width) {
      throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + " is malformed");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double number_field(const std::string& text) {
  const auto v = parse_double(text);
  if (!v) throw DataError("expected a number, got '" + text + "'");
  return *v;
}

}  // namespace

std::vector<QteRecord> read_qte_table(const std::filesystem::path& path) {
  std::vector<QteRecord> out;
  for (const auto& f : read_table(path, kQteHeader)) {
    QteRecord rec{f[0], f[1], f[2], f[4], {}};
    rec.row.percentile = number_field(f[3]);
    rec.row.q_control = number_field(f[5]);
    rec.row.q_treatment = number_field(f[6]);
    rec.row.delta_pct = number_field(f[7]);
    rec.row.se_pct = number_field(f[8]);
    rec.row.p_value = number_field(f[9]);
    rec.row.ci_lower = number_field(f[10]);
    rec.row.ci_upper = number_field(f[11]);
    out.push_back(std::move(rec));
  }
  return out;
}

void write_se_point(std::ostream& out, const SeCurvePoint& p) {
  out << p.experiment << ',' << p.metric << ',' << p.segment << ',' << p.variant << ','
      << format_number(p.percentile) << ',' << format_number(p.q_log) << ','
      << format_number(p.se_log) << '\n';
}

std::vector<SeCurvePoint> read_se_curves(const std::filesystem::path& path) {
  std::vector<SeCurvePoint> out;
  for (const auto& f : read_table(path, kSeCurveHeader)) {
    out.push_back({f[0], f[1], f[2], f[3], number_field(f[4]), number_field(f[5]),
                   number_field(f[6])});
  }
  return out;
}

}  // namespace conq
