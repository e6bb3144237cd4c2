#pragma once

#include <filesystem>
#include <vector>

#include "conq/io.hpp"

namespace conq {

// Renders, per experiment and metric, static SVG files:
//   *_pvalue.svg  p-value vs percentile (log y, reference line at 0.05,
//                 significant points coloured by the sign of delta)
//   *_delta.svg   delta% with its confidence band
//   *_se.svg      log-scale SE vs percentile for each arm
// Each segment gets its own panel; segments without rows are omitted.
// Returns the files written.
std::vector<std::filesystem::path> emit_plots(const std::vector<QteRecord>& qte,
                                              const std::vector<SeCurvePoint>& se,
                                              const std::filesystem::path& out_dir,
                                              double threshold = 0.05);

// Reads qte.csv (and se_curves.csv when present) from `results_dir`.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& results_dir,
                                              const std::filesystem::path& out_dir,
                                              double threshold = 0.05);

}  // namespace conq
