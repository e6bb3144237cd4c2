// conq: continuous quantile treatment effects for clustered A/B metrics.
#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "conq/commands.hpp"
#include "conq/error.hpp"
#include "conq/plots.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw conq::ConfigError("malformed number list '" + text + "'");
    }
  }
  if (out.empty()) throw conq::ConfigError("empty number list");
  return out;
}

struct Common {
  int digits = 2;
  std::size_t buckets = 100;
  std::size_t bootstraps = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string output_dir = conq::default_output_dir().string();

  void add(CLI::App* app) {
    app->add_option("--digits", digits, "Decimal digits kept after log-scaling")->capture_default_str();
    app->add_option("--buckets", buckets, "Number of user buckets")->capture_default_str();
    app->add_option("--bootstraps", bootstraps, "Balanced bootstrap replicates")->capture_default_str();
    app->add_option("--alpha", alpha, "Significance level")->capture_default_str();
    app->add_option("--seed", seed, "Master RNG seed")->capture_default_str();
    app->add_option("--threads", threads, "Worker threads")->capture_default_str();
    app->add_option("--output-dir", output_dir, "Output directory (env CONQ_OUTPUT_DIR)")
        ->capture_default_str();
  }

  conq::ConqConfig conq_config() const {
    conq::ConqConfig cfg;
    cfg.digits = digits;
    cfg.buckets = buckets;
    cfg.bootstraps = bootstraps;
    cfg.alpha = alpha;
    cfg.seed = seed;
    return cfg;
  }
};

struct SimOptions {
  std::size_t users = 2000;
  double events_mean = 5.0;
  bool fixed_events = false;
  double location = 5.0;
  double scale = 1.0;
  double user_effect = 0.3;
  std::uint64_t sim_seed = 1;

  void add(CLI::App* app) {
    app->add_option("--users", users, "Users per arm")->capture_default_str();
    app->add_option("--events-mean", events_mean, "Mean events per user")->capture_default_str();
    app->add_flag("--fixed-events", fixed_events, "Every user has exactly --events-mean events");
    app->add_option("--log-location", location, "Log-scale location")->capture_default_str();
    app->add_option("--log-scale", scale, "Log-scale event noise")->capture_default_str();
    app->add_option("--user-effect", user_effect, "Log-scale user random effect")
        ->capture_default_str();
    app->add_option("--sim-seed", sim_seed, "Simulation seed")->capture_default_str();
  }

  conq::SimConfig config() const {
    conq::SimConfig s;
    s.n_users = users;
    s.events_mean = events_mean;
    s.event_count = fixed_events ? conq::SimConfig::EventCount::Fixed
                                 : conq::SimConfig::EventCount::Geometric;
    s.log_location = location;
    s.log_scale = scale;
    s.user_effect_scale = user_effect;
    s.seed = sim_seed;
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous quantile treatment effects for clustered A/B metrics"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Compute QTE rows for every experiment/metric");
  Common analyze_common;
  analyze_common.add(analyze);
  std::string input, method = "conq", bandwidth = "nrr", grid = "P20:P99:1";
  std::string delimiter = ",";
  bool segment_by = false, skip_bad = false, drop_nonpositive = false, plots = false;
  analyze->add_option("--input", input, "Input CSV")->required();
  analyze->add_option("--method", method, "conq or delta")->capture_default_str();
  analyze->add_option("--bandwidth", bandwidth, "KDE bandwidth for delta: value or nrr")
      ->capture_default_str();
  analyze->add_option("--grid", grid, "Percentile grid P<lo>:P<hi>:<step>")->capture_default_str();
  analyze->add_option("--delimiter", delimiter, "Field delimiter")->capture_default_str();
  analyze->add_flag("--segment-by", segment_by, "Break results down by the segment column");
  analyze->add_flag("--skip-bad-rows", skip_bad, "Skip malformed rows instead of failing");
  analyze->add_flag("--drop-nonpositive", drop_nonpositive, "Drop rows with value <= 0");
  analyze->add_flag("--plots", plots, "Also write SVG plots");

  // aa-validate
  auto* aa = app.add_subcommand("aa-validate", "A/A false-discovery study with BH adjustment");
  Common aa_common;
  aa_common.add(aa);
  SimOptions aa_sim;
  aa_sim.add(aa);
  std::size_t metrics = 5, pairs = 20;
  std::string aa_grid = "P20:P95:5", alphas = "0.05,0.1,0.2";
  aa->add_option("--metrics", metrics, "Simulated metrics")->capture_default_str();
  aa->add_option("--pairs", pairs, "Control/treatment pairs per metric")->capture_default_str();
  aa->add_option("--grid", aa_grid, "Percentile grid")->capture_default_str();
  aa->add_option("--alphas", alphas, "Comma-separated nominal FDR levels")->capture_default_str();

  // compare
  auto* compare = app.add_subcommand("compare", "Compare CONQ p-values with another method");
  Common cmp_common;
  cmp_common.add(compare);
  SimOptions cmp_sim;
  cmp_sim.add(compare);
  std::size_t reps = 200;
  std::string percentiles = "0.5,0.9", effects = "1.0", thresholds = "0.0001,0.001,0.01,0.05,0.1,0.2";
  std::string against = "delta", cmp_bandwidth = "nrr";
  compare->add_option("--reps", reps, "Simulated experiments")->capture_default_str();
  compare->add_option("--percentiles", percentiles, "Probabilities to compare")->capture_default_str();
  compare->add_option("--effects", effects, "Multiplicative effects, cycled over replicates")
      ->capture_default_str();
  compare->add_option("--thresholds", thresholds, "p-value thresholds for the sweep")
      ->capture_default_str();
  compare->add_option("--against", against, "delta or conq")->capture_default_str();
  compare->add_option("--bandwidth", cmp_bandwidth, "KDE bandwidth: value or nrr")->capture_default_str();

  // plot
  auto* plot = app.add_subcommand("plot", "Render SVG plots from an analyze output directory");
  std::string results_dir, plot_dir;
  double plot_threshold = 0.05;
  plot->add_option("--results", results_dir, "Directory containing qte.csv")->required();
  plot->add_option("--output-dir", plot_dir, "Where to write plots (default <results>/plots)");
  plot->add_option("--threshold", plot_threshold, "p-value reference line")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      if (delimiter.size() != 1) throw conq::ConfigError("delimiter must be a single character");
      conq::AnalyzeOptions opts;
      opts.input = input;
      opts.output_dir = analyze_common.output_dir;
      opts.method = conq::parse_method(method);
      opts.kde = conq::KdeConfig::parse(bandwidth);
      opts.conq = analyze_common.conq_config();
      opts.conq.grid = conq::parse_grid(grid);
      opts.segment_by = segment_by;
      opts.input_options = {delimiter[0], skip_bad, drop_nonpositive};
      opts.plots = plots;
      opts.threads = analyze_common.threads;
      return conq::cmd_analyze(opts, std::cerr);
    }
    if (*aa) {
      conq::AaValidateOptions opts;
      opts.output_dir = aa_common.output_dir;
      opts.study.n_metrics = metrics;
      opts.study.n_pairs = pairs;
      opts.study.grid = conq::parse_grid(aa_grid);
      opts.study.alphas = parse_list(alphas);
      opts.study.sim = aa_sim.config();
      opts.study.conq = aa_common.conq_config();
      opts.study.threads = aa_common.threads;
      return conq::cmd_aa_validate(opts, std::cerr);
    }
    if (*compare) {
      conq::CompareCommandOptions opts;
      opts.output_dir = cmp_common.output_dir;
      opts.compare.n_reps = reps;
      opts.compare.percentiles = parse_list(percentiles);
      opts.compare.effects = parse_list(effects);
      opts.compare.thresholds = parse_list(thresholds);
      opts.compare.other = conq::parse_method(against);
      opts.compare.kde = conq::KdeConfig::parse(cmp_bandwidth);
      opts.compare.sim = cmp_sim.config();
      opts.compare.conq = cmp_common.conq_config();
      opts.compare.threads = cmp_common.threads;
      return conq::cmd_compare(opts, std::cerr);
    }
    if (*plot) {
      const std::filesystem::path out =
          plot_dir.empty() ? std::filesystem::path(results_dir) / "plots"
                           : std::filesystem::path(plot_dir);
      const auto files = conq::emit_plots(results_dir, out, plot_threshold);
      for (const auto& f : files) std::cout << f.string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "conq: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
