#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "conq/baseline.hpp"
#include "conq/blb.hpp"
#include "conq/commands.hpp"
#include "conq/error.hpp"
#include "conq/eval.hpp"
#include "conq/pipeline.hpp"
#include "conq/qte.hpp"
#include "conq/sketch.hpp"
#include "conq/woodruff.hpp"

namespace py = pybind11;
using namespace conq;

namespace {

using Users = std::vector<std::vector<double>>;

ConqConfig make_config(int digits, std::size_t buckets, std::size_t bootstraps, double alpha,
                       const std::optional<std::vector<double>>& grid, std::uint64_t seed,
                       std::size_t threads) {
  ConqConfig cfg;
  cfg.digits = digits;
  cfg.buckets = buckets;
  cfg.bootstraps = bootstraps;
  cfg.alpha = alpha;
  if (grid) cfg.grid = *grid;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.validate();
  return cfg;
}

py::dict row_dict(const QteRow& r) {
  py::dict d;
  d["percentile"] = r.percentile;
  d["q_control"] = r.q_control;
  d["q_treatment"] = r.q_treatment;
  d["delta_pct"] = r.delta_pct;
  d["se_pct"] = r.se_pct;
  d["p_value"] = r.p_value;
  d["ci_lower"] = r.ci_lower;
  d["ci_upper"] = r.ci_upper;
  return d;
}

py::list rows_list(const std::vector<QteRow>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(row_dict(r));
  return out;
}

}  // namespace

PYBIND11_MODULE(_conq, m) {
  m.doc() = "Continuous quantile treatment effects";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<DataError> data_error(m, "DataError", error.ptr());
  static py::exception<DomainError> domain_error(m, "DomainError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const DataError& e) {
      py::set_error(data_error, e.what());
    } catch (const DomainError& e) {
      py::set_error(domain_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("log_scale", &log_scale, py::arg("value"), py::arg("digits") = 2);

  py::class_<Sketch>(m, "Sketch")
      .def_property_readonly("values",
                             [](const Sketch& s) { return std::vector<double>(s.values().begin(), s.values().end()); })
      .def_property_readonly("total_counts",
                             [](const Sketch& s) {
                               return std::vector<std::int64_t>(s.total_counts().begin(),
                                                                s.total_counts().end());
                             })
      .def("bucket_row",
           [](const Sketch& s, std::size_t b) {
             if (b >= s.buckets()) throw py::index_error("bucket out of range");
             const auto row = s.bucket_row(b);
             return std::vector<std::int64_t>(row.begin(), row.end());
           })
      .def_property_readonly("buckets", &Sketch::buckets)
      .def_property_readonly("digits", &Sketch::digits)
      .def_property_readonly("n_events", &Sketch::n_events)
      .def_property_readonly("n_users", &Sketch::n_users)
      .def("__len__", &Sketch::size);

  m.def(
      "build_sketch",
      [](const Users& users, int digits, std::size_t buckets, std::uint64_t seed) {
        return build_sketch(std::span<const std::vector<double>>(users), {digits, buckets, seed});
      },
      py::arg("users"), py::arg("digits") = 2, py::arg("buckets") = 100, py::arg("seed") = 0,
      "Sketch from per-user event lists.");

  m.def(
      "ecdf",
      [](const Sketch& s) {
        const auto f = ecdf(s);
        return py::make_tuple(f.values, f.cum_fractions);
      },
      "(values, cumulative fractions) of the sketch.");
  m.def("quantile", [](const Sketch& s, double p) { return quantile(ecdf(s), p); }, py::arg("sketch"),
        py::arg("p"));

  m.def(
      "balanced_assignments",
      [](std::size_t buckets, std::size_t replicates, std::uint64_t seed) {
        const auto a = balanced_assignments(buckets, replicates, seed);
        std::vector<std::vector<std::uint32_t>> rows;
        for (std::size_t r = 0; r < replicates; ++r) {
          const auto row = a.replicate(r);
          rows.emplace_back(row.begin(), row.end());
        }
        return rows;
      },
      py::arg("buckets"), py::arg("replicates"), py::arg("seed") = 0);

  m.def(
      "blb_variance",
      [](const Sketch& s, std::size_t replicates, std::uint64_t seed, std::size_t threads) {
        return blb_variance(s, replicates, seed, threads).variances;
      },
      py::arg("sketch"), py::arg("replicates") = 200, py::arg("seed") = 0, py::arg("threads") = 1,
      "Bootstrap variance of the ECDF at each sketch value.");

  m.def(
      "woodruff_se",
      [](const Sketch& s, const std::vector<double>& variances) {
        const auto f = ecdf(s);
        return woodruff_se(f, CdfVariance{f.values, variances}).se_log;
      },
      py::arg("sketch"), py::arg("variances"), "Log-scale SE at each sketch value.");

  m.def("delta_percent", &delta_percent, py::arg("qc_log"), py::arg("qt_log"));
  m.def("delta_se", &delta_se, py::arg("qc_log"), py::arg("qt_log"), py::arg("se_c_log"),
        py::arg("se_t_log"));
  m.def("p_value", &p_value, py::arg("delta_pct"), py::arg("se_pct"));
  m.def(
      "qte_row",
      [](double percentile, double qc, double qt, double se_c, double se_t, double alpha) {
        return row_dict(qte_row(percentile, qc, qt, se_c, se_t, alpha));
      },
      py::arg("percentile"), py::arg("qc_log"), py::arg("qt_log"), py::arg("se_c_log"),
      py::arg("se_t_log"), py::arg("alpha") = 0.05);
  m.def("parse_grid", &parse_grid, py::arg("spec"));
  m.def("default_grid", &default_grid);

  m.def("bandwidth_normal_reference", &bandwidth_normal_reference, py::arg("sd"), py::arg("iqr"),
        py::arg("n"));
  m.def("kde_density", &kde_density, py::arg("sketch"), py::arg("x"), py::arg("h"));

  m.def(
      "analyze",
      [](const Users& control, const Users& treatment, const std::string& method,
         const std::string& bandwidth, int digits, std::size_t buckets, std::size_t bootstraps,
         double alpha, const std::optional<std::vector<double>>& grid, std::uint64_t seed,
         std::size_t threads) {
        const auto cfg = make_config(digits, buckets, bootstraps, alpha, grid, seed, threads);
        const auto m = parse_method(method);
        const auto kde = KdeConfig::parse(bandwidth);
        std::vector<QteRow> rows;
        {
          py::gil_scoped_release release;
          const auto a = analyze_experiment(control, treatment, cfg);
          rows = m == Method::Conq ? conq_rows(a, cfg) : delta_rows(a, cfg, kde);
        }
        return rows_list(rows);
      },
      py::arg("control"), py::arg("treatment"), py::kw_only(), py::arg("method") = "conq",
      py::arg("bandwidth") = "nrr", py::arg("digits") = 2, py::arg("buckets") = 100,
      py::arg("bootstraps") = 200, py::arg("alpha") = 0.05, py::arg("grid") = py::none(),
      py::arg("seed") = 0, py::arg("threads") = 1,
      "QTE rows (dicts) for two arms given as per-user event lists.");

  m.def(
      "analyze_file",
      [](const std::filesystem::path& input, const std::filesystem::path& output_dir,
         const std::string& method, const std::string& bandwidth, int digits,
         std::size_t buckets, std::size_t bootstraps, double alpha, const std::string& grid,
         std::uint64_t seed, bool segment_by, bool plots, std::size_t threads) {
        AnalyzeOptions o;
        o.input = input;
        o.output_dir = output_dir;
        o.method = parse_method(method);
        o.kde = KdeConfig::parse(bandwidth);
        o.conq = make_config(digits, buckets, bootstraps, alpha, parse_grid(grid), seed, 1);
        o.segment_by = segment_by;
        o.plots = plots;
        o.threads = threads;
        std::ostringstream log;
        int rc;
        {
          py::gil_scoped_release release;
          rc = cmd_analyze(o, log);
        }
        return py::make_tuple(rc, log.str());
      },
      py::arg("input"), py::arg("output_dir"), py::kw_only(), py::arg("method") = "conq",
      py::arg("bandwidth") = "nrr", py::arg("digits") = 2, py::arg("buckets") = 100,
      py::arg("bootstraps") = 200, py::arg("alpha") = 0.05, py::arg("grid") = "P20:P99:1",
      py::arg("seed") = 0, py::arg("segment_by") = false, py::arg("plots") = false,
      py::arg("threads") = 1,
      "Runs the analyze command on a CSV file; returns (exit code, log).");

  m.def(
      "simulate_experiment",
      [](std::size_t n_users, double events_mean, bool fixed_events, double log_location,
         double log_scale, double user_effect_scale, double effect, std::uint64_t seed) {
        SimConfig s;
        s.n_users = n_users;
        s.events_mean = events_mean;
        s.event_count = fixed_events ? SimConfig::EventCount::Fixed : SimConfig::EventCount::Geometric;
        s.log_location = log_location;
        s.log_scale = log_scale;
        s.user_effect_scale = user_effect_scale;
        s.effect = effect;
        s.seed = seed;
        auto data = simulate_experiment(s);
        return py::make_tuple(std::move(data.control), std::move(data.treatment));
      },
      py::arg("n_users") = 2000, py::arg("events_mean") = 5.0, py::arg("fixed_events") = false,
      py::arg("log_location") = 5.0, py::arg("log_scale") = 1.0,
      py::arg("user_effect_scale") = 0.3, py::arg("effect") = 1.0, py::arg("seed") = 0,
      "(control, treatment) per-user event lists.");

  m.def("bh_adjust", [](const std::vector<double>& p, double alpha) { return bh_adjust(p, alpha); },
        py::arg("p_values"), py::arg("alpha"));
  m.def("spearman",
        [](const std::vector<double>& a, const std::vector<double>& b) { return spearman(a, b); });
}
