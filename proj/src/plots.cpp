#include "conq/plots.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "conq/error.hpp"

namespace conq {
namespace {

constexpr double kPanelWidth = 640.0;
constexpr double kPanelHeight = 260.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 40.0;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string file_stem(const std::string& experiment, const std::string& metric) {
  std::string out = experiment + "_" + metric;
  for (auto& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return out;
}

struct Axis {
  double lo, hi;
  bool log = false;
};

// One panel's coordinate mapping, stacked vertically at `index`.
struct Panel {
  Axis x, y;
  double top;

  double px(double v) const {
    return kMarginLeft + (v - x.lo) / (x.hi - x.lo) * (kPanelWidth - kMarginLeft - kMarginRight);
  }
  double py(double v) const {
    const double t = y.log ? (std::log10(v) - std::log10(y.lo)) / (std::log10(y.hi) - std::log10(y.lo))
                           : (v - y.lo) / (y.hi - y.lo);
    return top + kMarginTop + (1.0 - t) * (kPanelHeight - kMarginTop - kMarginBottom);
  }
};

class Svg {
 public:
  explicit Svg(std::size_t panels) : height_(kPanelHeight * static_cast<double>(panels)) {}

  void line(double x1, double y1, double x2, double y2, const char* stroke, double width = 1.0,
            const char* dash = nullptr) {
    body_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
          << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"";
    if (dash) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << "/>\n";
  }
  void circle(double x, double y, double r, const char* fill) {
    body_ << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << r << "\" fill=\"" << fill
          << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke) {
    if (pts.empty()) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) body_ << x << ',' << y << ' ';
    body_ << "\"/>\n";
  }
  void polygon(const std::vector<std::pair<double, double>>& pts, const char* fill) {
    if (pts.empty()) return;
    body_ << "<polygon fill=\"" << fill << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (const auto& [x, y] : pts) body_ << x << ',' << y << ' ';
    body_ << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const char* anchor = "start", int size = 11) {
    body_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\""
          << size << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
  }

  void frame(const Panel& p, const std::string& title, const std::string& ylabel) {
    const double left = kMarginLeft, right = kPanelWidth - kMarginRight;
    const double top = p.top + kMarginTop, bottom = p.top + kPanelHeight - kMarginBottom;
    line(left, bottom, right, bottom, "black");
    line(left, top, left, bottom, "black");
    text(kPanelWidth / 2, p.top + 18, title, "middle", 13);
    text(14, (top + bottom) / 2, ylabel, "start", 11);
    for (double v = std::ceil(p.x.lo / 10) * 10; v <= p.x.hi + 1e-9; v += 10) {
      line(p.px(v), bottom, p.px(v), bottom + 4, "black");
      text(p.px(v), bottom + 16, "P" + std::to_string(static_cast<int>(v)), "middle", 10);
    }
    if (p.y.log) {
      for (double e = std::ceil(std::log10(p.y.lo)); e <= std::log10(p.y.hi) + 1e-9; e += 1) {
        const double v = std::pow(10.0, e);
        line(left - 4, p.py(v), left, p.py(v), "black");
        text(left - 6, p.py(v) + 4, "1e" + std::to_string(static_cast<int>(e)), "end", 10);
      }
    } else {
      for (int i = 0; i <= 4; ++i) {
        const double v = p.y.lo + (p.y.hi - p.y.lo) * i / 4.0;
        line(left - 4, p.py(v), left, p.py(v), "black");
        text(left - 6, p.py(v) + 4, format_number(v), "end", 10);
      }
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write plot '" + path.string() + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPanelWidth << "\" height=\""
        << height_ << "\" viewBox=\"0 0 " << kPanelWidth << ' ' << height_ << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
  }

 private:
  double height_;
  std::ostringstream body_;
};

using Key = std::pair<std::string, std::string>;  // experiment, metric

Axis percentile_axis(const std::vector<const QteRecord*>& rows) {
  double lo = 100, hi = 0;
  for (const auto* r : rows) {
    lo = std::min(lo, r->row.percentile * 100);
    hi = std::max(hi, r->row.percentile * 100);
  }
  if (hi <= lo) {
    lo -= 1;
    hi += 1;
  }
  return {lo, hi};
}

std::filesystem::path plot_pvalues(const std::map<std::string, std::vector<const QteRecord*>>& segs,
                                   const Key& key, const std::filesystem::path& dir,
                                   double threshold) {
  std::vector<const QteRecord*> all;
  double pmin = threshold / 10;
  for (const auto& [seg, rows] : segs) {
    for (const auto* r : rows) {
      all.push_back(r);
      if (r->row.p_value > 0) pmin = std::min(pmin, r->row.p_value);
    }
  }
  const Axis x = percentile_axis(all);
  const Axis y{std::pow(10.0, std::floor(std::log10(pmin))), 1.0, true};
  Svg svg(segs.size());
  std::size_t i = 0;
  for (const auto& [seg, rows] : segs) {
    const Panel p{x, y, kPanelHeight * static_cast<double>(i++)};
    svg.frame(p, key.first + " / " + key.second + " / " + seg + ": p-value", "p");
    svg.line(p.px(x.lo), p.py(threshold), p.px(x.hi), p.py(threshold), "purple", 1.5, "3,3");
    for (const auto* r : rows) {
      const double pv = std::max(r->row.p_value, y.lo);
      const char* colour = "gray";
      if (r->row.p_value < threshold) colour = r->row.delta_pct > 0 ? "red" : "green";
      svg.circle(p.px(r->row.percentile * 100), p.py(pv), 3, colour);
    }
  }
  const auto path = dir / (file_stem(key.first, key.second) + "_pvalue.svg");
  svg.save(path);
  return path;
}

std::filesystem::path plot_delta(const std::map<std::string, std::vector<const QteRecord*>>& segs,
                                 const Key& key, const std::filesystem::path& dir) {
  std::vector<const QteRecord*> all;
  double lo = 0, hi = 0;
  for (const auto& [seg, rows] : segs) {
    for (const auto* r : rows) {
      all.push_back(r);
      if (std::isfinite(r->row.ci_lower)) lo = std::min(lo, r->row.ci_lower);
      if (std::isfinite(r->row.ci_upper)) hi = std::max(hi, r->row.ci_upper);
    }
  }
  if (hi - lo < 1e-9) {
    lo -= 1;
    hi += 1;
  }
  const Axis x = percentile_axis(all);
  const Axis y{lo, hi};
  Svg svg(segs.size());
  std::size_t i = 0;
  for (const auto& [seg, rows] : segs) {
    const Panel p{x, y, kPanelHeight * static_cast<double>(i++)};
    svg.frame(p, key.first + " / " + key.second + " / " + seg + ": delta %", "%");
    svg.line(p.px(x.lo), p.py(0), p.px(x.hi), p.py(0), "black", 0.5, "2,2");
    std::vector<std::pair<double, double>> band, curve;
    for (const auto* r : rows) band.emplace_back(p.px(r->row.percentile * 100), p.py(r->row.ci_upper));
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      band.emplace_back(p.px((*it)->row.percentile * 100), p.py((*it)->row.ci_lower));
    }
    for (const auto* r : rows) curve.emplace_back(p.px(r->row.percentile * 100), p.py(r->row.delta_pct));
    svg.polygon(band, "steelblue");
    svg.polyline(curve, "navy");
  }
  const auto path = dir / (file_stem(key.first, key.second) + "_delta.svg");
  svg.save(path);
  return path;
}

std::filesystem::path plot_se(const std::map<std::string, std::vector<const SeCurvePoint*>>& segs,
                              const Key& key, const std::filesystem::path& dir) {
  double xlo = 100, xhi = 0, yhi = 0;
  for (const auto& [seg, pts] : segs) {
    for (const auto* pt : pts) {
      xlo = std::min(xlo, pt->percentile * 100);
      xhi = std::max(xhi, pt->percentile * 100);
      yhi = std::max(yhi, pt->se_log);
    }
  }
  if (xhi <= xlo) {
    xlo -= 1;
    xhi += 1;
  }
  if (yhi <= 0) yhi = 1;
  const Axis x{xlo, xhi};
  const Axis y{0, yhi * 1.05};
  Svg svg(segs.size());
  std::size_t i = 0;
  for (const auto& [seg, pts] : segs) {
    const Panel p{x, y, kPanelHeight * static_cast<double>(i++)};
    svg.frame(p, key.first + " / " + key.second + " / " + seg + ": SE (log scale)", "SE");
    std::vector<std::pair<double, double>> c, t;
    for (const auto* pt : pts) {
      (pt->variant == "C" ? c : t).emplace_back(p.px(pt->percentile * 100), p.py(pt->se_log));
    }
    svg.polyline(c, "darkorange");
    svg.polyline(t, "teal");
    svg.text(kPanelWidth - kMarginRight - 4, p.top + kMarginTop + 10, "control", "end", 10);
    svg.text(kPanelWidth - kMarginRight - 4, p.top + kMarginTop + 22, "treatment", "end", 10);
  }
  const auto path = dir / (file_stem(key.first, key.second) + "_se.svg");
  svg.save(path);
  return path;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::vector<QteRecord>& qte,
                                              const std::vector<SeCurvePoint>& se,
                                              const std::filesystem::path& out_dir,
                                              double threshold) {
  std::filesystem::create_directories(out_dir);
  std::map<Key, std::map<std::string, std::vector<const QteRecord*>>> by_key;
  for (const auto& r : qte) by_key[{r.experiment, r.metric}][r.segment].push_back(&r);
  std::map<Key, std::map<std::string, std::vector<const SeCurvePoint*>>> se_by_key;
  for (const auto& pt : se) se_by_key[{pt.experiment, pt.metric}][pt.segment].push_back(&pt);

  std::vector<std::filesystem::path> written;
  for (auto& [key, segs] : by_key) {
    for (auto& [seg, rows] : segs) {
      std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
        return a->row.percentile < b->row.percentile;
      });
    }
    written.push_back(plot_pvalues(segs, key, out_dir, threshold));
    written.push_back(plot_delta(segs, key, out_dir));
  }
  for (const auto& [key, segs] : se_by_key) written.push_back(plot_se(segs, key, out_dir));
  return written;
}

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& results_dir,
                                              const std::filesystem::path& out_dir,
                                              double threshold) {
  const auto qte = read_qte_table(results_dir / "qte.csv");
  std::vector<SeCurvePoint> se;
  if (std::filesystem::exists(results_dir / "se_curves.csv")) {
    se = read_se_curves(results_dir / "se_curves.csv");
  }
  return emit_plots(qte, se, out_dir, threshold);
}

}  // namespace conq
