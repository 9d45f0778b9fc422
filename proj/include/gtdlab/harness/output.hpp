#pragma once

#include "gtdlab/analysis.hpp"
#include "gtdlab/harness/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtdlab {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline constexpr std::string_view kCsvHeader = "step,algorithm,benchmark,metric,mean,stderr,n_runs";

inline std::string csv_text(const std::vector<RunSeries>& series) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& s : series) {
    for (std::size_t p = 0; p < s.steps.size(); ++p) {
      out += std::to_string(s.steps[p]);
      out += ',';
      out += s.label;
      out += ',';
      out += s.benchmark;
      out += ',';
      out += to_string(s.metric);
      out += ',';
      out += format_double(s.mean[p]);
      out += ',';
      out += format_double(s.std_error[p]);
      out += ',';
      out += std::to_string(s.n_runs[p]);
      out += '\n';
    }
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

inline void emit_csv(const std::vector<RunSeries>& series, const std::filesystem::path& path) {
  write_file(path, csv_text(series));
}

inline std::string divergence_csv_text(const std::vector<RunSeries>& series) {
  std::string out = "algorithm,benchmark,metric,n_runs,diverged\n";
  for (const auto& s : series) {
    out += s.label + ',' + s.benchmark + ',' + std::string(to_string(s.metric)) + ',' +
           std::to_string(s.diverged.size()) + ',' + std::to_string(s.diverged_count()) + '\n';
  }
  return out;
}

struct PlotSpec {
  std::string title;
  std::string x_label = "step";
  std::string y_label;
  bool log_y = false;
  bool show_bands = true;
  int width = 820;
  int height = 520;
};

// One curve ready for drawing; `lower`/`upper` may be empty.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lower;
  std::vector<double> upper;
};

inline PlotSeries plot_series(const RunSeries& s) {
  PlotSeries p;
  p.label = s.label;
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    p.x.push_back(static_cast<double>(s.steps[i]));
    p.y.push_back(s.mean[i]);
    p.lower.push_back(s.mean[i] - s.std_error[i]);
    p.upper.push_back(s.mean[i] + s.std_error[i]);
  }
  return p;
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt_coord(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

inline std::string fmt_tick(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

inline constexpr std::array<const char*, 10> kPalette{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace detail

inline std::string svg_text(const std::vector<PlotSeries>& set, const PlotSpec& spec) {
  const double left = 70, right = 190, top = 40, bottom = 55;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  auto usable = [&](double v) { return std::isfinite(v) && (!spec.log_y || v > 0.0); };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : set) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.04 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
  auto clampy = [&](double y) { return std::clamp(y, ymin, ymax); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << spec.width
    << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height
    << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << detail::fmt_coord(left + pw / 2) << "\" y=\"24\" font-family=\"sans-serif\" "
    << "font-size=\"15\" text-anchor=\"middle\">" << detail::xml_escape(spec.title) << "</text>\n";
  o << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n"
    << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << detail::fmt_coord(pw)
    << "\" height=\"" << detail::fmt_coord(ph) << "\"/>\n</g>\n";

  o << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    o << "<line x1=\"" << detail::fmt_coord(px(xv)) << "\" y1=\"" << detail::fmt_coord(top + ph)
      << "\" x2=\"" << detail::fmt_coord(px(xv)) << "\" y2=\"" << detail::fmt_coord(top + ph + 5)
      << "\" stroke=\"#333\"/>\n"
      << "<text x=\"" << detail::fmt_coord(px(xv)) << "\" y=\"" << detail::fmt_coord(top + ph + 18)
      << "\" text-anchor=\"middle\">" << detail::fmt_tick(xv) << "</text>\n";
  }
  if (spec.log_y) {
    for (double e = std::ceil(ymin); e <= std::floor(ymax); e += 1.0) {
      o << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::fmt_coord(py(e)) << "\" x2=\""
        << left << "\" y2=\"" << detail::fmt_coord(py(e)) << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << detail::fmt_coord(py(e) + 4)
        << "\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double yv = ymin + (ymax - ymin) * i / 5.0;
      o << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::fmt_coord(py(yv)) << "\" x2=\""
        << left << "\" y2=\"" << detail::fmt_coord(py(yv)) << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << detail::fmt_coord(py(yv) + 4)
        << "\" text-anchor=\"end\">" << detail::fmt_tick(yv) << "</text>\n";
    }
  }
  o << "<text x=\"" << detail::fmt_coord(left + pw / 2) << "\" y=\"" << spec.height - 12
    << "\" text-anchor=\"middle\">" << detail::xml_escape(spec.x_label) << "</text>\n"
    << "<text x=\"16\" y=\"" << detail::fmt_coord(top + ph / 2)
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << detail::fmt_coord(top + ph / 2)
    << ")\">" << detail::xml_escape(spec.y_label + (spec.log_y ? " (log scale)" : ""))
    << "</text>\n</g>\n";

  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto& s = set[k];
    const char* color = detail::kPalette[k % detail::kPalette.size()];
    if (spec.show_bands && s.lower.size() == s.x.size() && s.upper.size() == s.x.size()) {
      std::ostringstream upper, lower;
      std::vector<std::string> lower_pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!usable(s.y[i]) || !usable(s.upper[i])) continue;
        const double lo = usable(s.lower[i]) ? s.lower[i] : s.y[i];
        upper << detail::fmt_coord(px(s.x[i])) << ',' << detail::fmt_coord(py(clampy(ty(s.upper[i]))))
              << ' ';
        lower_pts.push_back(detail::fmt_coord(px(s.x[i])) + ',' +
                            detail::fmt_coord(py(clampy(ty(lo)))));
      }
      if (!lower_pts.empty()) {
        o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\""
          << upper.str();
        for (auto it = lower_pts.rbegin(); it != lower_pts.rend(); ++it) o << *it << ' ';
        o << "\"/>\n";
      }
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.y[i])) continue;
      o << detail::fmt_coord(px(s.x[i])) << ',' << detail::fmt_coord(py(ty(s.y[i]))) << ' ';
    }
    o << "\"/>\n";
    const double ly = top + 12 + 18.0 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << detail::fmt_coord(ly) << "\" x2=\""
      << left + pw + 34 << "\" y2=\"" << detail::fmt_coord(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << left + pw + 40 << "\" y=\"" << detail::fmt_coord(ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::xml_escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void emit_svg(const std::vector<PlotSeries>& set, const PlotSpec& spec,
                     const std::filesystem::path& path) {
  write_file(path, svg_text(set, spec));
}

inline void emit_svg(const std::vector<RunSeries>& series, const PlotSpec& spec,
                     const std::filesystem::path& path) {
  std::vector<PlotSeries> set;
  for (const auto& s : series) set.push_back(plot_series(s));
  emit_svg(set, spec, path);
}

// Replot of mean curves after subtracting 0.8 of their tail level; bands are
// dropped because they do not survive the shift on a log axis.
inline std::vector<PlotSeries> bias_subtracted_plot(const std::vector<RunSeries>& series,
                                                    std::size_t tail_points,
                                                    double discount = 0.8) {
  std::vector<PlotSeries> out;
  for (const auto& s : series) {
    PlotSeries p;
    p.label = s.label;
    for (std::size_t i = 0; i < s.steps.size(); ++i) p.x.push_back(static_cast<double>(s.steps[i]));
    p.y = bias_subtracted_series(s.mean, tail_points, discount);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace gtdlab
