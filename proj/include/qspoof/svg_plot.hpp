#pragma once

// Static log-scale SVG chart of sweep error rates against n.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <locale>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qspoof/error.hpp"
#include "qspoof/harness.hpp"

namespace qspoof::plot {

struct PlotOptions {
  int width = 720;
  int height = 480;
  /// Rates below this are clipped to the floor of the log axis.
  double min_rate = 1e-12;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

inline std::string fmt(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.setf(std::ios::fixed);
  out.precision(2);
  out << v;
  return out.str();
}

}  // namespace detail

/// One <g class="series"> per lambda holding the attacked miss rate (solid)
/// and the attacked false-alarm rate (dashed, omitted where exactly zero).
inline std::string render_svg(const std::vector<cli::SweepRow>& rows, const PlotOptions& opts = {}) {
  if (rows.empty()) throw ParseError("no sweep rows to plot");

  std::map<double, std::vector<const cli::SweepRow*>> groups;
  std::size_t n_lo = rows.front().n, n_hi = rows.front().n;
  double lo = 1.0;
  for (const auto& r : rows) {
    groups[r.lambda].push_back(&r);
    n_lo = std::min(n_lo, r.n);
    n_hi = std::max(n_hi, r.n);
    for (double v : {r.miss_attacked, r.p_f_attacked}) {
      if (v > 0.0) lo = std::min(lo, v);
    }
  }
  lo = std::max(lo, opts.min_rate);
  const double dec_lo = std::floor(std::log10(lo));
  const double dec_hi = 0.0;
  const double dec_span = std::max(1.0, dec_hi - dec_lo);

  const double left = 70, right = 150, top = 30, bottom = 50;
  const double pw = opts.width - left - right, ph = opts.height - top - bottom;
  auto px = [&](std::size_t n) {
    if (n_hi == n_lo) return left + pw / 2.0;
    return left + pw * static_cast<double>(n - n_lo) / static_cast<double>(n_hi - n_lo);
  };
  auto py = [&](double v) {
    const double d = std::log10(std::max(v, opts.min_rate));
    return top + ph * (dec_hi - std::clamp(d, dec_lo, dec_hi)) / dec_span;
  };

  std::ostringstream svg;
  svg.imbue(std::locale::classic());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\"" << opts.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g class=\"axes\" stroke=\"black\">\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  svg << "</g>\n<g class=\"ticks\">\n";
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    svg << "<text x=\"" << detail::fmt(px(n)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << n
        << "</text>\n";
  }
  for (double d = dec_lo; d <= dec_hi; d += 1.0) {
    svg << "<text x=\"" << left - 8 << "\" y=\"" << detail::fmt(py(std::pow(10.0, d)) + 4)
        << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << opts.height - 10
      << "\" text-anchor=\"middle\">n (observations)</text>\n";
  svg << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\" text-anchor=\"middle\">error rate</text>\n</g>\n";

  std::size_t idx = 0;
  for (const auto& [lam, group] : groups) {
    const char* color = detail::palette(idx);
    svg << "<g class=\"series\" data-lambda=\"" << cli::format_number(lam) << "\" stroke=\"" << color
        << "\" fill=\"none\" stroke-width=\"2\">\n";
    svg << "<polyline class=\"miss\" points=\"";
    for (const auto* r : group) svg << detail::fmt(px(r->n)) << ',' << detail::fmt(py(r->miss_attacked)) << ' ';
    svg << "\"/>\n";
    std::ostringstream pf;
    pf.imbue(std::locale::classic());
    std::size_t count = 0;
    for (const auto* r : group) {
      if (r->p_f_attacked <= 0.0) continue;
      pf << detail::fmt(px(r->n)) << ',' << detail::fmt(py(r->p_f_attacked)) << ' ';
      ++count;
    }
    if (count > 0) {
      svg << "<polyline class=\"false-alarm\" stroke-dasharray=\"6 4\" points=\"" << pf.str() << "\"/>\n";
    }
    const double ly = top + 16.0 * static_cast<double>(idx);
    svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
        << "\"/>\n";
    svg << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\" stroke=\"none\" fill=\"black\">lambda = "
        << cli::format_number(lam) << "</text>\n";
    svg << "</g>\n";
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void cmd_plot(const std::string& csv_path, const std::string& svg_path, const PlotOptions& opts = {}) {
  const auto rows = cli::parse_sweep_csv(cli::read_file(csv_path));
  const auto svg = render_svg(rows, opts);
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + svg_path + "'");
  out << svg;
}

}  // namespace qspoof::plot
