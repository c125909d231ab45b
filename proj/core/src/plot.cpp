// Minimal SVG charts of the benchmark CSVs. Best effort; the CSVs are the
// authoritative output.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "simopt/bench.hpp"

namespace simopt::bench {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::vector<double> errors;  // optional half-widths, same length as points
};

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v, double from, double to) const {
    const double a = log ? std::log10(std::max(v, 1e-300)) : v;
    const double l = log ? std::log10(lo) : lo;
    const double h = log ? std::log10(hi) : hi;
    const double t = h > l ? (a - l) / (h - l) : 0.5;
    return from + t * (to - from);
  }
};

std::string render(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                   const std::vector<Series>& series, Axis x, Axis y) {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";
  for (double t : {0.0, 0.5, 1.0}) {
    const double xv = x.log ? std::pow(10.0, std::log10(x.lo) + t * (std::log10(x.hi) - std::log10(x.lo)))
                            : x.lo + t * (x.hi - x.lo);
    const double yv = y.log ? std::pow(10.0, std::log10(y.lo) + t * (std::log10(y.hi) - std::log10(y.lo)))
                            : y.lo + t * (y.hi - y.lo);
    svg << "<text x=\"" << x.map(xv, x0, x1) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
        << format_double(std::round(xv * 100) / 100).substr(0, 10) << "</text>\n";
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << y.map(yv, y0, y1) + 4 << "\" text-anchor=\"end\">"
        << format_double(std::round(yv * 100) / 100).substr(0, 10) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [px, py] : series[s].points)
      svg << x.map(px, x0, x1) << ',' << y.map(py, y0, y1) << ' ';
    svg << "\"/>\n";
    for (std::size_t i = 0; i < series[s].errors.size(); ++i) {
      const auto [px, py] = series[s].points[i];
      const double e = series[s].errors[i];
      const double sx = x.map(px, x0, x1);
      svg << "<line x1=\"" << sx << "\" x2=\"" << sx << "\" y1=\""
          << y.map(std::max(py - e, y.lo), y0, y1) << "\" y2=\"" << y.map(std::min(py + e, y.hi), y0, y1)
          << "\" stroke=\"" << color << "\"/>\n";
    }
    svg << "<text x=\"" << x1 + 10 << "\" y=\"" << kTop + 16 * (s + 1) << "\" fill=\"" << color
        << "\">" << series[s].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> plot_dir(const std::filesystem::path& dir) {
  const auto records = read_trace_dir(dir);
  require(!records.empty(), ErrorKind::io, "no trace CSVs found in " + dir.string());
  std::vector<std::filesystem::path> written;

  // Mean RSE per iteration across repetitions, one line per (size, backend).
  std::map<std::string, std::vector<const RunRecord*>> cells;
  for (const auto& r : records)
    cells[r.meta.task + " " + std::to_string(r.meta.size) + " " + r.meta.backend].push_back(&r);
  std::vector<Series> rse_series;
  double max_iter = 1;
  for (const auto& [label, runs] : cells) {
    Series s{label, {}, {}};
    const std::size_t len = runs.front()->rows.size();
    const std::size_t stride = std::max<std::size_t>(1, len / 300);
    for (std::size_t t = 1; t <= len; t += stride) {
      double total = 0;
      std::size_t count = 0;
      for (const auto* r : runs)
        if (auto v = rse_at(*r, t)) {
          total += *v;
          ++count;
        }
      if (count) s.points.emplace_back(static_cast<double>(t), std::min(total / count, 100.0));
    }
    max_iter = std::max(max_iter, static_cast<double>(len));
    rse_series.push_back(std::move(s));
  }
  written.push_back(dir / "rse.svg");
  write_file(written.back(), render("RSE vs final objective", "iteration", "RSE (%)", rse_series,
                                    Axis{1, max_iter, false}, Axis{0, 100, false}));

  // Mean wall time per size with 2-sigma bars, one line per backend.
  const auto summary_path = dir / "summary.csv";
  const auto rows = std::filesystem::exists(summary_path) ? read_summary_csv(summary_path)
                                                          : summarize(records).rows;
  std::map<std::string, Series> by_backend;
  double size_lo = 1e300, size_hi = 0, time_lo = 1e300, time_hi = 0;
  for (const auto& row : rows) {
    auto& s = by_backend[row.backend];
    s.label = row.task + " " + row.backend;
    const double secs = row.mean_time_ns * 1e-9;
    s.points.emplace_back(static_cast<double>(row.size), secs);
    s.errors.push_back(row.ci2s_ns * 1e-9);
    size_lo = std::min(size_lo, static_cast<double>(row.size));
    size_hi = std::max(size_hi, static_cast<double>(row.size));
    time_lo = std::min(time_lo, std::max(secs - row.ci2s_ns * 1e-9, secs / 10));
    time_hi = std::max(time_hi, secs + row.ci2s_ns * 1e-9);
  }
  std::vector<Series> timing;
  for (auto& [_, s] : by_backend) timing.push_back(std::move(s));
  if (size_hi <= size_lo) size_hi = size_lo * 10;
  written.push_back(dir / "timing.svg");
  write_file(written.back(),
             render("Wall time per run", "problem size", "seconds (mean, 2 sigma)", timing,
                    Axis{size_lo, size_hi, true}, Axis{std::max(time_lo, 1e-6), std::max(time_hi, 1e-5), true}));
  return written;
}

}  // namespace simopt::bench
