#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "branchscope/error.hpp"
#include "branchscope/report.hpp"

namespace branchscope {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 64, kRight = 150, kTop = 40, kBottom = 56;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
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

std::optional<double> to_double(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t require_column(const csv::Table& table, const std::string& name) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw ConfigError("chart: unknown column '" + name + "'");
  return static_cast<std::size_t>(it - table.header.begin());
}

// Tick positions at a 1, 2 or 5 multiple of a power of ten.
std::vector<double> ticks(double lo, double hi, int target = 5) {
  if (hi <= lo) return {lo};
  double raw = (hi - lo) / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) out.push_back(std::abs(t) < 1e-12 ? 0.0 : t);
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return x1 == x0 ? kLeft + (kWidth - kLeft - kRight) / 2 : kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void axes(std::ostringstream& svg, const ChartSpec& spec, const Frame& f, bool numeric_x) {
  const double bottom = kHeight - kBottom, right = kWidth - kRight;
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(spec.title)
      << "</text>\n";
  svg << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom << "\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << bottom << "\"/>\n";
  svg << "</g>\n<g class=\"ticks\" font-size=\"11\">\n";
  for (double t : ticks(f.y0, f.y1)) {
    svg << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(f.py(t)) << "\" x2=\"" << kLeft << "\" y2=\"" << num(f.py(t))
        << "\" stroke=\"black\"/>";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(f.py(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
        << "</text>\n";
  }
  if (numeric_x) {
    for (double t : ticks(f.x0, f.x1, 8)) {
      if (t != std::round(t) && f.x1 - f.x0 >= 4) continue;
      svg << "<line x1=\"" << num(f.px(t)) << "\" y1=\"" << bottom << "\" x2=\"" << num(f.px(t)) << "\" y2=\""
          << bottom + 4 << "\" stroke=\"black\"/>";
      svg << "<text x=\"" << num(f.px(t)) << "\" y=\"" << bottom + 16 << "\" text-anchor=\"middle\">" << tick_label(t)
          << "</text>\n";
    }
  }
  svg << "</g>\n";
  const auto& xl = spec.x_label.empty() ? spec.x_column : spec.x_label;
  const auto& yl = spec.y_label.empty() ? spec.y_column : spec.y_label;
  svg << "<text x=\"" << num(kLeft + (right - kLeft) / 2) << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xl) << "</text>\n";
  svg << "<text transform=\"translate(16," << num(kTop + (bottom - kTop) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(yl) << "</text>\n";
}

void legend(std::ostringstream& svg, const std::vector<std::string>& series) {
  if (series.size() < 2 && (series.empty() || series.front().empty())) return;
  svg << "<g class=\"legend\" font-size=\"11\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    double y = kTop + 8 + 16 * static_cast<double>(i);
    svg << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << num(y - 8) << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[i % std::size(kPalette)] << "\"/>";
    svg << "<text x=\"" << kWidth - kRight + 28 << "\" y=\"" << num(y + 1) << "\">" << escape(series[i]) << "</text>\n";
  }
  svg << "</g>\n";
}

}  // namespace

std::string render_chart(const csv::Table& table, const ChartSpec& spec) {
  const std::size_t xc = require_column(table, spec.x_column);
  const std::size_t yc = require_column(table, spec.y_column);
  const std::optional<std::size_t> sc =
      spec.series_column.empty() ? std::nullopt : std::optional(require_column(table, spec.series_column));

  // Series in order of first appearance.
  std::vector<std::string> series;
  std::map<std::string, std::size_t> series_index;
  auto series_of = [&](const std::vector<std::string>& row) {
    std::string key = sc ? row.at(*sc) : std::string();
    auto [it, added] = series_index.emplace(key, series.size());
    if (added) series.push_back(key);
    return it->second;
  };

  double ylo = spec.y_min.value_or(0.0), yhi = spec.y_max.value_or(1.0);
  bool have_y = false;
  for (const auto& row : table.rows) {
    if (auto y = to_double(row.at(yc))) {
      if (!have_y && !spec.y_min) ylo = *y;
      if (!have_y && !spec.y_max) yhi = *y;
      have_y = true;
      if (!spec.y_min) ylo = std::min(ylo, *y);
      if (!spec.y_max) yhi = std::max(yhi, *y);
    }
  }
  if (!spec.y_min && ylo > 0.0) ylo = 0.0;
  if (yhi <= ylo) yhi = ylo + 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n";

  if (spec.kind == ChartSpec::Kind::Line) {
    std::set<double> xs;
    std::vector<std::map<double, std::optional<double>>> points;
    for (const auto& row : table.rows) {
      auto x = to_double(row.at(xc));
      if (!x) throw DataError("chart: non-numeric x value '" + row.at(xc) + "'");
      std::size_t s = series_of(row);
      if (points.size() <= s) points.resize(s + 1);
      xs.insert(*x);
      points[s][*x] = to_double(row.at(yc));
    }
    Frame f{xs.empty() ? 0.0 : *xs.begin(), xs.empty() ? 1.0 : *xs.rbegin(), ylo, yhi};
    axes(svg, spec, f, true);
    for (std::size_t s = 0; s < points.size(); ++s) {
      const char* color = kPalette[s % std::size(kPalette)];
      std::vector<std::vector<std::pair<double, double>>> runs(1);
      for (double x : xs) {
        auto it = points[s].find(x);
        if (it == points[s].end() || !it->second) {
          if (!runs.back().empty()) runs.emplace_back();
          continue;
        }
        runs.back().emplace_back(x, *it->second);
      }
      svg << "<g class=\"series\" data-series=\"" << escape(series[s]) << "\">\n";
      for (const auto& run : runs) {
        if (run.empty()) continue;
        if (run.size() > 1) {
          svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
          for (std::size_t i = 0; i < run.size(); ++i) {
            svg << (i ? " " : "") << num(f.px(run[i].first)) << ',' << num(f.py(run[i].second));
          }
          svg << "\"/>\n";
        }
        for (const auto& [x, y] : run) {
          svg << "<circle cx=\"" << num(f.px(x)) << "\" cy=\"" << num(f.py(y)) << "\" r=\"2.5\" fill=\"" << color
              << "\"/>\n";
        }
      }
      svg << "</g>\n";
    }
  } else {
    std::vector<std::string> categories;
    std::map<std::string, std::size_t> category_index;
    std::map<std::pair<std::size_t, std::size_t>, double> bars;
    for (const auto& row : table.rows) {
      auto [it, added] = category_index.emplace(row.at(xc), categories.size());
      if (added) categories.push_back(row.at(xc));
      std::size_t s = series_of(row);
      if (auto y = to_double(row.at(yc))) bars[{it->second, s}] = *y;
    }
    Frame f{0.0, 1.0, ylo, yhi};
    axes(svg, spec, f, false);
    const double plot_w = kWidth - kLeft - kRight;
    const double slot = categories.empty() ? plot_w : plot_w / static_cast<double>(categories.size());
    const double bar_w = slot * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
    svg << "<g class=\"bars\">\n";
    for (const auto& [key, y] : bars) {
      double x = kLeft + slot * static_cast<double>(key.first) + slot * 0.1 + bar_w * static_cast<double>(key.second);
      double top = f.py(std::max(y, ylo)), base = f.py(std::max(0.0, ylo));
      svg << "<rect x=\"" << num(x) << "\" y=\"" << num(std::min(top, base)) << "\" width=\"" << num(bar_w)
          << "\" height=\"" << num(std::abs(base - top)) << "\" fill=\"" << kPalette[key.second % std::size(kPalette)]
          << "\"/>\n";
    }
    svg << "</g>\n<g class=\"categories\" font-size=\"10\">\n";
    for (std::size_t c = 0; c < categories.size(); ++c) {
      double x = kLeft + slot * (static_cast<double>(c) + 0.5);
      svg << "<text x=\"" << num(x) << "\" y=\"" << kHeight - kBottom + 14 << "\" text-anchor=\"middle\">"
          << escape(categories[c]) << "</text>\n";
    }
    svg << "</g>\n";
  }
  legend(svg, series);
  svg << "</svg>\n";
  return svg.str();
}

void emit_chart(const std::filesystem::path& path, const csv::Table& table, const ChartSpec& spec) {
  auto svg = render_chart(table, spec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << svg;
}

}  // namespace branchscope
