// Tabular and plot output: CSV with 17 significant digits, JSON with stable
// key order, and a self-contained SVG line plot.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace squeeze::report {

using Json = nlohmann::ordered_json;
using Cell = std::variant<std::int64_t, double, bool, std::string>;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::string>) return v;
        else return std::to_string(v);
      },
      c);
}

/// JSON numbers cannot hold nan/inf; those become strings.
inline Json to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline Json cell_to_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return to_json(v);
        else return v;
      },
      c);
}

class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<Cell> row) { rows_.push_back(std::move(row)); }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(format_cell(row[i]));
      os << '\n';
    }
  }

  Json to_json() const {
    Json arr = Json::array();
    for (const auto& row : rows_) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < row.size() && i < header_.size(); ++i) obj[header_[i]] = cell_to_json(row[i]);
      arr.push_back(std::move(obj));
    }
    return arr;
  }

 private:
  static std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> horizontal_lines;  ///< dashed reference lines
  bool timestamp = true;
  int width = 640;
  int height = 420;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline void write_svg_plot(std::ostream& os, const std::vector<Series>& series, const PlotOptions& opt) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  for (double h : opt.horizontal_lines) { ymin = std::min(ymin, h); ymax = std::max(ymax, h); }
  if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (opt.timestamp) os << "<!-- generated " << utc_timestamp() << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << opt.title
     << "</text>\n";
  os << "<rect x=\"" << svg_number(left) << "\" y=\"" << svg_number(top) << "\" width=\"" << svg_number(pw)
     << "\" height=\"" << svg_number(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0, yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << svg_number(sx(xv)) << "\" y=\"" << svg_number(top + ph + 18)
       << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    os << "<text x=\"" << svg_number(left - 6) << "\" y=\"" << svg_number(sy(yv) + 4)
       << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  os << "<text x=\"" << svg_number(left + pw / 2) << "\" y=\"" << opt.height - 12 << "\" text-anchor=\"middle\">"
     << opt.x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << svg_number(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << svg_number(top + ph / 2) << ")\">" << opt.y_label << "</text>\n";
  for (double h : opt.horizontal_lines) {
    os << "<line x1=\"" << svg_number(left) << "\" y1=\"" << svg_number(sy(h)) << "\" x2=\"" << svg_number(left + pw)
       << "\" y2=\"" << svg_number(sy(h)) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  int legend = 0;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      os << (i ? " " : "") << svg_number(sx(s.x[i])) << ',' << svg_number(sy(s.y[i]));
    }
    os << "\"/>\n";
    const double ly = top + 16 + 16 * legend++;
    os << "<line x1=\"" << svg_number(left + pw - 150) << "\" y1=\"" << svg_number(ly) << "\" x2=\""
       << svg_number(left + pw - 125) << "\" y2=\"" << svg_number(ly) << "\" stroke=\"" << s.color
       << "\" stroke-width=\"1.8\"/>\n";
    os << "<text x=\"" << svg_number(left + pw - 120) << "\" y=\"" << svg_number(ly + 4) << "\">" << s.label
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace squeeze::report
