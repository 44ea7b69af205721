#include "ivgan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ivgan {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 20, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string render_plot(const std::string& csv_text, const std::vector<std::string>& columns) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line);

  std::vector<std::size_t> picked;
  for (const auto& c : columns) {
    auto it = std::find(header.begin(), header.end(), c);
    if (it == header.end()) {
      std::string avail;
      for (std::size_t i = 0; i < header.size(); ++i) avail += (i ? ", " : "") + header[i];
      throw std::runtime_error("column '" + c + "' not in CSV; available columns: " + avail);
    }
    picked.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    std::vector<double> row;
    for (const auto& cell : cells) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    row.resize(header.size(), std::numeric_limits<double>::quiet_NaN());
    rows.push_back(std::move(row));
  }

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& r : rows) {
    if (!std::isfinite(r[0])) continue;
    x0 = std::min(x0, r[0]);
    x1 = std::max(x1, r[0]);
    for (auto c : picked) {
      if (!std::isfinite(r[c])) continue;
      y0 = std::min(y0, r[c]);
      y1 = std::max(y1, r[c]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x0 == x1) x0 -= 0.5, x1 += 0.5;
  if (y0 == y1) y0 -= 0.5, y1 += 0.5;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
    svg << "<text x=\"" << num(sx(fx)) << "\" y=\"" << num(kTop + ph + 16)
        << "\" text-anchor=\"middle\">" << label(fx) << "</text>\n";
    svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(fy) + 4)
        << "\" text-anchor=\"end\">" << label(fy) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\">" << header[0] << "</text>\n";

  for (std::size_t k = 0; k < picked.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& r : rows) {
      if (!std::isfinite(r[0]) || !std::isfinite(r[picked[k]])) continue;
      svg << (first ? "" : " ") << num(sx(r[0])) << "," << num(sy(r[picked[k]]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = kTop + 14 + 16 * static_cast<double>(k);
    svg << "<line x1=\"" << num(kLeft + pw + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << num(kLeft + pw + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(kLeft + pw + 36) << "\" y=\"" << num(ly) << "\">" << columns[k]
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::filesystem::path& csv, const std::vector<std::string>& columns,
               const std::filesystem::path& out) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + csv.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string svg = render_plot(buf.str(), columns);
  std::ofstream os(out, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + out.string());
  os << svg;
}

}  // namespace ivgan
