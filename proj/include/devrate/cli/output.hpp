#pragma once

#include "devrate/error.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace devrate::cli {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::io, "sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

/// %.12g; infinities and NaN as inf, -inf, nan.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  /// Cells are numbers or preformatted text.
  struct Cell {
    std::string text;
    Cell(double v) : text(format_number(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(std::string s) : text(std::move(s)) {}
    Cell(const char* s) : text(s) {}
  };

  void add(std::vector<Cell> row) {
    if (row.size() != header_.size()) fail(ErrorKind::io, "table row width does not match the header");
    std::vector<std::string> r;
    for (Cell& c : row) r.push_back(std::move(c.text));
    rows_.push_back(std::move(r));
  }

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
};

namespace detail {

inline std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
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

inline std::vector<double> ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

}  // namespace detail

/// Static line plot. Non-finite points break the line; log axes drop non-positive values.
inline std::string svg_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  const double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 55;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (usable(s.x[i], s.y[i])) {
        xlo = std::min(xlo, tx(s.x[i]));
        xhi = std::max(xhi, tx(s.x[i]));
        ylo = std::min(ylo, ty(s.y[i]));
        yhi = std::max(yhi, ty(s.y[i]));
      }
  if (!(xlo <= xhi)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (xhi - xlo < 1e-12) xlo -= 0.5, xhi += 0.5;
  if (yhi - ylo < 1e-12 * std::max(1.0, std::abs(yhi))) ylo -= 0.5, yhi += 0.5;
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double v) { return left + (v - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double v) { return top + (yhi - v) / (yhi - ylo) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  using detail::fixed;
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(W) + "\" height=\"" + fixed(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + detail::escape_xml(spec.title) + "</text>\n";
  o += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) + "\" height=\"" + fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [](double v, bool log) {
    char buf[32];
    if (log) std::snprintf(buf, sizeof buf, "1e%g", v);
    else std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  auto axis_ticks = [](double lo, double hi, bool log) {
    std::vector<double> t = detail::ticks(lo, hi, 6);
    if (!log) return t;
    std::vector<double> decades;
    for (double v = std::ceil(lo); v <= hi; v += 1.0) decades.push_back(v);
    return decades.size() >= 2 ? decades : t;
  };
  for (double t : axis_ticks(xlo, xhi, spec.log_x)) {
    o += "<line x1=\"" + fixed(px(t)) + "\" y1=\"" + fixed(top + ph) + "\" x2=\"" + fixed(px(t)) + "\" y2=\"" + fixed(top + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fixed(px(t)) + "\" y=\"" + fixed(top + ph + 18) + "\" text-anchor=\"middle\">" + label(t, spec.log_x) + "</text>\n";
  }
  for (double t : axis_ticks(ylo, yhi, spec.log_y)) {
    o += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(py(t)) + "\" x2=\"" + fixed(left) + "\" y2=\"" + fixed(py(t)) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(py(t) + 4) + "\" text-anchor=\"end\">" + label(t, spec.log_y) + "</text>\n";
  }
  o += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(H - 12) + "\" text-anchor=\"middle\">" + detail::escape_xml(spec.xlabel) + "</text>\n";
  o += "<text transform=\"translate(16," + fixed(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" + detail::escape_xml(spec.ylabel) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const std::string color = colors[k % 7];
    std::string path;
    bool pen = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) {
        pen = false;
        continue;
      }
      path += (pen ? " L" : " M") + fixed(px(tx(s.x[i]))) + " " + fixed(py(ty(s.y[i])));
      pen = true;
      if (s.markers)
        o += "<circle cx=\"" + fixed(px(tx(s.x[i]))) + "\" cy=\"" + fixed(py(ty(s.y[i]))) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    if (!path.empty()) o += "<path d=\"" + path.substr(1) + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(k);
    o += "<line x1=\"" + fixed(W - right + 10) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" + fixed(W - right + 30) + "\" y2=\"" + fixed(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fixed(W - right + 35) + "\" y=\"" + fixed(ly) + "\">" + detail::escape_xml(s.name) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

/// Files of one run; each is written once and recorded with its hash.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& directory() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    for (const auto& e : entries_)
      if (e.name == name) fail(ErrorKind::io, "output '" + name + "' written twice");
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
    out << content;
    out.close();
    if (!out) fail(ErrorKind::io, "failed writing '" + path.string() + "'");
    entries_.push_back({name, sha256_hex(content), content.size()});
  }

  void csv(const std::string& name, const Table& t) { write(name, t.csv()); }

  nlohmann::ordered_json manifest() const {
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& e : entries_) files.push_back({{"file", e.name}, {"sha256", e.hash}, {"bytes", e.bytes}});
    return files;
  }

 private:
  struct Entry {
    std::string name;
    std::string hash;
    std::size_t bytes;
  };
  std::filesystem::path dir_;
  std::vector<Entry> entries_;
};

}  // namespace devrate::cli
