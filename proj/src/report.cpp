#include "motionskill/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "csv_util.hpp"
#include "motionskill/error.hpp"

namespace motionskill {

void check_report(const nlohmann::json& report) {
  if (!report.is_object() || report.empty()) throw Error(ErrorKind::MalformedReport, "report is empty");
  for (const char* key : {"model", "scaler", "summary"}) {
    if (!report.contains(key)) throw Error(ErrorKind::MalformedReport, std::string("report lacks '") + key + "'");
  }
  for (const char* metric : {"accuracy", "f1", "ppv", "npv"}) {
    const auto& s = report["summary"];
    if (!s.contains(metric) || !s[metric].contains("mean") || !s[metric].contains("std") ||
        !s[metric]["mean"].is_number() || !s[metric]["std"].is_number()) {
      throw Error(ErrorKind::MalformedReport, std::string("report summary lacks ") + metric);
    }
  }
}

nlohmann::json read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedReport, path.string() + ": " + e.what());
  }
  check_report(j);
  return j;
}

namespace {

bool from_feature_pipeline(const nlohmann::json& r) {
  return !(r.contains("extra") && r["extra"].is_object() && r["extra"].contains("pipeline"));
}

// Display width in code points; the table only contains ASCII and '±'.
std::size_t width(std::string_view s) {
  return static_cast<std::size_t>(std::ranges::count_if(s, [](char c) { return (c & 0xC0) != 0x80; }));
}

}  // namespace

std::string render_table(std::span<const nlohmann::json> reports, int precision) {
  if (reports.empty()) throw Error(ErrorKind::MalformedReport, "no reports to render");
  for (const auto& r : reports) check_report(r);
  const bool pca_column = std::ranges::any_of(reports, from_feature_pipeline);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  if (pca_column) header.emplace_back("PCA");
  for (const char* h : {"Model", "Scaler", "Accuracy", "F1 score", "PPV", "NPV"}) header.emplace_back(h);
  rows.push_back(header);
  for (const auto& r : reports) {
    std::vector<std::string> row;
    if (pca_column) row.emplace_back(!from_feature_pipeline(r) ? "-" : (r.value("pca", false) ? "w PCA" : "w/o PCA"));
    row.push_back(r["model"].get<std::string>());
    row.push_back(r["scaler"].get<std::string>());
    for (const char* metric : {"accuracy", "f1", "ppv", "npv"}) {
      const auto& s = r["summary"][metric];
      row.push_back(detail::format_fixed(s["mean"].get<double>(), precision) + " ± " +
                    detail::format_fixed(s["std"].get<double>(), precision));
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line.append(widths[c] - width(row[c]) + 2, ' ');
    }
    out += line + '\n';
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
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

}  // namespace

std::string radar_svg(const FeatureMatrix& m) {
  if (m.rows.empty()) throw Error(ErrorKind::EmptyDataset, "no feature rows to plot");
  const auto cols = m.active_columns();
  const std::size_t k = cols.size();

  std::vector<double> lo(k, INFINITY), hi(k, -INFINITY);
  for (const auto& row : m.rows) {
    for (std::size_t c = 0; c < k; ++c) {
      lo[c] = std::min(lo[c], row[cols[c]]);
      hi[c] = std::max(hi[c], row[cols[c]]);
    }
  }
  std::map<Label, std::vector<double>> mean;
  std::map<Label, std::size_t> count;
  for (const auto& row : m.rows) {
    auto& acc = mean[row.label];
    acc.resize(k, 0.0);
    ++count[row.label];
    for (std::size_t c = 0; c < k; ++c) {
      acc[c] += hi[c] > lo[c] ? (row[cols[c]] - lo[c]) / (hi[c] - lo[c]) : 0.5;
    }
  }

  const double cx = 260, cy = 240, radius = 170;
  const auto at = [&](std::size_t c, double r) {
    const double a = -std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(k);
    return std::pair{cx + r * radius * std::cos(a), cy + r * radius * std::sin(a)};
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"500\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double ring : {0.25, 0.5, 0.75, 1.0}) {
    svg << "<polygon fill=\"none\" stroke=\"#ccc\" points=\"";
    for (std::size_t c = 0; c < k; ++c) {
      const auto [x, y] = at(c, ring);
      svg << (c ? " " : "") << num(x) << ',' << num(y);
    }
    svg << "\"/>\n";
  }
  for (std::size_t c = 0; c < k; ++c) {
    const auto [x, y] = at(c, 1.0);
    const auto [tx, ty] = at(c, 1.12);
    svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(cy) << "\" x2=\"" << num(x) << "\" y2=\"" << num(y)
        << "\" stroke=\"#999\"/>\n";
    svg << "<text x=\"" << num(tx) << "\" y=\"" << num(ty) << "\" text-anchor=\"middle\">"
        << escape(kFeatureNames[static_cast<std::size_t>(cols[c])]) << "</text>\n";
  }
  const std::map<Label, std::string> colour{{Label::Novice, "#d62728"}, {Label::Expert, "#1f77b4"}};
  double legend_y = 20;
  for (const auto& [label, sums] : mean) {
    svg << "<polygon fill=\"" << colour.at(label) << "\" fill-opacity=\"0.25\" stroke=\"" << colour.at(label)
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t c = 0; c < k; ++c) {
      const auto [x, y] = at(c, sums[c] / static_cast<double>(count[label]));
      svg << (c ? " " : "") << num(x) << ',' << num(y);
    }
    svg << "\"/>\n";
    svg << "<text x=\"470\" y=\"" << num(legend_y) << "\" fill=\"" << colour.at(label) << "\">" << to_string(label)
        << " (n=" << count[label] << ")</text>\n";
    legend_y += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string overlay_svg(std::span<const double> raw, std::span<const double> filtered, std::string_view title) {
  if (raw.empty() || raw.size() != filtered.size()) {
    throw Error(ErrorKind::LengthMismatch, "raw and filtered series must be non-empty and equally long");
  }
  double lo = INFINITY, hi = -INFINITY;
  for (auto s : {raw, filtered}) {
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const double w = 800, h = 300, pad = 40;
  const auto n = static_cast<double>(std::max<std::size_t>(raw.size() - 1, 1));
  const auto polyline = [&](std::span<const double> s, const char* colour, double stroke) {
    std::ostringstream out;
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << stroke << "\" points=\"";
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double x = pad + (w - 2 * pad) * static_cast<double>(i) / n;
      const double y = h - pad - (h - 2 * pad) * (s[i] - lo) / (hi - lo);
      out << (i ? " " : "") << num(x) << ',' << num(y);
    }
    out << "\"/>\n";
    return out.str();
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << pad << "\" y=\"20\">" << escape(title) << "</text>\n";
  svg << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad << "\" height=\"" << h - 2 * pad
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
  svg << polyline(raw, "#bbbbbb", 1.0);
  svg << polyline(filtered, "#1f77b4", 1.5);
  svg << "<text x=\"" << w - 200 << "\" y=\"20\" fill=\"#888\">raw</text>\n";
  svg << "<text x=\"" << w - 150 << "\" y=\"20\" fill=\"#1f77b4\">filtered</text>\n";
  svg << "<text x=\"" << pad << "\" y=\"" << h - 10 << "\">frame 0.." << raw.size() - 1 << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move report into " + path.string());
  }
}

}  // namespace motionskill
