#include "relprobe/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "relprobe/error.h"
#include "relprobe/text.h"

namespace relprobe {
namespace {

std::string Fixed2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string Cell(const TargetScore* score, double significance) {
  if (score == nullptr || score->n == 0) return "-";
  std::string s = Fixed2(score->dcor);
  if (score->p_value < significance) s += '*';
  return s;
}

std::string MarkdownEscape(std::string_view field) {
  std::string out;
  for (char c : field) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string XmlEscape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

void AppendRow(std::string& out, const std::vector<std::string>& cells,
               TableFormat format) {
  if (format == TableFormat::kCsv) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += CsvEscape(cells[i]);
    }
    out += '\n';
    return;
  }
  out += '|';
  for (const auto& cell : cells) out += ' ' + MarkdownEscape(cell) + " |";
  out += '\n';
}

}  // namespace

std::string CsvEscape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string EmitScoreTable(const std::vector<ScoreReport>& reports,
                           TableFormat format, double significance) {
  for (const auto& r : reports) {
    if (r.relation != reports.front().relation) {
      throw InvalidArgumentError("score table mixes relations '" +
                                 reports.front().relation + "' and '" +
                                 r.relation + "'");
    }
  }
  std::vector<std::string> header{"target"};
  for (const auto& r : reports) header.push_back(r.model + "/" + r.method);

  std::string out;
  AppendRow(out, header, format);
  if (format == TableFormat::kMarkdown) {
    out += '|';
    for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? "---|" : "---:|";
    out += '\n';
  }
  if (reports.empty()) return out;

  for (const auto& target : reports.front().targets) {
    std::vector<std::string> row{target};
    for (const auto& r : reports) {
      auto it = r.per_target.find(target);
      row.push_back(Cell(it == r.per_target.end() ? nullptr : &it->second,
                         significance));
    }
    AppendRow(out, row, format);
  }
  std::vector<std::string> conc{"CONC"};
  for (const auto& r : reports) conc.push_back(Cell(&r.conc, significance));
  AppendRow(out, conc, format);
  return out;
}

std::string RampColor(double t) {
  static constexpr int kLow[3] = {0xf7, 0xfb, 0xff};
  static constexpr int kHigh[3] = {0x08, 0x30, 0x6b};
  if (!(t >= 0.0)) t = 0.0;
  if (t > 1.0) t = 1.0;
  char buf[8];
  int rgb[3];
  for (int i = 0; i < 3; ++i) {
    rgb[i] = static_cast<int>(std::lround(kLow[i] + (kHigh[i] - kLow[i]) * t));
  }
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string RenderHeatmap(const AssociationMatrix& assoc,
                          const GoldMatrix& gold) {
  constexpr int kCellW = 48, kCellH = 18, kLeft = 200, kTop = 140;

  // Group rows by gold argmax.
  std::unordered_map<std::string, Eigen::Index> assoc_row;
  for (std::size_t i = 0; i < assoc.sources.size(); ++i) {
    assoc_row.emplace(assoc.sources[i], static_cast<Eigen::Index>(i));
  }
  const std::size_t groups = gold.targets.size() + 1;
  std::vector<std::vector<Eigen::Index>> grouped(groups);
  std::vector<bool> placed(assoc.sources.size(), false);
  for (Eigen::Index g = 0; g < gold.values.rows(); ++g) {
    auto it = assoc_row.find(gold.sources[std::size_t(g)]);
    if (it == assoc_row.end() || placed[std::size_t(it->second)]) continue;
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < gold.values.cols(); ++t) {
      if (gold.values(g, t) > gold.values(g, best)) best = t;
    }
    grouped[std::size_t(best)].push_back(it->second);
    placed[std::size_t(it->second)] = true;
  }
  for (std::size_t i = 0; i < assoc.sources.size(); ++i) {
    if (!placed[i]) grouped.back().push_back(static_cast<Eigen::Index>(i));
  }

  const bool has_missing = assoc.missing.size() == assoc.values.size();
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < assoc.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < assoc.values.cols(); ++j) {
      if (has_missing && assoc.missing(i, j)) continue;
      const double v = assoc.values(i, j);
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
  }
  const double range = hi - lo;

  const int rows = static_cast<int>(assoc.sources.size());
  const int cols = static_cast<int>(assoc.targets.size());
  const int width = kLeft + cols * kCellW + 20;
  const int height = kTop + rows * kCellH + 20;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\" font-family=\"sans-serif\" "
         "font-size=\"11\">\n";
  svg += "<title>" + XmlEscape(assoc.model + " / " + assoc.method) +
         "</title>\n";
  svg += "<desc>min " + FormatDouble(any ? lo : 0.0) + " max " +
         FormatDouble(any ? hi : 0.0) + "</desc>\n";

  for (int j = 0; j < cols; ++j) {
    const int x = kLeft + j * kCellW + kCellW / 2;
    svg += "<text class=\"target-label\" x=\"" + std::to_string(x) +
           "\" y=\"" + std::to_string(kTop - 6) + "\" transform=\"rotate(-60 " +
           std::to_string(x) + " " + std::to_string(kTop - 6) + ")\">" +
           XmlEscape(assoc.targets[std::size_t(j)]) + "</text>\n";
  }

  int y_index = 0;
  bool first_group = true;
  for (std::size_t g = 0; g < groups; ++g) {
    if (grouped[g].empty()) continue;
    if (!first_group) {
      const int y = kTop + y_index * kCellH;
      svg += "<line class=\"group-sep\" x1=\"0\" y1=\"" + std::to_string(y) +
             "\" x2=\"" + std::to_string(kLeft + cols * kCellW) + "\" y2=\"" +
             std::to_string(y) + "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    }
    first_group = false;
    const std::string group_name =
        g < gold.targets.size() ? gold.targets[g] : std::string();
    for (Eigen::Index row : grouped[g]) {
      const int y = kTop + y_index * kCellH;
      const std::string& source = assoc.sources[std::size_t(row)];
      svg += "<text class=\"source-label\" x=\"" + std::to_string(kLeft - 6) +
             "\" y=\"" + std::to_string(y + kCellH - 5) +
             "\" text-anchor=\"end\" data-group=\"" + XmlEscape(group_name) +
             "\">" + XmlEscape(source) + "</text>\n";
      for (int j = 0; j < cols; ++j) {
        const bool missing = has_missing && assoc.missing(row, j);
        const double v = assoc.values(row, j);
        const double t = range > 0.0 ? (v - lo) / range : 0.0;
        svg += "<rect class=\"cell\" x=\"" +
               std::to_string(kLeft + j * kCellW) + "\" y=\"" +
               std::to_string(y) + "\" width=\"" + std::to_string(kCellW) +
               "\" height=\"" + std::to_string(kCellH) + "\" fill=\"" +
               (missing ? std::string("#cccccc") : RampColor(t)) +
               "\" data-source=\"" + XmlEscape(source) + "\" data-target=\"" +
               XmlEscape(assoc.targets[std::size_t(j)]) + "\" data-group=\"" +
               XmlEscape(group_name) + "\" data-value=\"" +
               (missing ? std::string("missing") : FormatDouble(v)) +
               "\"/>\n";
      }
      ++y_index;
    }
  }
  svg += "</svg>\n";
  return svg;
}

void EmitHeatmap(const AssociationMatrix& assoc, const GoldMatrix& gold,
                 const std::filesystem::path& path) {
  const std::string svg = RenderHeatmap(assoc, gold);
  std::ofstream out(path, std::ios::binary);
  out << svg;
  if (!out) throw DataError("cannot write heatmap " + path.string());
}

std::string AssociationToCsv(const AssociationMatrix& assoc) {
  std::string out = "source";
  for (const auto& t : assoc.targets) out += "," + CsvEscape(t);
  out += '\n';
  const bool has_missing = assoc.missing.size() == assoc.values.size();
  for (std::size_t i = 0; i < assoc.sources.size(); ++i) {
    out += CsvEscape(assoc.sources[i]);
    for (std::size_t j = 0; j < assoc.targets.size(); ++j) {
      out += ',';
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      if (!(has_missing && assoc.missing(r, c))) {
        out += FormatDouble(assoc.values(r, c));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace relprobe
