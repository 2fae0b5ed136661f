#include "relprobe/report.h"

#include <algorithm>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "relprobe/classifiers.h"
#include "relprobe/dataset.h"
#include "relprobe/error.h"
#include "relprobe/random.h"
#include "test_util.h"

namespace relprobe {
namespace {

namespace pt = boost::property_tree;
using testing::ReadText;
using testing::TestDir;

TargetScore Score(double dcor, double p, std::size_t n = 10) {
  TargetScore s;
  s.dcor = dcor;
  s.p_value = p;
  s.n = n;
  return s;
}

ScoreReport Report(std::string model, std::string method,
                   std::map<std::string, TargetScore> per_target,
                   TargetScore conc) {
  ScoreReport r;
  r.model = std::move(model);
  r.method = std::move(method);
  r.relation = "room";
  r.targets = {"bathroom", "kitchen"};
  r.per_target = std::move(per_target);
  r.conc = conc;
  return r;
}

std::vector<ScoreReport> GoldenReports() {
  return {
      Report("glove", "cos",
             {{"bathroom", Score(0.384, 1e-4)}, {"kitchen", Score(0.371, 0.02)}},
             Score(0.274, 5e-4)),
      Report("glove", "dist", {{"bathroom", Score(0.126, 0.3)}},
             Score(0.5, 0.009)),
      Report("bert,large", "cos",
             {{"bathroom", Score(1.0, 1e-4)}, {"kitchen", Score(0.004, 0.5)}},
             Score(0.999, 0.01)),
      Report("bert,large", "dist",
             {{"bathroom", Score(0.456, 0.0099)}, {"kitchen", Score(0.557, 1.0)}},
             Score(0.2, 0.2)),
  };
}

TEST(EmitScoreTable, MatchesGoldenCsv) {
  EXPECT_EQ(EmitScoreTable(GoldenReports(), TableFormat::kCsv),
            ReadText(TestDir() / "golden" / "score_table.csv"));
}

TEST(EmitScoreTable, MatchesGoldenMarkdown) {
  EXPECT_EQ(EmitScoreTable(GoldenReports(), TableFormat::kMarkdown),
            ReadText(TestDir() / "golden" / "score_table.md"));
}

TEST(EmitScoreTable, PerfectScoresAreStarred) {
  const auto r = Report("m", "cos",
                        {{"bathroom", Score(1.0, 1e-4)}, {"kitchen", Score(1.0, 1e-4)}},
                        Score(1.0, 1e-4));
  EXPECT_EQ(EmitScoreTable({r}, TableFormat::kCsv),
            "target,m/cos\nbathroom,1.00*\nkitchen,1.00*\nCONC,1.00*\n");
}

TEST(EmitScoreTable, EmptyReportListIsHeaderOnly) {
  EXPECT_EQ(EmitScoreTable({}, TableFormat::kCsv), "target\n");
  EXPECT_EQ(EmitScoreTable({}, TableFormat::kMarkdown), "| target |\n|---|\n");
}

TEST(EmitScoreTable, UnscoredReportPrintsDashes) {
  ScoreReport absent;
  absent.model = "gpt2";
  absent.method = "p-t";
  absent.relation = "room";
  absent.targets = {"bathroom", "kitchen"};
  EXPECT_EQ(EmitScoreTable({absent}, TableFormat::kCsv),
            "target,gpt2/p-t\nbathroom,-\nkitchen,-\nCONC,-\n");
}

TEST(EmitScoreTable, CustomSignificance) {
  const auto r = Report("m", "cos", {}, Score(0.4, 0.05));
  EXPECT_NE(EmitScoreTable({r}, TableFormat::kCsv, 0.1).find("0.40*"),
            std::string::npos);
  EXPECT_NE(EmitScoreTable({r}, TableFormat::kCsv).find("0.40\n"),
            std::string::npos);
}

TEST(EmitScoreTable, MixedRelationsRejected) {
  auto reports = GoldenReports();
  reports[1].relation = "verb";
  EXPECT_THROW(EmitScoreTable(reports, TableFormat::kCsv), InvalidArgumentError);
}

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rows.back().push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      rows.back().push_back(std::move(field));
      field.clear();
      rows.emplace_back();
    } else {
      field += c;
    }
  }
  rows.pop_back();
  return rows;
}

TEST(EmitScoreTable, CsvValuesRoundTrip) {
  Rng rng(4);
  std::vector<ScoreReport> reports;
  for (int k = 0; k < 3; ++k) {
    reports.push_back(Report("m" + std::to_string(k), "cos",
                             {{"bathroom", Score(rng.Uniform(), rng.Uniform())},
                              {"kitchen", Score(rng.Uniform(), rng.Uniform())}},
                             Score(rng.Uniform(), rng.Uniform())));
  }
  const auto rows = ParseCsv(EmitScoreTable(reports, TableFormat::kCsv));
  ASSERT_EQ(rows.size(), 4u);
  const std::vector<std::string> row_names{"bathroom", "kitchen", "CONC"};
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(rows[r + 1][0], row_names[r]);
    for (std::size_t c = 0; c < reports.size(); ++c) {
      const TargetScore& s = r < 2 ? reports[c].per_target.at(row_names[r])
                                   : reports[c].conc;
      std::string cell = rows[r + 1][c + 1];
      const bool star = !cell.empty() && cell.back() == '*';
      if (star) cell.pop_back();
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.2f", s.dcor);
      EXPECT_EQ(std::stod(cell), std::stod(buf));
      EXPECT_EQ(star, s.p_value < 0.01);
    }
  }
}

TEST(CsvEscape, QuotesWhenNeeded) {
  EXPECT_EQ(CsvEscape("plain"), "plain");
  EXPECT_EQ(CsvEscape("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvEscape("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(RampColor, Endpoints) {
  EXPECT_EQ(RampColor(0.0), "#f7fbff");
  EXPECT_EQ(RampColor(1.0), "#08306b");
  EXPECT_EQ(RampColor(-3), "#f7fbff");
  EXPECT_EQ(RampColor(7), "#08306b");
}

struct Cell {
  std::string source, target, group, fill, value;
};

std::vector<Cell> ParseCells(const std::string& svg) {
  std::istringstream in(svg);
  pt::ptree tree;
  pt::read_xml(in, tree);
  std::vector<Cell> cells;
  for (const auto& [name, node] : tree.get_child("svg")) {
    if (name != "rect") continue;
    const auto& a = node.get_child("<xmlattr>");
    if (a.get<std::string>("class") != "cell") continue;
    cells.push_back({a.get<std::string>("data-source"),
                     a.get<std::string>("data-target"),
                     a.get<std::string>("data-group"), a.get<std::string>("fill"),
                     a.get<std::string>("data-value")});
  }
  return cells;
}

TEST(RenderHeatmap, SingleCellIsValidXml) {
  AssociationMatrix m = MakeAssociationMatrix({"cup & saucer"}, {"kitchen"}, "cos", "m");
  m.values(0, 0) = 0.5;
  GoldMatrix gold{{"cup & saucer"}, {"kitchen"}, Eigen::MatrixXd::Ones(1, 1)};
  const auto cells = ParseCells(RenderHeatmap(m, gold));
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].source, "cup & saucer");
  EXPECT_EQ(cells[0].fill, "#f7fbff");
}

TEST(RenderHeatmap, IdentityDiagonalIsDarkest) {
  std::vector<std::string> names{"a", "b", "c", "d", "e"};
  AssociationMatrix m = MakeAssociationMatrix(names, names, "cos", "m");
  m.values = Eigen::MatrixXd::Identity(5, 5);
  GoldMatrix gold{names, names, Eigen::MatrixXd::Identity(5, 5)};
  const auto cells = ParseCells(RenderHeatmap(m, gold));
  ASSERT_EQ(cells.size(), 25u);
  for (const auto& c : cells) {
    EXPECT_EQ(c.fill, c.source == c.target ? "#08306b" : "#f7fbff");
  }
}

TEST(RenderHeatmap, MissingCellsAreGrey) {
  AssociationMatrix m = MakeAssociationMatrix({"x", "y"}, {"t"}, "m-s", "m");
  m.values << 1.0, 0.0;
  m.missing(1, 0) = true;
  GoldMatrix gold{{"x", "y"}, {"t"}, Eigen::MatrixXd::Ones(2, 1)};
  const auto cells = ParseCells(RenderHeatmap(m, gold));
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[1].fill, "#cccccc");
  EXPECT_EQ(cells[1].value, "missing");
}

TEST(RenderHeatmap, RoomRowsGroupedByAssignedLabel) {
  const auto ds = LoadDataset(testing::DataDir() / "room.json");
  const auto gold = ToGoldMatrix(ds);
  AssociationMatrix m = MakeAssociationMatrix(gold.sources, gold.targets, "cos", "m");
  Rng rng(12);
  for (Eigen::Index i = 0; i < m.values.size(); ++i) m.values(i) = rng.Uniform();

  const std::string svg = RenderHeatmap(m, gold);
  EXPECT_EQ(svg, RenderHeatmap(m, gold));
  const auto cells = ParseCells(svg);
  ASSERT_EQ(cells.size(), gold.sources.size() * gold.targets.size());

  const auto labels = AssignLabels(ds);
  const auto sources = ds.Sources();
  std::map<std::string, std::string> expected_group;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    expected_group[sources[i]] = ds.targets[labels[i]];
  }
  std::vector<std::string> group_sequence;
  for (std::size_t k = 0; k < cells.size(); k += gold.targets.size()) {
    EXPECT_EQ(cells[k].group, expected_group.at(cells[k].source)) << cells[k].source;
    if (group_sequence.empty() || group_sequence.back() != cells[k].group) {
      group_sequence.push_back(cells[k].group);
    }
  }
  // Each group is one contiguous block, in target order.
  std::vector<std::string> distinct;
  for (const auto& t : ds.targets) {
    if (std::find(group_sequence.begin(), group_sequence.end(), t) !=
        group_sequence.end()) {
      distinct.push_back(t);
    }
  }
  EXPECT_EQ(group_sequence, distinct);
  std::size_t separators = 0;
  for (std::size_t pos = 0; (pos = svg.find("class=\"group-sep\"", pos)) !=
                            std::string::npos;
       ++pos) {
    ++separators;
  }
  EXPECT_EQ(separators, distinct.size() - 1);
}

TEST(EmitHeatmap, WritesFileAndReportsIoFailure) {
  testing::TempDir dir;
  AssociationMatrix m = MakeAssociationMatrix({"x"}, {"t"}, "cos", "m");
  GoldMatrix gold{{"x"}, {"t"}, Eigen::MatrixXd::Ones(1, 1)};
  EmitHeatmap(m, gold, dir / "h.svg");
  EXPECT_EQ(ReadText(dir / "h.svg"), RenderHeatmap(m, gold));
  EXPECT_THROW(EmitHeatmap(m, gold, dir / "no" / "such" / "h.svg"), DataError);
}

TEST(AssociationToCsv, ShortestRoundTripValues) {
  AssociationMatrix m = MakeAssociationMatrix({"x", "living, room"}, {"a", "b"}, "cos", "m");
  m.values << 0.1, 1.0 / 3.0, -2, 0;
  m.missing(1, 1) = true;
  const auto rows = ParseCsv(AssociationToCsv(m));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"source", "a", "b"}));
  EXPECT_EQ(rows[2][0], "living, room");
  EXPECT_EQ(std::stod(rows[1][2]), 1.0 / 3.0);
  EXPECT_EQ(rows[2][2], "");
}

}  // namespace
}  // namespace relprobe
