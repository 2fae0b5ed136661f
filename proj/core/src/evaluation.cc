#include "relprobe/evaluation.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "relprobe/classifiers.h"
#include "relprobe/error.h"
#include "relprobe/random.h"
#include "relprobe/text.h"

namespace relprobe {
namespace {

constexpr int kPermutationBatch = 1000;

template <typename Names>
std::unordered_map<std::string, Eigen::Index> IndexOf(const Names& names) {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < names.size(); ++i) {
    index.emplace(names[i], static_cast<Eigen::Index>(i));
  }
  return index;
}

std::vector<double> Column(const Eigen::MatrixXd& m, Eigen::Index col) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[std::size_t(i)] = m(i, col);
  return out;
}

TargetScore Score(std::span<const double> x, std::span<const double> y,
                  int permutations, std::uint64_t seed) {
  TargetScore s;
  const Dependence d = DistanceCorrelation(x, y);
  s.dcor = d.value;
  s.degenerate = d.degenerate;
  s.n = x.size();
  s.p_value = PermutationPValue(x, y, permutations, seed);
  return s;
}

}  // namespace

double PermutationPValue(std::span<const double> x, std::span<const double> y,
                         int n_perm, std::uint64_t seed) {
  const DistanceCorrelationPlan plan(x, y);
  if (n_perm <= 0) return 1.0;
  const double observed = plan.Dcor().value;

  std::vector<std::size_t> perm(x.size());
  long long at_least = 0;
  for (int start = 0, batch = 0; start < n_perm;
       start += kPermutationBatch, ++batch) {
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(batch)));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const int count = std::min(kPermutationBatch, n_perm - start);
    for (int k = 0; k < count; ++k) {
      rng.Shuffle(std::span<std::size_t>(perm));
      if (plan.Dcor(perm).value >= observed) ++at_least;
    }
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(n_perm + 1);
}

AlignedMatrices Align(const AssociationMatrix& assoc, const GoldMatrix& gold,
                      bool allow_drop) {
  if (assoc.values.rows() != static_cast<Eigen::Index>(assoc.sources.size()) ||
      assoc.values.cols() != static_cast<Eigen::Index>(assoc.targets.size())) {
    throw InvalidArgumentError("association matrix shape does not match its "
                               "labels");
  }
  const auto assoc_row = IndexOf(assoc.sources);
  const auto assoc_col = IndexOf(assoc.targets);
  const bool has_missing = assoc.missing.size() == assoc.values.size();

  AlignedMatrices out;
  std::vector<Eigen::Index> cols_a, cols_g;
  for (std::size_t t = 0; t < gold.targets.size(); ++t) {
    if (auto it = assoc_col.find(gold.targets[t]); it != assoc_col.end()) {
      out.targets.push_back(gold.targets[t]);
      cols_a.push_back(it->second);
      cols_g.push_back(static_cast<Eigen::Index>(t));
    }
  }
  std::vector<Eigen::Index> rows_a, rows_g;
  std::size_t rows_with_missing = 0;
  for (std::size_t s = 0; s < gold.sources.size(); ++s) {
    auto it = assoc_row.find(gold.sources[s]);
    if (it == assoc_row.end()) continue;
    bool missing = false;
    if (has_missing) {
      for (Eigen::Index c : cols_a) missing = missing || assoc.missing(it->second, c);
    }
    if (missing) {
      ++rows_with_missing;
      out.dropped_sources.push_back(gold.sources[s]);
      continue;
    }
    out.sources.push_back(gold.sources[s]);
    rows_a.push_back(it->second);
    rows_g.push_back(static_cast<Eigen::Index>(s));
  }
  if (rows_with_missing > 0 && !allow_drop) {
    throw DataError(std::to_string(rows_with_missing) +
                    " source(s) have missing association cells (first: '" +
                    out.dropped_sources.front() +
                    "'); rerun with --allow-drop to prune them");
  }
  const auto r = static_cast<Eigen::Index>(rows_a.size());
  const auto c = static_cast<Eigen::Index>(cols_a.size());
  out.assoc.resize(r, c);
  out.gold.resize(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      out.assoc(i, j) = assoc.values(rows_a[std::size_t(i)], cols_a[std::size_t(j)]);
      out.gold(i, j) = gold.values(rows_g[std::size_t(i)], cols_g[std::size_t(j)]);
    }
  }
  return out;
}

std::vector<Dependence> ScorePerTarget(const Eigen::MatrixXd& assoc,
                                       const Eigen::MatrixXd& gold) {
  if (assoc.rows() != gold.rows() || assoc.cols() != gold.cols()) {
    throw InvalidArgumentError("association and gold shapes differ");
  }
  std::vector<Dependence> out;
  for (Eigen::Index t = 0; t < assoc.cols(); ++t) {
    out.push_back(DistanceCorrelation(Column(assoc, t), Column(gold, t)));
  }
  return out;
}

Eigen::VectorXd FlattenColumnMajor(const Eigen::MatrixXd& m) {
  return m.reshaped();  // Eigen's default storage is column-major
}

Dependence ScoreConc(const Eigen::MatrixXd& assoc,
                     const Eigen::MatrixXd& gold) {
  if (assoc.rows() != gold.rows() || assoc.cols() != gold.cols()) {
    throw InvalidArgumentError("association and gold shapes differ");
  }
  const Eigen::VectorXd a = FlattenColumnMajor(assoc);
  const Eigen::VectorXd g = FlattenColumnMajor(gold);
  return DistanceCorrelation(std::span<const double>(a.data(), std::size_t(a.size())),
                             std::span<const double>(g.data(), std::size_t(g.size())));
}

ScoreReport Evaluate(const AssociationMatrix& assoc,
                     const RelationDataset& dataset,
                     const EvaluationOptions& options) {
  const GoldMatrix gold = ToGoldMatrix(dataset);
  const AlignedMatrices aligned = Align(assoc, gold, options.allow_drop);
  if (aligned.sources.size() < 2) {
    throw DataError("fewer than two sources left to score " + assoc.method);
  }
  ScoreReport report;
  report.model = assoc.model;
  report.method = assoc.method;
  report.relation = dataset.relation;
  report.targets = dataset.targets;
  report.dropped_sources = aligned.dropped_sources;

  const auto target_index = IndexOf(dataset.targets);
  for (std::size_t j = 0; j < aligned.targets.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const auto a = Column(aligned.assoc, col);
    const auto g = Column(aligned.gold, col);
    const auto t = static_cast<std::uint64_t>(target_index.at(aligned.targets[j]));
    TargetScore s = Score(a, g, options.permutations,
                          DeriveSeed(options.seed, t));
    if (s.degenerate) report.degenerate_flags.push_back(aligned.targets[j]);
    report.per_target.emplace(aligned.targets[j], s);
  }
  const Eigen::VectorXd a = FlattenColumnMajor(aligned.assoc);
  const Eigen::VectorXd g = FlattenColumnMajor(aligned.gold);
  report.conc = Score(std::span<const double>(a.data(), std::size_t(a.size())),
                      std::span<const double>(g.data(), std::size_t(g.size())),
                      options.permutations,
                      DeriveSeed(options.seed, dataset.targets.size()));
  if (report.conc.degenerate) report.degenerate_flags.push_back("CONC");
  return report;
}

std::map<std::string, double> ParseFrequencies(std::string_view text) {
  std::map<std::string, double> freq;
  std::size_t line_number = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = StripCr(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_number;
    if (Trim(line).empty() || Trim(line).front() == '#') continue;
    const std::string where = "line " + std::to_string(line_number) + ": ";
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError(where + "expected `phrase<TAB>value`");
    }
    const std::string phrase(Trim(line.substr(0, tab)));
    const std::string_view field = Trim(line.substr(tab + 1));
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (phrase.empty() || ec != std::errc() ||
        ptr != field.data() + field.size() || !std::isfinite(value)) {
      throw DataError(where + "malformed frequency entry");
    }
    if (!freq.emplace(phrase, value).second) {
      throw DataError(where + "duplicate phrase '" + phrase + "'");
    }
  }
  return freq;
}

std::map<std::string, double> LoadFrequencies(
    const std::filesystem::path& path) {
  try {
    return ParseFrequencies(ReadFile(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

ScoreReport FrequencyCorrelation(const AssociationMatrix& assoc,
                                 const std::map<std::string, double>& freq,
                                 const RelationDataset& dataset,
                                 const EvaluationOptions& options) {
  const auto sources = dataset.Sources();
  const auto labels = AssignLabels(dataset);
  std::unordered_map<std::string, std::size_t> label_of;
  for (std::size_t i = 0; i < sources.size(); ++i) label_of[sources[i]] = labels[i];

  ScoreReport report;
  report.model = assoc.model;
  report.method = assoc.method;
  report.relation = dataset.relation;
  report.targets = dataset.targets;
  report.conc.n = 0;

  for (const auto& source : assoc.sources) {
    if (label_of.contains(source) && !freq.contains(source)) {
      report.dropped_sources.push_back(source);
    }
  }
  const bool has_missing = assoc.missing.size() == assoc.values.size();
  const auto assoc_col = IndexOf(assoc.targets);
  for (std::size_t t = 0; t < dataset.targets.size(); ++t) {
    auto col = assoc_col.find(dataset.targets[t]);
    if (col == assoc_col.end()) continue;
    std::vector<double> scores, freqs;
    for (std::size_t s = 0; s < assoc.sources.size(); ++s) {
      const auto row = static_cast<Eigen::Index>(s);
      auto label = label_of.find(assoc.sources[s]);
      auto f = freq.find(assoc.sources[s]);
      if (label == label_of.end() || label->second != t || f == freq.end()) {
        continue;
      }
      if (has_missing && assoc.missing(row, col->second)) continue;
      scores.push_back(assoc.values(row, col->second));
      freqs.push_back(f->second);
    }
    if (scores.size() < 2) continue;
    TargetScore s = Score(scores, freqs, options.permutations,
                          DeriveSeed(options.seed, t));
    if (s.degenerate) report.degenerate_flags.push_back(dataset.targets[t]);
    report.per_target.emplace(dataset.targets[t], s);
  }
  return report;
}

}  // namespace relprobe
