#include "relprobe/dataset.h"

#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "relprobe/error.h"
#include "relprobe/text.h"

namespace relprobe {

using nlohmann::json;

std::vector<std::string> RelationDataset::Sources() const {
  std::vector<std::string> sources;
  std::unordered_set<std::string> seen;
  for (const auto& record : records) {
    if (seen.insert(record.source).second) sources.push_back(record.source);
  }
  return sources;
}

std::optional<std::size_t> RelationDataset::TargetIndex(
    std::string_view target) const {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] == target) return i;
  }
  return std::nullopt;
}

void RelationDataset::Validate() const {
  if (targets.empty()) throw DataError("dataset has no targets");
  std::set<std::string, std::less<>> target_set;
  for (const auto& t : targets) {
    if (t.empty()) throw DataError("empty target name");
    if (!target_set.insert(t).second) {
      throw DataError("duplicate target '" + t + "'");
    }
  }
  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i) + " (" + r.source +
                              ", " + r.target + ")";
    if (r.source.empty()) throw DataError(where + ": empty source");
    if (!target_set.contains(r.target)) {
      throw DataError(where + ": unknown target '" + r.target + "'");
    }
    if (!(r.gold >= 0.0 && r.gold <= 1.0)) {
      throw DataError(where + ": gold " + FormatDouble(r.gold) +
                      " outside [0, 1]");
    }
    if (!pairs.emplace(r.source, r.target).second) {
      throw DataError(where + ": duplicate (source, target) pair");
    }
  }
}

RelationDataset ParseDataset(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("dataset is not valid JSON: ") + e.what());
  }
  RelationDataset ds;
  try {
    if (!doc.is_object()) throw DataError("dataset must be a JSON object");
    ds.relation = doc.at("relation").get<std::string>();
    if (auto it = doc.find("template_set"); it != doc.end() && !it->is_null()) {
      ds.template_set = it->get<std::string>();
    }
    ds.targets = doc.at("targets").get<std::vector<std::string>>();
    for (const auto& r : doc.at("records")) {
      ds.records.push_back({r.at("source").get<std::string>(),
                            r.at("target").get<std::string>(),
                            r.at("gold").get<double>()});
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed dataset: ") + e.what());
  }
  ds.Validate();
  return ds;
}

RelationDataset LoadDataset(const std::filesystem::path& path) {
  try {
    return ParseDataset(ReadFile(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string SerializeDataset(const RelationDataset& dataset) {
  std::string out = "{\n  \"relation\": " + json(dataset.relation).dump();
  if (dataset.template_set) {
    out += ",\n  \"template_set\": " + json(*dataset.template_set).dump();
  }
  out += ",\n  \"targets\": [";
  for (std::size_t i = 0; i < dataset.targets.size(); ++i) {
    if (i > 0) out += ", ";
    out += json(dataset.targets[i]).dump();
  }
  out += "],\n  \"records\": [";
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& r = dataset.records[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"source\": " + json(r.source).dump() +
           ", \"target\": " + json(r.target).dump() +
           ", \"gold\": " + FormatDouble(r.gold) + "}";
  }
  out += dataset.records.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

void SaveDataset(const RelationDataset& dataset,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << SerializeDataset(dataset);
  if (!out) throw DataError("cannot write " + path.string());
}

GoldMatrix ToGoldMatrix(const RelationDataset& dataset, GoldFill fill) {
  GoldMatrix gold;
  gold.sources = dataset.Sources();
  gold.targets = dataset.targets;
  double fill_value = 0.0;
  switch (fill) {
    case GoldFill::kZeros:
      fill_value = 0.0;
      break;
  }
  gold.values = Eigen::MatrixXd::Constant(
      static_cast<Eigen::Index>(gold.sources.size()),
      static_cast<Eigen::Index>(gold.targets.size()), fill_value);
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < gold.sources.size(); ++i) {
    row_of.emplace(gold.sources[i], static_cast<Eigen::Index>(i));
  }
  for (const auto& r : dataset.records) {
    auto col = dataset.TargetIndex(r.target);
    if (!col) throw DataError("unknown target '" + r.target + "'");
    gold.values(row_of.at(r.source), static_cast<Eigen::Index>(*col)) = r.gold;
  }
  return gold;
}

}  // namespace relprobe
