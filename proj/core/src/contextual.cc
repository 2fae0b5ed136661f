#include "relprobe/contextual.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "relprobe/error.h"
#include "relprobe/text.h"

namespace relprobe {

using nlohmann::json;

void ContextualVectorSet::Add(std::string word, std::string template_id,
                              Vector vector) {
  if (vector.empty()) {
    throw InvalidArgumentError("empty vector for '" + word + "'");
  }
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_) {
    throw InvalidArgumentError(
        "vector for '" + word + "' / '" + template_id + "' has length " +
        std::to_string(vector.size()) + ", expected " +
        std::to_string(dimension_));
  }
  if (!std::all_of(vector.begin(), vector.end(),
                   [](double x) { return std::isfinite(x); })) {
    throw InvalidArgumentError("non-finite component in vector for '" + word +
                               "' / '" + template_id + "'");
  }
  auto& entries = words_[word];
  for (const auto& e : entries) {
    if (e.template_id == template_id) {
      throw InvalidArgumentError("duplicate vector for '" + word + "' / '" +
                                 template_id + "'");
    }
  }
  entries.push_back({std::move(template_id), std::move(vector)});
}

const std::vector<TemplateVector>* ContextualVectorSet::Find(
    std::string_view word) const {
  auto it = words_.find(word);
  return it == words_.end() ? nullptr : &it->second;
}

std::vector<std::string> ContextualVectorSet::Words() const {
  std::vector<std::string> words;
  words.reserve(words_.size());
  for (const auto& [word, _] : words_) words.push_back(word);
  return words;
}

Vector MeanPool(const std::vector<TemplateVector>& set) {
  if (set.empty()) throw InvalidArgumentError("mean of an empty vector set");
  Vector mean(set.front().vector.size(), 0.0);
  for (const auto& entry : set) {
    if (entry.vector.size() != mean.size()) {
      throw InvalidArgumentError("mixed dimensions in vector set");
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += entry.vector[i];
  }
  for (double& x : mean) x /= static_cast<double>(set.size());
  return mean;
}

Vector MeanPool(const std::vector<Vector>& set) {
  if (set.empty()) throw InvalidArgumentError("mean of an empty vector set");
  Vector mean(set.front().size(), 0.0);
  for (const auto& v : set) {
    if (v.size() != mean.size()) {
      throw InvalidArgumentError("mixed dimensions in vector set");
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += v[i];
  }
  for (double& x : mean) x /= static_cast<double>(set.size());
  return mean;
}

ContextualVectorSet ParseContextualVectors(std::string_view text) {
  ContextualVectorSet set;
  std::size_t line_number = 0;
  bool seen_record = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = Trim(StripCr(text.substr(0, nl)));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_number;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_number) + ": ";
    try {
      const json rec = json::parse(line);
      if (!rec.is_object()) throw DataError(where + "expected a JSON object");
      if (auto meta = rec.find("meta"); meta != rec.end()) {
        if (seen_record) {
          throw DataError(where + "meta line must precede all records");
        }
        for (const auto& [key, value] : meta->items()) {
          set.metadata[key] =
              value.is_string() ? value.get<std::string>() : value.dump();
        }
        if (auto model = set.metadata.find("model");
            model != set.metadata.end()) {
          set.set_model(model->second);
        }
        continue;
      }
      seen_record = true;
      set.Add(rec.at("word").get<std::string>(),
              rec.at("template_id").get<std::string>(),
              rec.at("vector").get<Vector>());
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    } catch (const InvalidArgumentError& e) {
      throw DataError(where + e.what());
    }
  }
  if (set.empty()) throw DataError("no contextual vectors found");
  return set;
}

ContextualVectorSet LoadContextualVectors(const std::filesystem::path& path) {
  try {
    ContextualVectorSet set = ParseContextualVectors(ReadFile(path));
    if (set.model().empty()) set.set_model(path.stem().string());
    return set;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string SerializeContextualVectors(const ContextualVectorSet& set) {
  std::string out;
  if (!set.metadata.empty() || !set.model().empty()) {
    json meta = json::object();
    for (const auto& [k, v] : set.metadata) meta[k] = v;
    if (!set.model().empty()) meta["model"] = set.model();
    out += json{{"meta", meta}}.dump() + "\n";
  }
  for (const auto& word : set.Words()) {
    std::vector<TemplateVector> entries = *set.Find(word);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) {
                return a.template_id < b.template_id;
              });
    for (const auto& e : entries) {
      out += "{\"word\": " + json(word).dump() +
             ", \"template_id\": " + json(e.template_id).dump() +
             ", \"vector\": [";
      for (std::size_t i = 0; i < e.vector.size(); ++i) {
        if (i > 0) out += ", ";
        out += FormatDouble(e.vector[i]);
      }
      out += "]}\n";
    }
  }
  return out;
}

}  // namespace relprobe
