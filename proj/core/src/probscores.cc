#include "relprobe/probscores.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "relprobe/error.h"
#include "relprobe/text.h"

namespace relprobe {

using nlohmann::json;

std::string_view ProbKindName(ProbKind kind) {
  switch (kind) {
    case ProbKind::kMlmTarget: return "mlm_target";
    case ProbKind::kMlmSource: return "mlm_source";
    case ProbKind::kClmNext: return "clm_next";
    case ProbKind::kMlmRelation: return "mlm_relation";
  }
  return "?";
}

std::optional<ProbKind> ParseProbKind(std::string_view name) {
  for (ProbKind k : {ProbKind::kMlmTarget, ProbKind::kMlmSource,
                     ProbKind::kClmNext, ProbKind::kMlmRelation}) {
    if (ProbKindName(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

bool ValidProb(double p) { return std::isfinite(p) && p > 0.0 && p <= 1.0; }

std::string Describe(const ProbRecord& r) {
  std::string s = std::string(ProbKindName(r.kind)) + " [" + r.template_id +
                  "] (" + r.source + ", " + r.target;
  if (!r.candidate.empty()) s += ", " + r.candidate;
  return s + ")";
}

}  // namespace

void ProbabilityTable::Add(ProbRecord record) {
  if (!ValidProb(record.prob)) {
    throw InvalidArgumentError(Describe(record) + ": prob " +
                               FormatDouble(record.prob) +
                               " outside (0, 1]");
  }
  if (record.prior_prob && !ValidProb(*record.prior_prob)) {
    throw InvalidArgumentError(Describe(record) + ": prior_prob " +
                               FormatDouble(*record.prior_prob) +
                               " outside (0, 1]");
  }
  if (record.kind == ProbKind::kClmNext) {
    if (record.predicts == Predicts::kNone) {
      throw InvalidArgumentError(Describe(record) +
                                 ": clm_next needs `predicts`");
    }
  } else {
    record.predicts = Predicts::kNone;
  }
  if (record.kind == ProbKind::kMlmRelation && record.candidate.empty()) {
    throw InvalidArgumentError(Describe(record) +
                               ": mlm_relation needs `candidate`");
  }
  Key key{static_cast<int>(record.kind), static_cast<int>(record.predicts),
          record.template_id, record.source, record.target, record.candidate};
  if (index_.contains(key)) {
    throw InvalidArgumentError(Describe(record) + ": duplicate record");
  }
  const std::size_t idx = records_.size();
  index_.emplace(std::move(key), idx);
  by_pair_[PairKey{static_cast<int>(record.kind),
                   static_cast<int>(record.predicts), record.source,
                   record.target}]
      .push_back(idx);
  records_.push_back(std::move(record));
}

const ProbRecord* ProbabilityTable::Find(ProbKind kind, Predicts predicts,
                                         std::string_view template_id,
                                         std::string_view source,
                                         std::string_view target,
                                         std::string_view candidate) const {
  if (kind != ProbKind::kClmNext) predicts = Predicts::kNone;
  auto it = index_.find(std::make_tuple(
      static_cast<int>(kind), static_cast<int>(predicts), template_id, source,
      target, candidate));
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<const ProbRecord*> ProbabilityTable::ForPair(
    ProbKind kind, Predicts predicts, std::string_view source,
    std::string_view target) const {
  if (kind != ProbKind::kClmNext) predicts = Predicts::kNone;
  std::vector<const ProbRecord*> out;
  auto it = by_pair_.find(std::make_tuple(static_cast<int>(kind),
                                          static_cast<int>(predicts), source,
                                          target));
  if (it == by_pair_.end()) return out;
  for (std::size_t idx : it->second) out.push_back(&records_[idx]);
  std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return a->template_id < b->template_id;
  });
  return out;
}

bool ProbabilityTable::HasKind(ProbKind kind, Predicts predicts) const {
  return std::any_of(records_.begin(), records_.end(), [&](const auto& r) {
    return r.kind == kind &&
           (kind != ProbKind::kClmNext || r.predicts == predicts);
  });
}

ProbabilityTable ParseProbabilityTable(std::string_view text) {
  ProbabilityTable table;
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
          table.metadata[key] =
              value.is_string() ? value.get<std::string>() : value.dump();
        }
        if (auto m = table.metadata.find("model"); m != table.metadata.end()) {
          table.set_model(m->second);
        }
        continue;
      }
      seen_record = true;
      ProbRecord r;
      const auto kind_name = rec.at("kind").get<std::string>();
      auto kind = ParseProbKind(kind_name);
      if (!kind) throw DataError(where + "unknown kind '" + kind_name + "'");
      r.kind = *kind;
      r.template_id = rec.at("template_id").get<std::string>();
      r.source = rec.at("source").get<std::string>();
      r.target = rec.at("target").get<std::string>();
      r.prob = rec.at("prob").get<double>();
      if (auto p = rec.find("prior_prob"); p != rec.end() && !p->is_null()) {
        r.prior_prob = p->get<double>();
      }
      if (auto p = rec.find("predicts"); p != rec.end() && !p->is_null()) {
        const auto side = p->get<std::string>();
        if (side == "source") {
          r.predicts = Predicts::kSource;
        } else if (side == "target") {
          r.predicts = Predicts::kTarget;
        } else {
          throw DataError(where + "predicts must be \"source\" or \"target\"");
        }
      }
      if (auto c = rec.find("candidate"); c != rec.end() && !c->is_null()) {
        r.candidate = c->get<std::string>();
      }
      table.Add(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    } catch (const InvalidArgumentError& e) {
      throw DataError(where + e.what());
    }
  }
  if (table.size() == 0) throw DataError("probability table has no records");
  return table;
}

ProbabilityTable LoadProbabilityTable(const std::filesystem::path& path) {
  try {
    ProbabilityTable table = ParseProbabilityTable(ReadFile(path));
    if (table.model().empty()) table.set_model(path.stem().string());
    return table;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string SerializeProbabilityTable(const ProbabilityTable& table) {
  std::string out;
  if (!table.metadata.empty() || !table.model().empty()) {
    json meta = json::object();
    for (const auto& [k, v] : table.metadata) meta[k] = v;
    if (!table.model().empty()) meta["model"] = table.model();
    out += json{{"meta", meta}}.dump() + "\n";
  }
  for (const auto& r : table.records()) {
    out += "{\"kind\": " + json(ProbKindName(r.kind)).dump();
    if (r.predicts != Predicts::kNone) {
      out += std::string(", \"predicts\": \"") +
             (r.predicts == Predicts::kSource ? "source" : "target") + "\"";
    }
    out += ", \"template_id\": " + json(r.template_id).dump() +
           ", \"source\": " + json(r.source).dump() +
           ", \"target\": " + json(r.target).dump();
    if (!r.candidate.empty()) {
      out += ", \"candidate\": " + json(r.candidate).dump();
    }
    out += ", \"prob\": " + FormatDouble(r.prob);
    if (r.prior_prob) out += ", \"prior_prob\": " + FormatDouble(*r.prior_prob);
    out += "}\n";
  }
  return out;
}

double IncreasedLogProb(double prob, double prior) {
  if (!(prob > 0.0) || !(prior > 0.0)) {
    throw InvalidArgumentError("increased log probability needs prob > 0 and "
                               "prior > 0");
  }
  return std::log(prob / prior);
}

namespace {

// Averages `score(record)` over the records of every dataset pair.
template <typename Score>
AssociationMatrix AverageOverTemplates(const ProbabilityTable& table,
                                       const RelationDataset& dataset,
                                       ProbKind kind, Predicts predicts,
                                       std::string method, Score score) {
  AssociationMatrix m = MakeAssociationMatrix(dataset.Sources(),
                                              dataset.targets,
                                              std::move(method), table.model());
  for (std::size_t s = 0; s < m.sources.size(); ++s) {
    for (std::size_t t = 0; t < m.targets.size(); ++t) {
      const auto records = table.ForPair(kind, predicts, m.sources[s],
                                         m.targets[t]);
      const auto row = static_cast<Eigen::Index>(s);
      const auto col = static_cast<Eigen::Index>(t);
      if (records.empty()) {
        m.missing(row, col) = true;
        continue;
      }
      double sum = 0.0;
      for (const auto* r : records) sum += score(*r);
      m.values(row, col) = sum / static_cast<double>(records.size());
    }
  }
  return m;
}

double LogPriorRatio(const ProbRecord& r) {
  if (!r.prior_prob) {
    throw DataError("record " + Describe(r) + " has no prior_prob");
  }
  return IncreasedLogProb(r.prob, *r.prior_prob);
}

}  // namespace

AssociationMatrix MlmAssociation(const ProbabilityTable& table,
                                 const RelationDataset& dataset,
                                 MaskDirection direction) {
  const ProbKind kind = direction == MaskDirection::kMaskSource
                            ? ProbKind::kMlmSource
                            : ProbKind::kMlmTarget;
  if (!table.HasKind(kind)) {
    throw DataError("probability table has no " +
                    std::string(ProbKindName(kind)) + " records");
  }
  return AverageOverTemplates(
      table, dataset, kind, Predicts::kNone,
      direction == MaskDirection::kMaskSource ? "m-s" : "m-t", LogPriorRatio);
}

std::optional<AssociationMatrix> ClmAssociation(const ProbabilityTable& table,
                                                const RelationDataset& dataset,
                                                ClmDirection direction,
                                                ClmWeighting weighting) {
  const Predicts predicts = direction == ClmDirection::kPredictSource
                                ? Predicts::kSource
                                : Predicts::kTarget;
  if (!table.HasKind(ProbKind::kClmNext, predicts)) return std::nullopt;
  std::string method = direction == ClmDirection::kPredictSource ? "p-s" : "p-t";
  if (weighting == ClmWeighting::kLogPriorRatio) {
    method += "-l";
    return AverageOverTemplates(table, dataset, ProbKind::kClmNext, predicts,
                                std::move(method), LogPriorRatio);
  }
  return AverageOverTemplates(table, dataset, ProbKind::kClmNext, predicts,
                              std::move(method),
                              [](const ProbRecord& r) { return r.prob; });
}

std::vector<RankedCandidate> RankCandidates(
    const ProbabilityTable& table, const RelationContext& context,
    const std::vector<std::string>& candidates) {
  std::vector<RankedCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    const ProbRecord* r =
        table.Find(ProbKind::kMlmRelation, Predicts::kNone,
                   context.template_id, context.source, context.target,
                   candidate);
    if (r == nullptr) {
      throw DataError("no mlm_relation probability for candidate '" +
                      candidate + "' in [" + context.template_id + "] (" +
                      context.source + ", " + context.target + ")");
    }
    ranked.push_back({candidate, r->prob});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedCandidate& a, const RankedCandidate& b) {
              if (a.prob != b.prob) return a.prob > b.prob;
              return a.candidate < b.candidate;
            });
  return ranked;
}

}  // namespace relprobe
