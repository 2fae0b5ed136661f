#ifndef RELPROBE_PROBSCORES_H_
#define RELPROBE_PROBSCORES_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relprobe/association.h"
#include "relprobe/dataset.h"

namespace relprobe {

enum class ProbKind {
  kMlmTarget,    // P([MASK]=target | sentence with source filled)
  kMlmSource,    // P([MASK]=source | sentence with target filled)
  kClmNext,      // next-token probability of source or target, see `predicts`
  kMlmRelation,  // P([MASK]=candidate | source and target filled)
};

std::string_view ProbKindName(ProbKind kind);
std::optional<ProbKind> ParseProbKind(std::string_view name);

// Which side a clm_next record predicts.
enum class Predicts { kNone, kSource, kTarget };

struct ProbRecord {
  ProbKind kind = ProbKind::kMlmTarget;
  std::string template_id;
  std::string source;
  std::string target;
  double prob = 0.0;                 // in (0, 1]
  std::optional<double> prior_prob;  // in (0, 1]
  Predicts predicts = Predicts::kNone;  // required for kClmNext
  std::string candidate;                // required for kMlmRelation
};

// Model probabilities exported by an inference run. Records are unique by
// (kind, predicts, template_id, source, target, candidate).
class ProbabilityTable {
 public:
  ProbabilityTable() = default;
  explicit ProbabilityTable(std::string model) : model_(std::move(model)) {}

  const std::string& model() const { return model_; }
  void set_model(std::string model) { model_ = std::move(model); }
  const std::vector<ProbRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  // Throws InvalidArgumentError on a non-positive or >1 probability, a
  // missing kind-specific field, or a duplicate key.
  void Add(ProbRecord record);

  const ProbRecord* Find(ProbKind kind, Predicts predicts,
                         std::string_view template_id, std::string_view source,
                         std::string_view target,
                         std::string_view candidate = {}) const;

  // All records of one kind/direction for a (source, target) pair, in
  // template-id order.
  std::vector<const ProbRecord*> ForPair(ProbKind kind, Predicts predicts,
                                         std::string_view source,
                                         std::string_view target) const;

  bool HasKind(ProbKind kind, Predicts predicts = Predicts::kNone) const;

  std::map<std::string, std::string> metadata;

 private:
  using Key = std::tuple<int, int, std::string, std::string, std::string,
                         std::string>;
  using PairKey = std::tuple<int, int, std::string, std::string>;

  std::string model_;
  std::vector<ProbRecord> records_;
  std::map<Key, std::size_t, std::less<>> index_;
  std::map<PairKey, std::vector<std::size_t>, std::less<>> by_pair_;
};

// Probability table interchange format (JSON Lines, UTF-8):
//
//   {"meta": {"model": "bert-base-uncased", ...}}                    optional first line
//   {"kind": "mlm_target", "template_id": "t1", "source": "toilet",
//    "target": "bathroom", "prob": 0.0123, "prior_prob": 0.0042}
//   {"kind": "clm_next", "predicts": "target", ...}
//   {"kind": "mlm_relation", "candidate": "in", ...}
//
// Throws DataError naming the 1-based line of the first violation.
ProbabilityTable ParseProbabilityTable(std::string_view text);
ProbabilityTable LoadProbabilityTable(const std::filesystem::path& path);
std::string SerializeProbabilityTable(const ProbabilityTable& table);

// log(prob / prior), natural log. Throws InvalidArgumentError unless both
// are > 0.
double IncreasedLogProb(double prob, double prior);

enum class MaskDirection { kMaskSource, kMaskTarget };
enum class ClmDirection { kPredictSource, kPredictTarget };
enum class ClmWeighting { kRaw, kLogPriorRatio };

// Masked-LM association: each cell is the mean over templates of
// IncreasedLogProb(prob, prior). Pairs without records are marked missing.
// Throws DataError if the table holds no records of the requested kind, or
// a record lacks its prior.
AssociationMatrix MlmAssociation(const ProbabilityTable& table,
                                 const RelationDataset& dataset,
                                 MaskDirection direction);

// Causal-LM association: mean over templates of prob (kRaw) or of
// log(prob / prior) (kLogPriorRatio). Returns nullopt when the table has no
// clm_next records for the direction at all, which is a legitimate outcome
// for relations without a usable prompt.
std::optional<AssociationMatrix> ClmAssociation(const ProbabilityTable& table,
                                                const RelationDataset& dataset,
                                                ClmDirection direction,
                                                ClmWeighting weighting);

struct RankedCandidate {
  std::string candidate;
  double prob = 0.0;

  bool operator==(const RankedCandidate&) const = default;
};

struct RelationContext {
  std::string template_id;
  std::string source;
  std::string target;
};

// Orders relation candidates by descending probability under one context;
// ties go to the lexicographically smaller candidate. Throws DataError if a
// candidate has no mlm_relation record for the context.
std::vector<RankedCandidate> RankCandidates(
    const ProbabilityTable& table, const RelationContext& context,
    const std::vector<std::string>& candidates);

}  // namespace relprobe

#endif  // RELPROBE_PROBSCORES_H_
