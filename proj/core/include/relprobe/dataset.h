#ifndef RELPROBE_DATASET_H_
#define RELPROBE_DATASET_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace relprobe {

struct RelationRecord {
  std::string source;
  std::string target;
  double gold = 0.0;  // P(target | source)

  bool operator==(const RelationRecord&) const = default;
};

// Gold relation data: each record is a (source, target) pair with the
// conditional probability of the target given the source.
//
// Invariants (checked by Validate()):
//   - every record's target is listed in `targets`
//   - gold in [0, 1]
//   - (source, target) pairs are unique
struct RelationDataset {
  std::string relation;
  std::vector<std::string> targets;
  std::vector<RelationRecord> records;
  std::optional<std::string> template_set;

  // Distinct sources in order of first appearance.
  std::vector<std::string> Sources() const;
  std::optional<std::size_t> TargetIndex(std::string_view target) const;

  // Throws DataError describing the first violated invariant.
  void Validate() const;

  bool operator==(const RelationDataset&) const = default;
};

// Parses the JSON dataset format:
//
//   {
//     "relation": "room",
//     "template_set": "room-object",          (optional)
//     "targets": ["bathroom", "bedroom", ...],
//     "records": [{"source": "toilet", "target": "bathroom", "gold": 1.0}, ...]
//   }
//
// Throws DataError on syntax errors and invariant violations.
RelationDataset ParseDataset(std::string_view json_text);
RelationDataset LoadDataset(const std::filesystem::path& path);

// Inverse of ParseDataset; one record per line, gold printed with the
// shortest round-tripping decimal.
std::string SerializeDataset(const RelationDataset& dataset);
void SaveDataset(const RelationDataset& dataset,
                 const std::filesystem::path& path);

enum class GoldFill { kZeros };

// Dense sources x targets form of a dataset.
struct GoldMatrix {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  Eigen::MatrixXd values;
};

// Pairs absent from the records take the fill value.
GoldMatrix ToGoldMatrix(const RelationDataset& dataset,
                        GoldFill fill = GoldFill::kZeros);

}  // namespace relprobe

#endif  // RELPROBE_DATASET_H_
