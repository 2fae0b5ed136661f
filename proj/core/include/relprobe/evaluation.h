#ifndef RELPROBE_EVALUATION_H_
#define RELPROBE_EVALUATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relprobe/association.h"
#include "relprobe/dataset.h"
#include "relprobe/dcor.h"

namespace relprobe {

inline constexpr int kDefaultPermutations = 10000;

// Permutation test for distance correlation:
//   p = (1 + #{pi : dcor(x, y o pi) >= dcor(x, y)}) / (n_perm + 1)
// Permutations are drawn in batches of 1000, each batch seeded with
// DeriveSeed(seed, batch). Throws like DistanceCorrelation.
double PermutationPValue(std::span<const double> x, std::span<const double> y,
                         int n_perm = kDefaultPermutations,
                         std::uint64_t seed = 0);

// Association and gold restricted to a common set of sources and targets.
struct AlignedMatrices {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  Eigen::MatrixXd assoc;
  Eigen::MatrixXd gold;
  std::vector<std::string> dropped_sources;  // had missing cells
};

// Matches rows and columns by name. Sources or targets absent from `assoc`
// are left out. If `assoc` has missing cells, the affected sources are
// dropped when `allow_drop` is set; otherwise DataError is thrown.
AlignedMatrices Align(const AssociationMatrix& assoc, const GoldMatrix& gold,
                      bool allow_drop = false);

// dcor(assoc[., t], gold[., t]) for every target column.
std::vector<Dependence> ScorePerTarget(const Eigen::MatrixXd& assoc,
                                       const Eigen::MatrixXd& gold);

// dcor of the two matrices flattened column-major.
Dependence ScoreConc(const Eigen::MatrixXd& assoc,
                     const Eigen::MatrixXd& gold);

Eigen::VectorXd FlattenColumnMajor(const Eigen::MatrixXd& m);

struct TargetScore {
  double dcor = 0.0;
  double p_value = 1.0;
  bool degenerate = false;
  std::size_t n = 0;  // sample size behind the statistic
};

struct ScoreReport {
  std::string model;
  std::string method;
  std::string relation;
  std::vector<std::string> targets;  // dataset target order
  std::map<std::string, TargetScore> per_target;  // scored targets only
  TargetScore conc;
  std::vector<std::string> degenerate_flags;
  std::vector<std::string> dropped_sources;
};

struct EvaluationOptions {
  int permutations = kDefaultPermutations;
  std::uint64_t seed = 0;
  bool allow_drop = false;
};

// Per-target and CONC distance correlation of `assoc` against the gold
// matrix, with permutation p-values. Target t's test is seeded with
// DeriveSeed(seed, t); CONC with DeriveSeed(seed, |targets|).
ScoreReport Evaluate(const AssociationMatrix& assoc,
                     const RelationDataset& dataset,
                     const EvaluationOptions& options = {});

// Frequency file: one `phrase<TAB>value` per line; blank lines and lines
// starting with '#' are ignored. Throws DataError with the line number.
std::map<std::string, double> ParseFrequencies(std::string_view text);
std::map<std::string, double> LoadFrequencies(
    const std::filesystem::path& path);

// For each target t: dcor over the sources whose gold argmax is t between
// their assoc[., t] scores and their frequencies. Sources without a
// frequency are dropped and listed in `dropped_sources`; targets with
// fewer than two sources left are omitted from `per_target`.
ScoreReport FrequencyCorrelation(const AssociationMatrix& assoc,
                                 const std::map<std::string, double>& freq,
                                 const RelationDataset& dataset,
                                 const EvaluationOptions& options = {});

}  // namespace relprobe

#endif  // RELPROBE_EVALUATION_H_
