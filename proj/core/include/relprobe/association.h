#ifndef RELPROBE_ASSOCIATION_H_
#define RELPROBE_ASSOCIATION_H_

#include <string>
#include <vector>

#include <Eigen/Core>

namespace relprobe {

// Sources x targets extraction scores produced by one method on one model.
// Values are always "higher is stronger": distance measures are negated
// before they land here.
//
// Cells for which a method had no input (e.g. a missing probability) are
// marked in `missing` and hold 0.
struct AssociationMatrix {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  Eigen::MatrixXd values;
  std::string method;
  std::string model;
  bool higher_is_stronger = true;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> missing;

  bool HasMissing() const { return missing.size() > 0 && missing.any(); }
};

inline AssociationMatrix MakeAssociationMatrix(
    std::vector<std::string> sources, std::vector<std::string> targets,
    std::string method, std::string model) {
  AssociationMatrix m;
  const auto rows = static_cast<Eigen::Index>(sources.size());
  const auto cols = static_cast<Eigen::Index>(targets.size());
  m.sources = std::move(sources);
  m.targets = std::move(targets);
  m.values = Eigen::MatrixXd::Zero(rows, cols);
  m.missing.setConstant(rows, cols, false);
  m.method = std::move(method);
  m.model = std::move(model);
  return m;
}

}  // namespace relprobe

#endif  // RELPROBE_ASSOCIATION_H_
