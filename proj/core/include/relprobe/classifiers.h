#ifndef RELPROBE_CLASSIFIERS_H_
#define RELPROBE_CLASSIFIERS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "relprobe/association.h"
#include "relprobe/dataset.h"
#include "relprobe/embeddings.h"

namespace relprobe {

enum class ClassifierKind { kKnn, kLinearSvm, kFfn };

std::string_view ClassifierName(ClassifierKind kind);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kKnn;
  int knn_k = 5;
  int ffn_hidden = 100;
  int ffn_epochs = 100;
  double ffn_learning_rate = 0.01;
  int svm_epochs = 200;
  double svm_reg = 1e-3;
  std::uint64_t seed = 0;
  // Per-feature z-scoring fitted on the training fold (SVM and FFN only).
  bool standardize = true;

  // Throws InvalidArgumentError if any hyperparameter is not positive.
  void Validate() const;
  // KNN and the subgradient SVM do not depend on the seed.
  bool IsDeterministic() const { return kind != ClassifierKind::kFfn; }
};

struct LabeledItem {
  std::string source;
  Vector vector;
  std::size_t label = 0;  // index into LabeledVectors::targets
};

struct LabeledVectors {
  std::vector<LabeledItem> items;
  std::vector<std::string> targets;

  std::size_t dimension() const {
    return items.empty() ? 0 : items.front().vector.size();
  }
  // Throws InvalidArgumentError on mixed dimensions or labels out of range.
  void Validate() const;
  std::size_t DistinctLabels() const;
};

// Label per dataset source (in RelationDataset::Sources() order): the
// target with the highest gold value, ties going to the earlier target.
std::vector<std::size_t> AssignLabels(const RelationDataset& dataset);

// Per-feature z-scoring. Features with zero training variance are only
// centered.
class Standardizer {
 public:
  void Fit(const Eigen::MatrixXd& rows);
  Eigen::MatrixXd Transform(const Eigen::MatrixXd& rows) const;
  Eigen::RowVectorXd Transform(const Eigen::RowVectorXd& row) const;

  const Eigen::RowVectorXd& mean() const { return mean_; }
  const Eigen::RowVectorXd& scale() const { return scale_; }

 private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

// A trained model mapping a feature row to a class index.
class Classifier {
 public:
  virtual ~Classifier() = default;
  // `features` is samples x dimension; labels < num_classes.
  virtual void Fit(const Eigen::MatrixXd& features,
                   const std::vector<std::size_t>& labels,
                   std::size_t num_classes, std::uint64_t seed) = 0;
  virtual std::size_t Predict(const Eigen::RowVectorXd& query) const = 0;
};

std::unique_ptr<Classifier> MakeClassifier(const ClassifierSpec& spec);

// k nearest neighbours by Euclidean distance, k capped at the training size.
// Majority vote; ties go to the label with the smaller mean distance among
// the neighbours, then to the smaller label.
class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(int k) : k_(k) {}
  void Fit(const Eigen::MatrixXd& features,
           const std::vector<std::size_t>& labels, std::size_t num_classes,
           std::uint64_t seed) override;
  std::size_t Predict(const Eigen::RowVectorXd& query) const override;

 private:
  int k_;
  Eigen::MatrixXd train_;
  std::vector<std::size_t> labels_;
  std::size_t num_classes_ = 0;
};

// One-vs-rest linear SVM. Each binary problem minimizes
//   reg/2 |w|^2 + 1/n sum_i max(0, 1 - y_i (w . [x_i, 1]))
// by full-batch subgradient descent with step 1/(reg t) and projection onto
// the ball |w| <= 1/sqrt(reg). Deterministic; starts from w = 0.
class LinearSvm final : public Classifier {
 public:
  LinearSvm(int epochs, double reg) : epochs_(epochs), reg_(reg) {}
  void Fit(const Eigen::MatrixXd& features,
           const std::vector<std::size_t>& labels, std::size_t num_classes,
           std::uint64_t seed) override;
  std::size_t Predict(const Eigen::RowVectorXd& query) const override;

  // num_classes x (dimension + 1); last column is the bias.
  const Eigen::MatrixXd& weights() const { return weights_; }

 private:
  int epochs_;
  double reg_;
  Eigen::MatrixXd weights_;
};

// Parameters of a one-hidden-layer ReLU network.
struct FfnParams {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // classes x hidden
  Eigen::VectorXd b2;  // classes

  // He-uniform for w1, Glorot-uniform for w2, zero biases.
  static FfnParams Init(std::size_t input, std::size_t hidden,
                        std::size_t classes, std::uint64_t seed);
  std::size_t ParameterCount() const;
  // Flattened in the order w1, b1, w2, b2 (column-major matrices).
  Eigen::VectorXd Flatten() const;
  void Unflatten(const Eigen::VectorXd& flat);
};

// Mean softmax cross-entropy of the network over `features` (samples x
// input). When `gradient` is non-null it receives the analytic gradient
// with the same shapes as `params`.
double FfnLoss(const FfnParams& params, const Eigen::MatrixXd& features,
               const std::vector<std::size_t>& labels,
               FfnParams* gradient = nullptr);

// input -> hidden (ReLU) -> classes, softmax cross-entropy, full-batch Adam
// (beta1 0.9, beta2 0.999, eps 1e-8).
class FeedForwardNet final : public Classifier {
 public:
  FeedForwardNet(int hidden, int epochs, double learning_rate)
      : hidden_(hidden), epochs_(epochs), learning_rate_(learning_rate) {}
  void Fit(const Eigen::MatrixXd& features,
           const std::vector<std::size_t>& labels, std::size_t num_classes,
           std::uint64_t seed) override;
  std::size_t Predict(const Eigen::RowVectorXd& query) const override;

  const FfnParams& params() const { return params_; }

 private:
  int hidden_;
  int epochs_;
  double learning_rate_;
  FfnParams params_;
};

// Trains `spec` on `train` (standardizing first when `spec.standardize` applies,
// fitted on `train` only) and classifies `query`.
// Throws InvalidArgumentError on a dimension mismatch or a training set
// with fewer than two distinct labels.
std::size_t TrainPredict(const ClassifierSpec& spec,
                         const LabeledVectors& train,
                         std::span<const double> query);

struct LooResult {
  AssociationMatrix matrix;  // counts / repeats
  Eigen::MatrixXi counts;    // predictions per (source, target)
  int repeats = 0;
};

// Leave-one-out cross-validation repeated `repeats` times. For repeat r and
// held-out item i the classifier seed is DeriveSeed(spec.seed, r, i). Row i
// of the result is the distribution of predicted targets for item i.
// Deterministic classifiers are trained once per fold.
LooResult LooAssociation(const ClassifierSpec& spec, const LabeledVectors& data,
                         int repeats = 100);

// LabeledVectors for every dataset source that has a vector; `vectors` is
// aligned with RelationDataset::Sources() (nullopt = unresolved).
LabeledVectors MakeLabeledVectors(const RelationDataset& dataset,
                                  const std::vector<std::optional<Vector>>&
                                      vectors);

}  // namespace relprobe

#endif  // RELPROBE_CLASSIFIERS_H_
