#include "relprobe/classifiers.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "relprobe/error.h"
#include "relprobe/random.h"

namespace relprobe {

std::string_view ClassifierName(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kKnn: return "knn";
    case ClassifierKind::kLinearSvm: return "svm";
    case ClassifierKind::kFfn: return "ffn";
  }
  return "?";
}

void ClassifierSpec::Validate() const {
  if (knn_k <= 0 || ffn_hidden <= 0 || ffn_epochs <= 0 || svm_epochs <= 0 ||
      !(ffn_learning_rate > 0.0) || !(svm_reg > 0.0)) {
    throw InvalidArgumentError("classifier hyperparameters must be positive");
  }
}

void LabeledVectors::Validate() const {
  const std::size_t d = dimension();
  for (const auto& item : items) {
    if (item.vector.size() != d) {
      throw InvalidArgumentError("labeled vectors have mixed dimensions");
    }
    if (item.label >= targets.size()) {
      throw InvalidArgumentError("label out of range for '" + item.source +
                                 "'");
    }
  }
}

std::size_t LabeledVectors::DistinctLabels() const {
  std::set<std::size_t> labels;
  for (const auto& item : items) labels.insert(item.label);
  return labels.size();
}

std::vector<std::size_t> AssignLabels(const RelationDataset& dataset) {
  const auto sources = dataset.Sources();
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < sources.size(); ++i) row_of[sources[i]] = i;

  std::vector<std::size_t> label(sources.size(), 0);
  std::vector<double> best(sources.size(), -1.0);
  for (const auto& r : dataset.records) {
    const std::size_t row = row_of.at(r.source);
    const std::size_t col = *dataset.TargetIndex(r.target);
    if (r.gold > best[row] || (r.gold == best[row] && col < label[row])) {
      best[row] = r.gold;
      label[row] = col;
    }
  }
  return label;
}

void Standardizer::Fit(const Eigen::MatrixXd& rows) {
  mean_ = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean_;
  const Eigen::RowVectorXd var =
      centered.array().square().colwise().sum() /
      static_cast<double>(rows.rows());
  scale_ = var.array().sqrt();
  for (Eigen::Index j = 0; j < scale_.size(); ++j) {
    if (!(scale_(j) > 0.0)) scale_(j) = 1.0;
  }
}

Eigen::MatrixXd Standardizer::Transform(const Eigen::MatrixXd& rows) const {
  return (rows.rowwise() - mean_).array().rowwise() / scale_.array();
}

Eigen::RowVectorXd Standardizer::Transform(const Eigen::RowVectorXd& row) const {
  return (row - mean_).array() / scale_.array();
}

namespace {

void CheckTraining(const Eigen::MatrixXd& features,
                   const std::vector<std::size_t>& labels,
                   std::size_t num_classes) {
  if (features.rows() == 0) throw InvalidArgumentError("empty training set");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InvalidArgumentError("feature/label count mismatch");
  }
  for (std::size_t label : labels) {
    if (label >= num_classes) throw InvalidArgumentError("label out of range");
  }
}

std::size_t ArgMax(const Eigen::RowVectorXd& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

}  // namespace

// ---------------------------------------------------------------- KNN

void KnnClassifier::Fit(const Eigen::MatrixXd& features,
                        const std::vector<std::size_t>& labels,
                        std::size_t num_classes, std::uint64_t) {
  CheckTraining(features, labels, num_classes);
  train_ = features;
  labels_ = labels;
  num_classes_ = num_classes;
}

std::size_t KnnClassifier::Predict(const Eigen::RowVectorXd& query) const {
  const auto n = static_cast<std::size_t>(train_.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = {(train_.row(Eigen::Index(i)) - query).norm(), i};
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), n);
  std::partial_sort(dist.begin(), dist.begin() + std::ptrdiff_t(k), dist.end());

  std::vector<int> votes(num_classes_, 0);
  std::vector<double> dist_sum(num_classes_, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t label = labels_[dist[i].second];
    ++votes[label];
    dist_sum[label] += dist[i].first;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < num_classes_; ++c) {
    if (votes[c] > votes[best]) {
      best = c;
    } else if (votes[c] == votes[best] && votes[c] > 0 &&
               dist_sum[c] / votes[c] < dist_sum[best] / votes[best]) {
      best = c;
    }
  }
  return best;
}

// ---------------------------------------------------------------- SVM

void LinearSvm::Fit(const Eigen::MatrixXd& features,
                    const std::vector<std::size_t>& labels,
                    std::size_t num_classes, std::uint64_t) {
  CheckTraining(features, labels, num_classes);
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  const auto classes = static_cast<Eigen::Index>(num_classes);

  Eigen::MatrixXd x(n, d + 1);
  x.leftCols(d) = features;
  x.col(d).setOnes();

  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(n, classes, -1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, static_cast<Eigen::Index>(labels[std::size_t(i)])) = 1.0;
  }

  weights_ = Eigen::MatrixXd::Zero(classes, d + 1);
  const double radius = 1.0 / std::sqrt(reg_);
  for (int t = 1; t <= epochs_; ++t) {
    const double eta = 1.0 / (reg_ * t);
    const Eigen::MatrixXd margins = (x * weights_.transpose()).cwiseProduct(y);
    const Eigen::MatrixXd active =
        (margins.array() < 1.0).cast<double>().matrix().cwiseProduct(y);
    weights_ = (1.0 - eta * reg_) * weights_ +
               (eta / static_cast<double>(n)) * (active.transpose() * x);
    for (Eigen::Index c = 0; c < classes; ++c) {
      const double norm = weights_.row(c).norm();
      if (norm > radius) weights_.row(c) *= radius / norm;
    }
  }
}

std::size_t LinearSvm::Predict(const Eigen::RowVectorXd& query) const {
  const Eigen::Index d = weights_.cols() - 1;
  const Eigen::RowVectorXd scores =
      (weights_.leftCols(d) * query.transpose()).transpose() +
      weights_.col(d).transpose();
  return ArgMax(scores);
}

// ---------------------------------------------------------------- FFN

FfnParams FfnParams::Init(std::size_t input, std::size_t hidden,
                          std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  FfnParams p;
  const auto in = static_cast<Eigen::Index>(input);
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto c = static_cast<Eigen::Index>(classes);
  const double a1 = std::sqrt(6.0 / static_cast<double>(input));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + classes));
  p.w1.resize(h, in);
  for (Eigen::Index j = 0; j < in; ++j) {
    for (Eigen::Index i = 0; i < h; ++i) p.w1(i, j) = rng.Uniform(-a1, a1);
  }
  p.b1 = Eigen::VectorXd::Zero(h);
  p.w2.resize(c, h);
  for (Eigen::Index j = 0; j < h; ++j) {
    for (Eigen::Index i = 0; i < c; ++i) p.w2(i, j) = rng.Uniform(-a2, a2);
  }
  p.b2 = Eigen::VectorXd::Zero(c);
  return p;
}

std::size_t FfnParams::ParameterCount() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() +
                                  b2.size());
}

Eigen::VectorXd FfnParams::Flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(ParameterCount()));
  Eigen::Index o = 0;
  flat.segment(o, w1.size()) = w1.reshaped();
  o += w1.size();
  flat.segment(o, b1.size()) = b1;
  o += b1.size();
  flat.segment(o, w2.size()) = w2.reshaped();
  o += w2.size();
  flat.segment(o, b2.size()) = b2;
  return flat;
}

void FfnParams::Unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(ParameterCount())) {
    throw InvalidArgumentError("parameter vector has the wrong length");
  }
  Eigen::Index o = 0;
  w1.reshaped() = flat.segment(o, w1.size());
  o += w1.size();
  b1 = flat.segment(o, b1.size());
  o += b1.size();
  w2.reshaped() = flat.segment(o, w2.size());
  o += w2.size();
  b2 = flat.segment(o, b2.size());
}

double FfnLoss(const FfnParams& params, const Eigen::MatrixXd& features,
               const std::vector<std::size_t>& labels, FfnParams* gradient) {
  const Eigen::Index n = features.rows();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) {
    throw InvalidArgumentError("FfnLoss: feature/label count mismatch");
  }
  const Eigen::MatrixXd pre =
      (features * params.w1.transpose()).rowwise() + params.b1.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  Eigen::MatrixXd logits =
      (hidden * params.w2.transpose()).rowwise() + params.b2.transpose();

  // Row-wise softmax with the max subtracted.
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    const double z = e.sum();
    probs.row(i) = e / z;
    const auto y = static_cast<Eigen::Index>(labels[std::size_t(i)]);
    loss -= (logits(i, y) - m) - std::log(z);
  }
  loss /= static_cast<double>(n);

  if (gradient != nullptr) {
    Eigen::MatrixXd dlogits = probs;
    for (Eigen::Index i = 0; i < n; ++i) {
      dlogits(i, static_cast<Eigen::Index>(labels[std::size_t(i)])) -= 1.0;
    }
    dlogits /= static_cast<double>(n);
    gradient->w2 = dlogits.transpose() * hidden;
    gradient->b2 = dlogits.colwise().sum().transpose();
    const Eigen::MatrixXd dhidden =
        (dlogits * params.w2).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    gradient->w1 = dhidden.transpose() * features;
    gradient->b1 = dhidden.colwise().sum().transpose();
  }
  return loss;
}

void FeedForwardNet::Fit(const Eigen::MatrixXd& features,
                         const std::vector<std::size_t>& labels,
                         std::size_t num_classes, std::uint64_t seed) {
  CheckTraining(features, labels, num_classes);
  params_ = FfnParams::Init(static_cast<std::size_t>(features.cols()),
                            static_cast<std::size_t>(hidden_), num_classes,
                            seed);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Eigen::VectorXd theta = params_.Flatten();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  FfnParams grad = params_;
  double beta1_t = 1.0, beta2_t = 1.0;
  for (int epoch = 1; epoch <= epochs_; ++epoch) {
    FfnLoss(params_, features, labels, &grad);
    const Eigen::VectorXd g = grad.Flatten();
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    beta1_t *= kBeta1;
    beta2_t *= kBeta2;
    const double step = learning_rate_ / (1.0 - beta1_t);
    const double v_scale = 1.0 / (1.0 - beta2_t);
    theta.array() -=
        step * m.array() / ((v.array() * v_scale).sqrt() + kEps);
    params_.Unflatten(theta);
  }
}

std::size_t FeedForwardNet::Predict(const Eigen::RowVectorXd& query) const {
  const Eigen::VectorXd hidden =
      (params_.w1 * query.transpose() + params_.b1).cwiseMax(0.0);
  const Eigen::VectorXd logits = params_.w2 * hidden + params_.b2;
  return ArgMax(logits.transpose());
}

std::unique_ptr<Classifier> MakeClassifier(const ClassifierSpec& spec) {
  spec.Validate();
  switch (spec.kind) {
    case ClassifierKind::kKnn:
      return std::make_unique<KnnClassifier>(spec.knn_k);
    case ClassifierKind::kLinearSvm:
      return std::make_unique<LinearSvm>(spec.svm_epochs, spec.svm_reg);
    case ClassifierKind::kFfn:
      return std::make_unique<FeedForwardNet>(spec.ffn_hidden, spec.ffn_epochs,
                                              spec.ffn_learning_rate);
  }
  throw InvalidArgumentError("unknown classifier kind");
}

namespace {

// A training fold ready for Fit(): features already standardized when
// `spec.standardize` applies, plus the transform for queries.
struct PreparedFold {
  Eigen::MatrixXd features;
  std::vector<std::size_t> labels;
  std::optional<Standardizer> standardizer;

  Eigen::RowVectorXd Query(std::span<const double> q) const {
    Eigen::RowVectorXd row = Eigen::Map<const Eigen::RowVectorXd>(
        q.data(), static_cast<Eigen::Index>(q.size()));
    return standardizer ? standardizer->Transform(row) : row;
  }
};

bool Standardizes(const ClassifierSpec& spec) {
  return spec.standardize && spec.kind != ClassifierKind::kKnn;
}

PreparedFold PrepareFold(const ClassifierSpec& spec, const LabeledVectors& data,
                         std::optional<std::size_t> held_out) {
  PreparedFold fold;
  const auto d = static_cast<Eigen::Index>(data.dimension());
  const std::size_t rows = data.items.size() - (held_out ? 1 : 0);
  fold.features.resize(static_cast<Eigen::Index>(rows), d);
  fold.labels.reserve(rows);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    if (held_out && i == *held_out) continue;
    fold.features.row(r++) =
        Eigen::Map<const Eigen::RowVectorXd>(data.items[i].vector.data(), d);
    fold.labels.push_back(data.items[i].label);
  }
  if (std::set<std::size_t>(fold.labels.begin(), fold.labels.end()).size() <
      2) {
    throw InvalidArgumentError(
        "training set needs at least two distinct labels");
  }
  if (Standardizes(spec)) {
    fold.standardizer.emplace();
    fold.standardizer->Fit(fold.features);
    fold.features = fold.standardizer->Transform(fold.features);
  }
  return fold;
}

}  // namespace

std::size_t TrainPredict(const ClassifierSpec& spec,
                         const LabeledVectors& train,
                         std::span<const double> query) {
  train.Validate();
  if (query.size() != train.dimension()) {
    throw InvalidArgumentError("query dimension " +
                               std::to_string(query.size()) +
                               " does not match training dimension " +
                               std::to_string(train.dimension()));
  }
  const PreparedFold fold = PrepareFold(spec, train, std::nullopt);
  auto model = MakeClassifier(spec);
  model->Fit(fold.features, fold.labels, train.targets.size(), spec.seed);
  return model->Predict(fold.Query(query));
}

LooResult LooAssociation(const ClassifierSpec& spec, const LabeledVectors& data,
                         int repeats) {
  spec.Validate();
  data.Validate();
  if (data.items.size() < 2) {
    throw InvalidArgumentError("leave-one-out needs at least two sources");
  }
  if (repeats <= 0) throw InvalidArgumentError("repeats must be positive");

  const std::size_t n = data.items.size();
  const std::size_t classes = data.targets.size();
  std::vector<std::string> sources;
  for (const auto& item : data.items) sources.push_back(item.source);

  LooResult result;
  result.repeats = repeats;
  result.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(classes));
  auto model = MakeClassifier(spec);
  for (std::size_t i = 0; i < n; ++i) {
    const PreparedFold fold = PrepareFold(spec, data, i);
    const Eigen::RowVectorXd query = fold.Query(data.items[i].vector);
    const int trainings = spec.IsDeterministic() ? 1 : repeats;
    for (int r = 0; r < trainings; ++r) {
      model->Fit(fold.features, fold.labels, classes,
                 DeriveSeed(spec.seed, static_cast<std::uint64_t>(r), i));
      const std::size_t predicted = model->Predict(query);
      result.counts(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(predicted)) +=
          spec.IsDeterministic() ? repeats : 1;
    }
  }

  result.matrix = MakeAssociationMatrix(std::move(sources), data.targets,
                                        std::string(ClassifierName(spec.kind)),
                                        "");
  result.matrix.values =
      result.counts.cast<double>() / static_cast<double>(repeats);
  return result;
}

LabeledVectors MakeLabeledVectors(
    const RelationDataset& dataset,
    const std::vector<std::optional<Vector>>& vectors) {
  const auto sources = dataset.Sources();
  if (vectors.size() != sources.size()) {
    throw InvalidArgumentError("one vector slot per dataset source expected");
  }
  const auto labels = AssignLabels(dataset);
  LabeledVectors out;
  out.targets = dataset.targets;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!vectors[i]) continue;
    out.items.push_back({sources[i], *vectors[i], labels[i]});
  }
  return out;
}

}  // namespace relprobe
