#ifndef RELPROBE_MEASURES_H_
#define RELPROBE_MEASURES_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "relprobe/association.h"
#include "relprobe/contextual.h"
#include "relprobe/dataset.h"
#include "relprobe/dcor.h"
#include "relprobe/embeddings.h"

namespace relprobe {

// Cosine of the angle between u and v. Throws UndefinedMeasureError if
// either vector is all zeros, InvalidArgumentError on length mismatch.
double Cosine(std::span<const double> u, std::span<const double> v);

// Mean pairwise cosine between two vector sets:
//   s(X, A) = 1/(|X||A|) sum_x sum_a cos(x, a)
double SetMeanCosine(const std::vector<Vector>& xs,
                     const std::vector<Vector>& as);

// WEAT association (sums, not means):
//   s(w, A, B)       = sum_a cos(w, a) - sum_b cos(w, b)
//   s(X, Y, A, B)    = sum_x s(x, A, B) - sum_y s(y, A, B)
double WeatAssociation(std::span<const double> w, const std::vector<Vector>& as,
                       const std::vector<Vector>& bs);
double WeatS(const std::vector<Vector>& xs, const std::vector<Vector>& ys,
             const std::vector<Vector>& as, const std::vector<Vector>& bs);

// Ranks with ties given their average rank (1-based).
std::vector<double> AverageRanks(std::span<const double> values);

// Correlations between the components of two vectors. A constant input
// gives 0 with `degenerate` set.
Dependence Pearson(std::span<const double> u, std::span<const double> v);
Dependence Spearman(std::span<const double> u, std::span<const double> v);
Dependence KendallTauB(std::span<const double> u, std::span<const double> v);

// Mahalanobis distance under a fixed symmetric positive-definite covariance.
class MahalanobisMetric {
 public:
  // Throws UndefinedMeasureError if `covariance` is not positive definite.
  explicit MahalanobisMetric(const Eigen::MatrixXd& covariance);

  // Ridge-regularized sample covariance of `samples`:
  //   C = S + lambda I,  lambda = ridge_fraction * mean(diag(S))
  // where S uses the 1/(n-1) normalization.
  static MahalanobisMetric FromSamples(const std::vector<Vector>& samples,
                                       double ridge_fraction = 0.1);

  std::size_t dimension() const {
    return static_cast<std::size_t>(llt_.rows());
  }
  double Distance(std::span<const double> u, std::span<const double> v) const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

enum class DependenceKind {
  kPearson,
  kSpearman,
  kKendall,
  kDistanceCorrelation,
  kNegMahalanobis,
};

// Dependence between the components of u and v; requires d >= 2.
// kNegMahalanobis returns minus the distance and needs `metric`.
Dependence ComponentwiseDependence(std::span<const double> u,
                                   std::span<const double> v,
                                   DependenceKind kind,
                                   const MahalanobisMetric* metric = nullptr);

enum class Measure {
  kCosine,         // static: cosine; contextual: set-mean cosine
  kSetMeanCosine,  // explicit set-mean cosine (singletons for static)
  kPearson,
  kSpearman,
  kKendall,
  kDistanceCorrelation,
  kNegMahalanobis,
};

std::string_view MeasureName(Measure measure);

// Where each dataset word's vector(s) come from.
struct MissingWords {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
};

// Builds the association matrix of `measure` between every dataset source
// and target. Words without a representation are dropped (reported in
// `missing`). Throws DataError if no source or no target resolves.
//
// For kNegMahalanobis the covariance is estimated from the vectors of all
// resolved sources and targets (see MahalanobisMetric::FromSamples).
AssociationMatrix BuildAssociationMatrix(const EmbeddingStore& store,
                                         const RelationDataset& dataset,
                                         Measure measure, bool lowercase = true,
                                         MissingWords* missing = nullptr);

// Contextual variant: set-mean cosine for kCosine / kSetMeanCosine, every
// other measure on the per-word mean vector.
AssociationMatrix BuildAssociationMatrix(const ContextualVectorSet& sources,
                                         const ContextualVectorSet& targets,
                                         const RelationDataset& dataset,
                                         Measure measure,
                                         MissingWords* missing = nullptr);

}  // namespace relprobe

#endif  // RELPROBE_MEASURES_H_
