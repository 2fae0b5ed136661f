#include "relprobe/measures.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relprobe/error.h"

namespace relprobe {
namespace {

void CheckSameLength(std::span<const double> u, std::span<const double> v,
                     const char* what) {
  if (u.size() != v.size()) {
    throw InvalidArgumentError(std::string(what) + ": length mismatch (" +
                               std::to_string(u.size()) + " vs " +
                               std::to_string(v.size()) + ")");
  }
}

void CheckNonEmpty(const std::vector<Vector>& set, const char* name) {
  if (set.empty()) {
    throw InvalidArgumentError(std::string("vector set ") + name +
                               " is empty");
  }
}

double Dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

bool IsZero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// Number of pairs i < j with v[i] > v[j]; sorts `v` as a side effect.
std::uint64_t CountInversions(std::vector<double>& v,
                              std::vector<double>& scratch) {
  const std::size_t n = v.size();
  std::uint64_t inversions = 0;
  scratch.resize(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += mid - i;
          scratch[k++] = v[j++];
        } else {
          scratch[k++] = v[i++];
        }
      }
      while (i < mid) scratch[k++] = v[i++];
      while (j < hi) scratch[k++] = v[j++];
    }
    std::swap(v, scratch);
  }
  return inversions;
}

// sum over runs of equal values of t(t-1)/2, for a sorted sequence.
template <typename Equal>
std::uint64_t TiedPairs(std::size_t n, Equal equal) {
  std::uint64_t ties = 0, run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      ties += run * (run - 1) / 2;
      run = 1;
    }
  }
  return ties + run * (run - 1) / 2;
}

}  // namespace

double Cosine(std::span<const double> u, std::span<const double> v) {
  CheckSameLength(u, v, "cosine");
  const double nu = std::sqrt(Dot(u, u));
  const double nv = std::sqrt(Dot(v, v));
  if (nu == 0.0 || nv == 0.0) {
    throw UndefinedMeasureError("cosine is undefined for a zero vector");
  }
  return std::clamp(Dot(u, v) / (nu * nv), -1.0, 1.0);
}

double SetMeanCosine(const std::vector<Vector>& xs,
                     const std::vector<Vector>& as) {
  CheckNonEmpty(xs, "X");
  CheckNonEmpty(as, "A");
  double sum = 0.0;
  for (const auto& x : xs) {
    for (const auto& a : as) sum += Cosine(x, a);
  }
  return sum / (static_cast<double>(xs.size()) * static_cast<double>(as.size()));
}

double WeatAssociation(std::span<const double> w, const std::vector<Vector>& as,
                       const std::vector<Vector>& bs) {
  CheckNonEmpty(as, "A");
  CheckNonEmpty(bs, "B");
  double sa = 0.0, sb = 0.0;
  for (const auto& a : as) sa += Cosine(w, a);
  for (const auto& b : bs) sb += Cosine(w, b);
  return sa - sb;
}

double WeatS(const std::vector<Vector>& xs, const std::vector<Vector>& ys,
             const std::vector<Vector>& as, const std::vector<Vector>& bs) {
  CheckNonEmpty(xs, "X");
  CheckNonEmpty(ys, "Y");
  double sx = 0.0, sy = 0.0;
  for (const auto& x : xs) sx += WeatAssociation(x, as, bs);
  for (const auto& y : ys) sy += WeatAssociation(y, as, bs);
  return sx - sy;
}

std::vector<double> AverageRanks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 share the mean of ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

Dependence Pearson(std::span<const double> u, std::span<const double> v) {
  CheckSameLength(u, v, "pearson");
  const std::size_t n = u.size();
  if (n < 2) throw InvalidArgumentError("pearson needs at least 2 components");
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / double(n);
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / double(n);
  double suv = 0.0, suu = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double du = u[i] - mu, dv = v[i] - mv;
    suv += du * dv;
    suu += du * du;
    svv += dv * dv;
  }
  if (suu == 0.0 || svv == 0.0) return {0.0, true};
  return {std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0), false};
}

Dependence Spearman(std::span<const double> u, std::span<const double> v) {
  CheckSameLength(u, v, "spearman");
  const auto ru = AverageRanks(u);
  const auto rv = AverageRanks(v);
  return Pearson(ru, rv);
}

// Knight's O(n log n) tau-b.
Dependence KendallTauB(std::span<const double> u, std::span<const double> v) {
  CheckSameLength(u, v, "kendall");
  const std::size_t n = u.size();
  if (n < 2) throw InvalidArgumentError("kendall needs at least 2 components");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return u[a] < u[b] || (u[a] == u[b] && v[a] < v[b]);
  });

  const std::uint64_t n0 = std::uint64_t(n) * (n - 1) / 2;
  const std::uint64_t ties_u = TiedPairs(n, [&](std::size_t i, std::size_t j) {
    return u[order[i]] == u[order[j]];
  });
  const std::uint64_t ties_joint =
      TiedPairs(n, [&](std::size_t i, std::size_t j) {
        return u[order[i]] == u[order[j]] && v[order[i]] == v[order[j]];
      });

  std::vector<double> vs(n), scratch;
  for (std::size_t i = 0; i < n; ++i) vs[i] = v[order[i]];
  const std::uint64_t swaps = CountInversions(vs, scratch);
  const std::uint64_t ties_v =
      TiedPairs(n, [&](std::size_t i, std::size_t j) { return vs[i] == vs[j]; });

  const double denom_u = static_cast<double>(n0 - ties_u);
  const double denom_v = static_cast<double>(n0 - ties_v);
  if (denom_u == 0.0 || denom_v == 0.0) return {0.0, true};
  // concordant - discordant
  const double diff = static_cast<double>(n0) - static_cast<double>(ties_u) -
                      static_cast<double>(ties_v) +
                      static_cast<double>(ties_joint) -
                      2.0 * static_cast<double>(swaps);
  return {std::clamp(diff / std::sqrt(denom_u * denom_v), -1.0, 1.0), false};
}

MahalanobisMetric::MahalanobisMetric(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw InvalidArgumentError("covariance must be a non-empty square matrix");
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw InvalidArgumentError("covariance must be symmetric");
  }
  llt_.compute(covariance);
  if (llt_.info() != Eigen::Success) {
    throw UndefinedMeasureError("covariance is not positive definite");
  }
}

MahalanobisMetric MahalanobisMetric::FromSamples(
    const std::vector<Vector>& samples, double ridge_fraction) {
  if (samples.size() < 2) {
    throw InvalidArgumentError("covariance estimate needs at least 2 samples");
  }
  const auto d = static_cast<Eigen::Index>(samples.front().size());
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(samples[i].size()) != d) {
      throw InvalidArgumentError("covariance samples have mixed dimensions");
    }
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(samples[i].data(), d);
  }
  x.rowwise() -= x.colwise().mean();
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());
  const double ridge = ridge_fraction * cov.diagonal().mean();
  if (!(ridge > 0.0)) {
    throw UndefinedMeasureError(
        "cannot regularize covariance: samples have zero variance");
  }
  cov.diagonal().array() += ridge;
  return MahalanobisMetric(cov);
}

double MahalanobisMetric::Distance(std::span<const double> u,
                                   std::span<const double> v) const {
  CheckSameLength(u, v, "mahalanobis");
  if (static_cast<Eigen::Index>(u.size()) != llt_.rows()) {
    throw InvalidArgumentError("mahalanobis: vector/covariance dimension mismatch");
  }
  Eigen::VectorXd diff(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) diff(Eigen::Index(i)) = u[i] - v[i];
  const Eigen::VectorXd z = llt_.matrixL().solve(diff);
  return std::sqrt(z.squaredNorm());
}

Dependence ComponentwiseDependence(std::span<const double> u,
                                   std::span<const double> v,
                                   DependenceKind kind,
                                   const MahalanobisMetric* metric) {
  CheckSameLength(u, v, "dependence");
  if (u.size() < 2) {
    throw InvalidArgumentError("componentwise dependence needs d >= 2");
  }
  switch (kind) {
    case DependenceKind::kPearson:
      return Pearson(u, v);
    case DependenceKind::kSpearman:
      return Spearman(u, v);
    case DependenceKind::kKendall:
      return KendallTauB(u, v);
    case DependenceKind::kDistanceCorrelation:
      return DistanceCorrelation(u, v);
    case DependenceKind::kNegMahalanobis:
      if (metric == nullptr) {
        throw InvalidArgumentError("mahalanobis needs a covariance");
      }
      return {-metric->Distance(u, v), false};
  }
  throw InvalidArgumentError("unknown dependence kind");
}

std::string_view MeasureName(Measure measure) {
  switch (measure) {
    case Measure::kCosine: return "cos";
    case Measure::kSetMeanCosine: return "setcos";
    case Measure::kPearson: return "pear";
    case Measure::kSpearman: return "spear";
    case Measure::kKendall: return "kend";
    case Measure::kDistanceCorrelation: return "dist";
    case Measure::kNegMahalanobis: return "maha";
  }
  return "?";
}

namespace {

DependenceKind ToDependenceKind(Measure measure) {
  switch (measure) {
    case Measure::kPearson: return DependenceKind::kPearson;
    case Measure::kSpearman: return DependenceKind::kSpearman;
    case Measure::kKendall: return DependenceKind::kKendall;
    case Measure::kDistanceCorrelation: return DependenceKind::kDistanceCorrelation;
    case Measure::kNegMahalanobis: return DependenceKind::kNegMahalanobis;
    default: break;
  }
  throw InvalidArgumentError("not a componentwise measure");
}

struct Resolved {
  std::vector<std::string> names;
  std::vector<std::vector<Vector>> sets;  // one or more vectors per word
};

AssociationMatrix Fill(const Resolved& sources, const Resolved& targets,
                       Measure measure, std::string model) {
  if (sources.names.empty()) throw DataError("no dataset source resolved");
  if (targets.names.empty()) throw DataError("no dataset target resolved");
  AssociationMatrix m = MakeAssociationMatrix(
      sources.names, targets.names, std::string(MeasureName(measure)),
      std::move(model));

  const bool set_measure =
      measure == Measure::kCosine || measure == Measure::kSetMeanCosine;
  if (set_measure) {
    for (std::size_t s = 0; s < sources.names.size(); ++s) {
      for (std::size_t t = 0; t < targets.names.size(); ++t) {
        m.values(Eigen::Index(s), Eigen::Index(t)) =
            SetMeanCosine(sources.sets[s], targets.sets[t]);
      }
    }
    return m;
  }

  std::vector<Vector> src(sources.sets.size()), tgt(targets.sets.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = MeanPool(sources.sets[i]);
  for (std::size_t i = 0; i < tgt.size(); ++i) tgt[i] = MeanPool(targets.sets[i]);

  std::optional<MahalanobisMetric> metric;
  if (measure == Measure::kNegMahalanobis) {
    std::vector<Vector> all = src;
    all.insert(all.end(), tgt.begin(), tgt.end());
    metric.emplace(MahalanobisMetric::FromSamples(all));
  }
  const DependenceKind kind = ToDependenceKind(measure);
  for (std::size_t s = 0; s < src.size(); ++s) {
    for (std::size_t t = 0; t < tgt.size(); ++t) {
      m.values(Eigen::Index(s), Eigen::Index(t)) =
          ComponentwiseDependence(src[s], tgt[t], kind,
                                  metric ? &*metric : nullptr)
              .value;
    }
  }
  return m;
}

}  // namespace

AssociationMatrix BuildAssociationMatrix(const EmbeddingStore& store,
                                         const RelationDataset& dataset,
                                         Measure measure, bool lowercase,
                                         MissingWords* missing) {
  auto resolve = [&](const std::vector<std::string>& words,
                     std::vector<std::string>* unresolved) {
    Resolved r;
    for (const auto& word : words) {
      auto v = LookupPhrase(store, word, lowercase);
      if (!v || IsZero(*v)) {
        if (unresolved) unresolved->push_back(word);
        continue;
      }
      r.names.push_back(word);
      r.sets.push_back({std::move(*v)});
    }
    return r;
  };
  MissingWords local;
  if (missing == nullptr) missing = &local;
  *missing = {};
  const Resolved sources = resolve(dataset.Sources(), &missing->sources);
  const Resolved targets = resolve(dataset.targets, &missing->targets);
  return Fill(sources, targets, measure, store.name());
}

AssociationMatrix BuildAssociationMatrix(const ContextualVectorSet& sources,
                                         const ContextualVectorSet& targets,
                                         const RelationDataset& dataset,
                                         Measure measure,
                                         MissingWords* missing) {
  auto resolve = [](const ContextualVectorSet& set,
                    const std::vector<std::string>& words,
                    std::vector<std::string>* unresolved) {
    Resolved r;
    for (const auto& word : words) {
      const auto* entries = set.Find(word);
      std::vector<Vector> vectors;
      if (entries != nullptr) {
        for (const auto& e : *entries) {
          if (!IsZero(e.vector)) vectors.push_back(e.vector);
        }
      }
      if (vectors.empty()) {
        if (unresolved) unresolved->push_back(word);
        continue;
      }
      r.names.push_back(word);
      r.sets.push_back(std::move(vectors));
    }
    return r;
  };
  if (sources.dimension() != targets.dimension()) {
    throw DataError("source and target vectors have different dimensions");
  }
  MissingWords local;
  if (missing == nullptr) missing = &local;
  *missing = {};
  const Resolved src = resolve(sources, dataset.Sources(), &missing->sources);
  const Resolved tgt = resolve(targets, dataset.targets, &missing->targets);
  return Fill(src, tgt, measure, sources.model());
}

}  // namespace relprobe
