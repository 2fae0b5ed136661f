#include "relprobe/dcor.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relprobe/error.h"

namespace relprobe {
namespace {

// Fenwick tree over ranks 1..n holding count, sum x, sum y, sum xy.
class Fenwick4 {
 public:
  explicit Fenwick4(std::size_t n) : tree_(n + 1) {}

  void Add(std::size_t rank, double x, double y) {
    for (std::size_t i = rank; i < tree_.size(); i += i & (~i + 1)) {
      Node& node = tree_[i];
      node.count += 1.0;
      node.sx += x;
      node.sy += y;
      node.sxy += x * y;
    }
  }

  struct Node {
    double count = 0.0, sx = 0.0, sy = 0.0, sxy = 0.0;
  };

  // Sums over ranks 1..rank.
  Node Prefix(std::size_t rank) const {
    Node acc;
    for (std::size_t i = rank; i > 0; i -= i & (~i + 1)) {
      acc.count += tree_[i].count;
      acc.sx += tree_[i].sx;
      acc.sy += tree_[i].sy;
      acc.sxy += tree_[i].sxy;
    }
    return acc;
  }

 private:
  std::vector<Node> tree_;
};

void CheckSizes(std::size_t nx, std::size_t ny) {
  if (nx != ny) {
    throw InvalidArgumentError("distance correlation: length mismatch (" +
                               std::to_string(nx) + " vs " +
                               std::to_string(ny) + ")");
  }
  if (nx < 2) {
    throw InvalidArgumentError("distance correlation needs n >= 2");
  }
}

}  // namespace

DistanceCorrelationPlan::Side DistanceCorrelationPlan::Prepare(
    std::span<const double> v) {
  Side side;
  const std::size_t n = v.size();
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) /
                      static_cast<double>(n);
  side.centered.resize(n);
  for (std::size_t i = 0; i < n; ++i) side.centered[i] = v[i] - mean;

  side.order.resize(n);
  std::iota(side.order.begin(), side.order.end(), std::size_t{0});
  std::stable_sort(side.order.begin(), side.order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  side.rank.resize(n);
  std::size_t rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || v[side.order[k]] != v[side.order[k - 1]]) ++rank;
    side.rank[side.order[k]] = rank;
  }
  side.max_rank = rank;
  side.constant = rank == 1;

  // Row sums from prefix sums over the sorted sample.
  const auto& c = side.centered;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + c[side.order[k]];
  side.row_sums.resize(n);
  const double total = prefix[n];
  for (std::size_t k = 0; k < n; ++k) {
    const double value = c[side.order[k]];
    const double below = value * static_cast<double>(k) - prefix[k];
    const double above =
        (total - prefix[k + 1]) - value * static_cast<double>(n - k - 1);
    side.row_sums[side.order[k]] = below + above;
  }
  side.total = std::accumulate(side.row_sums.begin(), side.row_sums.end(), 0.0);
  return side;
}

DistanceCorrelationPlan::DistanceCorrelationPlan(std::span<const double> x,
                                                 std::span<const double> y) {
  CheckSizes(x.size(), y.size());
  x_ = Prepare(x);
  y_ = Prepare(y);
  identity_.resize(x.size());
  std::iota(identity_.begin(), identity_.end(), std::size_t{0});
  dvar_x_ = x_.constant ? 0.0 : std::max(0.0, Dcov2Impl(x_, x_, identity_));
  dvar_y_ = y_.constant ? 0.0 : std::max(0.0, Dcov2Impl(y_, y_, identity_));
}

double DistanceCorrelationPlan::PairProductSum(
    const Side& a, const Side& b, std::span<const std::size_t> perm) const {
  const std::size_t n = a.centered.size();
  // sum_{i<j} |da||db| = -sum_{i<j} da db + 2 * (sum over concordant pairs).
  double sum_a = 0.0, sum_b = 0.0, sum_ab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double av = a.centered[i];
    const double bv = b.centered[perm[i]];
    sum_a += av;
    sum_b += bv;
    sum_ab += av * bv;
  }
  const double all_pairs = static_cast<double>(n) * sum_ab - sum_a * sum_b;

  Fenwick4 tree(b.max_rank);
  double concordant = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = a.order[k];
    const double av = a.centered[i];
    const double bv = b.centered[perm[i]];
    const std::size_t r = b.rank[perm[i]];
    const auto below = tree.Prefix(r - 1);
    concordant += av * bv * below.count - av * below.sy - bv * below.sx +
                  below.sxy;
    tree.Add(r, av, bv);
  }
  return 2.0 * concordant - all_pairs;
}

double DistanceCorrelationPlan::Dcov2Impl(
    const Side& a, const Side& b, std::span<const std::size_t> perm) const {
  const double n = static_cast<double>(a.centered.size());
  const double s1 = 2.0 * PairProductSum(a, b, perm) / (n * n);
  const double s2 = (a.total / (n * n)) * (b.total / (n * n));
  double s3 = 0.0;
  for (std::size_t i = 0; i < a.row_sums.size(); ++i) {
    s3 += a.row_sums[i] * b.row_sums[perm[i]];
  }
  s3 /= n * n * n;
  return s1 + s2 - 2.0 * s3;
}

double DistanceCorrelationPlan::Dcov2() const {
  return Dcov2Impl(x_, y_, identity_);
}

double DistanceCorrelationPlan::Dcov2(std::span<const std::size_t> perm) const {
  if (perm.size() != size()) {
    throw InvalidArgumentError("permutation length mismatch");
  }
  return Dcov2Impl(x_, y_, perm);
}

Dependence DistanceCorrelationPlan::Finish(double dcov2) const {
  if (x_.constant || y_.constant || dvar_x_ <= 0.0 || dvar_y_ <= 0.0) {
    return {0.0, true};
  }
  const double r2 = std::max(0.0, dcov2) / std::sqrt(dvar_x_ * dvar_y_);
  return {std::min(1.0, std::sqrt(r2)), false};
}

Dependence DistanceCorrelationPlan::Dcor() const { return Finish(Dcov2()); }

Dependence DistanceCorrelationPlan::Dcor(
    std::span<const std::size_t> perm) const {
  return Finish(Dcov2(perm));
}

double DistanceCovarianceSquared(std::span<const double> x,
                                 std::span<const double> y) {
  return std::max(0.0, DistanceCorrelationPlan(x, y).Dcov2());
}

Dependence DistanceCorrelation(std::span<const double> x,
                               std::span<const double> y) {
  return DistanceCorrelationPlan(x, y).Dcor();
}

}  // namespace relprobe
