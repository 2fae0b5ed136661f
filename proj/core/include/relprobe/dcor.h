#ifndef RELPROBE_DCOR_H_
#define RELPROBE_DCOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace relprobe {

// A dependence value together with a flag for inputs where the statistic
// is undefined (constant sequence) and has been defined as 0.
struct Dependence {
  double value = 0.0;
  bool degenerate = false;
};

// Distance covariance machinery for a fixed pair of samples, reusable when
// the second sample is permuted (permutation tests). Preparation is
// O(n log n); each evaluation is O(n log n) with no further sorting.
class DistanceCorrelationPlan {
 public:
  // Throws InvalidArgumentError on a length mismatch or n < 2.
  DistanceCorrelationPlan(std::span<const double> x,
                          std::span<const double> y);

  std::size_t size() const { return x_.centered.size(); }
  double dvar_x() const { return dvar_x_; }
  double dvar_y() const { return dvar_y_; }

  // dCov^2(x, y).
  double Dcov2() const;
  // dCov^2(x, y o perm) where (y o perm)_i = y_{perm[i]}.
  double Dcov2(std::span<const std::size_t> perm) const;

  Dependence Dcor() const;
  Dependence Dcor(std::span<const std::size_t> perm) const;

 private:
  struct Side {
    std::vector<double> centered;
    std::vector<double> row_sums;      // sum_j |v_i - v_j|
    std::vector<std::size_t> order;    // indices sorted by value
    std::vector<std::size_t> rank;     // dense rank, 1-based
    std::size_t max_rank = 0;
    double total = 0.0;                // sum of row_sums
    bool constant = false;
  };
  static Side Prepare(std::span<const double> v);
  // sum_{i<j} |x_i - x_j| |y_i - y_j| for the pairing y_{perm[i]} with x_i.
  double PairProductSum(const Side& a, const Side& b,
                        std::span<const std::size_t> perm) const;
  double Dcov2Impl(const Side& a, const Side& b,
                   std::span<const std::size_t> perm) const;
  Dependence Finish(double dcov2) const;

  Side x_;
  Side y_;
  std::vector<std::size_t> identity_;
  double dvar_x_ = 0.0;
  double dvar_y_ = 0.0;
};

// Squared sample distance covariance of two real sequences (V-statistic,
// Szekely, Rizzo & Bakirov 2007), i.e. the mean of the elementwise product
// of the double-centered |x_i - x_j| and |y_i - y_j| matrices.
//
// Runs in O(n log n): row sums of the distance matrices come from prefix
// sums over the sorted sample, and sum_ij |x_i-x_j||y_i-y_j| is obtained
// from the concordant-pair sum accumulated in Fenwick trees.
double DistanceCovarianceSquared(std::span<const double> x,
                                 std::span<const double> y);

// Sample distance correlation in [0, 1]. Zero with `degenerate` set when
// either sequence is constant. Throws InvalidArgumentError on a length
// mismatch or n < 2.
Dependence DistanceCorrelation(std::span<const double> x,
                               std::span<const double> y);

}  // namespace relprobe

#endif  // RELPROBE_DCOR_H_
