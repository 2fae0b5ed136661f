// Independent reference implementations used as test oracles. These follow
// the textbook definitions directly and share no code with the library.
#ifndef RELPROBE_TESTS_ORACLES_H_
#define RELPROBE_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "relprobe/random.h"

namespace relprobe::oracle {

using Seq = std::vector<double>;

// O(n^2) double-centred distance matrices, dCov^2 = mean of the product.
inline double NaiveDcov2(const Seq& x, const Seq& y) {
  const std::size_t n = x.size();
  auto centred = [n](const Seq& v) {
    std::vector<Seq> d(n, Seq(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::fabs(v[i] - v[j]);
    Seq row(n, 0.0), col(n, 0.0);
    double all = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        row[i] += d[i][j] / n;
        col[j] += d[i][j] / n;
        all += d[i][j] / (double(n) * n);
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] += all - row[i] - col[j];
    return d;
  };
  const auto a = centred(x);
  const auto b = centred(y);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += a[i][j] * b[i][j];
  return s / (double(n) * n);
}

inline double NaiveDcor(const Seq& x, const Seq& y) {
  const double vx = NaiveDcov2(x, x);
  const double vy = NaiveDcov2(y, y);
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  const double r2 = NaiveDcov2(x, y) / std::sqrt(vx * vy);
  return std::sqrt(std::max(0.0, r2));
}

inline double Dot(const Seq& u, const Seq& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double Cos(const Seq& u, const Seq& v) {
  return Dot(u, v) / std::sqrt(Dot(u, u) * Dot(v, v));
}

inline double SetMeanCos(const std::vector<Seq>& xs, const std::vector<Seq>& as) {
  double s = 0.0;
  for (const auto& x : xs)
    for (const auto& a : as) s += Cos(x, a);
  return s / (double(xs.size()) * double(as.size()));
}

inline double Weat(const std::vector<Seq>& xs, const std::vector<Seq>& ys,
                   const std::vector<Seq>& as, const std::vector<Seq>& bs) {
  double total = 0.0;
  for (const auto& x : xs) {
    for (const auto& a : as) total += Cos(x, a);
    for (const auto& b : bs) total -= Cos(x, b);
  }
  for (const auto& y : ys) {
    for (const auto& a : as) total -= Cos(y, a);
    for (const auto& b : bs) total += Cos(y, b);
  }
  return total;
}

inline double Pearson(const Seq& u, const Seq& v) {
  const double n = double(u.size());
  double su = 0, sv = 0, suu = 0, svv = 0, suv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sv += v[i];
  }
  const double mu = su / n, mv = sv / n;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    svv += (v[i] - mv) * (v[i] - mv);
    suv += (u[i] - mu) * (v[i] - mv);
  }
  return suv / std::sqrt(suu * svv);
}

// Average ranks (1-based) by counting, O(n^2).
inline Seq Ranks(const Seq& v) {
  Seq r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double Spearman(const Seq& u, const Seq& v) {
  return Pearson(Ranks(u), Ranks(v));
}

// Kendall tau-b over all pairs.
inline double KendallB(const Seq& u, const Seq& v) {
  double conc = 0, disc = 0, tu = 0, tv = 0;
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = u[i] - u[j], b = v[i] - v[j];
      if (a == 0 && b == 0) continue;
      if (a == 0) {
        ++tu;
      } else if (b == 0) {
        ++tv;
      } else if ((a > 0) == (b > 0)) {
        ++conc;
      } else {
        ++disc;
      }
    }
  return (conc - disc) / std::sqrt((conc + disc + tu) * (conc + disc + tv));
}

inline Seq RandomSeq(Rng& rng, std::size_t n, double scale = 1.0) {
  Seq v(n);
  for (double& x : v) x = scale * rng.Normal();
  return v;
}

}  // namespace relprobe::oracle

#endif  // RELPROBE_TESTS_ORACLES_H_
