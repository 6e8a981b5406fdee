#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "uaf/problems.hpp"

namespace test {

using uaf::Mat;
using uaf::Vec;

/// Bisection on a sign change of f over [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  return Vec::NullaryExpr(n, [&] { return normal(rng); });
}

inline Mat random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat g = Mat::NullaryExpr(n, n, [&] { return normal(rng); });
  return 0.5 * (g + g.transpose());
}

/// 1-D logistic loss log(1 + exp(-x)) as a single-row dataset.
inline std::shared_ptr<uaf::LogisticObjective> logistic_1d() {
  auto data = std::make_shared<uaf::SparseDataset>();
  data->d = 1;
  data->rows.push_back({1.0, {{1, 1.0}}});
  return std::make_shared<uaf::LogisticObjective>(data);
}

}  // namespace test
