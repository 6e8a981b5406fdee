#include "uaf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uaf {

L1Norm::L1Norm(double weight) : weight_(weight) {
  require(weight >= 0.0, Errc::invalid_argument, "l1 weight must be nonnegative");
}

double L1Norm::value(const Vec& x) const { return weight_ * x.lpNorm<1>(); }

Vec L1Norm::prox(const Vec& y, double t) const {
  require(t > 0.0, Errc::invalid_argument, "prox step must be positive");
  return soft_threshold(y, weight_ * t);
}

double L1Norm::subgradient_residual(const Vec& x, const Vec& grad) const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double r;
    if (x[i] > 0.0) {
      r = std::abs(grad[i] + weight_);
    } else if (x[i] < 0.0) {
      r = std::abs(grad[i] - weight_);
    } else {
      r = std::max(0.0, std::abs(grad[i]) - weight_);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

Vec soft_threshold(const Vec& y, double threshold) {
  Vec out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mag = std::abs(y[i]) - threshold;
    out[i] = mag > 0.0 ? std::copysign(mag, y[i]) : 0.0;
  }
  return out;
}

Vec ObjectiveOracle::hess_vec(const Vec& /*x*/, const Vec& /*v*/) const {
  throw Error(Errc::unsupported_order, "oracle does not provide Hessian-vector products");
}

double ObjectiveOracle::value(const Vec& x) const {
  const SimpleConvexTerm* l = composite_part();
  return smooth_value(x) + (l ? l->value(x) : 0.0);
}

Mat dense_hessian(const ObjectiveOracle& oracle, const Vec& x) {
  const int d = oracle.dim();
  Mat h(d, d);
  Vec e = Vec::Zero(d);
  for (int j = 0; j < d; ++j) {
    e[j] = 1.0;
    h.col(j) = oracle.hess_vec(x, e);
    e[j] = 0.0;
  }
  return 0.5 * (h + h.transpose());
}

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

double scaled_step(const Vec& x, double power) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::max(1.0, x.size() ? x.lpNorm<Eigen::Infinity>() : 0.0);
  return scale * std::pow(eps, power);
}

}  // namespace

FiniteDifferenceReport gradient_error(const ObjectiveOracle& oracle, const Vec& x, double tol) {
  require(tol > 0.0, Errc::invalid_argument, "tolerance must be positive");
  require(x.size() == oracle.dim(), Errc::dimension_mismatch, "point has wrong dimension");

  const double f0 = oracle.smooth_value(x);
  const Vec grad = oracle.gradient(x);
  if (!std::isfinite(f0) || !all_finite(grad)) {
    throw Error(Errc::evaluation_failure, "non-finite value or gradient at the check point");
  }

  const double h = scaled_step(x, 1.0 / 3.0);
  FiniteDifferenceReport report;
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = oracle.smooth_value(probe);
    probe[i] = x[i] - h;
    const double fm = oracle.smooth_value(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error(Errc::evaluation_failure, "non-finite value near the check point");
    }
    const double fd = (fp - fm) / (2.0 * h);
    const double err = std::abs(grad[i] - fd) / std::max(1.0, std::abs(grad[i]));
    report.max_error = std::max(report.max_error, err);
  }
  report.passed = report.max_error < tol;
  return report;
}

bool check_gradient(const ObjectiveOracle& oracle, const Vec& x, double tol) {
  return gradient_error(oracle, x, tol).passed;
}

FiniteDifferenceReport hess_vec_error(const ObjectiveOracle& oracle, const Vec& x, const Vec& v,
                                      double tol) {
  require(tol > 0.0, Errc::invalid_argument, "tolerance must be positive");
  if (oracle.smooth_order() < 2) {
    throw Error(Errc::unsupported_order, "Hessian check needs smooth_order >= 2");
  }
  require(x.size() == oracle.dim() && v.size() == oracle.dim(), Errc::dimension_mismatch,
          "point or direction has wrong dimension");

  const Vec hv = oracle.hess_vec(x, v);
  if (!all_finite(hv)) throw Error(Errc::evaluation_failure, "non-finite Hessian-vector product");

  const double h = scaled_step(x, 0.5);
  const Vec gp = oracle.gradient(x + h * v);
  const Vec gm = oracle.gradient(x - h * v);
  if (!all_finite(gp) || !all_finite(gm)) {
    throw Error(Errc::evaluation_failure, "non-finite gradient near the check point");
  }
  const Vec fd = (gp - gm) / (2.0 * h);

  FiniteDifferenceReport report;
  report.max_error = (hv - fd).norm() / std::max(1.0, hv.norm());
  report.passed = report.max_error < tol;
  return report;
}

bool check_hess_vec(const ObjectiveOracle& oracle, const Vec& x, const Vec& v, double tol) {
  return hess_vec_error(oracle, x, v, tol).passed;
}

}  // namespace uaf
