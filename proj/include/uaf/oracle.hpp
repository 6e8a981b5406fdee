#pragma once

#include <memory>
#include <string>

#include "uaf/common.hpp"

namespace uaf {

/// The simple (prox-friendly) convex part l of a composite objective f = g + l.
class SimpleConvexTerm {
 public:
  virtual ~SimpleConvexTerm() = default;

  virtual double value(const Vec& x) const = 0;

  /// argmin_x { l(x) + ||x - y||^2 / (2 t) }, t > 0.
  virtual Vec prox(const Vec& y, double t) const = 0;

  /// Distance from -grad to the subdifferential of l at x; used for stationarity checks.
  virtual double subgradient_residual(const Vec& x, const Vec& grad) const = 0;
};

/// l(x) = weight * ||x||_1.
class L1Norm final : public SimpleConvexTerm {
 public:
  explicit L1Norm(double weight);

  double weight() const { return weight_; }
  double value(const Vec& x) const override;
  Vec prox(const Vec& y, double t) const override;
  double subgradient_residual(const Vec& x, const Vec& grad) const override;

 private:
  double weight_;
};

Vec soft_threshold(const Vec& y, double threshold);

/// Composite objective f = g + l. Implementations must be safe to call from
/// several threads at once; they hold no mutable state.
class ObjectiveOracle {
 public:
  virtual ~ObjectiveOracle() = default;

  virtual int dim() const = 0;

  /// Highest derivative order of g the oracle serves (1 or 2 for shipped problems).
  virtual int smooth_order() const = 0;

  virtual double smooth_value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;

  /// Hessian of g applied to v. Only oracles with smooth_order() >= 2 override this.
  virtual Vec hess_vec(const Vec& x, const Vec& v) const;

  /// l, or nullptr when l == 0.
  virtual const SimpleConvexTerm* composite_part() const { return nullptr; }

  /// Stable identity of the problem instance for caching; empty disables caching.
  virtual std::string fingerprint() const { return {}; }

  double value(const Vec& x) const;
};

/// Dense Hessian of g at x assembled column by column from hess_vec.
Mat dense_hessian(const ObjectiveOracle& oracle, const Vec& x);

struct FiniteDifferenceReport {
  bool passed = false;
  double max_error = 0.0;
};

/// Central-difference gradient check. Throws Errc::evaluation_failure when the
/// oracle yields a non-finite value or gradient at x.
bool check_gradient(const ObjectiveOracle& oracle, const Vec& x, double tol);
FiniteDifferenceReport gradient_error(const ObjectiveOracle& oracle, const Vec& x, double tol);

/// Central-difference check of hess_vec against the gradient. Throws
/// Errc::unsupported_order for first-order oracles.
bool check_hess_vec(const ObjectiveOracle& oracle, const Vec& x, const Vec& v, double tol);
FiniteDifferenceReport hess_vec_error(const ObjectiveOracle& oracle, const Vec& x, const Vec& v,
                                      double tol);

}  // namespace uaf
