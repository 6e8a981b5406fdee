#pragma once

#include <functional>
#include <optional>

#include "uaf/oracle.hpp"
#include "uaf/problems.hpp"

namespace uaf {

/// Order-p Taylor model of g around a center, with l carried unlinearized:
///   g(y) + <grad, x - y> + 1/2 <H (x - y), x - y> + l(x)   (Hessian term only for p = 2).
class TaylorModel {
 public:
  using HessApply = std::function<Vec(const Vec&)>;

  static TaylorModel first_order(Vec center, double g0, Vec grad, const SimpleConvexTerm* composite = nullptr);
  static TaylorModel second_order(Vec center, double g0, Vec grad, Mat hessian,
                                  const SimpleConvexTerm* composite = nullptr);
  static TaylorModel second_order(Vec center, double g0, Vec grad, HessApply hess,
                                  const SimpleConvexTerm* composite = nullptr);

  const Vec& center() const { return center_; }
  int order() const { return order_; }
  int dim() const { return static_cast<int>(center_.size()); }
  double g_at_center() const { return g0_; }
  const Vec& grad_at_center() const { return grad_; }
  const SimpleConvexTerm* composite_part() const { return composite_; }

  /// H v. Throws wrong_regime for order-1 models.
  Vec hess_apply(const Vec& v) const;
  bool has_dense_hessian() const { return dense_.has_value(); }
  /// Dense H, assembled from products if needed. Throws capability when d > cap.
  Mat dense_hessian(int cap = 64) const;

  /// Smooth part of the model at x (excludes l).
  double smooth_value(const Vec& x) const;
  Vec smooth_gradient(const Vec& x) const;
  /// Full model including l(x).
  double evaluate(const Vec& x) const;

 private:
  TaylorModel() = default;

  Vec center_;
  int order_ = 1;
  double g0_ = 0.0;
  Vec grad_;
  HessApply hess_;
  std::optional<Mat> dense_;
  const SimpleConvexTerm* composite_ = nullptr;
};

/// Linearization g(y) + <grad g(y), x - y> + l(x); a global lower bound on f for convex g.
class LowerModel {
 public:
  LowerModel(Vec center, double g0, Vec grad, const SimpleConvexTerm* composite = nullptr);

  double evaluate(const Vec& x) const;
  const Vec& center() const { return center_; }

 private:
  Vec center_;
  double g0_;
  Vec grad_;
  const SimpleConvexTerm* composite_;
};

/// The model keeps a pointer to the oracle's composite part; the oracle must outlive it.
TaylorModel build_taylor(const ObjectiveOracle& oracle, const Vec& y, int p);
LowerModel build_lower(const ObjectiveOracle& oracle, const Vec& y);

struct ModelErrorBounds {
  double value_gap = 0.0;
  double grad_gap = 0.0;
  double value_bound = 0.0;
  double grad_bound = 0.0;

  bool holds(double rel_tol = 1e-9) const {
    return value_gap <= value_bound * (1.0 + rel_tol) + 1e-14 &&
           grad_gap <= grad_bound * (1.0 + rel_tol) + 1e-14;
  }
};

ModelErrorBounds model_error_bounds(const ObjectiveOracle& oracle, const Vec& y, const Vec& x, int p,
                                    double nu, double L);

/// ||B||_{p,q} max_j ||a_j||_q^nu with B = (1/n) sum_j a_j a_j^T and 1/p + 1/q = 1.
/// Supported for p_norm = 2 (spectral norm) and p_norm = 1 (largest |B_ij|);
/// other values throw capability.
double logistic_smoothness_constant(const SparseDataset& data, double p_norm, double nu);

}  // namespace uaf
