#include "uaf/taylor.hpp"

#include <algorithm>
#include <cmath>

namespace uaf {

TaylorModel TaylorModel::first_order(Vec center, double g0, Vec grad, const SimpleConvexTerm* composite) {
  require(center.size() == grad.size(), Errc::dimension_mismatch, "taylor: gradient size");
  TaylorModel m;
  m.center_ = std::move(center);
  m.order_ = 1;
  m.g0_ = g0;
  m.grad_ = std::move(grad);
  m.composite_ = composite;
  return m;
}

TaylorModel TaylorModel::second_order(Vec center, double g0, Vec grad, Mat hessian,
                                      const SimpleConvexTerm* composite) {
  require(hessian.rows() == center.size() && hessian.cols() == center.size(), Errc::dimension_mismatch,
          "taylor: Hessian size");
  TaylorModel m = first_order(std::move(center), g0, std::move(grad), composite);
  m.order_ = 2;
  m.dense_ = 0.5 * (hessian + hessian.transpose());
  return m;
}

TaylorModel TaylorModel::second_order(Vec center, double g0, Vec grad, HessApply hess,
                                      const SimpleConvexTerm* composite) {
  require(static_cast<bool>(hess), Errc::invalid_argument, "taylor: empty Hessian operator");
  TaylorModel m = first_order(std::move(center), g0, std::move(grad), composite);
  m.order_ = 2;
  m.hess_ = std::move(hess);
  return m;
}

Vec TaylorModel::hess_apply(const Vec& v) const {
  require(order_ >= 2, Errc::wrong_regime, "taylor: first-order model has no Hessian");
  if (dense_) return *dense_ * v;
  return hess_(v);
}

Mat TaylorModel::dense_hessian(int cap) const {
  require(order_ >= 2, Errc::wrong_regime, "taylor: first-order model has no Hessian");
  if (dense_) return *dense_;
  require(dim() <= cap, Errc::capability,
          "taylor: dense Hessian unavailable for d = " + std::to_string(dim()));
  Mat h(dim(), dim());
  Vec e = Vec::Zero(dim());
  for (int j = 0; j < dim(); ++j) {
    e[j] = 1.0;
    h.col(j) = hess_(e);
    e[j] = 0.0;
  }
  return 0.5 * (h + h.transpose());
}

double TaylorModel::smooth_value(const Vec& x) const {
  const Vec u = x - center_;
  double v = g0_ + grad_.dot(u);
  if (order_ >= 2) v += 0.5 * u.dot(hess_apply(u));
  return v;
}

Vec TaylorModel::smooth_gradient(const Vec& x) const {
  if (order_ < 2) return grad_;
  return grad_ + hess_apply(x - center_);
}

double TaylorModel::evaluate(const Vec& x) const {
  return smooth_value(x) + (composite_ ? composite_->value(x) : 0.0);
}

LowerModel::LowerModel(Vec center, double g0, Vec grad, const SimpleConvexTerm* composite)
    : center_(std::move(center)), g0_(g0), grad_(std::move(grad)), composite_(composite) {}

double LowerModel::evaluate(const Vec& x) const {
  return g0_ + grad_.dot(x - center_) + (composite_ ? composite_->value(x) : 0.0);
}

TaylorModel build_taylor(const ObjectiveOracle& oracle, const Vec& y, int p) {
  require(p >= 1, Errc::invalid_argument, "taylor: order must be >= 1");
  require(p <= oracle.smooth_order() && p <= 2, Errc::unsupported_order,
          "taylor: order " + std::to_string(p) + " not available");
  require(y.size() == oracle.dim(), Errc::dimension_mismatch, "taylor: center has wrong dimension");
  const double g0 = oracle.smooth_value(y);
  Vec grad = oracle.gradient(y);
  if (p == 1) return TaylorModel::first_order(y, g0, std::move(grad), oracle.composite_part());
  return TaylorModel::second_order(
      y, g0, std::move(grad), [&oracle, y](const Vec& v) { return oracle.hess_vec(y, v); },
      oracle.composite_part());
}

LowerModel build_lower(const ObjectiveOracle& oracle, const Vec& y) {
  return LowerModel(y, oracle.smooth_value(y), oracle.gradient(y), oracle.composite_part());
}

ModelErrorBounds model_error_bounds(const ObjectiveOracle& oracle, const Vec& y, const Vec& x, int p,
                                    double nu, double L) {
  require(L > 0.0, Errc::invalid_argument, "model bounds: L must be positive");
  require(nu >= 0.0 && nu <= 1.0, Errc::invalid_argument, "model bounds: nu must lie in [0, 1]");
  const TaylorModel model = build_taylor(oracle, y, p);
  const double r = (x - y).norm();
  ModelErrorBounds out;
  // l cancels in both differences, so only the smooth parts are compared.
  out.value_gap = std::abs(oracle.smooth_value(x) - model.smooth_value(x));
  out.grad_gap = (oracle.gradient(x) - model.smooth_gradient(x)).norm();
  if (r > 0.0) {
    out.value_bound = L / p * std::pow(r, p + nu);
    out.grad_bound = L * std::pow(r, p + nu - 1.0);
  }
  return out;
}

namespace {

Mat second_moment(const SparseDataset& data) {
  Mat b = Mat::Zero(data.d, data.d);
  for (const auto& row : data.rows) {
    for (const auto& ei : row.features) {
      for (const auto& ej : row.features) b(ei.index - 1, ej.index - 1) += ei.value * ej.value;
    }
  }
  return b / static_cast<double>(data.n());
}

double spectral_norm_power(const SparseDataset& data) {
  // B is PSD, so power iteration on v -> (1/n) sum a (a.v) converges to lambda_max.
  Vec v = Vec::Constant(data.d, 1.0 / std::sqrt(static_cast<double>(data.d)));
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Vec w = Vec::Zero(data.d);
    for (const auto& row : data.rows) {
      double av = 0.0;
      for (const auto& e : row.features) av += e.value * v[e.index - 1];
      for (const auto& e : row.features) w[e.index - 1] += av * e.value;
    }
    w /= static_cast<double>(data.n());
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= 1e-13 * next) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace

double logistic_smoothness_constant(const SparseDataset& data, double p_norm, double nu) {
  require(data.n() > 0 && data.d > 0, Errc::invalid_argument, "smoothness constant: empty dataset");
  require(nu >= 0.0 && nu <= 1.0, Errc::invalid_argument, "smoothness constant: nu must lie in [0, 1]");
  require(p_norm >= 1.0 && p_norm <= 2.0, Errc::invalid_argument, "smoothness constant: p_norm must lie in [1, 2]");

  double op_norm = 0.0;
  double max_row = 0.0;
  if (p_norm == 2.0) {
    if (data.d <= 2000) {
      Eigen::SelfAdjointEigenSolver<Mat> eig(second_moment(data), Eigen::EigenvaluesOnly);
      op_norm = std::max(0.0, eig.eigenvalues().maxCoeff());
    } else {
      op_norm = spectral_norm_power(data);
    }
    for (const auto& row : data.rows) {
      double s = 0.0;
      for (const auto& e : row.features) s += e.value * e.value;
      max_row = std::max(max_row, std::sqrt(s));
    }
  } else if (p_norm == 1.0) {
    require(data.d <= 2000, Errc::capability, "smoothness constant: p_norm = 1 limited to d <= 2000");
    op_norm = second_moment(data).cwiseAbs().maxCoeff();
    for (const auto& row : data.rows) {
      for (const auto& e : row.features) max_row = std::max(max_row, std::abs(e.value));
    }
  } else {
    throw Error(Errc::capability, "smoothness constant: only p_norm in {1, 2} is computed; supply L directly");
  }
  return nu == 0.0 ? op_norm : op_norm * std::pow(max_row, nu);
}

}  // namespace uaf
