#include "uaf/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uaf {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

const TaylorModel& checked_model(const StepSpec& spec) {
  require(spec.model != nullptr, Errc::invalid_argument, "step: missing model");
  require(spec.reg_coeff > 0.0 && std::isfinite(spec.reg_coeff), Errc::invalid_argument,
          "step: reg_coeff must be positive and finite");
  require(spec.power >= 2.0, Errc::invalid_argument, "step: power must be >= 2");
  return *spec.model;
}

void require_second_order_smooth(const TaylorModel& model) {
  require(model.order() == 2, Errc::wrong_regime, "step: solver needs an order-2 model");
  require(model.composite_part() == nullptr, Errc::capability,
          "step: composite term with an order-2 model is not supported");
}

StepResult finish(const StepSpec& spec, Vec x, int iterations, bool converged) {
  StepResult out;
  out.displacement_norm = (x - spec.model->center()).norm();
  out.stationarity_residual = regularized_model_residual(spec, x);
  out.x_new = std::move(x);
  out.inner_iterations = iterations;
  out.converged = converged;
  return out;
}

// Regularizer Hessian M * s * ||u||^{s-4} ((s-2) u u^T + ||u||^2 I) applied to v.
Vec reg_hess_apply(const Vec& u, const Vec& v, double m, double s) {
  const double nu = u.norm();
  if (nu == 0.0) return s == 2.0 ? Vec(2.0 * m * v) : Vec(Vec::Zero(v.size()));
  return m * s * std::pow(nu, s - 2.0) * (v + (s - 2.0) * u * (u.dot(v) / (nu * nu)));
}

struct SecularResult {
  Vec y;
  int iterations = 0;
};

// Minimizes <gh, y> + 1/2 sum lam_i y_i^2 + m ||y||^s in the eigenbasis of H.
SecularResult secular_solve(const Vec& lam, const Vec& gh, double m, double s) {
  const Eigen::Index n = lam.size();
  const double lmin = lam.minCoeff();
  const double lscale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  SecularResult out;

  if (s == 2.0) {
    const double sig = 2.0 * m;
    require(lmin + sig > 0.0, Errc::capability, "step: model plus quadratic regularizer is unbounded below");
    out.y = -gh.array() / (lam.array() + sig);
    return out;
  }

  const double gnorm = gh.norm();
  auto sigma_of = [&](double r) { return s * m * std::pow(r, s - 2.0); };
  auto r_of = [&](double sig) { return std::pow(sig / (s * m), 1.0 / (s - 2.0)); };
  auto norm_u = [&](double sig) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lam[i] + sig;
      if (gh[i] == 0.0) continue;
      if (den <= 0.0) return std::numeric_limits<double>::infinity();
      acc += (gh[i] / den) * (gh[i] / den);
    }
    return std::sqrt(acc);
  };

  const double sig_lo = std::max(0.0, -lmin);
  const double r_lo = sig_lo > 0.0 ? r_of(sig_lo) : 0.0;

  // Hard case: gradient (numerically) orthogonal to the bottom eigenspace and the
  // remaining components too short to reach the boundary.
  if (sig_lo > 0.0 || gnorm == 0.0) {
    const double tiny = 1e-14 * lscale;
    bool orthogonal = true;
    double rest = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lam[i] + sig_lo;
      if (den <= tiny) {
        if (std::abs(gh[i]) > 1e-14 * std::max(gnorm, 1e-300)) orthogonal = false;
      } else {
        rest += (gh[i] / den) * (gh[i] / den);
      }
    }
    if (gnorm == 0.0 && sig_lo == 0.0) {
      out.y = Vec::Zero(n);
      return out;
    }
    if (orthogonal && std::sqrt(rest) <= r_lo) {
      Vec y = Vec::Zero(n);
      Eigen::Index imin = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double den = lam[i] + sig_lo;
        if (den > tiny) y[i] = -gh[i] / den;
        if (lam[i] < lam[imin]) imin = i;
      }
      y[imin] += std::sqrt(std::max(0.0, r_lo * r_lo - y.squaredNorm()));
      out.y = std::move(y);
      return out;
    }
  }

  auto phi = [&](double r) { return norm_u(sigma_of(r)) - r; };
  double lo = r_lo;
  double hi = r_lo + std::pow(gnorm / (s * m), 1.0 / (s - 1.0));
  int guard = 0;
  while (phi(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    require(++guard < 2000, Errc::scalar_solve, "step: secular bracket expansion failed");
  }

  double r = hi;
  int it = 0;
  for (; it < 500; ++it) {
    const double sig = sigma_of(r);
    const double nu = norm_u(sig);
    const double f = nu - r;
    if (f > 0.0) lo = r; else hi = r;
    if (std::abs(f) <= 4.0 * kEps * std::max(r, 1e-300) || hi - lo <= 4.0 * kEps * hi) break;

    double d3 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lam[i] + sig;
      d3 += gh[i] * gh[i] / (den * den * den);
    }
    const double dsig = s * (s - 2.0) * m * std::pow(r, s - 3.0);
    const double df = -d3 / nu * dsig - 1.0;
    double next = r - f / df;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    r = next;
  }
  const double sig = sigma_of(r);
  out.y = -gh.array() / (lam.array() + sig);
  out.iterations = it + 1;
  return out;
}

// CG on (H + R(u)) d = -rhs; stops at negative curvature.
Vec newton_direction(const TaylorModel& model, const Vec& u, const Vec& grad, double m, double s, double tol,
                     int max_iter, bool* negative_curvature) {
  Vec d = Vec::Zero(grad.size());
  Vec r = -grad;
  Vec p = r;
  double rr = r.squaredNorm();
  *negative_curvature = false;
  for (int k = 0; k < max_iter && std::sqrt(rr) > tol; ++k) {
    const Vec ap = model.hess_apply(p) + reg_hess_apply(u, p, m, s);
    const double curv = p.dot(ap);
    if (curv <= 1e-300 * std::max(1.0, p.squaredNorm())) {
      *negative_curvature = true;
      break;
    }
    const double a = rr / curv;
    d += a * p;
    r -= a * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return d;
}

}  // namespace

double regularized_model_value(const StepSpec& spec, const Vec& x) {
  const TaylorModel& model = checked_model(spec);
  return model.evaluate(x) + spec.reg_coeff * std::pow((x - model.center()).norm(), spec.power);
}

double regularized_model_residual(const StepSpec& spec, const Vec& x) {
  const TaylorModel& model = checked_model(spec);
  const Vec u = x - model.center();
  const double nu = u.norm();
  Vec grad = model.smooth_gradient(x);
  if (nu > 0.0) grad += spec.reg_coeff * spec.power * std::pow(nu, spec.power - 2.0) * u;
  if (const SimpleConvexTerm* l = model.composite_part()) return l->subgradient_residual(x, grad);
  return grad.norm();
}

StepResult prox_gradient_step(const StepSpec& spec) {
  const TaylorModel& model = checked_model(spec);
  require(model.order() == 1 && spec.power == 2.0, Errc::wrong_regime,
          "prox-gradient step needs an order-1 model and power 2");
  const double t = 1.0 / (2.0 * spec.reg_coeff);
  Vec y = model.center() - t * model.grad_at_center();
  if (const SimpleConvexTerm* l = model.composite_part()) y = l->prox(y, t);
  return finish(spec, std::move(y), 1, true);
}

StepResult power_step_exact(const StepSpec& spec, int cap) {
  const TaylorModel& model = checked_model(spec);
  require_second_order_smooth(model);
  require(spec.power <= 3.0, Errc::wrong_regime, "step: power must lie in [2, 3]");
  require(model.dim() <= cap, Errc::capability,
          "exact step limited to d <= " + std::to_string(cap) + "; use the Krylov solver");
  Eigen::SelfAdjointEigenSolver<Mat> eig(model.dense_hessian(cap));
  const Vec gh = eig.eigenvectors().transpose() * model.grad_at_center();
  const SecularResult sol = secular_solve(eig.eigenvalues(), gh, spec.reg_coeff, spec.power);
  return finish(spec, model.center() + eig.eigenvectors() * sol.y, sol.iterations, true);
}

StepResult cubic_step_exact(const StepSpec& spec, int cap) {
  checked_model(spec);
  require(spec.power == 3.0, Errc::wrong_regime, "cubic step needs power 3");
  return power_step_exact(spec, cap);
}

StepResult power_step_krylov(const StepSpec& spec, int max_krylov_dim, double tol) {
  const TaylorModel& model = checked_model(spec);
  require_second_order_smooth(model);
  require(spec.power <= 3.0, Errc::wrong_regime, "step: power must lie in [2, 3]");
  require(max_krylov_dim >= 1 && tol > 0.0, Errc::invalid_argument, "krylov step: bad dimension or tolerance");

  const Vec& g = model.grad_at_center();
  const double gnorm = g.norm();
  const int d = model.dim();
  if (gnorm == 0.0) return finish(spec, model.center(), 0, true);

  const int kmax = std::min(max_krylov_dim, d);
  Mat q(d, kmax);
  std::vector<double> alpha;
  std::vector<double> beta;
  q.col(0) = g / gnorm;
  Vec y;
  bool breakdown = false;
  int k = 0;
  while (true) {
    Vec w = model.hess_apply(q.col(k));
    alpha.push_back(q.col(k).dot(w));
    w -= alpha.back() * q.col(k);
    if (k > 0) w -= beta.back() * q.col(k - 1);
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(k + 1) * (q.leftCols(k + 1).transpose() * w);
    const double b = w.norm();
    const int dim = k + 1;

    Mat t = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(t);
    const Vec gh = eig.eigenvectors().row(0).transpose() * gnorm;
    y = eig.eigenvectors() * secular_solve(eig.eigenvalues(), gh, spec.reg_coeff, spec.power).y;

    const double hscale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    breakdown = b <= 1e-13 * hscale;
    const double estimate = b * std::abs(y[dim - 1]);
    k = dim;
    if (breakdown || estimate <= 0.1 * tol * (1.0 + gnorm) || k >= kmax) break;
    beta.push_back(b);
    q.col(k) = w / b;
  }
  Vec x = model.center() + q.leftCols(k) * y;
  StepResult out = finish(spec, std::move(x), k, true);
  out.converged = breakdown || out.stationarity_residual <= tol * (1.0 + gnorm);
  return out;
}

StepResult cubic_step_krylov(const StepSpec& spec, int max_krylov_dim, double tol) {
  checked_model(spec);
  require(spec.power == 3.0, Errc::wrong_regime, "cubic step needs power 3");
  return power_step_krylov(spec, max_krylov_dim, tol);
}

StepResult power_step_generic(const StepSpec& spec, double inner_tol, int max_iter) {
  const TaylorModel& model = checked_model(spec);
  require_second_order_smooth(model);
  require(spec.power <= 3.0, Errc::wrong_regime, "step: power must lie in [2, 3]");
  require(inner_tol > 0.0, Errc::invalid_argument, "generic step: tolerance must be positive");

  const double m = spec.reg_coeff;
  const double s = spec.power;
  const Vec& c = model.center();
  const Vec& g = model.grad_at_center();
  const double target = inner_tol * (1.0 + g.norm());

  auto value = [&](const Vec& u) {
    return g.dot(u) + 0.5 * u.dot(model.hess_apply(u)) + m * std::pow(u.norm(), s);
  };
  auto gradient = [&](const Vec& u) {
    Vec gr = g + model.hess_apply(u);
    const double nu = u.norm();
    if (nu > 0.0) gr += m * s * std::pow(nu, s - 2.0) * u;
    return gr;
  };

  Vec u = Vec::Zero(model.dim());
  Vec grad = gradient(u);
  double res = grad.norm();
  double f = value(u);
  Vec best = u;
  double best_res = res;
  for (int it = 0; it < max_iter; ++it) {
    if (res < target) return finish(spec, c + u, it, true);

    bool negative = false;
    Vec dir = newton_direction(model, u, grad, m, s, std::min(0.1, std::sqrt(res)) * res, 2 * model.dim() + 10,
                               &negative);
    if (negative && dir.isZero(0.0)) dir = -grad;
    if (!(dir.dot(grad) < 0.0)) dir = -grad;

    const double slope = dir.dot(grad);
    double t = 1.0;
    Vec trial = u + dir;
    double ft = value(trial);
    Vec gt = gradient(trial);
    if (!(ft <= f + 1e-4 * slope) && !(gt.norm() < 0.5 * res)) {
      while (t > 1e-30) {
        t *= 0.5;
        trial = u + t * dir;
        ft = value(trial);
        if (ft <= f + 1e-4 * t * slope) break;
      }
      if (t <= 1e-30) break;
      gt = gradient(trial);
    }
    u = std::move(trial);
    f = ft;
    grad = std::move(gt);
    res = grad.norm();
    if (res < best_res) {
      best_res = res;
      best = u;
    }
  }
  if (res < target) return finish(spec, c + u, max_iter, true);
  throw InnerSolverError("generic power step did not reach tolerance (residual " + std::to_string(best_res) + ")",
                         c + best);
}

StepResult solve_step(const StepSpec& spec, const SubsolverOptions& options) {
  const TaylorModel& model = checked_model(spec);
  if (model.order() == 1) return prox_gradient_step(spec);
  require_second_order_smooth(model);
  switch (options.kind) {
    case SubsolverKind::exact:
      return power_step_exact(spec, options.exact_cap);
    case SubsolverKind::krylov:
      return power_step_krylov(spec, options.max_krylov_dim, options.tol);
    case SubsolverKind::generic:
      return power_step_generic(spec, options.tol);
    case SubsolverKind::automatic:
      break;
  }
  if (model.dim() <= options.exact_cap) return power_step_exact(spec, options.exact_cap);
  return power_step_krylov(spec, options.max_krylov_dim, options.tol);
}

}  // namespace uaf
