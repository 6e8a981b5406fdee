#include "uaf/continuum.hpp"

#include <cmath>

namespace uaf {

WeightSchedule power_schedule(double p) {
  require(p >= 1.0, Errc::invalid_argument, "schedule: p must be >= 1");
  WeightSchedule w;
  w.A = [p](double t) { return std::pow(t, p) / (p * p); };
  w.a = [p](double t) { return std::pow(t, p - 1.0) / p; };
  return w;
}

namespace {

void check_schedule(const WeightSchedule& w, double t0, double T) {
  require(static_cast<bool>(w.a) && static_cast<bool>(w.A), Errc::invalid_argument, "dynamics: empty schedule");
  for (int k = 1; k <= 4; ++k) {
    const double t = t0 + (T - t0) * k / 5.0;
    const double h = 1e-5 * std::max(1.0, t);
    const double fd = (w.A(t + h) - w.A(t - h)) / (2.0 * h);
    const double a = w.a(t);
    require(a > 0.0, Errc::invalid_argument, "dynamics: a_t must be positive");
    require(std::abs(fd - a) <= 1e-6 * std::max(1.0, std::abs(a)), Errc::invalid_argument,
            "dynamics: dA/dt does not match a_t");
  }
}

}  // namespace

Trajectory integrate(const DynamicsSpec& spec) {
  require(spec.oracle != nullptr, Errc::invalid_argument, "dynamics: missing oracle");
  require(spec.oracle->composite_part() == nullptr, Errc::capability, "dynamics: composite term not supported");
  require(spec.dt > 0.0 && spec.T > spec.dt, Errc::invalid_argument, "dynamics: need dt > 0 and T > dt");
  require(spec.x0.size() == spec.oracle->dim(), Errc::dimension_mismatch, "dynamics: x0 has wrong dimension");
  require(spec.record_every >= 1, Errc::invalid_argument, "dynamics: record_every must be >= 1");
  const double t0 = spec.dt;
  check_schedule(spec.schedule, t0, spec.T);

  const ObjectiveOracle& g = *spec.oracle;
  const WeightSchedule& w = spec.schedule;
  const Vec& x0 = spec.x0;
  const Eigen::Index d = x0.size();

  // State y = [x; S].
  auto rhs = [&](double t, const Vec& y) {
    Vec out(2 * d);
    const auto x = y.head(d);
    const auto s = y.tail(d);
    out.head(d) = (w.a(t) / w.A(t)) * (x0 - s - x);
    out.tail(d) = w.a(t) * g.gradient(x);
    return out;
  };

  const long steps = std::lround((spec.T - t0) / spec.dt);
  require(steps >= 1, Errc::invalid_argument, "dynamics: horizon shorter than one step");
  const double h = (spec.T - t0) / static_cast<double>(steps);

  Trajectory traj;
  traj.spacing = h * spec.record_every;
  Vec y(2 * d);
  y.head(d) = x0;
  y.tail(d).setZero();
  double t = t0;
  traj.t.push_back(t);
  traj.x.push_back(x0);
  for (long n = 1; n <= steps; ++n) {
    const Vec k1 = rhs(t, y);
    const Vec k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const Vec k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const Vec k4 = rhs(t + h, y + h * k3);
    Vec next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
      throw Error(Errc::integration_blowup, "dynamics: non-finite state after t = " + std::to_string(t));
    }
    y = std::move(next);
    t = t0 + h * static_cast<double>(n);
    if (n % spec.record_every == 0 || n == steps) {
      traj.t.push_back(t);
      traj.x.push_back(y.head(d));
    }
  }
  return traj;
}

double ode_residual(const Trajectory& traj, const DynamicsSpec& spec) {
  require(spec.oracle != nullptr, Errc::invalid_argument, "dynamics: missing oracle");
  const WeightSchedule& w = spec.schedule;
  const double h = traj.spacing;
  double worst = 0.0;
  // Interior points on the uniform part of the grid (the last stored point may be off-grid),
  // past the start-up layer near t0 where the differencing cannot resolve x.
  const double t_skip = spec.dt + 0.05 * (spec.T - spec.dt);
  for (std::size_t j = 1; j + 1 < traj.x.size(); ++j) {
    if (traj.t[j] < t_skip) continue;
    if (std::abs((traj.t[j + 1] - traj.t[j]) - h) > 1e-9 * h || std::abs((traj.t[j] - traj.t[j - 1]) - h) > 1e-9 * h) {
      continue;
    }
    const double t = traj.t[j];
    const Vec xd = (traj.x[j + 1] - traj.x[j - 1]) / (2.0 * h);
    const Vec xdd = (traj.x[j + 1] - 2.0 * traj.x[j] + traj.x[j - 1]) / (h * h);
    const double a = w.a(t);
    const double A = w.A(t);
    const double ratio_dot = (w.A(t + h) / w.a(t + h) - w.A(t - h) / w.a(t - h)) / (2.0 * h);
    const Vec r = xdd + (a / A) * (ratio_dot + 1.0) * xd + (a * a / A) * spec.oracle->gradient(traj.x[j]);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace uaf
