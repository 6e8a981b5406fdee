#pragma once

#include <functional>
#include <vector>

#include "uaf/oracle.hpp"

namespace uaf {

/// t -> (a_t, A_t) with A_t the integral of a over [0, t].
struct WeightSchedule {
  std::function<double(double)> a;
  std::function<double(double)> A;
};

/// A_t = t^p / p^2, a_t = t^{p-1} / p.
WeightSchedule power_schedule(double p);

struct DynamicsSpec {
  WeightSchedule schedule;
  const ObjectiveOracle* oracle = nullptr;
  Vec x0;
  double T = 10.0;
  double dt = 1e-3;
  /// Keep every record_every-th grid point in the trajectory (the last point is always kept).
  int record_every = 1;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
  /// Grid spacing between consecutive stored points (dt * record_every).
  double spacing = 0.0;
};

/// RK4 on A x' = a (z - x), z = x0 - S, S' = a grad g(x), started at t0 = dt
/// with x = x0, S = 0.
Trajectory integrate(const DynamicsSpec& spec);

/// Max over interior stored points of
/// || x'' + (a/A)(d(A/a)/dt + 1) x' + (a^2/A) grad g(x) || by central differences.
/// The first 5% of the horizon is skipped: the start at t0 = dt leaves a layer
/// whose differencing error does not shrink with dt.
double ode_residual(const Trajectory& traj, const DynamicsSpec& spec);

}  // namespace uaf
