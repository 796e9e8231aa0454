#pragma once

#include <string>
#include <vector>

#include "screwdyn/sim/scenario.hpp"

namespace screwdyn::sim {

struct BodyRecord {
  std::string label;
  Eigen::Vector4d quat = Eigen::Vector4d(1, 0, 0, 0);  // w, x, y, z; world from body
  Vec3 d = Vec3::Zero();                               // origin, world coordinates
  Vec3 v = Vec3::Zero();                               // body-frame linear velocity
  Vec3 w = Vec3::Zero();                               // body-frame angular velocity
  double e_kin = 0.0;
  double e_pot = 0.0;
};

struct TrajectoryRecord {
  double t = 0.0;
  std::vector<BodyRecord> bodies;
  double constraint_residual = 0.0;
};

enum class RunStatus { Ok, Diverged, Error };

struct SimulationResult {
  std::vector<TrajectoryRecord> records;
  RunStatus status = RunStatus::Ok;
  std::string message;
  long long steps = 0;
  double t_end = 0.0;
  double energy_initial = 0.0;
  double energy_final = 0.0;
  double energy_drift = 0.0;  // max |E(t) - E(0)| over all steps
  double max_constraint_residual = 0.0;
  double max_quat_norm_error = 0.0;
  double last_finite_time = 0.0;

  int exit_code() const { return status == RunStatus::Ok ? 0 : 2; }
};

/// Fixed-step integration of a validated scenario. Module errors raised
/// mid-run are reported through the result rather than thrown.
SimulationResult simulate(const Scenario& s);

}  // namespace screwdyn::sim
