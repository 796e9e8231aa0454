#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "screwdyn/multibody.hpp"
#include "screwdyn/point_dynamics.hpp"

namespace screwdyn::sim {

/// Configuration problem; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ConstraintType { Circle, Sphere, Plane, Line };

/// circle: center, radius, e1, e2; sphere: center, radius;
/// plane: center (origin), e1, e2; line: center (origin), e1 (direction).
struct ConstraintSpec {
  ConstraintType type = ConstraintType::Sphere;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
};

struct PointSpec {
  std::string label;
  double mass = 1.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  std::optional<ConstraintSpec> constraint;
  // Manifold coordinates, used by the generalized formulation.
  std::vector<double> q;
  std::vector<double> qdot;
};

struct JointSpec {
  JointType type = JointType::Free;
  Vec3 axis = Vec3::UnitZ();
  Vec3 offset_position = Vec3::Zero();
  Eigen::Vector4d offset_orientation = Eigen::Vector4d(1, 0, 0, 0);  // w, x, y, z
};

struct BodySpec {
  std::string label;
  std::string parent;  // empty: world
  double mass = 1.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Identity();  // about the centre of mass, body axes
  JointSpec joint;
  // One-coordinate joints.
  double q = 0.0;
  double qdot = 0.0;
  // Free joints: pose relative to the parent joint frame and body-frame twist.
  Vec3 position = Vec3::Zero();
  Eigen::Vector4d orientation = Eigen::Vector4d(1, 0, 0, 0);
  Vec3 velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

enum class SystemType { Points, RigidBody, Multibody };
enum class Formulation { Generalized, Cartesian, NewtonEuler, Lagrange };
enum class IntegratorMethod { RK4, Euler };

struct WrenchSpec {
  std::string body;
  bool world_frame = false;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

struct ForceSpec {
  Vec3 gravity = Vec3::Zero();
  double nbody_gamma = 0.0;
  std::vector<WrenchSpec> wrenches;
};

struct IntegratorSpec {
  IntegratorMethod method = IntegratorMethod::RK4;
  double step = 1e-3;
  double duration = 1.0;
  int output_every = 1;
};

struct Scenario {
  int schema = 1;
  std::string name;
  SystemType type = SystemType::Points;
  Formulation formulation = Formulation::Generalized;
  std::vector<PointSpec> points;
  std::vector<BodySpec> bodies;  // exactly one for RigidBody
  ForceSpec forces;
  IntegratorSpec integrator;
  RotationParamKind rotation = RotationParamKind::Quaternion;
  bool renormalize_quaternions = true;
  bool project_constraints = false;
};

/// Parses and validates a JSON scenario. Throws ConfigError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Canonical JSON with every field explicit.
std::string serialize_scenario(const Scenario& s);

ConstraintManifold build_manifold(const ConstraintSpec& c);

/// Tree, initial (q, u) and loads for RigidBody and Multibody scenarios.
struct TreeSetup {
  MultibodyTree tree;
  Eigen::VectorXd q;
  Eigen::VectorXd u;
  AppliedLoads loads;
};

TreeSetup build_tree(const Scenario& s);

}  // namespace screwdyn::sim
