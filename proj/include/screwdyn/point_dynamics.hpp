#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "screwdyn/spatial.hpp"

namespace screwdyn {

struct MassPoint {
  double mass = 1.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

/// f(t, position, velocity) in newtons.
using ForceField = std::function<Vec3(double, const Vec3&, const Vec3&)>;

/// Ideal scleronomic holonomic constraint r = eta(q), q of dimension 1 or 2.
///
/// `tangent` returns tau = d eta / d q^T (3 x dim). The optional level
/// function sigma(r) = 0 (3 - dim rows) and its gradient nu = d sigma / d r^T
/// (3 x (3 - dim), stored column-wise) describe the normal space; without them
/// the normal space is taken as the orthogonal complement of tau. `project`,
/// when present, maps a point of space to the closest point of the manifold.
struct ConstraintManifold {
  int dim = 1;
  std::function<Vec3(const Eigen::VectorXd&)> embedding;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> tangent;
  std::function<Eigen::VectorXd(const Vec3&)> level;
  std::function<Eigen::MatrixXd(const Vec3&)> normal;
  std::function<Vec3(const Vec3&)> project;

  /// Circle of `radius` about `center` in the plane spanned by the orthonormal
  /// pair (e1, e2): eta(q) = center + radius (cos q e1 + sin q e2).
  static ConstraintManifold circle(const Vec3& center, double radius, const Vec3& e1, const Vec3& e2);

  /// Sphere with polar angle measured from -e3 (q = (polar, azimuth)), so
  /// q = 0 is the bottom of the sphere: eta = c + R (sin a cos b, sin a sin b, -cos a).
  static ConstraintManifold sphere(const Vec3& center, double radius);

  /// Plane through `origin` spanned by the orthonormal pair (e1, e2).
  static ConstraintManifold plane(const Vec3& origin, const Vec3& e1, const Vec3& e2);

  /// Straight line through `origin` along the unit `direction`.
  static ConstraintManifold line(const Vec3& origin, const Vec3& direction);
};

inline constexpr double kProjectionConditionLimit = 1e12;

/// Force on each point: gamma m_i sum_j m_j (r_j - r_i) / |r_j - r_i|^3
/// (attraction). Throws CoincidentPoints when two points are closer than 1e-12.
std::vector<Vec3> gravity_forces(std::span<const MassPoint> points, double gamma);

/// Pair potential energy -gamma sum_{i<j} m_i m_j / |r_i - r_j|.
double gravity_potential(std::span<const MassPoint> points, double gamma);

Vec3 free_accel(const MassPoint& p, const Vec3& force);

/// (tau^T tau)^-1 tau^T: extracts tangent coordinates (dim x 3).
Eigen::MatrixXd tangent_coordinates(const ConstraintManifold& m, const Eigen::VectorXd& q);

/// tau (tau^T tau)^-1 tau^T (3 x 3).
Mat3 tangent_projection(const ConstraintManifold& m, const Eigen::VectorXd& q);

/// nu (nu^T nu)^-1 nu^T (3 x 3).
Mat3 normal_projection(const ConstraintManifold& m, const Eigen::VectorXd& q);

/// (d tau / d q^T q') q', by central differences of tau with step
/// 1e-6 max(1, |q|).
Vec3 curvature_term(const ConstraintManifold& m, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot);

/// q'' from m [q'' + P_tau (d tau / d q^T q') q'] = P_tau f.
Eigen::VectorXd constrained_accel(const ConstraintManifold& m, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& qdot, const Vec3& force, double mass);

/// c = m P_nu (d tau / d q^T q') q' - P_nu f.
Vec3 constraint_force(const ConstraintManifold& m, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                      const Vec3& force, double mass);

/// Constraint sigma(r, v, t) = 0 on position and velocity. Jacobians that are
/// not supplied are evaluated by fourth-order central differences.
struct VelocityConstraint {
  std::function<Eigen::VectorXd(const Vec3&, const Vec3&, double)> value;
  std::function<Eigen::MatrixXd(const Vec3&, const Vec3&, double)> jac_position;
  std::function<Eigen::MatrixXd(const Vec3&, const Vec3&, double)> jac_velocity;
  std::function<Eigen::VectorXd(const Vec3&, const Vec3&, double)> jac_time;
};

/// v' = a - S^T (S S^T)^-1 (S a + (d sigma / d r^T) v + d sigma / d t) with
/// S = d sigma / d v^T and `free_acceleration` a. For a = 0 this is the plain
/// constraint-consistent acceleration. Throws SingularGram if S S^T is not
/// invertible.
Vec3 velocity_constraint_accel(const VelocityConstraint& sigma, const Vec3& position, const Vec3& velocity,
                               double t, const Vec3& free_acceleration = Vec3::Zero());

/// Velocity-level form d sigma / d r^T v = 0 of a manifold's level function,
/// suitable for integrating a constrained point in Cartesian coordinates.
VelocityConstraint differentiated_level_constraint(const ConstraintManifold& m);

}  // namespace screwdyn
