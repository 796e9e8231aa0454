#pragma once

#include <vector>

#include "screwdyn/spatial.hpp"

namespace screwdyn {

/// [I, -r^x; r^x, -(r^x)^2]: spatial inertia of a unit mass at body point r.
Mat6 point_inertia_block(const Vec3& r);

struct PointMass {
  double mass = 0.0;
  Vec3 position = Vec3::Zero();
};

/// Quadrature sample of a continuous density: rho * weight is the mass it carries.
struct DensitySample {
  double density = 0.0;
  Vec3 position = Vec3::Zero();
  double weight = 0.0;
};

struct MassDistribution {
  std::vector<PointMass> discrete;
  std::vector<DensitySample> continuous;
};

inline constexpr double kInertiaConditionLimit = 1e12;

/// 6x6 spatial inertia about the body origin in body coordinates.
class SpatialInertia {
 public:
  SpatialInertia() : theta_(Mat6::Zero()) {}
  explicit SpatialInertia(const Mat6& theta) : theta_(theta) {}

  /// Mass m at centre `com` with inertia tensor `inertia_com` about the centre.
  static SpatialInertia from_mass_props(double m, const Vec3& com, const Mat3& inertia_com);

  const Mat6& matrix() const { return theta_; }
  double mass() const { return theta_(0, 0); }
  /// Centre of mass recovered from the first-moment block; zero for zero mass.
  Vec3 com() const;
  /// Rotational block about the body origin.
  Mat3 rotational() const { return theta_.block<3, 3>(3, 3); }

 private:
  Mat6 theta_;
};

/// Sum of point_inertia_block over the distribution. Throws EmptyDistribution
/// for an empty distribution and InvalidArgument for negative masses or
/// densities or non-finite input.
SpatialInertia assemble_inertia(const MassDistribution& dist);

/// Phi^wr(v) Theta v.
Wrench6 gyroscopic_wrench(const SpatialInertia& theta, const Twist6& v);

/// V' = Theta^-1 (F - Phi^wr Theta V), with F reduced at the body origin in
/// body coordinates. Throws SingularInertia when cond(Theta) > 1e12.
Twist6 newton_euler_accel(const SpatialInertia& theta, const Twist6& v, const Wrench6& wrench);

/// 1/2 V^T Theta V.
double kinetic_energy(const SpatialInertia& theta, const Twist6& v);

/// Body-frame wrench of a uniform field `g` (world coordinates) acting on a
/// body whose orientation is `c`.
Wrench6 uniform_gravity_wrench(const SpatialInertia& theta, const RotationMatrix& c, const Vec3& g);

/// Pulls a wrench given in world coordinates, reduced at the world origin,
/// back to the body frame described by `pose`.
Wrench6 world_wrench_to_body(const MotionTransform& pose, const Wrench6& world);

struct BodyState {
  MotionTransform transform;
  Twist6 vel;
};

}  // namespace screwdyn
