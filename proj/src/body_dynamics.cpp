#include "screwdyn/body_dynamics.hpp"

#include <cmath>
#include <sstream>

namespace screwdyn {

Mat6 point_inertia_block(const Vec3& r) {
  const Mat3 rx = cross_matrix(r);
  Mat6 t;
  t << Mat3::Identity(), -rx, rx, -rx * rx;
  return t;
}

SpatialInertia SpatialInertia::from_mass_props(double m, const Vec3& com, const Mat3& inertia_com) {
  Mat6 t = m * point_inertia_block(com);
  t.block<3, 3>(3, 3) += inertia_com;
  return SpatialInertia(t);
}

Vec3 SpatialInertia::com() const {
  const double m = mass();
  if (m == 0.0) return Vec3::Zero();
  const Mat3 first = theta_.block<3, 3>(3, 0);
  return uncross(0.5 * (first - first.transpose()), 1e-300) / m;
}

SpatialInertia assemble_inertia(const MassDistribution& dist) {
  if (dist.discrete.empty() && dist.continuous.empty())
    throw Error(ErrorKind::EmptyDistribution, "mass distribution has no elements");
  Mat6 t = Mat6::Zero();
  for (const auto& p : dist.discrete) {
    if (!(p.mass >= 0.0) || !p.position.allFinite())
      throw Error(ErrorKind::InvalidArgument, "point masses must be finite and nonnegative");
    t += p.mass * point_inertia_block(p.position);
  }
  for (const auto& s : dist.continuous) {
    if (!(s.density >= 0.0) || !(s.weight >= 0.0) || !s.position.allFinite())
      throw Error(ErrorKind::InvalidArgument, "density samples must be finite and nonnegative");
    t += s.density * s.weight * point_inertia_block(s.position);
  }
  // Enforce exact symmetry; the blocks are symmetric up to rounding.
  return SpatialInertia(0.5 * (t + t.transpose()));
}

Wrench6 gyroscopic_wrench(const SpatialInertia& theta, const Twist6& v) {
  return Wrench6(Vec6(phi_matrix(v, ScrewKind::Wrench) * (theta.matrix() * v.coords)));
}

Twist6 newton_euler_accel(const SpatialInertia& theta, const Twist6& v, const Wrench6& wrench) {
  const Mat6& t = theta.matrix();
  Eigen::SelfAdjointEigenSolver<Mat6> eig(t);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kInertiaConditionLimit) {
    std::ostringstream os;
    os << "spatial inertia condition number exceeds limit (eigenvalues " << lo << ", " << hi << ")";
    throw Error(ErrorKind::SingularInertia, os.str());
  }
  const Vec6 rhs = wrench.coords - gyroscopic_wrench(theta, v).coords;
  return Twist6(Vec6(t.ldlt().solve(rhs)));
}

double kinetic_energy(const SpatialInertia& theta, const Twist6& v) {
  return 0.5 * v.coords.dot(theta.matrix() * v.coords);
}

Wrench6 uniform_gravity_wrench(const SpatialInertia& theta, const RotationMatrix& c, const Vec3& g) {
  Vec6 accel;
  accel << c.matrix().transpose() * g, Vec3::Zero();
  return Wrench6(Vec6(theta.matrix() * accel));
}

Wrench6 world_wrench_to_body(const MotionTransform& pose, const Wrench6& world) {
  return transform_screw(inverse(pose), world);
}

}  // namespace screwdyn
