#pragma once

#include <string>
#include <vector>

#include "screwdyn/body_dynamics.hpp"
#include "screwdyn/rotation.hpp"

namespace screwdyn {

enum class JointType { Revolute, Prismatic, Free, Fixed };

/// Joint between a body and its parent. The child frame sits at
/// offset o J(q), where J(q) is the joint motion from its zero coordinate.
///
/// Coordinates q: revolute/prismatic one scalar, free joints (d, lambda) with
/// d in parent-joint coordinates and lambda of the chosen parameterization,
/// fixed none. Velocities u: one scalar, or the body twist (v; w) of the
/// child relative to the parent in child coordinates for free joints.
struct Joint {
  JointType type = JointType::Fixed;
  Vec3 axis = Vec3::UnitZ();
  MotionTransform offset;
  RotationParamKind param = RotationParamKind::Quaternion;

  static Joint revolute(const Vec3& axis, const MotionTransform& offset = {});
  static Joint prismatic(const Vec3& axis, const MotionTransform& offset = {});
  static Joint free(RotationParamKind param = RotationParamKind::Quaternion, const MotionTransform& offset = {});
  static Joint fixed(const MotionTransform& offset = {});

  int q_size() const;
  int u_size() const;

  /// offset o J(q) for this joint's coordinate slice.
  MotionTransform transform(const Eigen::VectorXd& q) const;
  /// Motion subspace S (6 x u_size): relative twist = S u.
  Eigen::MatrixXd subspace() const;
  /// Zero-motion coordinates (identity rotation for free joints).
  Eigen::VectorXd neutral() const;
};

struct Body {
  std::string label;
  int parent = -1;  // -1 is the world
  SpatialInertia inertia;
  Joint joint;
};

class MultibodyTree {
 public:
  /// Appends a body; `parent` must be -1 or an existing body index.
  int add_body(std::string label, int parent, const SpatialInertia& inertia, const Joint& joint);

  int size() const { return static_cast<int>(bodies_.size()); }
  const Body& body(int i) const { return bodies_.at(i); }
  int q_size() const { return q_size_; }
  int u_size() const { return u_size_; }
  int q_offset(int i) const { return q_offset_.at(i); }
  int u_offset(int i) const { return u_offset_.at(i); }
  Eigen::VectorXd neutral_q() const;
  /// True when `k` is `p` or one of its ancestors.
  bool is_ancestor_or_self(int k, int p) const;

 private:
  std::vector<Body> bodies_;
  std::vector<int> q_offset_;
  std::vector<int> u_offset_;
  int q_size_ = 0;
  int u_size_ = 0;
};

/// World-axis or body-axis load on a body, with the torque taken about the
/// body origin.
struct AppliedWrench {
  int body = 0;
  bool world_frame = false;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

struct AppliedLoads {
  Vec3 gravity = Vec3::Zero();  // uniform field, world coordinates
  double nbody_gamma = 0.0;     // pairwise attraction between body centres of mass
  std::vector<AppliedWrench> wrenches;
};

struct Kinematics {
  std::vector<MotionTransform> relative;  // X_{parent,p}
  std::vector<MotionTransform> pose;      // X_{0,p}
  Eigen::MatrixXd L;                      // 6k x 6k, lower block triangular
  Eigen::MatrixXd L_dot;
  Eigen::MatrixXd S;                      // 6k x u_size, block diagonal
  Eigen::VectorXd V_r;
  Eigen::VectorXd V_a;
};

struct SystemMatrices {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd L;
  Eigen::MatrixXd L_dot;
  Eigen::MatrixXd S;
  Eigen::VectorXd F_a;
  Eigen::VectorXd V_r;
  Eigen::VectorXd V_a;
};

/// L^tw block mapping twists in child coordinates k to coordinates p, given
/// the pose of k relative to p.
Mat6 relative_twist_transform(const MotionTransform& pose_k_in_p);

Kinematics compute_kinematics(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u);

/// Stacked V_a = L V_r.
Eigen::VectorXd absolute_velocities(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u);

SystemMatrices assemble_system(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u,
                               const AppliedLoads& loads);

inline constexpr double kMassConditionLimit = 1e12;

/// u' from J^T A J u' = J^T (F_a - A L' S u - B V_a), J = L S. Throws
/// SingularMass when cond(J^T A J) > 1e12.
Eigen::VectorXd forward_dynamics_newton_euler(const MultibodyTree& tree, const Eigen::VectorXd& q,
                                              const Eigen::VectorXd& u, const AppliedLoads& loads);

/// q' from u (joint kinematics; quaternion rates for quaternion joints).
Eigen::VectorXd coordinate_rates(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u);

/// u from q'; inverse of coordinate_rates.
Eigen::VectorXd velocities_from_rates(const MultibodyTree& tree, const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& qdot);

struct LagrangeSystem {
  Eigen::MatrixXd A;  // script-A
  Eigen::MatrixXd B;  // script-B
  Eigen::VectorXd F;  // script-F
};

/// Block-diagonal map M(q) (6k x q_size) with V_r = M q', and its derivative.
Eigen::MatrixXd coordinate_map(const MultibodyTree& tree, const Eigen::VectorXd& q);
Eigen::MatrixXd coordinate_map_rate(const MultibodyTree& tree, const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& qdot);

/// script-A = (LM)^T A LM, script-B = (LM)^T [A L M' + (A L' + B L) M],
/// script-F = (LM)^T F_a. Free joints must use Euler or Fedorov parameters
/// (InvalidArgument for quaternions); Euler joints at gimbal lock throw GimbalLock.
LagrangeSystem lagrange_matrices(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                                 const AppliedLoads& loads);

/// q'' from script-A q'' + script-B q' = script-F. Throws SingularMass.
Eigen::VectorXd lagrange_accel(const LagrangeSystem& sys, const Eigen::VectorXd& qdot);

/// u' = M q'' + M' q'.
Eigen::VectorXd velocity_rates_from_accel(const MultibodyTree& tree, const Eigen::VectorXd& q,
                                          const Eigen::VectorXd& qdot, const Eigen::VectorXd& qddot);

/// Restriction to q = q0 + N q_c: (N^T A N, N^T B N, N^T F). Throws
/// DegenerateSelection when cond(N^T N) > 1e12.
LagrangeSystem reduce_coordinates(const LagrangeSystem& sys, const Eigen::MatrixXd& N);

double kinetic_energy(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u);

/// Uniform-field plus pairwise gravitational potential.
double potential_energy(const MultibodyTree& tree, const Eigen::VectorXd& q, const AppliedLoads& loads);

}  // namespace screwdyn
