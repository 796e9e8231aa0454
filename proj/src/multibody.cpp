#include "screwdyn/multibody.hpp"

#include <cmath>
#include <sstream>

#include "screwdyn/point_dynamics.hpp"

namespace screwdyn {

namespace {

Vec3 checked_axis(const Vec3& axis) {
  if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "joint axis must be a unit vector");
  return axis;
}

void check_sizes(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u) {
  if (q.size() != tree.q_size() || u.size() != tree.u_size()) {
    std::ostringstream os;
    os << "state size (" << q.size() << ", " << u.size() << ") does not match tree (" << tree.q_size() << ", "
       << tree.u_size() << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

// Symmetric positive definite solve with the spectral condition check.
Eigen::VectorXd spd_solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& rhs, ErrorKind kind,
                          const char* what) {
  if (h.rows() == 0) return Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h + h.transpose()));
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMassConditionLimit) {
    std::ostringstream os;
    os << what << " is singular or ill-conditioned (eigenvalues " << lo << ", " << hi << ")";
    throw Error(kind, os.str());
  }
  return eig.eigenvectors() *
         (eig.eigenvalues().cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * rhs));
}

Eigen::MatrixXd block_diag_inertia(const MultibodyTree& tree) {
  const int k = tree.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6 * k, 6 * k);
  for (int p = 0; p < k; ++p) a.block<6, 6>(6 * p, 6 * p) = tree.body(p).inertia.matrix();
  return a;
}

}  // namespace

Joint Joint::revolute(const Vec3& axis, const MotionTransform& offset) {
  return {JointType::Revolute, checked_axis(axis), offset, RotationParamKind::Quaternion};
}

Joint Joint::prismatic(const Vec3& axis, const MotionTransform& offset) {
  return {JointType::Prismatic, checked_axis(axis), offset, RotationParamKind::Quaternion};
}

Joint Joint::free(RotationParamKind param, const MotionTransform& offset) {
  return {JointType::Free, Vec3::UnitZ(), offset, param};
}

Joint Joint::fixed(const MotionTransform& offset) {
  return {JointType::Fixed, Vec3::UnitZ(), offset, RotationParamKind::Quaternion};
}

int Joint::q_size() const {
  switch (type) {
    case JointType::Revolute:
    case JointType::Prismatic:
      return 1;
    case JointType::Free:
      return 3 + param_size(param);
    case JointType::Fixed:
      return 0;
  }
  return 0;
}

int Joint::u_size() const {
  switch (type) {
    case JointType::Revolute:
    case JointType::Prismatic:
      return 1;
    case JointType::Free:
      return 6;
    case JointType::Fixed:
      return 0;
  }
  return 0;
}

MotionTransform Joint::transform(const Eigen::VectorXd& q) const {
  MotionTransform j;
  switch (type) {
    case JointType::Revolute:
      j = MotionTransform::pure_rotation(RotationMatrix(Mat3(Eigen::AngleAxisd(q(0), axis).toRotationMatrix())));
      break;
    case JointType::Prismatic:
      j = MotionTransform::pure_translation(q(0) * axis);
      break;
    case JointType::Free:
      j = {rotation_from_param(param, q.tail(param_size(param))), q.head<3>()};
      break;
    case JointType::Fixed:
      break;
  }
  return compose(offset, j);
}

Eigen::MatrixXd Joint::subspace() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(6, u_size());
  switch (type) {
    case JointType::Revolute:
      s.block<3, 1>(3, 0) = axis;
      break;
    case JointType::Prismatic:
      s.block<3, 1>(0, 0) = axis;
      break;
    case JointType::Free:
      s.setIdentity();
      break;
    case JointType::Fixed:
      break;
  }
  return s;
}

Eigen::VectorXd Joint::neutral() const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(q_size());
  if (type == JointType::Free && param == RotationParamKind::Quaternion) q(3) = 1.0;
  return q;
}

int MultibodyTree::add_body(std::string label, int parent, const SpatialInertia& inertia, const Joint& joint) {
  if (parent < -1 || parent >= size()) {
    std::ostringstream os;
    os << "body '" << label << "' has parent " << parent << " which is not an earlier body";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  const Mat6& t = inertia.matrix();
  if (!t.allFinite() || (t - t.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorKind::InvalidArgument, "spatial inertia must be finite and symmetric");
  bodies_.push_back({std::move(label), parent, inertia, joint});
  q_offset_.push_back(q_size_);
  u_offset_.push_back(u_size_);
  q_size_ += joint.q_size();
  u_size_ += joint.u_size();
  return size() - 1;
}

Eigen::VectorXd MultibodyTree::neutral_q() const {
  Eigen::VectorXd q(q_size_);
  for (int p = 0; p < size(); ++p) q.segment(q_offset_[p], bodies_[p].joint.q_size()) = bodies_[p].joint.neutral();
  return q;
}

bool MultibodyTree::is_ancestor_or_self(int k, int p) const {
  for (int i = p; i >= 0; i = bodies_[i].parent)
    if (i == k) return true;
  return false;
}

Mat6 relative_twist_transform(const MotionTransform& pose_k_in_p) {
  return motion_group_element(pose_k_in_p, ScrewKind::Twist);
}

Kinematics compute_kinematics(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u) {
  check_sizes(tree, q, u);
  const int k = tree.size();
  Kinematics kin;
  kin.relative.resize(k);
  kin.pose.resize(k);
  kin.L = Eigen::MatrixXd::Zero(6 * k, 6 * k);
  kin.L_dot = Eigen::MatrixXd::Zero(6 * k, 6 * k);
  kin.S = Eigen::MatrixXd::Zero(6 * k, tree.u_size());
  for (int p = 0; p < k; ++p) {
    const Body& b = tree.body(p);
    kin.relative[p] = b.joint.transform(q.segment(tree.q_offset(p), b.joint.q_size()));
    kin.pose[p] = b.parent < 0 ? kin.relative[p] : compose(kin.pose[b.parent], kin.relative[p]);
    kin.S.block(6 * p, tree.u_offset(p), 6, b.joint.u_size()) = b.joint.subspace();
  }
  kin.V_r = kin.S * u;
  // x_jp[p][j] = X_{j,p} for each ancestor-or-self j, composed from joint
  // transforms so the diagonal blocks are exact identities.
  std::vector<std::vector<std::pair<int, MotionTransform>>> chain(k);
  for (int p = 0; p < k; ++p) {
    MotionTransform x_jp = MotionTransform::identity();
    for (int j = p; j >= 0; j = tree.body(j).parent) {
      chain[p].emplace_back(j, x_jp);
      x_jp = compose(kin.relative[j], x_jp);
    }
    for (const auto& [j, x] : chain[p])
      kin.L.block<6, 6>(6 * p, 6 * j) = j == p ? Mat6::Identity() : relative_twist_transform(inverse(x));
  }
  kin.V_a = kin.L * kin.V_r;
  for (int p = 0; p < k; ++p) {
    for (const auto& [j, x_jp] : chain[p]) {
      if (j == p) continue;  // L_{p,p} = I is constant
      const Mat6 l_jp = relative_twist_transform(x_jp);
      const Twist6 v_pj(Vec6(kin.V_a.segment<6>(6 * j) - l_jp * kin.V_a.segment<6>(6 * p)));
      kin.L_dot.block<6, 6>(6 * p, 6 * j) = motion_transform_rate(inverse(x_jp), v_pj, ScrewKind::Twist);
    }
  }
  return kin;
}

Eigen::VectorXd absolute_velocities(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u) {
  return compute_kinematics(tree, q, u).V_a;
}

namespace {

Eigen::VectorXd applied_wrenches(const MultibodyTree& tree, const std::vector<MotionTransform>& pose,
                                 const AppliedLoads& loads) {
  const int k = tree.size();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(6 * k);
  for (int p = 0; p < k; ++p)
    f.segment<6>(6 * p) = uniform_gravity_wrench(tree.body(p).inertia, pose[p].rotation, loads.gravity).coords;
  if (loads.nbody_gamma != 0.0 && k > 1) {
    std::vector<MassPoint> pts(k);
    for (int p = 0; p < k; ++p) {
      pts[p].mass = tree.body(p).inertia.mass();
      pts[p].position = pose[p].apply_point(tree.body(p).inertia.com());
    }
    const std::vector<Vec3> forces = gravity_forces(pts, loads.nbody_gamma);
    for (int p = 0; p < k; ++p) {
      const Vec3 fb = pose[p].rotation.matrix().transpose() * forces[p];
      f.segment<3>(6 * p) += fb;
      f.segment<3>(6 * p + 3) += tree.body(p).inertia.com().cross(fb);
    }
  }
  for (const AppliedWrench& w : loads.wrenches) {
    if (w.body < 0 || w.body >= k) throw Error(ErrorKind::InvalidArgument, "applied wrench on unknown body");
    Vec3 force = w.force, torque = w.torque;
    if (w.world_frame) {
      // Reduce at the world origin, then pull back into the body frame.
      const Wrench6 world(force, pose[w.body].displacement.cross(force) + torque);
      const Wrench6 body = world_wrench_to_body(pose[w.body], world);
      force = body.resultant();
      torque = body.moment();
    }
    f.segment<3>(6 * w.body) += force;
    f.segment<3>(6 * w.body + 3) += torque;
  }
  return f;
}

}  // namespace

SystemMatrices assemble_system(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u,
                               const AppliedLoads& loads) {
  Kinematics kin = compute_kinematics(tree, q, u);
  const int k = tree.size();
  SystemMatrices sys;
  sys.A = block_diag_inertia(tree);
  sys.B = Eigen::MatrixXd::Zero(6 * k, 6 * k);
  for (int p = 0; p < k; ++p) {
    const Twist6 v(Vec6(kin.V_a.segment<6>(6 * p)));
    sys.B.block<6, 6>(6 * p, 6 * p) = phi_matrix(v, ScrewKind::Wrench) * tree.body(p).inertia.matrix();
  }
  sys.F_a = applied_wrenches(tree, kin.pose, loads);
  sys.L = std::move(kin.L);
  sys.L_dot = std::move(kin.L_dot);
  sys.S = std::move(kin.S);
  sys.V_r = std::move(kin.V_r);
  sys.V_a = std::move(kin.V_a);
  return sys;
}

Eigen::VectorXd forward_dynamics_newton_euler(const MultibodyTree& tree, const Eigen::VectorXd& q,
                                              const Eigen::VectorXd& u, const AppliedLoads& loads) {
  const SystemMatrices sys = assemble_system(tree, q, u, loads);
  const Eigen::MatrixXd j = sys.L * sys.S;
  const Eigen::MatrixXd h = j.transpose() * sys.A * j;
  const Eigen::VectorXd rhs = j.transpose() * (sys.F_a - sys.A * (sys.L_dot * sys.V_r) - sys.B * sys.V_a);
  return spd_solve(h, rhs, ErrorKind::SingularMass, "joint-space mass matrix");
}

Eigen::VectorXd coordinate_rates(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u) {
  check_sizes(tree, q, u);
  Eigen::VectorXd qdot = Eigen::VectorXd::Zero(tree.q_size());
  for (int p = 0; p < tree.size(); ++p) {
    const Joint& j = tree.body(p).joint;
    const int qo = tree.q_offset(p), uo = tree.u_offset(p);
    if (j.type == JointType::Revolute || j.type == JointType::Prismatic) {
      qdot(qo) = u(uo);
    } else if (j.type == JointType::Free) {
      const int np = param_size(j.param);
      const Eigen::VectorXd lam = q.segment(qo + 3, np);
      qdot.segment<3>(qo) = rotation_from_param(j.param, lam) * Vec3(u.segment<3>(uo));
      qdot.segment(qo + 3, np) = param_rate(j.param, lam, u.segment<3>(uo + 3));
    }
  }
  return qdot;
}

Eigen::VectorXd velocities_from_rates(const MultibodyTree& tree, const Eigen::VectorXd& q,
                                      const Eigen::VectorXd& qdot) {
  if (q.size() != tree.q_size() || qdot.size() != tree.q_size())
    throw Error(ErrorKind::InvalidArgument, "coordinate vector size does not match tree");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(tree.u_size());
  for (int p = 0; p < tree.size(); ++p) {
    const Joint& j = tree.body(p).joint;
    const int qo = tree.q_offset(p), uo = tree.u_offset(p);
    if (j.type == JointType::Revolute || j.type == JointType::Prismatic) {
      u(uo) = qdot(qo);
    } else if (j.type == JointType::Free) {
      const int np = param_size(j.param);
      const Eigen::VectorXd lam = q.segment(qo + 3, np);
      const Eigen::VectorXd lam_dot = qdot.segment(qo + 3, np);
      u.segment<3>(uo) = rotation_from_param(j.param, lam).matrix().transpose() * qdot.segment<3>(qo);
      if (j.param == RotationParamKind::Quaternion) {
        const Quaternion qq = Quaternion::from_vector(lam);
        const Quaternion prod = quat_product(quat_conjugate(qq), Quaternion::from_vector(lam_dot));
        u.segment<3>(uo + 3) = 2.0 * prod.v / lam.squaredNorm();
      } else {
        u.segment<3>(uo + 3) = param_rate_matrix(j.param, lam).d * lam_dot;
      }
    }
  }
  return u;
}

namespace {

void require_lagrange_params(const MultibodyTree& tree, const Eigen::VectorXd& q) {
  for (int p = 0; p < tree.size(); ++p) {
    const Joint& j = tree.body(p).joint;
    if (j.type != JointType::Free) continue;
    if (j.param == RotationParamKind::Quaternion)
      throw Error(ErrorKind::InvalidArgument,
                  "Lagrange form needs Euler or Fedorov parameters on free joints (body '" + tree.body(p).label +
                      "')");
    const RateMatrix d = param_rate_matrix(j.param, q.segment<3>(tree.q_offset(p) + 3));
    if (!d.invertible())
      throw Error(ErrorKind::GimbalLock, "rate matrix of body '" + tree.body(p).label + "' is singular");
  }
}

}  // namespace

Eigen::MatrixXd coordinate_map(const MultibodyTree& tree, const Eigen::VectorXd& q) {
  require_lagrange_params(tree, q);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6 * tree.size(), tree.q_size());
  for (int p = 0; p < tree.size(); ++p) {
    const Joint& j = tree.body(p).joint;
    const int qo = tree.q_offset(p);
    if (j.type == JointType::Revolute || j.type == JointType::Prismatic) {
      m.block<6, 1>(6 * p, qo) = j.subspace();
    } else if (j.type == JointType::Free) {
      const Vec3 lam = q.segment<3>(qo + 3);
      m.block<3, 3>(6 * p, qo) = rotation_from_param(j.param, lam).matrix().transpose();
      m.block<3, 3>(6 * p + 3, qo + 3) = param_rate_matrix(j.param, lam).d;
    }
  }
  return m;
}

Eigen::MatrixXd coordinate_map_rate(const MultibodyTree& tree, const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& qdot) {
  require_lagrange_params(tree, q);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6 * tree.size(), tree.q_size());
  for (int p = 0; p < tree.size(); ++p) {
    const Joint& j = tree.body(p).joint;
    if (j.type != JointType::Free) continue;
    const int qo = tree.q_offset(p);
    const Vec3 lam = q.segment<3>(qo + 3);
    const Vec3 lam_dot = qdot.segment<3>(qo + 3);
    const Vec3 omega = param_rate_matrix(j.param, lam).d * lam_dot;
    const Mat3 ct = rotation_from_param(j.param, lam).matrix().transpose();
    m.block<3, 3>(6 * p, qo) = -cross_matrix(omega) * ct;
    m.block<3, 3>(6 * p + 3, qo + 3) = param_rate_matrix_derivative(j.param, lam, lam_dot);
  }
  return m;
}

LagrangeSystem lagrange_matrices(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                                 const AppliedLoads& loads) {
  const Eigen::MatrixXd m = coordinate_map(tree, q);
  const Eigen::MatrixXd m_dot = coordinate_map_rate(tree, q, qdot);
  const SystemMatrices sys = assemble_system(tree, q, velocities_from_rates(tree, q, qdot), loads);
  const Eigen::MatrixXd lm = sys.L * m;
  LagrangeSystem out;
  out.A = lm.transpose() * sys.A * lm;
  out.A = 0.5 * (out.A + out.A.transpose());
  out.B = lm.transpose() * (sys.A * sys.L * m_dot + (sys.A * sys.L_dot + sys.B * sys.L) * m);
  out.F = lm.transpose() * sys.F_a;
  return out;
}

Eigen::VectorXd lagrange_accel(const LagrangeSystem& sys, const Eigen::VectorXd& qdot) {
  return spd_solve(sys.A, sys.F - sys.B * qdot, ErrorKind::SingularMass, "generalized mass matrix");
}

Eigen::VectorXd velocity_rates_from_accel(const MultibodyTree& tree, const Eigen::VectorXd& q,
                                          const Eigen::VectorXd& qdot, const Eigen::VectorXd& qddot) {
  const Eigen::MatrixXd m = coordinate_map(tree, q);
  const Eigen::MatrixXd m_dot = coordinate_map_rate(tree, q, qdot);
  // S has orthonormal columns per joint, so S^T recovers u' from V_r'.
  const Eigen::MatrixXd s = compute_kinematics(tree, q, Eigen::VectorXd::Zero(tree.u_size())).S;
  return s.transpose() * (m * qddot + m_dot * qdot);
}

LagrangeSystem reduce_coordinates(const LagrangeSystem& sys, const Eigen::MatrixXd& N) {
  if (N.rows() != sys.A.rows() || N.cols() == 0 || N.cols() > N.rows())
    throw Error(ErrorKind::InvalidArgument, "selection matrix has incompatible shape");
  const Eigen::MatrixXd ntn = N.transpose() * N;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ntn);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMassConditionLimit)
    throw Error(ErrorKind::DegenerateSelection, "N^T N is singular or ill-conditioned");
  return {N.transpose() * sys.A * N, N.transpose() * sys.B * N, N.transpose() * sys.F};
}

double kinetic_energy(const MultibodyTree& tree, const Eigen::VectorXd& q, const Eigen::VectorXd& u) {
  const Eigen::VectorXd va = absolute_velocities(tree, q, u);
  return 0.5 * va.dot(block_diag_inertia(tree) * va);
}

double potential_energy(const MultibodyTree& tree, const Eigen::VectorXd& q, const AppliedLoads& loads) {
  const Kinematics kin = compute_kinematics(tree, q, Eigen::VectorXd::Zero(tree.u_size()));
  double e = 0.0;
  std::vector<MassPoint> pts(tree.size());
  for (int p = 0; p < tree.size(); ++p) {
    const SpatialInertia& th = tree.body(p).inertia;
    pts[p].mass = th.mass();
    pts[p].position = kin.pose[p].apply_point(th.com());
    e -= th.mass() * loads.gravity.dot(pts[p].position);
  }
  if (loads.nbody_gamma != 0.0) e += gravity_potential(pts, loads.nbody_gamma);
  return e;
}

}  // namespace screwdyn
