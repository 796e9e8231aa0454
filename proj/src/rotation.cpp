#include "screwdyn/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace screwdyn {

namespace {

Mat3 rot_x_matrix(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

Mat3 rot_y_matrix(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

Mat3 rot_z_matrix(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

// d/da of the elementary rotations above.
Mat3 rot_x_deriv(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return m;
}

Mat3 rot_y_deriv(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << -s, 0, c, 0, 0, 0, -c, 0, -s;
  return m;
}

Mat3 rot_z_deriv(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << -s, -c, 0, c, -s, 0, 0, 0, 0;
  return m;
}

}  // namespace

bool RateMatrix::invertible() const { return std::abs(det) > kGimbalLockDet; }

UnitQuaternion::UnitQuaternion(const Quaternion& q) : q_(q) {
  const double n = q.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitQuaternionTol) {
    std::ostringstream os;
    os << "quaternion norm " << n << " deviates from 1 by more than " << kUnitQuaternionTol;
    throw Error(ErrorKind::NotUnit, os.str());
  }
}

UnitQuaternion UnitQuaternion::normalized(const Quaternion& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || n == 0.0) throw Error(ErrorKind::NotUnit, "cannot normalize quaternion");
  UnitQuaternion u;
  u.q_ = {q.w / n, q.v / n};
  return u;
}

RotationMatrix rot_x(double a) { return RotationMatrix(rot_x_matrix(a)); }
RotationMatrix rot_y(double a) { return RotationMatrix(rot_y_matrix(a)); }
RotationMatrix rot_z(double a) { return RotationMatrix(rot_z_matrix(a)); }

RotationMatrix euler_to_rotation(const EulerAngles& e) {
  return RotationMatrix(Mat3(rot_x_matrix(e.phi) * rot_y_matrix(e.theta) * rot_z_matrix(e.psi)));
}

std::array<Mat3, 3> euler_rotation_partials(const EulerAngles& e) {
  const Mat3 c1 = rot_x_matrix(e.phi), c2 = rot_y_matrix(e.theta), c3 = rot_z_matrix(e.psi);
  return {rot_x_deriv(e.phi) * c2 * c3, c1 * rot_y_deriv(e.theta) * c3,
          c1 * c2 * rot_z_deriv(e.psi)};
}

RateMatrix euler_rate_matrix(const EulerAngles& e) {
  const Mat3 ct = euler_to_rotation(e).matrix().transpose();
  const auto partials = euler_rotation_partials(e);
  RateMatrix r;
  for (int i = 0; i < 3; ++i) r.d.col(i) = uncross(ct * partials[i], 1e-12);
  r.det = r.d.determinant();
  return r;
}

Mat3 euler_rate_matrix_derivative(const EulerAngles& e, const Vec3& rate) {
  // D = [(c_psi c_th, -s_psi c_th, s_th), (s_psi, c_psi, 0), e3]
  const double st = std::sin(e.theta), ct = std::cos(e.theta);
  const double sp = std::sin(e.psi), cp = std::cos(e.psi);
  const double dth = rate.y(), dps = rate.z();
  Mat3 dd = Mat3::Zero();
  dd.col(0) << -sp * dps * ct - cp * st * dth, -cp * dps * ct + sp * st * dth, ct * dth;
  dd.col(1) << cp * dps, -sp * dps, 0.0;
  return dd;
}

Vec3 euler_rate(const EulerAngles& e, const Vec3& omega) {
  const RateMatrix r = euler_rate_matrix(e);
  if (!r.invertible()) {
    std::ostringstream os;
    os << "|det D| = " << std::abs(r.det) << " at theta = " << e.theta;
    throw Error(ErrorKind::GimbalLock, os.str());
  }
  return r.d.partialPivLu().solve(omega);
}

EulerAngles euler_from_rotation(const RotationMatrix& rot) {
  const Mat3& c = rot.matrix();
  const double s_theta = std::clamp(c(0, 2), -1.0, 1.0);
  const double c_theta = std::hypot(c(0, 0), c(0, 1));
  if (c_theta <= kGimbalLockDet) {
    std::ostringstream os;
    os << "cos(theta) = " << c_theta << ", Euler angles are not unique";
    throw Error(ErrorKind::GimbalLock, os.str());
  }
  return {std::atan2(-c(1, 2), c(2, 2)), std::atan2(s_theta, c_theta), std::atan2(-c(0, 1), c(0, 0))};
}

FedorovParam fedorov_from_rotation(const RotationMatrix& rot) {
  const Mat3& c = rot.matrix();
  const double denom = 1.0 + c.trace();
  if (denom <= kPiRotationTol) {
    std::ostringstream os;
    os << "1 + tr C = " << denom << " (rotation angle is pi)";
    throw Error(ErrorKind::PiRotation, os.str());
  }
  return {uncross((c - c.transpose()) / denom, 1e-9)};
}

RotationMatrix rotation_from_fedorov(const FedorovParam& p) {
  const Vec3& f = p.f;
  const double n2 = f.squaredNorm();
  const Mat3 c = ((1.0 - n2) * Mat3::Identity() + 2.0 * f * f.transpose() + 2.0 * cross_matrix(f)) /
                 (1.0 + n2);
  return RotationMatrix(c);
}

RateMatrix fedorov_rate_matrix(const FedorovParam& p) {
  RateMatrix r;
  r.d = 2.0 / (1.0 + p.f.squaredNorm()) * (Mat3::Identity() - cross_matrix(p.f));
  r.det = r.d.determinant();
  return r;
}

RateMatrix fedorov_rate_matrix_parent(const FedorovParam& p) {
  RateMatrix r;
  r.d = 2.0 / (1.0 + p.f.squaredNorm()) * (Mat3::Identity() + cross_matrix(p.f));
  r.det = r.d.determinant();
  return r;
}

Mat3 fedorov_rate_matrix_derivative(const FedorovParam& p, const Vec3& rate) {
  const double s = 1.0 + p.f.squaredNorm();
  const Mat3 base = Mat3::Identity() - cross_matrix(p.f);
  return -4.0 * p.f.dot(rate) / (s * s) * base - 2.0 / s * cross_matrix(rate);
}

Vec3 fedorov_rate(const FedorovParam& f, const Vec3& omega) {
  return fedorov_rate_matrix(f).d.partialPivLu().solve(omega);
}

Quaternion quat_product(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.v.dot(b.v), a.w * b.v + b.w * a.v + a.v.cross(b.v)};
}

Quaternion quat_conjugate(const Quaternion& q) { return {q.w, -q.v}; }

RotationMatrix rotation_from_quat(const UnitQuaternion& uq) {
  const double l0 = uq.w(), l1 = uq.v().x(), l2 = uq.v().y(), l3 = uq.v().z();
  Mat3 c;
  // clang-format off
  c << l0*l0 + l1*l1 - l2*l2 - l3*l3, 2*l1*l2 - 2*l0*l3,             2*l1*l3 + 2*l0*l2,
       2*l1*l2 + 2*l0*l3,             l0*l0 - l1*l1 + l2*l2 - l3*l3, 2*l2*l3 - 2*l0*l1,
       2*l1*l3 - 2*l0*l2,             2*l2*l3 + 2*l0*l1,             l0*l0 - l1*l1 - l2*l2 + l3*l3;
  // clang-format on
  return RotationMatrix(c);
}

UnitQuaternion quat_from_rotation(const RotationMatrix& rot) {
  const Mat3& c = rot.matrix();
  const double tr = c.trace();
  Quaternion q;
  // Pick the largest of 4 w^2, 4 x^2, 4 y^2, 4 z^2 to divide by.
  const double cand[4] = {tr, c(0, 0), c(1, 1), c(2, 2)};
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (cand[i] > cand[best]) best = i;
  if (best == 0) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q = {0.25 * s, {(c(2, 1) - c(1, 2)) / s, (c(0, 2) - c(2, 0)) / s, (c(1, 0) - c(0, 1)) / s}};
  } else if (best == 1) {
    const double s = 2.0 * std::sqrt(1.0 + c(0, 0) - c(1, 1) - c(2, 2));
    q = {(c(2, 1) - c(1, 2)) / s, {0.25 * s, (c(0, 1) + c(1, 0)) / s, (c(0, 2) + c(2, 0)) / s}};
  } else if (best == 2) {
    const double s = 2.0 * std::sqrt(1.0 - c(0, 0) + c(1, 1) - c(2, 2));
    q = {(c(0, 2) - c(2, 0)) / s, {(c(0, 1) + c(1, 0)) / s, 0.25 * s, (c(1, 2) + c(2, 1)) / s}};
  } else {
    const double s = 2.0 * std::sqrt(1.0 - c(0, 0) - c(1, 1) + c(2, 2));
    q = {(c(1, 0) - c(0, 1)) / s, {(c(0, 2) + c(2, 0)) / s, (c(1, 2) + c(2, 1)) / s, 0.25 * s}};
  }
  if (q.w < 0.0) q = {-q.w, -q.v};
  return UnitQuaternion::normalized(q);
}

Quaternion quat_rate(const Quaternion& q, const Vec3& omega) {
  const double w1 = omega.x(), w2 = omega.y(), w3 = omega.z();
  Eigen::Matrix4d m;
  // clang-format off
  m << 0,  -w1, -w2, -w3,
       w1,  0,   w3, -w2,
       w2, -w3,  0,   w1,
       w3,  w2, -w1,  0;
  // clang-format on
  return Quaternion::from_vector(0.5 * m * q.as_vector());
}

Mat3 rotation_rate(const RotationMatrix& c, const Vec3& omega) {
  return c.matrix() * cross_matrix(omega);
}

int param_size(RotationParamKind kind) { return kind == RotationParamKind::Quaternion ? 4 : 3; }

RotationMatrix rotation_from_param(RotationParamKind kind, const Eigen::VectorXd& p) {
  switch (kind) {
    case RotationParamKind::Quaternion:
      return rotation_from_quat(UnitQuaternion::normalized(Quaternion::from_vector(p.head<4>())));
    case RotationParamKind::Euler:
      return euler_to_rotation(EulerAngles::from_vector(p.head<3>()));
    case RotationParamKind::Fedorov:
      return rotation_from_fedorov({p.head<3>()});
  }
  throw Error(ErrorKind::InvalidArgument, "unknown rotation parameterization");
}

Eigen::VectorXd param_from_rotation(RotationParamKind kind, const RotationMatrix& c) {
  switch (kind) {
    case RotationParamKind::Quaternion:
      return quat_from_rotation(c).value().as_vector();
    case RotationParamKind::Euler:
      return euler_from_rotation(c).as_vector();
    case RotationParamKind::Fedorov:
      return fedorov_from_rotation(c).f;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown rotation parameterization");
}

Eigen::VectorXd param_rate(RotationParamKind kind, const Eigen::VectorXd& p, const Vec3& omega) {
  switch (kind) {
    case RotationParamKind::Quaternion:
      return quat_rate(Quaternion::from_vector(p.head<4>()), omega).as_vector();
    case RotationParamKind::Euler:
      return euler_rate(EulerAngles::from_vector(p.head<3>()), omega);
    case RotationParamKind::Fedorov:
      return fedorov_rate({p.head<3>()}, omega);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown rotation parameterization");
}

RateMatrix param_rate_matrix(RotationParamKind kind, const Eigen::VectorXd& p) {
  switch (kind) {
    case RotationParamKind::Euler:
      return euler_rate_matrix(EulerAngles::from_vector(p.head<3>()));
    case RotationParamKind::Fedorov:
      return fedorov_rate_matrix({p.head<3>()});
    case RotationParamKind::Quaternion:
      break;
  }
  throw Error(ErrorKind::InvalidArgument, "quaternions have no square rate matrix");
}

Mat3 param_rate_matrix_derivative(RotationParamKind kind, const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& rate) {
  switch (kind) {
    case RotationParamKind::Euler:
      return euler_rate_matrix_derivative(EulerAngles::from_vector(p.head<3>()), rate.head<3>());
    case RotationParamKind::Fedorov:
      return fedorov_rate_matrix_derivative({p.head<3>()}, rate.head<3>());
    case RotationParamKind::Quaternion:
      break;
  }
  throw Error(ErrorKind::InvalidArgument, "quaternions have no square rate matrix");
}

}  // namespace screwdyn
