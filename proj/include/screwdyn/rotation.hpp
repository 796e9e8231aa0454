#pragma once

#include <array>
#include <cmath>

#include "screwdyn/spatial.hpp"

namespace screwdyn {

// Rotation parameterizations and their kinematic rate equations.
//
// Every angular velocity accepted or returned here is the body-frame
// (moving-frame) quasi-velocity w, the one appearing in C' = C w^x, unless a
// function name says otherwise.

/// Rotations about x, y, z by phi, theta, psi; the rotation is Cx(phi) Cy(theta) Cz(psi).
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;

  Vec3 as_vector() const { return {phi, theta, psi}; }
  static EulerAngles from_vector(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

/// Cayley (Gibbs) vector: f^x = (C - I)(C + I)^-1, f = tan(angle / 2) * axis.
struct FedorovParam {
  Vec3 f = Vec3::Zero();
};

/// Quaternion {scalar, vector}; not necessarily unit.
struct Quaternion {
  double w = 1.0;
  Vec3 v = Vec3::Zero();

  double norm() const { return std::sqrt(w * w + v.squaredNorm()); }
  Eigen::Vector4d as_vector() const { return {w, v.x(), v.y(), v.z()}; }
  static Quaternion from_vector(const Eigen::Vector4d& q) { return {q(0), q.tail<3>()}; }
  static Quaternion pure(const Vec3& v) { return {0.0, v}; }
};

inline constexpr double kUnitQuaternionTol = 1e-9;

/// Euler-Rodrigues parameters. Construction throws NotUnit if the norm is off
/// by more than 1e-9.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;
  explicit UnitQuaternion(const Quaternion& q);

  /// Rescales to unit norm; throws NotUnit for a zero or non-finite input.
  static UnitQuaternion normalized(const Quaternion& q);

  const Quaternion& value() const { return q_; }
  double w() const { return q_.w; }
  const Vec3& v() const { return q_.v; }

 private:
  Quaternion q_;
};

/// D in w = D * (parameter rate), with its determinant.
struct RateMatrix {
  Mat3 d = Mat3::Identity();
  double det = 1.0;
  bool invertible() const;
};

inline constexpr double kGimbalLockDet = 1e-8;
inline constexpr double kPiRotationTol = 1e-8;

RotationMatrix rot_x(double a);
RotationMatrix rot_y(double a);
RotationMatrix rot_z(double a);

RotationMatrix euler_to_rotation(const EulerAngles& e);

/// Partial derivatives of euler_to_rotation with respect to phi, theta, psi.
std::array<Mat3, 3> euler_rotation_partials(const EulerAngles& e);

/// Columns are uncross(C^T dC/dlambda_i); w = D * lambda'.
RateMatrix euler_rate_matrix(const EulerAngles& e);

/// Time derivative of euler_rate_matrix along the angle rate `rate`.
Mat3 euler_rate_matrix_derivative(const EulerAngles& e, const Vec3& rate);

/// lambda' = D^-1 w. Throws GimbalLock when |det D| <= 1e-8.
Vec3 euler_rate(const EulerAngles& e, const Vec3& omega);

/// Inverse of euler_to_rotation with theta in [-pi/2, pi/2]. Throws
/// GimbalLock when cos(theta) <= 1e-8 (phi and psi are not separable there).
EulerAngles euler_from_rotation(const RotationMatrix& c);

/// f^x = (C - C^T) / (1 + tr C). Throws PiRotation when 1 + tr C <= 1e-8.
FedorovParam fedorov_from_rotation(const RotationMatrix& c);

/// C = ((1 - |f|^2) I + 2 f f^T + 2 f^x) / (1 + |f|^2).
RotationMatrix rotation_from_fedorov(const FedorovParam& f);

/// Body-frame rate matrix for the Fedorov vector: w = 2/(1+|f|^2) (I - f^x) f'.
RateMatrix fedorov_rate_matrix(const FedorovParam& f);

/// Parent-frame rate matrix 2/(1+|f|^2) (I + f^x): maps f' to C w.
RateMatrix fedorov_rate_matrix_parent(const FedorovParam& f);

/// Time derivative of fedorov_rate_matrix along `rate`.
Mat3 fedorov_rate_matrix_derivative(const FedorovParam& f, const Vec3& rate);

/// f' = D^-1 w, inverted numerically.
Vec3 fedorov_rate(const FedorovParam& f, const Vec3& omega);

/// {l0 m0 - <l, m>, l0 m + m0 l + l x m}.
Quaternion quat_product(const Quaternion& a, const Quaternion& b);
Quaternion quat_conjugate(const Quaternion& q);

RotationMatrix rotation_from_quat(const UnitQuaternion& q);

/// Inverse of rotation_from_quat with the largest-diagonal branch; w >= 0.
UnitQuaternion quat_from_rotation(const RotationMatrix& c);

/// The 4x4 skew matrix of the quaternion kinematic equation times q, i.e.
/// q' = 0.5 q o w for body-frame w.
Quaternion quat_rate(const Quaternion& q, const Vec3& omega);

/// Euler kinematic relation C' = C w^x.
Mat3 rotation_rate(const RotationMatrix& c, const Vec3& omega);

/// Tag for the parameterization used by free joints and the simulator.
enum class RotationParamKind { Quaternion, Euler, Fedorov };

/// Number of coordinates used by a parameterization (4 or 3).
int param_size(RotationParamKind kind);

/// Parameterization-agnostic helpers over a packed coordinate vector.
RotationMatrix rotation_from_param(RotationParamKind kind, const Eigen::VectorXd& p);
Eigen::VectorXd param_from_rotation(RotationParamKind kind, const RotationMatrix& c);
Eigen::VectorXd param_rate(RotationParamKind kind, const Eigen::VectorXd& p, const Vec3& omega);

/// Body-frame D(p) with w = D p' for the three-coordinate parameterizations.
/// Throws InvalidArgument for quaternions.
RateMatrix param_rate_matrix(RotationParamKind kind, const Eigen::VectorXd& p);
Mat3 param_rate_matrix_derivative(RotationParamKind kind, const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& rate);

}  // namespace screwdyn
