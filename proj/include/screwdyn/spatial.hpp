#pragma once

#include <Eigen/Dense>

#include "screwdyn/errors.hpp"

namespace screwdyn {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kOrthonormalTol = 1e-9;
inline constexpr double kReorthonormalizeTol = 1e-6;

/// Cross-product matrix: cross_matrix(f) * g == f.cross(g).
Mat3 cross_matrix(const Vec3& f);

/// Inverse of cross_matrix. Throws NotSkew when the symmetric part of `m`
/// exceeds `tol` (max-abs entry).
Vec3 uncross(const Mat3& m, double tol = kOrthonormalTol);

/// Proper orthogonal 3x3 matrix. Inputs whose orthonormality defect is at
/// most 1e-9 are stored as given; a defect up to 1e-6 is removed by projecting
/// onto the nearest rotation; anything worse throws NotRotation.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}
  explicit RotationMatrix(const Mat3& m);

  static RotationMatrix identity() { return {}; }

  const Mat3& matrix() const { return m_; }
  RotationMatrix transpose() const;
  RotationMatrix operator*(const RotationMatrix& other) const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// max |m^T m - I| and |det m - 1| combined (max of the two).
  static double orthonormality_defect(const Mat3& m);

 private:
  struct Trusted {};
  RotationMatrix(const Mat3& m, Trusted) : m_(m) {}
  Mat3 m_;
};

/// Which operator-column convention a screw quantity uses.
enum class ScrewKind { Wrench, Twist };

/// Element of reduction of a screw: resultant r and moment mu at a point.
/// For kinematic twists the resultant slot holds the angular velocity and the
/// moment slot holds the linear velocity.
struct ScrewElement {
  Vec3 resultant = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
  ScrewKind kind = ScrewKind::Wrench;

  /// (resultant; moment) for wrenches, (moment; resultant) for twists.
  Vec6 column() const;
  static ScrewElement from_column(const Vec6& c, ScrewKind kind);
};

/// Force-like 6-vector, ordered (resultant; moment).
struct Wrench6 {
  Vec6 coords = Vec6::Zero();

  Wrench6() = default;
  explicit Wrench6(const Vec6& c) : coords(c) {}
  Wrench6(const Vec3& force, const Vec3& torque) { coords << force, torque; }

  Vec3 resultant() const { return coords.head<3>(); }
  Vec3 moment() const { return coords.tail<3>(); }
};

/// Velocity-like 6-vector, ordered (linear velocity; angular velocity).
struct Twist6 {
  Vec6 coords = Vec6::Zero();

  Twist6() = default;
  explicit Twist6(const Vec6& c) : coords(c) {}
  Twist6(const Vec3& v, const Vec3& w) { coords << v, w; }

  Vec3 linear() const { return coords.head<3>(); }
  Vec3 angular() const { return coords.tail<3>(); }
};

/// Power pairing of a wrench with a twist: <force, v> + <torque, w>.
inline double power(const Wrench6& w, const Twist6& v) { return w.coords.dot(v.coords); }

/// Moves the reduction point of a screw from b to a, where `ab` is the vector
/// from a to b: mu_a = mu_b + ab x r.
ScrewElement shift_reduction_point(const ScrewElement& s, const Vec3& ab);

enum class ScrewClass { Slider, Couple, General };

/// The zero screw classifies as a slider.
ScrewClass classify_screw(const ScrewElement& s);

/// Pose of a frame p relative to a frame 0: rotation C_{0,p} and displacement
/// d_{0,p} (origin of p) expressed in frame 0 coordinates.
struct MotionTransform {
  RotationMatrix rotation;
  Vec3 displacement = Vec3::Zero();

  static MotionTransform identity() { return {}; }
  static MotionTransform pure_rotation(const RotationMatrix& c) { return {c, Vec3::Zero()}; }
  static MotionTransform pure_translation(const Vec3& d) { return {RotationMatrix{}, d}; }

  /// d_{0,p} expressed in frame p, i.e. C_{0,p}^T d_{0,p}.
  Vec3 displacement_in_target() const { return rotation.matrix().transpose() * displacement; }

  /// Maps a point given in frame p coordinates into frame 0 coordinates.
  Vec3 apply_point(const Vec3& x) const { return displacement + rotation * x; }
};

/// L^wr = T C (x) or L^tw = J L^wr J (J swaps the 3x3 blocks).
Mat6 motion_group_element(const MotionTransform& t, ScrewKind kind);

/// Second factorization C (x) T' of L^wr, with T' built from the displacement
/// in target coordinates. Equal to motion_group_element(t, Wrench).
Mat6 motion_group_element_target_factored(const MotionTransform& t);

MotionTransform compose(const MotionTransform& t1, const MotionTransform& t2);
MotionTransform inverse(const MotionTransform& t);

Wrench6 transform_screw(const MotionTransform& t, const Wrench6& w);
Twist6 transform_screw(const MotionTransform& t, const Twist6& v);

/// Phi^wr = [w^x 0; v^x w^x]; Phi^tw = -(Phi^wr)^T.
Mat6 phi_matrix(const Twist6& v, ScrewKind kind);

/// Time derivative L * Phi of the group element when the moving frame has
/// body quasi-velocity `vrel`.
Mat6 motion_transform_rate(const MotionTransform& t, const Twist6& vrel, ScrewKind kind);

/// 6x6 block swap [0 I; I 0].
Mat6 block_swap();

}  // namespace screwdyn
