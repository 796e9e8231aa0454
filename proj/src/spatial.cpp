#include "screwdyn/spatial.hpp"

#include <cmath>
#include <sstream>

namespace screwdyn {

Mat3 cross_matrix(const Vec3& f) {
  Mat3 m;
  // clang-format off
  m <<  0.0,  -f.z(),  f.y(),
        f.z(),  0.0,  -f.x(),
       -f.y(),  f.x(),  0.0;
  // clang-format on
  return m;
}

Vec3 uncross(const Mat3& m, double tol) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  const double defect = sym.cwiseAbs().maxCoeff();
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << "symmetric part " << defect << " exceeds tolerance " << tol;
    throw Error(ErrorKind::NotSkew, os.str());
  }
  return {0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)), 0.5 * (m(1, 0) - m(0, 1))};
}

double RotationMatrix::orthonormality_defect(const Mat3& m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(m.determinant() - 1.0));
}

RotationMatrix::RotationMatrix(const Mat3& m) : m_(m) {
  if (!m.allFinite()) throw Error(ErrorKind::NotRotation, "non-finite entries");
  const double defect = orthonormality_defect(m);
  if (defect <= kOrthonormalTol) return;
  if (!(defect <= kReorthonormalizeTol) || m.determinant() <= 0.0) {
    std::ostringstream os;
    os << "orthonormality defect " << defect;
    throw Error(ErrorKind::NotRotation, os.str());
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  m_ = svd.matrixU() * svd.matrixV().transpose();
}

RotationMatrix RotationMatrix::transpose() const { return {m_.transpose(), Trusted{}}; }

RotationMatrix RotationMatrix::operator*(const RotationMatrix& other) const {
  return RotationMatrix(Mat3(m_ * other.m_));
}

Vec6 ScrewElement::column() const {
  Vec6 c;
  if (kind == ScrewKind::Wrench)
    c << resultant, moment;
  else
    c << moment, resultant;
  return c;
}

ScrewElement ScrewElement::from_column(const Vec6& c, ScrewKind kind) {
  if (kind == ScrewKind::Wrench) return {c.head<3>(), c.tail<3>(), kind};
  return {c.tail<3>(), c.head<3>(), kind};
}

ScrewElement shift_reduction_point(const ScrewElement& s, const Vec3& ab) {
  // Wrench column: [I 0; ab^x I]; twist column: [I ab^x; 0 I].
  Mat6 shift = Mat6::Identity();
  if (s.kind == ScrewKind::Wrench)
    shift.block<3, 3>(3, 0) = cross_matrix(ab);
  else
    shift.block<3, 3>(0, 3) = cross_matrix(ab);
  return ScrewElement::from_column(shift * s.column(), s.kind);
}

ScrewClass classify_screw(const ScrewElement& s) {
  constexpr double tol = 1e-12;
  const double nr = s.resultant.norm();
  const double nm = s.moment.norm();
  if (nr <= tol) return nm <= tol ? ScrewClass::Slider : ScrewClass::Couple;
  if (nm <= tol * nr || s.resultant.cross(s.moment).norm() <= tol * nr * nm) return ScrewClass::Slider;
  return ScrewClass::General;
}

Mat6 block_swap() {
  Mat6 j = Mat6::Zero();
  j.block<3, 3>(0, 3).setIdentity();
  j.block<3, 3>(3, 0).setIdentity();
  return j;
}

Mat6 motion_group_element(const MotionTransform& t, ScrewKind kind) {
  const Mat3& c = t.rotation.matrix();
  Mat6 l = Mat6::Zero();
  if (kind == ScrewKind::Wrench) {
    l.block<3, 3>(0, 0) = c;
    l.block<3, 3>(3, 0) = cross_matrix(t.displacement) * c;
    l.block<3, 3>(3, 3) = c;
  } else {
    l.block<3, 3>(0, 0) = c;
    l.block<3, 3>(0, 3) = cross_matrix(t.displacement) * c;
    l.block<3, 3>(3, 3) = c;
  }
  return l;
}

Mat6 motion_group_element_target_factored(const MotionTransform& t) {
  const Mat3& c = t.rotation.matrix();
  Mat6 rot = Mat6::Zero();
  rot.block<3, 3>(0, 0) = c;
  rot.block<3, 3>(3, 3) = c;
  Mat6 shift = Mat6::Identity();
  shift.block<3, 3>(3, 0) = cross_matrix(t.displacement_in_target());
  return rot * shift;
}

MotionTransform compose(const MotionTransform& t1, const MotionTransform& t2) {
  return {t1.rotation * t2.rotation, t1.displacement + t1.rotation * t2.displacement};
}

MotionTransform inverse(const MotionTransform& t) {
  const RotationMatrix ct = t.rotation.transpose();
  return {ct, -(ct * t.displacement)};
}

Wrench6 transform_screw(const MotionTransform& t, const Wrench6& w) {
  const Mat3& c = t.rotation.matrix();
  const Vec3 r = c * w.resultant();
  return Wrench6(r, t.displacement.cross(r) + c * w.moment());
}

Twist6 transform_screw(const MotionTransform& t, const Twist6& v) {
  const Mat3& c = t.rotation.matrix();
  const Vec3 w = c * v.angular();
  return Twist6(c * v.linear() + t.displacement.cross(w), w);
}

Mat6 phi_matrix(const Twist6& v, ScrewKind kind) {
  const Mat3 wx = cross_matrix(v.angular());
  const Mat3 vx = cross_matrix(v.linear());
  Mat6 phi = Mat6::Zero();
  phi.block<3, 3>(0, 0) = wx;
  phi.block<3, 3>(3, 3) = wx;
  if (kind == ScrewKind::Wrench)
    phi.block<3, 3>(3, 0) = vx;
  else
    phi.block<3, 3>(0, 3) = vx;  // -(Phi^wr)^T, since (a^x)^T = -a^x
  return phi;
}

Mat6 motion_transform_rate(const MotionTransform& t, const Twist6& vrel, ScrewKind kind) {
  return motion_group_element(t, kind) * phi_matrix(vrel, kind);
}

}  // namespace screwdyn
