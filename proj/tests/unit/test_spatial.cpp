#include <gtest/gtest.h>

#include "screwdyn/rotation.hpp"
#include "screwdyn/spatial.hpp"
#include "support/generators.hpp"

using namespace screwdyn;
using screwdyn::testing::Gen;
using screwdyn::testing::max_abs;

namespace {

Mat6 block_diag(const Mat3& a) {
  Mat6 m = Mat6::Zero();
  m.block<3, 3>(0, 0) = a;
  m.block<3, 3>(3, 3) = a;
  return m;
}

double transform_distance(const MotionTransform& a, const MotionTransform& b) {
  return std::max(max_abs(a.rotation.matrix() - b.rotation.matrix()), max_abs(a.displacement - b.displacement));
}

}  // namespace

TEST(CrossMatrix, KnownPattern) {
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(cross_matrix(Vec3(1, 2, 3)), expected);
  EXPECT_EQ(cross_matrix(Vec3::Zero()), Mat3::Zero());
}

TEST(CrossMatrix, MatchesCrossProduct) {
  Gen gen(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 f = gen.vec3(), g = gen.vec3();
    const Vec3 brute(f.y() * g.z() - f.z() * g.y(), f.z() * g.x() - f.x() * g.z(), f.x() * g.y() - f.y() * g.x());
    EXPECT_LT(max_abs(cross_matrix(f) * g - brute), 1e-14);
    EXPECT_LT(max_abs(cross_matrix(f) + cross_matrix(f).transpose()), 1e-300);
  }
}

TEST(Uncross, InvertsCrossMatrix) {
  Mat3 m;
  m << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(uncross(m), Vec3(1, 2, 3));
  EXPECT_EQ(uncross(Mat3::Zero()), Vec3::Zero());
  Gen gen(2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 f = gen.vec3();
    EXPECT_LT(max_abs(uncross(cross_matrix(f)) - f), 1e-15);
  }
}

TEST(Uncross, RejectsSymmetricPart) {
  Mat3 m = cross_matrix(Vec3(1, 2, 3));
  m(0, 1) += 1e-3;
  EXPECT_THROW(uncross(m), Error);
  try {
    uncross(Mat3::Identity());
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotSkew);
  }
}

TEST(RotationMatrix, ProjectsSmallDriftAndRejectsLarge) {
  Gen gen(3);
  const Mat3 c = gen.rotation().matrix();
  const Mat3 drifted = c + 1e-7 * gen.mat3();
  const RotationMatrix fixed(drifted);
  EXPECT_LT(RotationMatrix::orthonormality_defect(fixed.matrix()), 1e-12);
  EXPECT_THROW(RotationMatrix(Mat3(c + 1e-3 * gen.mat3())), Error);
  EXPECT_THROW(RotationMatrix(Mat3(-Mat3::Identity())), Error);
}

TEST(ShiftReductionPoint, HandExample) {
  const ScrewElement s{Vec3(0, 0, 1), Vec3::Zero(), ScrewKind::Wrench};
  const ScrewElement a = shift_reduction_point(s, Vec3(1, 0, 0));
  EXPECT_EQ(a.resultant, Vec3(0, 0, 1));
  EXPECT_LT(max_abs(a.moment - Vec3(0, -1, 0)), 1e-15);
  const ScrewElement same = shift_reduction_point(s, Vec3::Zero());
  EXPECT_EQ(same.moment, s.moment);
}

TEST(ShiftReductionPoint, RoundTripAndResultantInvariant) {
  Gen gen(4);
  for (ScrewKind kind : {ScrewKind::Wrench, ScrewKind::Twist}) {
    for (int i = 0; i < 100; ++i) {
      const ScrewElement s{gen.vec3(), gen.vec3(), kind};
      const Vec3 ab = gen.vec3();
      const ScrewElement there = shift_reduction_point(s, ab);
      const ScrewElement back = shift_reduction_point(there, -ab);
      EXPECT_EQ(there.resultant, s.resultant);
      EXPECT_LT(max_abs(back.moment - s.moment), 1e-13);
      // Both conventions realize mu_a = mu_b + ab x r on the element.
      EXPECT_LT(max_abs(there.moment - (s.moment + ab.cross(s.resultant))), 1e-13);
    }
  }
}

TEST(ClassifyScrew, Examples) {
  EXPECT_EQ(classify_screw({Vec3::Zero(), Vec3(1, 0, 0)}), ScrewClass::Couple);
  EXPECT_EQ(classify_screw({Vec3(1, 0, 0), Vec3(2, 0, 0)}), ScrewClass::Slider);
  EXPECT_EQ(classify_screw({Vec3(1, 0, 0), Vec3(0, 1, 0)}), ScrewClass::General);
  EXPECT_EQ(classify_screw({Vec3::Zero(), Vec3::Zero()}), ScrewClass::Slider);
}

TEST(ClassifyScrew, SliderStaysSliderWhenShiftedAlongResultant) {
  Gen gen(5);
  for (int i = 0; i < 50; ++i) {
    const Vec3 r = gen.vec3();
    const ScrewElement axial{r, Vec3::Zero()};
    EXPECT_EQ(classify_screw(shift_reduction_point(axial, gen.uniform(-3, 3) * r)), ScrewClass::Slider);
  }
}

TEST(MotionGroupElement, Examples) {
  EXPECT_EQ(motion_group_element(MotionTransform::identity(), ScrewKind::Wrench), Mat6::Identity());
  Gen gen(6);
  const RotationMatrix c = gen.rotation();
  EXPECT_EQ(motion_group_element(MotionTransform::pure_rotation(c), ScrewKind::Wrench), block_diag(c.matrix()));
  const Mat6 l = motion_group_element(MotionTransform::pure_translation(Vec3(1, 0, 0)), ScrewKind::Wrench);
  Mat6 expected = Mat6::Identity();
  expected.block<3, 3>(3, 0) = cross_matrix(Vec3(1, 0, 0));
  EXPECT_EQ(l, expected);
}

TEST(MotionGroupElement, FactorizationsAndDuality) {
  Gen gen(7);
  const Mat6 j = block_swap();
  for (int i = 0; i < 200; ++i) {
    const MotionTransform t = gen.transform();
    const Mat6 lwr = motion_group_element(t, ScrewKind::Wrench);
    EXPECT_LT(max_abs(lwr - motion_group_element_target_factored(t)), 1e-12);
    EXPECT_LT(max_abs(motion_group_element(t, ScrewKind::Twist) - j * lwr * j), 1e-15);
  }
}

TEST(Compose, GroupAxioms) {
  Gen gen(8);
  for (int i = 0; i < 200; ++i) {
    const MotionTransform a = gen.transform(), b = gen.transform(), c = gen.transform();
    EXPECT_LT(transform_distance(compose(a, MotionTransform::identity()), a), 1e-15);
    EXPECT_LT(transform_distance(compose(a, inverse(a)), MotionTransform::identity()), 1e-12);
    EXPECT_LT(transform_distance(inverse(inverse(a)), a), 1e-12);
    EXPECT_LT(transform_distance(compose(compose(a, b), c), compose(a, compose(b, c))), 1e-12);
    for (ScrewKind kind : {ScrewKind::Wrench, ScrewKind::Twist}) {
      const Mat6 lhs = motion_group_element(compose(a, b), kind);
      const Mat6 rhs = motion_group_element(a, kind) * motion_group_element(b, kind);
      EXPECT_LT(max_abs(lhs - rhs), 1e-12);
      EXPECT_LT(max_abs(motion_group_element(inverse(a), kind) * motion_group_element(a, kind) - Mat6::Identity()),
                1e-12);
    }
  }
}

TEST(TransformScrew, MatchesGroupElementAndShift) {
  Gen gen(9);
  for (int i = 0; i < 100; ++i) {
    const MotionTransform t = gen.transform();
    const Wrench6 w(gen.vec6());
    const Twist6 v(gen.vec6());
    EXPECT_LT(max_abs(transform_screw(t, w).coords - motion_group_element(t, ScrewKind::Wrench) * w.coords), 1e-13);
    EXPECT_LT(max_abs(transform_screw(t, v).coords - motion_group_element(t, ScrewKind::Twist) * v.coords), 1e-13);
    // Frame change preserves the power pairing.
    EXPECT_NEAR(power(transform_screw(t, w), transform_screw(t, v)), power(w, v), 1e-12);

    // A pure translation by d moves the reduction point from the target
    // origin to the frame-0 origin: ab = (origin_0 -> origin_p) = d.
    const Vec3 d = gen.vec3();
    const Wrench6 moved = transform_screw(MotionTransform::pure_translation(d), w);
    const ScrewElement shifted = shift_reduction_point({w.resultant(), w.moment()}, d);
    EXPECT_LT(max_abs(moved.moment() - shifted.moment), 1e-13);
  }
  const Wrench6 pure_force(Vec3(1, 2, 3), Vec3::Zero());
  EXPECT_EQ(transform_screw(MotionTransform::pure_rotation(gen.rotation()), pure_force).moment(), Vec3::Zero());
  const Twist6 v(gen.vec6());
  EXPECT_EQ(transform_screw(MotionTransform::identity(), v).coords, v.coords);
}

TEST(PhiMatrix, LayoutAndDuality) {
  EXPECT_EQ(phi_matrix(Twist6(), ScrewKind::Wrench), Mat6::Zero());
  const Mat6 p = phi_matrix(Twist6(Vec3::Zero(), Vec3::UnitZ()), ScrewKind::Wrench);
  EXPECT_EQ(p, block_diag(cross_matrix(Vec3::UnitZ())));
  Gen gen(10);
  for (int i = 0; i < 100; ++i) {
    const Twist6 v(gen.vec6());
    EXPECT_EQ(phi_matrix(v, ScrewKind::Twist) + phi_matrix(v, ScrewKind::Wrench).transpose(), Mat6::Zero());
  }
}

TEST(MotionTransformRate, ZeroVelocityGivesZero) {
  Gen gen(11);
  EXPECT_EQ(motion_transform_rate(gen.transform(), Twist6(), ScrewKind::Wrench), Mat6::Zero());
}

TEST(MotionTransformRate, MatchesFiniteDifferenceAlongScrewMotion) {
  // Constant body twist: X(t) = X0 exp(t V). Advance the pose with the exact
  // screw motion (rotation about w, translation integrated in closed form).
  Gen gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const MotionTransform x0 = gen.transform();
    const Vec3 v = gen.vec3(), w = gen.vec3();
    auto pose = [&](double t) {
      const double th = w.norm() * t;
      const Vec3 axis = w.normalized();
      const Mat3 k = cross_matrix(axis);
      const Mat3 rot = Mat3::Identity() + std::sin(th) * k + (1 - std::cos(th)) * k * k;
      // integral of exp(s w^x) ds from 0 to t
      const Mat3 g = t * Mat3::Identity() + (1 - std::cos(th)) / w.norm() * k + (th - std::sin(th)) / w.norm() * k * k;
      return compose(x0, MotionTransform{RotationMatrix(rot), g * v});
    };
    for (ScrewKind kind : {ScrewKind::Wrench, ScrewKind::Twist}) {
      const double h = 1e-5;
      const Mat6 fd = (motion_group_element(pose(h), kind) - motion_group_element(pose(-h), kind)) / (2 * h);
      const Mat6 exact = motion_transform_rate(x0, Twist6(v, w), kind);
      EXPECT_LT(max_abs(fd - exact), 1e-8 * (1 + max_abs(exact)));
    }
    const double h = 1e-5;
    const Mat3 cdot = (pose(h).rotation.matrix() - pose(-h).rotation.matrix()) / (2 * h);
    EXPECT_LT(max_abs(cdot - rotation_rate(x0.rotation, w)), 1e-8);
  }
}
