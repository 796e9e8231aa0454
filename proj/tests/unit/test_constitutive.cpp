#include <gtest/gtest.h>

#include "screwdyn/constitutive.hpp"
#include "support/generators.hpp"

using namespace screwdyn;
using screwdyn::testing::Gen;
using screwdyn::testing::max_abs;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::InvalidArgument;
}

RheologyCoeffs coeffs(double r0, double r1, double r2, double r3, BasisTag tag = BasisTag::SymAnt) {
  RheologyCoeffs c;
  c.r = {r0, r1, r2, r3};
  c.basis = tag;
  return c;
}

// Coefficients kept at least 0.2 away from the non-invertible set
// (r1 n + r2) r2 r3 = 0, so round-off is not amplified by near-division by zero.
RheologyCoeffs admissible(Gen& gen, int n, BasisTag tag = BasisTag::SymAnt) {
  auto signed_mag = [&] { return (gen.integer(0, 1) ? 1.0 : -1.0) * gen.uniform(0.2, 3.0); };
  for (;;) {
    const RheologyCoeffs r = coeffs(gen.normal(), gen.uniform(-3, 3), signed_mag(), signed_mag());
    if (std::abs(r.r[1] * n + r.r[2]) < 0.2) continue;
    return tag == BasisTag::SymAnt ? r : r.in_basis(tag);
  }
}

Eigen::MatrixXd random_matrix(Gen& gen, int n) {
  return Eigen::MatrixXd::NullaryExpr(n, n, [&] { return gen.normal(); });
}

template <typename T>
double grid_max(const Grid3<T>& g, const std::function<double(const T&, const Vec3&)>& f) {
  double m = 0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) m = std::max(m, f(g.at(i, j, k), g.position(i, j, k)));
  return m;
}

// Smooth manufactured fields for the balance-law residual.
double mms_rho(const Vec3& x, double t) { return 1.0 + 0.2 * std::sin(x.x() + t); }
Vec3 mms_v(const Vec3& x, double t) {
  return {std::sin(x.y()) * std::cos(t), std::cos(x.x()) * (1 + t), std::sin(x.z())};
}
Mat3 mms_t(const Vec3& x) {
  Mat3 m;
  m << x.x() * x.x() * x.y(), std::sin(x.z()), 0, 0, std::cos(x.x()), x.y() * x.z(), x.z(), 0, std::exp(0.5 * x.x());
  return m;
}
// Hand-differentiated residuals of the fields above.
Vec3 mms_momentum(const Vec3& x, double t, const Vec3& g) {
  const Vec3 v = mms_v(x, t);
  const Vec3 dvdt(-std::sin(x.y()) * std::sin(t), std::cos(x.x()), 0);
  const Vec3 conv(std::cos(x.y()) * std::cos(t) * v.y(), -std::sin(x.x()) * (1 + t) * v.x(), std::cos(x.z()) * v.z());
  const Vec3 div_t(2 * x.x() * x.y(), x.y(), 0);
  const double rho = mms_rho(x, t);
  return rho * (dvdt + conv) - rho * g - div_t;
}
double mms_continuity(const Vec3& x, double t) {
  const Vec3 v = mms_v(x, t);
  return 0.2 * std::cos(x.x() + t) + 0.2 * std::cos(x.x() + t) * v.x() + mms_rho(x, t) * std::cos(x.z());
}

struct MmsError {
  double momentum = 0, continuity = 0;
};

MmsError mms_error(int n) {
  const double h = 1.0 / (n - 1), dt = h, t0 = 0.3;
  const Vec3 g(0, 0, -9.81);
  auto snap = [&](double t) {
    FieldSnapshot s;
    s.density = Grid3<double>::sample(n, n, n, h, Vec3::Zero(), [&](const Vec3& x) { return mms_rho(x, t); });
    s.velocity = Grid3<Vec3>::sample(n, n, n, h, Vec3::Zero(), [&](const Vec3& x) { return mms_v(x, t); });
    s.stress = Grid3<Mat3>::sample(n, n, n, h, Vec3::Zero(), [](const Vec3& x) { return mms_t(x); });
    return s;
  };
  const MotionResiduals r = momentum_residual(snap(t0), snap(t0 + dt), g, dt);
  const double tm = t0 + dt / 2;
  MmsError e;
  e.momentum = grid_max<Vec3>(r.momentum, [&](const Vec3& m, const Vec3& x) { return max_abs(m - mms_momentum(x, tm, g)); });
  e.continuity =
      grid_max<double>(r.continuity, [&](const double& c, const Vec3& x) { return std::abs(c - mms_continuity(x, tm)); });
  return e;
}

}  // namespace

TEST(Strain, IntegrationAsWritten) {
  const StrainState zero = strain_integrate({{0.0, Mat3::Zero()}, {1.0, Mat3::Zero()}, {5.0, Mat3::Zero()}});
  EXPECT_EQ(zero.z, Mat3::Identity());
  EXPECT_EQ(zero.z_dot, Mat3::Zero());

  Gen gen(80);
  const Mat3 g = gen.mat3();
  std::vector<GradientSample> hist;
  for (int i = 0; i <= 10; ++i) hist.push_back({0.5 + 0.2 * i, g});
  const StrainState s = strain_integrate(hist);
  EXPECT_LT(max_abs(s.z - (Mat3::Identity() + 2.0 * g)), 1e-14);
  EXPECT_EQ(s.z_dot, g);

  // Rigid rotation v = w x r: the gradient is w^x, so Z = I + w^x t, which
  // is not a rotation for t != 0 (the classical deformation gradient is exp).
  const Vec3 w(0, 0, 1.0);
  const Mat3 grad = velocity_gradient([&](const Vec3& r) { return Vec3(w.cross(r)); }, gen.vec3());
  EXPECT_LT(max_abs(grad - cross_matrix(w)), 1e-9);
  const StrainState rot = strain_integrate({{0.0, grad}, {1.0, grad}});
  EXPECT_LT(max_abs(rot.z - (Mat3::Identity() + cross_matrix(w))), 1e-9);
  EXPECT_GT(RotationMatrix::orthonormality_defect(rot.z), 0.5);
}

TEST(Strain, VelocityGradientLayout) {
  // G_ij = d v_i / d x_j.
  const Mat3 g = velocity_gradient([](const Vec3& x) { return Vec3(2 * x.y(), 3 * x.z(), -x.x()); }, Vec3(1, 2, 3));
  Mat3 expected;
  expected << 0, 2, 0, 0, 0, 3, -1, 0, 0;
  EXPECT_LT(max_abs(g - expected), 1e-9);
}

TEST(IsotropicBasis, Examples) {
  const auto e = isotropic_basis(Mat3::Identity(), BasisTag::SymAnt);
  EXPECT_EQ(e[0], Eigen::MatrixXd(Mat3::Identity()));
  EXPECT_EQ(e[1], Eigen::MatrixXd(3 * Mat3::Identity()));
  EXPECT_EQ(e[2], Eigen::MatrixXd(Mat3::Identity()));
  EXPECT_EQ(e[3], Eigen::MatrixXd(Mat3::Zero()));
  const Mat3 k = cross_matrix(Vec3(1, 2, 3));
  const auto s = isotropic_basis(k, BasisTag::SymAnt);
  EXPECT_EQ(s[2], Eigen::MatrixXd(Mat3::Zero()));
  EXPECT_EQ(s[3], Eigen::MatrixXd(k));
  const auto t = isotropic_basis(k, BasisTag::Transpose);
  EXPECT_EQ(t[2], Eigen::MatrixXd(k));
  EXPECT_EQ(t[3], Eigen::MatrixXd(k.transpose()));
}

TEST(IsotropicBasis, RotationEquivariance) {
  Gen gen(81);
  for (BasisTag tag : {BasisTag::SymAnt, BasisTag::Transpose}) {
    for (int i = 0; i < 100; ++i) {
      const Mat3 c = gen.rotation().matrix();
      const Mat3 u = gen.mat3();
      const auto lhs = isotropic_basis(c * u * c.transpose(), tag);
      const auto rhs = isotropic_basis(u, tag);
      for (int j = 0; j < 4; ++j) EXPECT_LT(max_abs(lhs[j] - c * rhs[j] * c.transpose()), 1e-12);
    }
  }
}

TEST(ConstitutiveApply, Examples) {
  EXPECT_LT(max_abs(constitutive_apply(coeffs(0, 1, 1, 0), Mat3::Identity()) - 4 * Mat3::Identity()), 1e-15);
  Gen gen(82);
  const Mat3 u = gen.mat3();
  EXPECT_LT(max_abs(constitutive_apply(coeffs(2.5, 0, 0, 0), u) + 2.5 * Mat3::Identity()), 1e-15);
  EXPECT_LT(max_abs(constitutive_apply(coeffs(1.5, 3, 4, 5), Mat3::Zero()) + 1.5 * Mat3::Identity()), 1e-15);
  // 2x2 with the same relation.
  EXPECT_LT(max_abs(constitutive_apply(coeffs(0, 1, 1, 0), Eigen::Matrix2d::Identity()) - 3 * Eigen::Matrix2d::Identity()),
            1e-15);
}

TEST(ConstitutiveApply, IsotropyWithInvariantCoefficients) {
  RheologyCoeffs law;
  law.law = [](const MatrixInvariants& inv) {
    return std::array<double, 4>{1.0 + inv.trace_uut, 0.3 * inv.trace, 2.0 + std::sin(inv.det), 1.0 + inv.trace_sq * 0.1};
  };
  Gen gen(83);
  for (int i = 0; i < 200; ++i) {
    const Mat3 c = gen.rotation().matrix();
    const Mat3 u = gen.mat3();
    const Eigen::MatrixXd lhs = constitutive_apply(law, c * u * c.transpose());
    const Eigen::MatrixXd rhs = c * constitutive_apply(law, u) * c.transpose();
    EXPECT_LT(max_abs(lhs - rhs), 1e-10);
  }
}

TEST(ConstitutiveApply, BasisConversion) {
  Gen gen(84);
  for (int i = 0; i < 100; ++i) {
    const RheologyCoeffs a = coeffs(gen.normal(), gen.normal(), gen.normal(), gen.normal());
    const RheologyCoeffs b = a.in_basis(BasisTag::Transpose);
    EXPECT_EQ(b.basis, BasisTag::Transpose);
    for (int n : {2, 3}) {
      const Eigen::MatrixXd u = random_matrix(gen, n);
      EXPECT_LT(max_abs(constitutive_apply(a, u) - constitutive_apply(b, u)), 1e-13);
    }
    const RheologyCoeffs back = b.in_basis(BasisTag::SymAnt);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(back.r[j], a.r[j], 1e-15);
  }
}

TEST(Planar, ExtendedRelation) {
  const Eigen::Matrix2d it = skew_unit_2d();
  EXPECT_EQ(pfaffian_trace(Eigen::Matrix2d::Identity()), 0.0);
  EXPECT_EQ(pfaffian_trace(it), -2.0);
  const Coeffs2d c{0.5, 0.7, 1.1, 1.3, 1.7, 1.9, 2.3, 2.9};
  // U = I: It U = It, It U It = -I, pf U = 0.
  const Eigen::Matrix2d expected =
      (-c.r0 + 2 * c.r1 + c.r2 + c.r3 - c.r5) * Eigen::Matrix2d::Identity() + (c.r0t + c.r4) * it;
  EXPECT_LT(max_abs(constitutive_apply_2d(c, Eigen::Matrix2d::Identity()) - expected), 1e-15);
  Coeffs2d only_r0;
  only_r0.r0 = 3.0;
  EXPECT_EQ(constitutive_apply_2d(only_r0, Eigen::Matrix2d::Zero()), Eigen::Matrix2d(-3.0 * Eigen::Matrix2d::Identity()));
  // Planar rotations commute with It, so the extended relation is isotropic.
  Gen gen(85);
  for (int i = 0; i < 50; ++i) {
    const double a = gen.uniform(-3, 3);
    const Eigen::Matrix2d r = Eigen::Rotation2Dd(a).toRotationMatrix();
    const Eigen::Matrix2d u = Eigen::Matrix2d::Random();
    EXPECT_LT(max_abs(constitutive_apply_2d(c, r * u * r.transpose()) - r * constitutive_apply_2d(c, u) * r.transpose()),
              1e-13);
  }
}

TEST(Planar, BasisIndependence) {
  Gen gen(86);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix2d u = Eigen::Matrix2d::NullaryExpr([&] { return gen.normal(); });
    const BasisReport2d rep = basis_independence_2d(u);
    EXPECT_EQ(rep.rank, 4);
    for (double r : rep.span_residuals) EXPECT_LT(r, 1e-10);
    EXPECT_LT(rep.span_residuals[2], 1e-12);  // It U It
  }
  EXPECT_EQ(kind_of([] { basis_independence_2d(Eigen::Matrix2d::Identity()); }), ErrorKind::DegenerateU);
  EXPECT_EQ(kind_of([] { basis_independence_2d(2.0 * skew_unit_2d()); }), ErrorKind::DegenerateU);
}

TEST(Invert, RoundTripBothDimensionsAndBases) {
  Gen gen(87);
  for (int i = 0; i < 1000; ++i) {
    const int n = i % 2 == 0 ? 3 : 2;
    const RheologyCoeffs r = admissible(gen, n, i % 4 < 2 ? BasisTag::SymAnt : BasisTag::Transpose);
    const Eigen::MatrixXd u = random_matrix(gen, n);
    const Eigen::MatrixXd t = constitutive_apply(r, u);
    try {
      const Eigen::MatrixXd back = constitutive_invert(r, t);
      EXPECT_LT(max_abs(constitutive_apply(r, back) - t), 1e-12 * (1 + max_abs(t)));
    } catch (const Error& e) {
      ADD_FAILURE() << e.what();
    }
  }
  const RheologyCoeffs fixed = coeffs(1, 2, 3, 4);
  for (int n : {2, 3}) {
    const Eigen::MatrixXd u = random_matrix(gen, n);
    EXPECT_LT(max_abs(constitutive_invert(fixed, constitutive_apply(fixed, u)) - u), 1e-12);
    EXPECT_LT(max_abs(constitutive_invert(fixed, -1.0 * Eigen::MatrixXd::Identity(n, n))), 1e-15);
  }
}

TEST(Invert, IncorrectContinua) {
  const Eigen::MatrixXd t = Mat3::Identity();
  EXPECT_EQ(kind_of([&] { constitutive_invert(coeffs(0, 1, 2, 0), t); }), ErrorKind::Incorrect);
  EXPECT_EQ(kind_of([&] { constitutive_invert(coeffs(0, 1, 0, 1), t); }), ErrorKind::Incorrect);
  // r1 n + r2 = 0 in 3D but not in 2D.
  EXPECT_EQ(kind_of([&] { constitutive_invert(coeffs(0, -1, 3, 1), t); }), ErrorKind::Incorrect);
  EXPECT_NO_THROW(constitutive_invert(coeffs(0, -1, 3, 1), Eigen::MatrixXd(Eigen::Matrix2d::Identity())));
}

TEST(Moduli, Examples) {
  const Moduli m = moduli(coeffs(0, 1, 2, 0), 3);
  EXPECT_DOUBLE_EQ(m.young, 2.5);
  EXPECT_DOUBLE_EQ(m.shear, 1.0);
  EXPECT_DOUBLE_EQ(m.poisson, 0.25);
  const Moduli z = moduli(coeffs(0, 0, 2, 0), 3);
  EXPECT_EQ(z.poisson, 0.0);
  EXPECT_DOUBLE_EQ(z.young, 2.0);
  EXPECT_DOUBLE_EQ(z.young, 2 * z.shear);
  EXPECT_EQ(kind_of([] { moduli(coeffs(0, 1, 0, 0), 3); }), ErrorKind::DegenerateCoeffs);
  EXPECT_EQ(kind_of([] { moduli(coeffs(0, -1, 2, 0), 3); }), ErrorKind::DegenerateCoeffs);
}

TEST(Moduli, YoungShearPoissonIdentity) {
  Gen gen(88);
  for (int i = 0; i < 1000; ++i) {
    const int dim = i % 2 == 0 ? 3 : 2;
    const Moduli m = moduli(admissible(gen, dim), dim);
    EXPECT_LE(std::abs(m.young - 2 * m.shear * (1 + m.poisson)), 1e-15 * std::abs(m.young));
  }
}

TEST(FieldOperators, GridTooSmall) {
  const Grid3<Mat3> small(2, 5, 5, 0.1, Vec3::Zero(), Mat3::Zero());
  EXPECT_EQ(kind_of([&] { divergence_rows(small); }), ErrorKind::GridTooSmall);
  EXPECT_EQ(kind_of([&] { div_stress_field(small, coeffs(1, 1, 1, 1)); }), ErrorKind::GridTooSmall);
}

TEST(FieldOperators, ConstantAndLinearFieldsExact) {
  Gen gen(89);
  const Mat3 a = gen.mat3();
  const Grid3<Mat3> c = Grid3<Mat3>::sample(4, 5, 6, 0.3, gen.vec3(), [&](const Vec3&) { return a; });
  EXPECT_LT(grid_max<Vec3>(divergence_rows(c), [](const Vec3& d, const Vec3&) { return max_abs(d); }), 1e-13);

  // T_ij = a_ij + b_ijk x_k: (Div T)_i = sum_k b_ikk.
  std::array<Mat3, 3> b{gen.mat3(), gen.mat3(), gen.mat3()};  // b[k](i, j)
  const Grid3<Mat3> lin = Grid3<Mat3>::sample(5, 4, 6, 0.25, gen.vec3(), [&](const Vec3& x) {
    return Mat3(a + b[0] * x.x() + b[1] * x.y() + b[2] * x.z());
  });
  Vec3 expected;
  for (int i = 0; i < 3; ++i) expected(i) = b[0](i, 0) + b[1](i, 1) + b[2](i, 2);
  EXPECT_LT(grid_max<Vec3>(divergence_rows(lin), [&](const Vec3& d, const Vec3&) { return max_abs(d - expected); }),
            1e-10);

  // Termwise assembly is also exact when U is linear and coefficients constant.
  const RheologyCoeffs r = coeffs(0.5, 1.5, -2.0, 0.7);
  const Grid3<Vec3> termwise = div_stress_field(lin, r);
  Grid3<Mat3> t = lin;
  for (auto& m : t.data) m = constitutive_apply(r, m);
  const Grid3<Vec3> direct = divergence_rows(t);
  for (std::size_t i = 0; i < direct.data.size(); ++i) EXPECT_LT(max_abs(termwise.data[i] - direct.data[i]), 1e-10);
}

TEST(FieldOperators, SecondOrderConvergence) {
  // U = smooth non-symmetric field; analytic Div U rows.
  auto u_of = [](const Vec3& x) {
    Mat3 m;
    m << std::sin(x.x()) * x.y(), std::cos(x.y()), x.z() * x.z(), std::exp(0.3 * x.x()), x.x() * x.y() * x.z(),
        std::sin(x.z()), 0.5 * x.y() * x.y(), std::cos(x.x() + x.z()), std::sin(x.y() * x.z());
    return m;
  };
  auto div_of = [](const Vec3& x) {
    return Vec3(std::cos(x.x()) * x.y() - std::sin(x.y()) + 2 * x.z(),
                0.3 * std::exp(0.3 * x.x()) + x.x() * x.z() + std::cos(x.z()), x.y() * std::cos(x.y() * x.z()));
  };
  auto err = [&](int n) {
    const double h = 1.0 / (n - 1);
    const Grid3<Mat3> g = Grid3<Mat3>::sample(n, n, n, h, Vec3::Zero(), u_of);
    return grid_max<Vec3>(divergence_rows(g), [&](const Vec3& d, const Vec3& x) { return max_abs(d - div_of(x)); });
  };
  const double e1 = err(11), e2 = err(21);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(FieldOperators, VaryingCoefficientsMatchDirectDivergence) {
  auto u_of = [](const Vec3& x) {
    Mat3 m;
    m << std::sin(x.x() + x.y()), x.z(), std::cos(x.y()), x.x() * x.x(), std::sin(x.z()), x.y(), std::cos(x.x()), x.y() * x.z(),
        std::exp(0.2 * x.z());
    return m;
  };
  auto r_of = [](const Vec3& x) { return Vec4(1 + x.x(), 0.5 + std::sin(x.y()), 2 + x.z() * x.x(), std::cos(x.x())); };
  for (BasisTag tag : {BasisTag::SymAnt, BasisTag::Transpose}) {
    auto err = [&](int n) {
      const double h = 1.0 / (n - 1);
      const Grid3<Mat3> u = Grid3<Mat3>::sample(n, n, n, h, Vec3::Zero(), u_of);
      const Grid3<Vec4> r = Grid3<Vec4>::sample(n, n, n, h, Vec3::Zero(), r_of);
      // Two second-order paths to the same Div T: their gap shrinks as h^2.
      Grid3<Mat3> t = u;
      for (std::size_t i = 0; i < t.data.size(); ++i) {
        RheologyCoeffs c;
        c.r = {r.data[i](0), r.data[i](1), r.data[i](2), r.data[i](3)};
        c.basis = tag;
        t.data[i] = constitutive_apply(c, u.data[i]);
      }
      const Grid3<Vec3> a = div_stress_field(u, r, tag);
      const Grid3<Vec3> b = divergence_rows(t);
      double m = 0;
      for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, max_abs(a.data[i] - b.data[i]));
      return m;
    };
    const double e1 = err(11), e2 = err(21);
    EXPECT_LT(e2, 1e-2);
    EXPECT_NEAR(e1 / e2, 4.0, 0.5);
  }
}

TEST(BalanceLaws, HydrostaticFluidAtRest) {
  const double rho = 1.2;
  const Vec3 g(0, 0, -9.81);
  const int n = 6;
  FieldSnapshot s;
  s.density = Grid3<double>(n, n, n, 0.2, Vec3(0, 0, -0.5), rho);
  s.velocity = Grid3<Vec3>(n, n, n, 0.2, Vec3(0, 0, -0.5), Vec3::Zero());
  s.stress = Grid3<Mat3>::sample(n, n, n, 0.2, Vec3(0, 0, -0.5), [&](const Vec3& x) {
    const double p = 1e5 + rho * g.z() * x.z();
    return Mat3(constitutive_apply(coeffs(p, 0, 0, 0), Mat3::Zero()));
  });
  const MotionResiduals r = momentum_residual(s, s, g, 0.01);
  EXPECT_LT(grid_max<Vec3>(r.momentum, [](const Vec3& m, const Vec3&) { return max_abs(m); }), 1e-10);
  EXPECT_LT(grid_max<double>(r.continuity, [](const double& c, const Vec3&) { return std::abs(c); }), 1e-12);
}

TEST(BalanceLaws, UniformFlowContinuity) {
  const int n = 4;
  FieldSnapshot s;
  s.density = Grid3<double>(n, n, n, 0.5, Vec3::Zero(), 2.0);
  s.velocity = Grid3<Vec3>(n, n, n, 0.5, Vec3::Zero(), Vec3(1, -2, 0.5));
  s.stress = Grid3<Mat3>(n, n, n, 0.5, Vec3::Zero(), Mat3::Zero());
  const MotionResiduals r = momentum_residual(s, s, Vec3::Zero(), 0.1);
  EXPECT_EQ(grid_max<double>(r.continuity, [](const double& c, const Vec3&) { return std::abs(c); }), 0.0);
}

TEST(BalanceLaws, ManufacturedSolutionConvergesSecondOrder) {
  const MmsError a = mms_error(11), b = mms_error(21);
  EXPECT_NEAR(a.momentum / b.momentum, 4.0, 0.5);
  EXPECT_NEAR(a.continuity / b.continuity, 4.0, 0.5);
}
