#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "screwdyn/spatial.hpp"

namespace screwdyn {

/// Which isotropic basis the rheological coefficients refer to.
///   SymAnt:    E0 = I, E1 = tr U I, E2 = sym U, E3 = ant U
///   Transpose: E0 = I, E1 = tr U I, E2 = U,     E3 = U^T
enum class BasisTag { SymAnt, Transpose };

/// Rotation invariants of a (not necessarily symmetric) square matrix.
struct MatrixInvariants {
  double trace = 0.0;
  double trace_sq = 0.0;   // tr(U U)
  double trace_uut = 0.0;  // tr(U U^T)
  double det = 0.0;
};

MatrixInvariants invariants(const Eigen::MatrixXd& u);

/// Coefficients r0..r3 of T = -r0 E0 + r1 E1 + r2 E2 + r3 E3. When `law` is
/// set the coefficients are evaluated from the invariants of U instead.
struct RheologyCoeffs {
  std::array<double, 4> r{0.0, 0.0, 0.0, 0.0};
  BasisTag basis = BasisTag::SymAnt;
  std::function<std::array<double, 4>(const MatrixInvariants&)> law;

  std::array<double, 4> at(const Eigen::MatrixXd& u) const;
  /// Same relation re-expressed in the other basis (constant coefficients only).
  RheologyCoeffs in_basis(BasisTag tag) const;
};

struct StrainState {
  Mat3 z = Mat3::Identity();
  Mat3 z_dot = Mat3::Zero();
};

/// Velocity gradient sample G = dv/dr at time t.
struct GradientSample {
  double t = 0.0;
  Mat3 g = Mat3::Zero();
};

/// Z = I + integral of G dt (trapezoid rule over the samples), Z' = last G.
/// Samples must be in increasing time order.
StrainState strain_integrate(const std::vector<GradientSample>& history);

/// dv_i/dx_j at x by central differences with step h.
Mat3 velocity_gradient(const std::function<Vec3(const Vec3&)>& v, const Vec3& x, double h = 1e-5);

/// E0..E3 for a 2x2 or 3x3 U.
std::array<Eigen::MatrixXd, 4> isotropic_basis(const Eigen::MatrixXd& u, BasisTag tag);

/// T for a 2x2 or 3x3 U.
Eigen::MatrixXd constitutive_apply(const RheologyCoeffs& r, const Eigen::MatrixXd& u);

/// The skew unit 2x2 matrix [[0, -1], [1, 0]].
Eigen::Matrix2d skew_unit_2d();

/// Coefficients of the extended planar relation
/// T = -r0 I + r0t It + r1 tr U I + r1t pf U It + r2 U + r3 U^T + r4 It U + r5 It U It.
struct Coeffs2d {
  double r0 = 0.0, r0t = 0.0, r1 = 0.0, r1t = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0, r5 = 0.0;
};

/// pf U = tr(It U).
double pfaffian_trace(const Eigen::Matrix2d& u);

Eigen::Matrix2d constitutive_apply_2d(const Coeffs2d& c, const Eigen::Matrix2d& u);

struct BasisReport2d {
  int rank = 0;
  Eigen::Vector4d singular_values = Eigen::Vector4d::Zero();
  /// Least-squares residual of E6..E9 against span{E2..E5}.
  std::array<double, 4> span_residuals{};
  /// Expansion coefficients of E6..E9 in E2..E5 (columns).
  Eigen::Matrix4d expansion = Eigen::Matrix4d::Zero();
};

/// Checks that {U, U^T, It U, It U^T} is linearly independent and expresses
/// the remaining products in it. Throws DegenerateU when the rank is below 4
/// (relative singular value threshold 1e-10).
BasisReport2d basis_independence_2d(const Eigen::Matrix2d& u);

/// U from T for constant coefficients. Throws Incorrect when
/// |(r1 n + r2) r2 r3| <= 1e-12 for n = dim.
Eigen::MatrixXd constitutive_invert(const RheologyCoeffs& r, const Eigen::MatrixXd& t);

struct Moduli {
  double young = 0.0;
  double shear = 0.0;
  double poisson = 0.0;
};

/// Young, shear and Poisson moduli of the sym/ant form in dimension `dim`.
/// Throws DegenerateCoeffs on a zero denominator.
Moduli moduli(const RheologyCoeffs& r, int dim);

/// Sampled field on a rectangular lattice with uniform spacing h, x fastest.
template <typename T>
struct Grid3 {
  int nx = 0, ny = 0, nz = 0;
  double h = 1.0;
  Vec3 origin = Vec3::Zero();
  std::vector<T> data;

  Grid3() = default;
  Grid3(int nx_, int ny_, int nz_, double h_, const Vec3& origin_ = Vec3::Zero(), const T& fill = T())
      : nx(nx_), ny(ny_), nz(nz_), h(h_), origin(origin_), data(std::size_t(nx_) * ny_ * nz_, fill) {}

  std::size_t index(int i, int j, int k) const { return (std::size_t(k) * ny + j) * nx + i; }
  T& at(int i, int j, int k) { return data[index(i, j, k)]; }
  const T& at(int i, int j, int k) const { return data[index(i, j, k)]; }
  Vec3 position(int i, int j, int k) const { return origin + h * Vec3(i, j, k); }

  template <typename F>
  static Grid3 sample(int nx_, int ny_, int nz_, double h_, const Vec3& origin_, F&& f) {
    Grid3 g(nx_, ny_, nz_, h_, origin_);
    for (int k = 0; k < nz_; ++k)
      for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i) g.at(i, j, k) = f(g.position(i, j, k));
    return g;
  }
};

using Vec4 = Eigen::Vector4d;

/// Row-wise divergence (Div T)_j = sum_k dT_jk / dx_k with second-order
/// central differences and second-order one-sided stencils on the boundary.
/// Throws GridTooSmall if any dimension is below 3.
Grid3<Vec3> divergence_rows(const Grid3<Mat3>& t);

/// Gradient of a scalar field with the same stencils.
Grid3<Vec3> gradient(const Grid3<double>& f);

/// Div T for T = constitutive_apply(r(x), U(x)) assembled term by term from
/// the derivatives of U and the coefficient fields (r0..r3 per point).
Grid3<Vec3> div_stress_field(const Grid3<Mat3>& u, const Grid3<Vec4>& r, BasisTag basis);

/// Constant-coefficient overload.
Grid3<Vec3> div_stress_field(const Grid3<Mat3>& u, const RheologyCoeffs& r);

struct FieldSnapshot {
  Grid3<double> density;
  Grid3<Vec3> velocity;
  Grid3<Mat3> stress;
};

struct MotionResiduals {
  Grid3<Vec3> momentum;    // rho Dv/Dt - rho g - Div T
  Grid3<double> continuity;  // d rho / dt + div(rho v)
};

/// Pointwise residuals of the continuum balance laws at the midpoint of two
/// snapshots `dt` apart. Dv/Dt includes the convective term (grad v) v.
MotionResiduals momentum_residual(const FieldSnapshot& prev, const FieldSnapshot& next, const Vec3& gravity,
                                  double dt);

}  // namespace screwdyn
