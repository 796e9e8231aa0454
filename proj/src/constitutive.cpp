#include "screwdyn/constitutive.hpp"

#include <cmath>
#include <sstream>

namespace screwdyn {

namespace {

void check_square(const Eigen::MatrixXd& u) {
  if (u.rows() != u.cols() || (u.rows() != 2 && u.rows() != 3))
    throw Error(ErrorKind::InvalidArgument, "expected a 2x2 or 3x3 matrix");
}

}  // namespace

MatrixInvariants invariants(const Eigen::MatrixXd& u) {
  check_square(u);
  return {u.trace(), (u * u).trace(), (u * u.transpose()).trace(), u.determinant()};
}

std::array<double, 4> RheologyCoeffs::at(const Eigen::MatrixXd& u) const {
  return law ? law(invariants(u)) : r;
}

RheologyCoeffs RheologyCoeffs::in_basis(BasisTag tag) const {
  if (law) throw Error(ErrorKind::InvalidArgument, "re-basing needs constant coefficients");
  if (tag == basis) return *this;
  RheologyCoeffs out = *this;
  out.basis = tag;
  if (tag == BasisTag::Transpose) {
    // a sym U + b ant U = (a + b)/2 U + (a - b)/2 U^T
    out.r[2] = 0.5 * (r[2] + r[3]);
    out.r[3] = 0.5 * (r[2] - r[3]);
  } else {
    out.r[2] = r[2] + r[3];
    out.r[3] = r[2] - r[3];
  }
  return out;
}

StrainState strain_integrate(const std::vector<GradientSample>& history) {
  StrainState s;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const double dt = history[i].t - history[i - 1].t;
    if (!(dt >= 0.0)) throw Error(ErrorKind::InvalidArgument, "gradient samples must be time ordered");
    s.z += 0.5 * dt * (history[i].g + history[i - 1].g);
  }
  if (!history.empty()) s.z_dot = history.back().g;
  return s;
}

Mat3 velocity_gradient(const std::function<Vec3(const Vec3&)>& v, const Vec3& x, double h) {
  Mat3 g;
  for (int j = 0; j < 3; ++j) {
    Vec3 xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g.col(j) = (v(xp) - v(xm)) / (xp(j) - xm(j));
  }
  return g;
}

std::array<Eigen::MatrixXd, 4> isotropic_basis(const Eigen::MatrixXd& u, BasisTag tag) {
  check_square(u);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(u.rows(), u.cols());
  if (tag == BasisTag::SymAnt)
    return {id, u.trace() * id, 0.5 * (u + u.transpose()), 0.5 * (u - u.transpose())};
  return {id, u.trace() * id, u, u.transpose()};
}

Eigen::MatrixXd constitutive_apply(const RheologyCoeffs& r, const Eigen::MatrixXd& u) {
  const auto e = isotropic_basis(u, r.basis);
  const auto c = r.at(u);
  return -c[0] * e[0] + c[1] * e[1] + c[2] * e[2] + c[3] * e[3];
}

Eigen::Matrix2d skew_unit_2d() {
  Eigen::Matrix2d it;
  it << 0.0, -1.0, 1.0, 0.0;
  return it;
}

double pfaffian_trace(const Eigen::Matrix2d& u) { return (skew_unit_2d() * u).trace(); }

Eigen::Matrix2d constitutive_apply_2d(const Coeffs2d& c, const Eigen::Matrix2d& u) {
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d it = skew_unit_2d();
  return -c.r0 * id + c.r0t * it + c.r1 * u.trace() * id + c.r1t * pfaffian_trace(u) * it + c.r2 * u +
         c.r3 * u.transpose() + c.r4 * it * u + c.r5 * it * u * it;
}

BasisReport2d basis_independence_2d(const Eigen::Matrix2d& u) {
  const Eigen::Matrix2d it = skew_unit_2d();
  auto vec = [](const Eigen::Matrix2d& m) { return Eigen::Vector4d(m(0, 0), m(1, 0), m(0, 1), m(1, 1)); };
  Eigen::Matrix4d basis;
  basis << vec(u), vec(u.transpose()), vec(it * u), vec(it * u.transpose());
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(basis, Eigen::ComputeFullU | Eigen::ComputeFullV);
  BasisReport2d rep;
  rep.singular_values = svd.singularValues();
  const double top = rep.singular_values(0);
  for (int i = 0; i < 4; ++i)
    if (rep.singular_values(i) > 1e-10 * top) ++rep.rank;
  if (rep.rank < 4 || top == 0.0) {
    std::ostringstream os;
    os << "U gives only " << rep.rank << " independent basis matrices";
    throw Error(ErrorKind::DegenerateU, os.str());
  }
  const std::array<Eigen::Matrix2d, 4> rest = {u * it, u.transpose() * it, it * u * it, it * u.transpose() * it};
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector4d target = vec(rest[i]);
    rep.expansion.col(i) = svd.solve(target);
    rep.span_residuals[i] = (basis * rep.expansion.col(i) - target).norm();
  }
  return rep;
}

Eigen::MatrixXd constitutive_invert(const RheologyCoeffs& coeffs, const Eigen::MatrixXd& t) {
  check_square(t);
  if (coeffs.law) throw Error(ErrorKind::InvalidArgument, "inversion needs constant coefficients");
  const RheologyCoeffs c = coeffs.in_basis(BasisTag::SymAnt);
  const double n = static_cast<double>(t.rows());
  const double r0 = c.r[0], r1 = c.r[1], r2 = c.r[2], r3 = c.r[3];
  const double lead = r1 * n + r2;
  if (!(std::abs(lead * r2 * r3) > 1e-12)) {
    std::ostringstream os;
    os << "relation is not invertible: (r1 tr I + r2) r2 r3 = " << lead * r2 * r3;
    throw Error(ErrorKind::Incorrect, os.str());
  }
  const double n0 = r0 / lead;
  const double n1 = -r1 / (r2 * lead);
  const double n2 = 1.0 / r2;
  const double n3 = 1.0 / r3;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(t.rows(), t.cols());
  return n0 * id + n1 * t.trace() * id + n2 * 0.5 * (t + t.transpose()) + n3 * 0.5 * (t - t.transpose());
}

Moduli moduli(const RheologyCoeffs& coeffs, int dim) {
  if (dim != 2 && dim != 3) throw Error(ErrorKind::InvalidArgument, "dimension must be 2 or 3");
  if (coeffs.law) throw Error(ErrorKind::InvalidArgument, "moduli need constant coefficients");
  const RheologyCoeffs c = coeffs.in_basis(BasisTag::SymAnt);
  const double n = dim;
  const double r1 = c.r[1], r2 = c.r[2];
  const double den = r1 * (n - 1.0) + r2;
  if (den == 0.0 || r2 == 0.0) throw Error(ErrorKind::DegenerateCoeffs, "moduli denominator vanishes");
  return {r2 * (r1 * n + r2) / den, r2 / 2.0, r1 / den};
}

namespace {

template <typename T>
void require_grid(const Grid3<T>& g) {
  if (g.nx < 3 || g.ny < 3 || g.nz < 3) {
    std::ostringstream os;
    os << "grid " << g.nx << "x" << g.ny << "x" << g.nz << " needs at least 3 points per axis";
    throw Error(ErrorKind::GridTooSmall, os.str());
  }
  if (!(g.h > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
}

template <typename A, typename B>
void require_same_shape(const Grid3<A>& a, const Grid3<B>& b) {
  if (a.nx != b.nx || a.ny != b.ny || a.nz != b.nz)
    throw Error(ErrorKind::InvalidArgument, "grid shapes differ");
}

// d f / d x_axis at (i, j, k), central inside, one-sided second order at the ends.
template <typename T>
T partial(const Grid3<T>& g, int axis, int i, int j, int k) {
  const int n = axis == 0 ? g.nx : axis == 1 ? g.ny : g.nz;
  int idx[3] = {i, j, k};
  auto f = [&](int at) -> const T& {
    int p[3] = {idx[0], idx[1], idx[2]};
    p[axis] = at;
    return g.at(p[0], p[1], p[2]);
  };
  const int m = idx[axis];
  const double inv = 1.0 / (2.0 * g.h);
  if (m == 0) return T((-3.0 * f(0) + 4.0 * f(1) - f(2)) * inv);
  if (m == n - 1) return T((3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) * inv);
  return T((f(m + 1) - f(m - 1)) * inv);
}

template <typename T, typename Out, typename F>
Grid3<Out> pointwise(const Grid3<T>& g, F&& f) {
  Grid3<Out> out(g.nx, g.ny, g.nz, g.h, g.origin);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) out.at(i, j, k) = f(i, j, k);
  return out;
}

Vec3 div_rows_at(const Grid3<Mat3>& t, int i, int j, int k) {
  Vec3 d = Vec3::Zero();
  for (int a = 0; a < 3; ++a) d += partial(t, a, i, j, k).col(a);
  return d;
}

Vec3 div_cols_at(const Grid3<Mat3>& t, int i, int j, int k) {
  Vec3 d = Vec3::Zero();
  for (int a = 0; a < 3; ++a) d += partial(t, a, i, j, k).row(a).transpose();
  return d;
}

}  // namespace

Grid3<Vec3> divergence_rows(const Grid3<Mat3>& t) {
  require_grid(t);
  return pointwise<Mat3, Vec3>(t, [&](int i, int j, int k) { return div_rows_at(t, i, j, k); });
}

Grid3<Vec3> gradient(const Grid3<double>& f) {
  require_grid(f);
  return pointwise<double, Vec3>(f, [&](int i, int j, int k) {
    return Vec3(partial(f, 0, i, j, k), partial(f, 1, i, j, k), partial(f, 2, i, j, k));
  });
}

Grid3<Vec3> div_stress_field(const Grid3<Mat3>& u, const Grid3<Vec4>& r, BasisTag basis) {
  require_grid(u);
  require_same_shape(u, r);
  return pointwise<Mat3, Vec3>(u, [&](int i, int j, int k) {
    const Mat3& uu = u.at(i, j, k);
    const Vec4& c = r.at(i, j, k);
    Vec4 grad_r[3];
    for (int a = 0; a < 3; ++a) grad_r[a] = partial(r, a, i, j, k);
    auto grad_coeff = [&](int n) { return Vec3(grad_r[0](n), grad_r[1](n), grad_r[2](n)); };
    Vec3 grad_tr;
    for (int a = 0; a < 3; ++a) grad_tr(a) = partial(u, a, i, j, k).trace();
    const Vec3 div_u = div_rows_at(u, i, j, k);
    const Vec3 div_ut = div_cols_at(u, i, j, k);
    Vec3 d = -grad_coeff(0) + uu.trace() * grad_coeff(1) + c(1) * grad_tr;
    if (basis == BasisTag::SymAnt) {
      d += 0.5 * c(2) * (div_u + div_ut) + 0.5 * c(3) * (div_u - div_ut);
      d += 0.5 * (uu + uu.transpose()) * grad_coeff(2) + 0.5 * (uu - uu.transpose()) * grad_coeff(3);
    } else {
      d += c(2) * div_u + c(3) * div_ut + uu * grad_coeff(2) + uu.transpose() * grad_coeff(3);
    }
    return d;
  });
}

Grid3<Vec3> div_stress_field(const Grid3<Mat3>& u, const RheologyCoeffs& r) {
  if (r.law) throw Error(ErrorKind::InvalidArgument, "use a coefficient grid for invariant-dependent laws");
  const Vec4 c(r.r[0], r.r[1], r.r[2], r.r[3]);
  return div_stress_field(u, Grid3<Vec4>(u.nx, u.ny, u.nz, u.h, u.origin, c), r.basis);
}

MotionResiduals momentum_residual(const FieldSnapshot& prev, const FieldSnapshot& next, const Vec3& gravity,
                                  double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  const Grid3<double>& shape = prev.density;
  require_grid(shape);
  require_same_shape(shape, prev.velocity);
  require_same_shape(shape, prev.stress);
  require_same_shape(shape, next.density);
  require_same_shape(shape, next.velocity);
  require_same_shape(shape, next.stress);

  auto mid = [](const auto& a, const auto& b) {
    auto out = a;
    for (std::size_t n = 0; n < out.data.size(); ++n) out.data[n] = 0.5 * (a.data[n] + b.data[n]);
    return out;
  };
  const Grid3<double> rho = mid(prev.density, next.density);
  const Grid3<Vec3> vel = mid(prev.velocity, next.velocity);
  const Grid3<Mat3> stress = mid(prev.stress, next.stress);
  const Grid3<Vec3> div_t = divergence_rows(stress);
  // div(rho v) is the row divergence of a matrix whose first row is rho v.
  Grid3<Mat3> flux(shape.nx, shape.ny, shape.nz, shape.h, shape.origin, Mat3::Zero());
  for (std::size_t n = 0; n < flux.data.size(); ++n) flux.data[n].row(0) = rho.data[n] * vel.data[n].transpose();
  const Grid3<Vec3> div_flux = divergence_rows(flux);

  MotionResiduals res;
  res.momentum = pointwise<double, Vec3>(shape, [&](int i, int j, int k) {
    Mat3 grad_v;
    for (int a = 0; a < 3; ++a) grad_v.col(a) = partial(vel, a, i, j, k);
    const std::size_t n = shape.index(i, j, k);
    const Vec3 dvdt = (next.velocity.data[n] - prev.velocity.data[n]) / dt;
    return Vec3(rho.data[n] * (dvdt + grad_v * vel.data[n]) - rho.data[n] * gravity - div_t.data[n]);
  });
  res.continuity = pointwise<double, double>(shape, [&](int i, int j, int k) {
    const std::size_t n = shape.index(i, j, k);
    return (next.density.data[n] - prev.density.data[n]) / dt + div_flux.data[n](0);
  });
  return res;
}

}  // namespace screwdyn
