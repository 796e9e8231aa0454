#include "screwdyn/point_dynamics.hpp"

#include <cmath>
#include <sstream>

namespace screwdyn {

namespace {

// Inverts a symmetric positive definite Gram matrix, refusing it when the
// spectral condition number exceeds the projection limit.
Eigen::MatrixXd checked_gram_inverse(const Eigen::MatrixXd& gram, ErrorKind kind, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kProjectionConditionLimit) {
    std::ostringstream os;
    os << what << " Gram matrix is singular or ill-conditioned (eigenvalues " << lo << ", " << hi << ")";
    throw Error(kind, os.str());
  }
  return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd tangent_basis(const ConstraintManifold& m, const Eigen::VectorXd& q) {
  if (q.size() != m.dim) throw Error(ErrorKind::InvalidArgument, "coordinate dimension mismatch");
  return m.tangent(q);
}

double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

// Any two unit vectors completing `d` to an orthonormal basis.
std::pair<Vec3, Vec3> complement(const Vec3& d) {
  const Vec3 seed = std::abs(d.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 n1 = d.cross(seed).normalized();
  return {n1, d.cross(n1)};
}

}  // namespace

ConstraintManifold ConstraintManifold::circle(const Vec3& center, double radius, const Vec3& e1,
                                              const Vec3& e2) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "circle radius must be positive");
  const Vec3 n = e1.cross(e2);
  ConstraintManifold m;
  m.dim = 1;
  m.embedding = [=](const Eigen::VectorXd& q) -> Vec3 {
    return center + radius * (std::cos(q(0)) * e1 + std::sin(q(0)) * e2);
  };
  m.tangent = [=](const Eigen::VectorXd& q) -> Eigen::MatrixXd {
    return Eigen::MatrixXd(radius * (-std::sin(q(0)) * e1 + std::cos(q(0)) * e2));
  };
  m.level = [=](const Vec3& r) -> Eigen::VectorXd {
    return Eigen::Vector2d((r - center).dot(n), (r - center).squaredNorm() - radius * radius);
  };
  m.normal = [=](const Vec3& r) -> Eigen::MatrixXd {
    Eigen::MatrixXd nu(3, 2);
    nu.col(0) = n;
    nu.col(1) = 2.0 * (r - center);
    return nu;
  };
  m.project = [=](const Vec3& r) -> Vec3 {
    Vec3 in_plane = (r - center) - (r - center).dot(n) * n;
    return center + radius * in_plane.normalized();
  };
  return m;
}

ConstraintManifold ConstraintManifold::sphere(const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "sphere radius must be positive");
  ConstraintManifold m;
  m.dim = 2;
  m.embedding = [=](const Eigen::VectorXd& q) -> Vec3 {
    const double a = q(0), b = q(1);
    return center + radius * Vec3(std::sin(a) * std::cos(b), std::sin(a) * std::sin(b), -std::cos(a));
  };
  m.tangent = [=](const Eigen::VectorXd& q) -> Eigen::MatrixXd {
    const double a = q(0), b = q(1);
    Eigen::MatrixXd tau(3, 2);
    tau.col(0) = radius * Vec3(std::cos(a) * std::cos(b), std::cos(a) * std::sin(b), std::sin(a));
    tau.col(1) = radius * Vec3(-std::sin(a) * std::sin(b), std::sin(a) * std::cos(b), 0.0);
    return tau;
  };
  m.level = [=](const Vec3& r) -> Eigen::VectorXd {
    Eigen::VectorXd s(1);
    s(0) = (r - center).squaredNorm() - radius * radius;
    return s;
  };
  m.normal = [=](const Vec3& r) -> Eigen::MatrixXd { return Eigen::MatrixXd(2.0 * (r - center)); };
  m.project = [=](const Vec3& r) -> Vec3 { return center + radius * (r - center).normalized(); };
  return m;
}

ConstraintManifold ConstraintManifold::plane(const Vec3& origin, const Vec3& e1, const Vec3& e2) {
  const Vec3 n = e1.cross(e2);
  ConstraintManifold m;
  m.dim = 2;
  m.embedding = [=](const Eigen::VectorXd& q) -> Vec3 { return origin + q(0) * e1 + q(1) * e2; };
  m.tangent = [=](const Eigen::VectorXd&) -> Eigen::MatrixXd {
    Eigen::MatrixXd tau(3, 2);
    tau << e1, e2;
    return tau;
  };
  m.level = [=](const Vec3& r) -> Eigen::VectorXd {
    Eigen::VectorXd s(1);
    s(0) = (r - origin).dot(n);
    return s;
  };
  m.normal = [=](const Vec3&) -> Eigen::MatrixXd { return Eigen::MatrixXd(n); };
  m.project = [=](const Vec3& r) -> Vec3 { return r - (r - origin).dot(n) * n; };
  return m;
}

ConstraintManifold ConstraintManifold::line(const Vec3& origin, const Vec3& direction) {
  const auto [n1, n2] = complement(direction);
  ConstraintManifold m;
  m.dim = 1;
  m.embedding = [=](const Eigen::VectorXd& q) -> Vec3 { return origin + q(0) * direction; };
  m.tangent = [=](const Eigen::VectorXd&) -> Eigen::MatrixXd { return Eigen::MatrixXd(direction); };
  m.level = [=](const Vec3& r) -> Eigen::VectorXd {
    return Eigen::Vector2d((r - origin).dot(n1), (r - origin).dot(n2));
  };
  m.normal = [=](const Vec3&) -> Eigen::MatrixXd {
    Eigen::MatrixXd nu(3, 2);
    nu << n1, n2;
    return nu;
  };
  m.project = [=](const Vec3& r) -> Vec3 { return origin + (r - origin).dot(direction) * direction; };
  return m;
}

std::vector<Vec3> gravity_forces(std::span<const MassPoint> points, double gamma) {
  std::vector<Vec3> forces(points.size(), Vec3::Zero());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const Vec3 sep = points[j].position - points[i].position;
      const double dist = sep.norm();
      if (!(dist >= 1e-12)) {
        std::ostringstream os;
        os << "points " << i << " and " << j << " are " << dist << " apart";
        throw Error(ErrorKind::CoincidentPoints, os.str());
      }
      const Vec3 f = gamma * points[i].mass * points[j].mass / (dist * dist * dist) * sep;
      forces[i] += f;
      forces[j] -= f;
    }
  }
  return forces;
}

double gravity_potential(std::span<const MassPoint> points, double gamma) {
  double u = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      u -= gamma * points[i].mass * points[j].mass / (points[j].position - points[i].position).norm();
  return u;
}

Vec3 free_accel(const MassPoint& p, const Vec3& force) {
  if (!(p.mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  return force / p.mass;
}

Eigen::MatrixXd tangent_coordinates(const ConstraintManifold& m, const Eigen::VectorXd& q) {
  const Eigen::MatrixXd tau = tangent_basis(m, q);
  return checked_gram_inverse(tau.transpose() * tau, ErrorKind::RankDeficient, "tangent") * tau.transpose();
}

Mat3 tangent_projection(const ConstraintManifold& m, const Eigen::VectorXd& q) {
  const Eigen::MatrixXd tau = tangent_basis(m, q);
  return tau * tangent_coordinates(m, q);
}

Mat3 normal_projection(const ConstraintManifold& m, const Eigen::VectorXd& q) {
  if (!m.normal) return Mat3::Identity() - tangent_projection(m, q);
  const Eigen::MatrixXd nu = m.normal(m.embedding(q));
  const Eigen::MatrixXd gram_inv = checked_gram_inverse(nu.transpose() * nu, ErrorKind::RankDeficient, "normal");
  return nu * gram_inv * nu.transpose();
}

Vec3 curvature_term(const ConstraintManifold& m, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot) {
  const double step = fd_step(q.norm());
  Vec3 acc = Vec3::Zero();
  for (int i = 0; i < m.dim; ++i) {
    Eigen::VectorXd qp = q, qm = q;
    qp(i) += step;
    qm(i) -= step;
    // Divide by the step actually taken after rounding.
    const double taken = qp(i) - qm(i);
    const Eigen::MatrixXd dtau = (m.tangent(qp) - m.tangent(qm)) / taken;
    acc += qdot(i) * (dtau * qdot);
  }
  return acc;
}

Eigen::VectorXd constrained_accel(const ConstraintManifold& m, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& qdot, const Vec3& force, double mass) {
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  const Eigen::MatrixXd p_tau = tangent_coordinates(m, q);
  return p_tau * (force / mass - curvature_term(m, q, qdot));
}

Vec3 constraint_force(const ConstraintManifold& m, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                      const Vec3& force, double mass) {
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  const Mat3 p_nu = normal_projection(m, q);
  return mass * (p_nu * curvature_term(m, q, qdot)) - p_nu * force;
}

namespace {

// Fourth-order central difference of a vector function of one scalar.
// The larger step keeps cancellation error near 1e-12 for O(1) values.
template <class F>
Eigen::VectorXd derivative4(const F& f, double x) {
  const double h = 1e-3 * std::max(1.0, std::abs(x));
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
}

Eigen::MatrixXd numeric_jacobian(const VelocityConstraint& s, const Vec3& r, const Vec3& v, double t,
                                 bool wrt_position) {
  const Eigen::VectorXd s0 = s.value(r, v, t);
  Eigen::MatrixXd jac(s0.size(), 3);
  for (int i = 0; i < 3; ++i) {
    const Vec3 base = wrt_position ? r : v;
    auto along = [&](double x) -> Eigen::VectorXd {
      Vec3 p = base;
      p(i) = x;
      return wrt_position ? s.value(p, v, t) : s.value(r, p, t);
    };
    jac.col(i) = derivative4(along, base(i));
  }
  return jac;
}

}  // namespace

Vec3 velocity_constraint_accel(const VelocityConstraint& sigma, const Vec3& position, const Vec3& velocity,
                               double t, const Vec3& free_acceleration) {
  if (!sigma.value) throw Error(ErrorKind::InvalidArgument, "velocity constraint has no value function");
  const Eigen::MatrixXd jr =
      sigma.jac_position ? sigma.jac_position(position, velocity, t) : numeric_jacobian(sigma, position, velocity, t, true);
  const Eigen::MatrixXd jv =
      sigma.jac_velocity ? sigma.jac_velocity(position, velocity, t) : numeric_jacobian(sigma, position, velocity, t, false);
  Eigen::VectorXd jt;
  if (sigma.jac_time) {
    jt = sigma.jac_time(position, velocity, t);
  } else {
    jt = derivative4([&](double x) -> Eigen::VectorXd { return sigma.value(position, velocity, x); }, t);
  }
  if (jv.cwiseAbs().maxCoeff() == 0.0)
    throw Error(ErrorKind::SingularGram, "constraint does not depend on velocity");
  const Eigen::MatrixXd gram_inv = checked_gram_inverse(jv * jv.transpose(), ErrorKind::SingularGram, "velocity");
  const Eigen::VectorXd rhs = jv * free_acceleration + jr * velocity + jt;
  return free_acceleration - jv.transpose() * (gram_inv * rhs);
}

VelocityConstraint differentiated_level_constraint(const ConstraintManifold& m) {
  if (!m.normal) throw Error(ErrorKind::InvalidArgument, "manifold has no level function");
  VelocityConstraint c;
  const auto normal = m.normal;
  c.value = [normal](const Vec3& r, const Vec3& v, double) -> Eigen::VectorXd {
    return normal(r).transpose() * v;
  };
  c.jac_velocity = [normal](const Vec3& r, const Vec3&, double) -> Eigen::MatrixXd {
    return normal(r).transpose();
  };
  c.jac_time = [normal](const Vec3& r, const Vec3&, double) -> Eigen::VectorXd {
    return Eigen::VectorXd::Zero(normal(r).cols());
  };
  return c;
}

}  // namespace screwdyn
