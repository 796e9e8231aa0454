#include "screwdyn/sim/simulate.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "screwdyn/point_dynamics.hpp"

namespace screwdyn::sim {

namespace {

void require_finite(const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw Error(ErrorKind::NonFinite, "state contains non-finite values");
}

class System {
 public:
  virtual ~System() = default;
  virtual Eigen::VectorXd initial_state() const = 0;
  virtual Eigen::VectorXd derivative(double t, const Eigen::VectorXd& x) const = 0;
  virtual void post_step(Eigen::VectorXd&) const {}
  virtual TrajectoryRecord record(double t, const Eigen::VectorXd& x) const = 0;
  virtual double energy(const Eigen::VectorXd& x) const = 0;
  virtual double constraint_residual(const Eigen::VectorXd&) const { return 0.0; }
  virtual double quat_norm_error(const Eigen::VectorXd&) const { return 0.0; }
};

// Pairwise potential assigned half to each member of the pair.
std::vector<double> pair_potential_shares(const std::vector<MassPoint>& pts, double gamma) {
  std::vector<double> share(pts.size(), 0.0);
  if (gamma == 0.0) return share;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double e = -gamma * pts[i].mass * pts[j].mass / (pts[j].position - pts[i].position).norm();
      share[i] += 0.5 * e;
      share[j] += 0.5 * e;
    }
  return share;
}

class PointSystem : public System {
 public:
  explicit PointSystem(const Scenario& s) : s_(s) {
    int offset = 0;
    for (const PointSpec& p : s.points) {
      Slot slot;
      slot.offset = offset;
      if (p.constraint) slot.manifold = std::make_shared<ConstraintManifold>(build_manifold(*p.constraint));
      slot.generalized = p.constraint && s.formulation == Formulation::Generalized;
      if (slot.manifold && !slot.generalized)
        slot.velocity_constraint = differentiated_level_constraint(*slot.manifold);
      slot.size = slot.generalized ? 2 * slot.manifold->dim : 6;
      offset += slot.size;
      slots_.push_back(std::move(slot));
    }
    size_ = offset;
  }

  Eigen::VectorXd initial_state() const override {
    Eigen::VectorXd x(size_);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const Slot& sl = slots_[i];
      const PointSpec& p = s_.points[i];
      if (sl.generalized) {
        const int n = sl.manifold->dim;
        for (int k = 0; k < n; ++k) {
          x(sl.offset + k) = p.q[k];
          x(sl.offset + n + k) = p.qdot[k];
        }
      } else {
        x.segment<3>(sl.offset) = p.position;
        x.segment<3>(sl.offset + 3) = p.velocity;
      }
    }
    return x;
  }

  Eigen::VectorXd derivative(double t, const Eigen::VectorXd& x) const override {
    require_finite(x);
    const std::vector<MassPoint> pts = points(x);
    std::vector<Vec3> forces(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) forces[i] = pts[i].mass * s_.forces.gravity;
    if (s_.forces.nbody_gamma != 0.0 && pts.size() > 1) {
      const std::vector<Vec3> g = gravity_forces(pts, s_.forces.nbody_gamma);
      for (std::size_t i = 0; i < pts.size(); ++i) forces[i] += g[i];
    }
    Eigen::VectorXd dx(size_);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const Slot& sl = slots_[i];
      if (sl.generalized) {
        const int n = sl.manifold->dim;
        const Eigen::VectorXd q = x.segment(sl.offset, n);
        const Eigen::VectorXd qd = x.segment(sl.offset + n, n);
        dx.segment(sl.offset, n) = qd;
        dx.segment(sl.offset + n, n) = constrained_accel(*sl.manifold, q, qd, forces[i], pts[i].mass);
      } else {
        const Vec3 a_free = forces[i] / pts[i].mass;
        dx.segment<3>(sl.offset) = pts[i].velocity;
        dx.segment<3>(sl.offset + 3) =
            sl.manifold ? velocity_constraint_accel(sl.velocity_constraint, pts[i].position, pts[i].velocity, t, a_free)
                        : a_free;
      }
    }
    return dx;
  }

  void post_step(Eigen::VectorXd& x) const override {
    if (!s_.project_constraints) return;
    for (const Slot& sl : slots_) {
      if (!sl.manifold || sl.generalized) continue;
      const Vec3 r = sl.manifold->project(x.segment<3>(sl.offset));
      const Eigen::MatrixXd nu = sl.manifold->normal(r);
      const Vec3 v = x.segment<3>(sl.offset + 3);
      x.segment<3>(sl.offset) = r;
      x.segment<3>(sl.offset + 3) = v - nu * (nu.transpose() * nu).ldlt().solve(nu.transpose() * v);
    }
  }

  TrajectoryRecord record(double t, const Eigen::VectorXd& x) const override {
    const std::vector<MassPoint> pts = points(x);
    const std::vector<double> pair = pair_potential_shares(pts, s_.forces.nbody_gamma);
    TrajectoryRecord rec;
    rec.t = t;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      BodyRecord b;
      b.label = s_.points[i].label;
      b.d = pts[i].position;
      b.v = pts[i].velocity;
      b.e_kin = 0.5 * pts[i].mass * pts[i].velocity.squaredNorm();
      b.e_pot = -pts[i].mass * s_.forces.gravity.dot(pts[i].position) + pair[i];
      rec.bodies.push_back(b);
    }
    rec.constraint_residual = constraint_residual(x);
    return rec;
  }

  double energy(const Eigen::VectorXd& x) const override {
    const std::vector<MassPoint> pts = points(x);
    double e = 0.0;
    for (const MassPoint& p : pts) e += 0.5 * p.mass * p.velocity.squaredNorm() - p.mass * s_.forces.gravity.dot(p.position);
    if (s_.forces.nbody_gamma != 0.0) e += gravity_potential(pts, s_.forces.nbody_gamma);
    return e;
  }

  double constraint_residual(const Eigen::VectorXd& x) const override {
    const std::vector<MassPoint> pts = points(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i].manifold) worst = std::max(worst, slots_[i].manifold->level(pts[i].position).norm());
    return worst;
  }

 private:
  struct Slot {
    int offset = 0;
    int size = 6;
    bool generalized = false;
    std::shared_ptr<ConstraintManifold> manifold;
    VelocityConstraint velocity_constraint;
  };

  std::vector<MassPoint> points(const Eigen::VectorXd& x) const {
    std::vector<MassPoint> pts(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const Slot& sl = slots_[i];
      pts[i].mass = s_.points[i].mass;
      if (sl.generalized) {
        const int n = sl.manifold->dim;
        const Eigen::VectorXd q = x.segment(sl.offset, n);
        pts[i].position = sl.manifold->embedding(q);
        pts[i].velocity = sl.manifold->tangent(q) * x.segment(sl.offset + n, n);
      } else {
        pts[i].position = x.segment<3>(sl.offset);
        pts[i].velocity = x.segment<3>(sl.offset + 3);
      }
    }
    return pts;
  }

  const Scenario& s_;
  std::vector<Slot> slots_;
  int size_ = 0;
};

class TreeSystem : public System {
 public:
  explicit TreeSystem(const Scenario& s)
      : s_(s), setup_(build_tree(s)), lagrange_(s.formulation == Formulation::Lagrange) {}

  Eigen::VectorXd initial_state() const override {
    const int nq = setup_.tree.q_size();
    const int nv = lagrange_ ? nq : setup_.tree.u_size();
    Eigen::VectorXd x(nq + nv);
    x.head(nq) = setup_.q;
    x.tail(nv) = lagrange_ ? coordinate_rates(setup_.tree, setup_.q, setup_.u) : setup_.u;
    return x;
  }

  Eigen::VectorXd derivative(double, const Eigen::VectorXd& x) const override {
    require_finite(x);
    const int nq = setup_.tree.q_size();
    const Eigen::VectorXd q = x.head(nq);
    const Eigen::VectorXd vel = x.tail(x.size() - nq);
    Eigen::VectorXd dx(x.size());
    if (lagrange_) {
      dx.head(nq) = vel;
      dx.tail(nq) = lagrange_accel(lagrange_matrices(setup_.tree, q, vel, setup_.loads), vel);
    } else {
      dx.head(nq) = coordinate_rates(setup_.tree, q, vel);
      dx.tail(vel.size()) = forward_dynamics_newton_euler(setup_.tree, q, vel, setup_.loads);
    }
    return dx;
  }

  void post_step(Eigen::VectorXd& x) const override {
    if (!s_.renormalize_quaternions) return;
    for_each_quaternion([&](int offset) {
      const double n = x.segment<4>(offset).norm();
      if (n > 0.0 && std::isfinite(n)) x.segment<4>(offset) /= n;
    });
  }

  TrajectoryRecord record(double t, const Eigen::VectorXd& x) const override {
    const Eigen::VectorXd q = x.head(setup_.tree.q_size());
    const Eigen::VectorXd u = velocities(x);
    const Kinematics kin = compute_kinematics(setup_.tree, q, u);
    std::vector<MassPoint> pts(setup_.tree.size());
    for (int p = 0; p < setup_.tree.size(); ++p) {
      const SpatialInertia& th = setup_.tree.body(p).inertia;
      pts[p].mass = th.mass();
      pts[p].position = kin.pose[p].apply_point(th.com());
    }
    const std::vector<double> pair = pair_potential_shares(pts, setup_.loads.nbody_gamma);
    TrajectoryRecord rec;
    rec.t = t;
    for (int p = 0; p < setup_.tree.size(); ++p) {
      const Body& body = setup_.tree.body(p);
      BodyRecord b;
      b.label = body.label;
      b.quat = quat_from_rotation(kin.pose[p].rotation).value().as_vector();
      b.d = kin.pose[p].displacement;
      const Vec6 va = kin.V_a.segment<6>(6 * p);
      b.v = va.head<3>();
      b.w = va.tail<3>();
      b.e_kin = 0.5 * va.dot(body.inertia.matrix() * va);
      b.e_pot = -pts[p].mass * setup_.loads.gravity.dot(pts[p].position) + pair[p];
      rec.bodies.push_back(b);
    }
    rec.constraint_residual = 0.0;
    return rec;
  }

  double energy(const Eigen::VectorXd& x) const override {
    const Eigen::VectorXd q = x.head(setup_.tree.q_size());
    return kinetic_energy(setup_.tree, q, velocities(x)) + potential_energy(setup_.tree, q, setup_.loads);
  }

  double quat_norm_error(const Eigen::VectorXd& x) const override {
    double worst = 0.0;
    for_each_quaternion([&](int offset) { worst = std::max(worst, std::abs(x.segment<4>(offset).norm() - 1.0)); });
    return worst;
  }

 private:
  Eigen::VectorXd velocities(const Eigen::VectorXd& x) const {
    const int nq = setup_.tree.q_size();
    const Eigen::VectorXd tail = x.tail(x.size() - nq);
    return lagrange_ ? velocities_from_rates(setup_.tree, x.head(nq), tail) : tail;
  }

  template <typename F>
  void for_each_quaternion(F&& f) const {
    for (int p = 0; p < setup_.tree.size(); ++p) {
      const Joint& j = setup_.tree.body(p).joint;
      if (j.type == JointType::Free && j.param == RotationParamKind::Quaternion) f(setup_.tree.q_offset(p) + 3);
    }
  }

  const Scenario& s_;
  TreeSetup setup_;
  bool lagrange_;
};

Eigen::VectorXd step(const System& sys, IntegratorMethod method, double t, double h, const Eigen::VectorXd& x) {
  if (method == IntegratorMethod::Euler) return x + h * sys.derivative(t, x);
  const Eigen::VectorXd k1 = sys.derivative(t, x);
  const Eigen::VectorXd k2 = sys.derivative(t + 0.5 * h, x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = sys.derivative(t + 0.5 * h, x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = sys.derivative(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::string describe(const Error& e, double t) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << t << ": " << e.what();
  return os.str();
}

}  // namespace

SimulationResult simulate(const Scenario& s) {
  SimulationResult res;
  std::unique_ptr<System> sys;
  Eigen::VectorXd x;
  try {
    if (s.type == SystemType::Points)
      sys = std::make_unique<PointSystem>(s);
    else
      sys = std::make_unique<TreeSystem>(s);
    x = sys->initial_state();
    require_finite(x);
    res.energy_initial = sys->energy(x);
    res.energy_final = res.energy_initial;
    res.max_constraint_residual = sys->constraint_residual(x);
    res.max_quat_norm_error = sys->quat_norm_error(x);
    res.records.push_back(sys->record(0.0, x));
  } catch (const Error& e) {
    res.status = e.kind() == ErrorKind::NonFinite ? RunStatus::Diverged : RunStatus::Error;
    res.message = describe(e, 0.0);
    return res;
  }

  const double h = s.integrator.step;
  const long long n = std::llround(s.integrator.duration / h);
  double t = 0.0;
  for (long long i = 1; i <= n; ++i) {
    try {
      Eigen::VectorXd next = step(*sys, s.integrator.method, t, h, x);
      sys->post_step(next);
      require_finite(next);
      const double e = sys->energy(next);
      if (!std::isfinite(e)) throw Error(ErrorKind::NonFinite, "energy is not finite");
      x = std::move(next);
      t = static_cast<double>(i) * h;
      res.steps = i;
      res.energy_final = e;
      res.energy_drift = std::max(res.energy_drift, std::abs(e - res.energy_initial));
      res.max_constraint_residual = std::max(res.max_constraint_residual, sys->constraint_residual(x));
      res.max_quat_norm_error = std::max(res.max_quat_norm_error, sys->quat_norm_error(x));
      if (i % s.integrator.output_every == 0 || i == n) res.records.push_back(sys->record(t, x));
    } catch (const Error& e) {
      res.status = e.kind() == ErrorKind::NonFinite ? RunStatus::Diverged : RunStatus::Error;
      res.message = describe(e, t);
      break;
    }
  }
  res.t_end = t;
  res.last_finite_time = t;
  return res;
}

}  // namespace screwdyn::sim
