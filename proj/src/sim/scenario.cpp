#include "screwdyn/sim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace screwdyn::sim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

std::vector<double> as_numbers(const json& j, const std::string& path, std::size_t n = 0) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  if (n != 0 && j.size() != n) fail(path, "expected " + std::to_string(n) + " numbers, got " + std::to_string(j.size()));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], indexed(path, i)));
  return out;
}

Vec3 as_vec3(const json& j, const std::string& path) {
  const auto v = as_numbers(j, path, 3);
  return {v[0], v[1], v[2]};
}

Eigen::Vector4d as_vec4(const json& j, const std::string& path) {
  const auto v = as_numbers(j, path, 4);
  return {v[0], v[1], v[2], v[3]};
}

Mat3 as_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = as_vec3(j[r], indexed(path, r)).transpose();
  return m;
}

// Object view that records which keys were read so leftovers can be reported.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const json& req(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) fail(path(key), "missing field");
    return j_.at(key);
  }
  const json* opt(const std::string& key) {
    seen_.insert(key);
    return has(key) ? &j_.at(key) : nullptr;
  }

  double number(const std::string& key) { return as_number(req(key), path(key)); }
  double number(const std::string& key, double dflt) {
    const json* v = opt(key);
    return v ? as_number(*v, path(key)) : dflt;
  }
  Vec3 vec3(const std::string& key) { return as_vec3(req(key), path(key)); }
  Vec3 vec3(const std::string& key, const Vec3& dflt) {
    const json* v = opt(key);
    return v ? as_vec3(*v, path(key)) : dflt;
  }
  std::string string(const std::string& key) {
    const json& v = req(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& dflt) {
    if (has(key)) return string(key);
    seen_.insert(key);
    return dflt;
  }
  bool boolean(const std::string& key, bool dflt) {
    const json* v = opt(key);
    if (!v) return dflt;
    if (!v->is_boolean()) fail(path(key), "expected true or false");
    return v->get<bool>();
  }

  template <typename E>
  E choice(const std::string& key, const std::map<std::string, E>& options, std::optional<E> dflt = std::nullopt) {
    if (!has(key)) {
      seen_.insert(key);
      if (dflt) return *dflt;
      fail(path(key), "missing field");
    }
    const std::string v = string(key);
    const auto it = options.find(v);
    if (it == options.end()) {
      std::string allowed;
      for (const auto& [name, _] : options) allowed += (allowed.empty() ? "" : ", ") + name;
      fail(path(key), "unknown value '" + v + "' (expected one of " + allowed + ")");
    }
    return it->second;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) fail(path(key), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::map<std::string, ConstraintType> kConstraintNames = {
    {"circle", ConstraintType::Circle}, {"sphere", ConstraintType::Sphere},
    {"plane", ConstraintType::Plane},   {"line", ConstraintType::Line}};
const std::map<std::string, JointType> kJointNames = {{"revolute", JointType::Revolute},
                                                      {"prismatic", JointType::Prismatic},
                                                      {"free", JointType::Free},
                                                      {"fixed", JointType::Fixed}};
const std::map<std::string, SystemType> kSystemNames = {
    {"points", SystemType::Points}, {"rigid_body", SystemType::RigidBody}, {"multibody", SystemType::Multibody}};
const std::map<std::string, Formulation> kFormulationNames = {{"generalized", Formulation::Generalized},
                                                              {"cartesian", Formulation::Cartesian},
                                                              {"newton_euler", Formulation::NewtonEuler},
                                                              {"lagrange", Formulation::Lagrange}};
const std::map<std::string, IntegratorMethod> kMethodNames = {{"rk4", IntegratorMethod::RK4},
                                                              {"euler", IntegratorMethod::Euler}};
const std::map<std::string, RotationParamKind> kRotationNames = {{"quat", RotationParamKind::Quaternion},
                                                                 {"euler", RotationParamKind::Euler},
                                                                 {"fedorov", RotationParamKind::Fedorov}};

template <typename E>
std::string name_of(const std::map<std::string, E>& names, E value) {
  for (const auto& [name, v] : names)
    if (v == value) return name;
  return "?";
}

int manifold_dim(ConstraintType t) {
  return t == ConstraintType::Sphere || t == ConstraintType::Plane ? 2 : 1;
}

void require_unit(const Vec3& v, const std::string& path) {
  if (std::abs(v.norm() - 1.0) > 1e-9) fail(path, "must be a unit vector");
}

ConstraintSpec parse_constraint(const json& j, const std::string& path) {
  Obj o(j, path);
  ConstraintSpec c;
  c.type = o.choice("type", kConstraintNames);
  c.center = o.vec3("center", Vec3::Zero());
  if (c.type == ConstraintType::Circle || c.type == ConstraintType::Sphere) {
    c.radius = o.number("radius");
    if (!(c.radius > 0.0)) fail(o.path("radius"), "must be positive");
  }
  if (c.type != ConstraintType::Sphere) {
    c.e1 = o.vec3("e1");
    require_unit(c.e1, o.path("e1"));
  }
  if (c.type == ConstraintType::Circle || c.type == ConstraintType::Plane) {
    c.e2 = o.vec3("e2");
    require_unit(c.e2, o.path("e2"));
    if (std::abs(c.e1.dot(c.e2)) > 1e-9) fail(o.path("e2"), "must be orthogonal to e1");
  }
  o.finish();
  return c;
}

PointSpec parse_point(const json& j, const std::string& path, std::size_t index, Formulation form) {
  Obj o(j, path);
  PointSpec p;
  p.label = o.string("label", "p" + std::to_string(index));
  p.mass = o.number("mass");
  if (!(p.mass > 0.0)) fail(o.path("mass"), "must be positive");
  if (const json* c = o.opt("constraint")) p.constraint = parse_constraint(*c, o.path("constraint"));
  const bool generalized = p.constraint && form == Formulation::Generalized;
  if (generalized) {
    const std::size_t dim = manifold_dim(p.constraint->type);
    p.q = as_numbers(o.req("q"), o.path("q"), dim);
    p.qdot = as_numbers(o.req("qdot"), o.path("qdot"), dim);
  } else {
    p.position = o.vec3("position");
    p.velocity = o.vec3("velocity", Vec3::Zero());
  }
  o.finish();
  return p;
}

JointSpec parse_joint(const json& j, const std::string& path) {
  Obj o(j, path);
  JointSpec js;
  js.type = o.choice("type", kJointNames);
  if (js.type == JointType::Revolute || js.type == JointType::Prismatic) {
    js.axis = o.vec3("axis");
    if (!(js.axis.norm() > 0.0)) fail(o.path("axis"), "must be nonzero");
    js.axis.normalize();
  }
  if (const json* off = o.opt("offset")) {
    Obj oo(*off, o.path("offset"));
    js.offset_position = oo.vec3("position", Vec3::Zero());
    if (const json* q = oo.opt("orientation")) js.offset_orientation = as_vec4(*q, oo.path("orientation"));
    if (std::abs(js.offset_orientation.norm() - 1.0) > 1e-6)
      fail(oo.path("orientation"), "quaternion must have unit norm");
    oo.finish();
  }
  o.finish();
  return js;
}

BodySpec parse_body(const json& j, const std::string& path, bool rigid) {
  Obj o(j, path);
  BodySpec b;
  b.label = o.string("label", rigid ? "body" : "");
  if (b.label.empty()) fail(o.path("label"), "missing field");
  if (!rigid) b.parent = o.string("parent", "");
  b.mass = o.number("mass");
  if (!(b.mass > 0.0)) fail(o.path("mass"), "must be positive");
  b.com = o.vec3("com", Vec3::Zero());
  if (const json* in = o.opt("inertia")) b.inertia = as_mat3(*in, o.path("inertia"));
  if ((b.inertia - b.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    fail(o.path("inertia"), "must be symmetric");
  if (Eigen::SelfAdjointEigenSolver<Mat3>(b.inertia).eigenvalues().minCoeff() < 0.0)
    fail(o.path("inertia"), "must be positive semidefinite");
  if (rigid) {
    b.joint.type = JointType::Free;
  } else {
    b.joint = parse_joint(o.req("joint"), o.path("joint"));
  }
  if (b.joint.type == JointType::Free) {
    b.position = o.vec3("position", Vec3::Zero());
    if (const json* q = o.opt("orientation")) b.orientation = as_vec4(*q, o.path("orientation"));
    if (std::abs(b.orientation.norm() - 1.0) > 1e-6) fail(o.path("orientation"), "quaternion must have unit norm");
    b.velocity = o.vec3("velocity", Vec3::Zero());
    b.angular_velocity = o.vec3("angular_velocity", Vec3::Zero());
  } else if (b.joint.type != JointType::Fixed) {
    b.q = o.number("q", 0.0);
    b.qdot = o.number("qdot", 0.0);
  }
  o.finish();
  return b;
}

Scenario parse_root(const json& root) {
  Obj o(root, "");
  Scenario s;
  const json& schema = o.req("schema");
  if (!schema.is_number_integer() || schema.get<int>() != 1) fail("schema", "unsupported schema version (expected 1)");
  s.name = o.string("name", "");

  Obj sys(o.req("system"), "system");
  s.type = sys.choice("type", kSystemNames);
  const Formulation dflt = s.type == SystemType::Points ? Formulation::Generalized : Formulation::NewtonEuler;
  s.formulation = sys.choice("formulation", kFormulationNames, std::optional<Formulation>(dflt));
  const bool points = s.type == SystemType::Points;
  const bool form_ok = points ? (s.formulation == Formulation::Generalized || s.formulation == Formulation::Cartesian)
                              : (s.formulation == Formulation::NewtonEuler || s.formulation == Formulation::Lagrange);
  if (!form_ok) fail("system.formulation", "not available for this system type");

  if (points) {
    const json& arr = sys.req("points");
    if (!arr.is_array() || arr.empty()) fail("system.points", "expected a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      s.points.push_back(parse_point(arr[i], indexed("system.points", i), i, s.formulation));
  } else if (s.type == SystemType::RigidBody) {
    s.bodies.push_back(parse_body(sys.req("body"), "system.body", true));
  } else {
    const json& arr = sys.req("bodies");
    if (!arr.is_array() || arr.empty()) fail("system.bodies", "expected a non-empty array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = indexed("system.bodies", i);
      BodySpec b = parse_body(arr[i], path, false);
      if (labels.count(b.label)) fail(join(path, "label"), "duplicate label '" + b.label + "'");
      if (!b.parent.empty() && !labels.count(b.parent))
        fail(join(path, "parent"), "'" + b.parent + "' is not an earlier body");
      labels.insert(b.label);
      s.bodies.push_back(std::move(b));
    }
  }
  sys.finish();

  if (const json* f = o.opt("forces")) {
    Obj fo(*f, "forces");
    s.forces.gravity = fo.vec3("gravity", Vec3::Zero());
    s.forces.nbody_gamma = fo.number("nbody_gamma", 0.0);
    if (s.forces.nbody_gamma < 0.0) fail("forces.nbody_gamma", "must be nonnegative");
    if (const json* ws = fo.opt("wrenches")) {
      if (!ws->is_array()) fail("forces.wrenches", "expected an array");
      if (points && !ws->empty()) fail("forces.wrenches", "wrenches need rigid bodies");
      for (std::size_t i = 0; i < ws->size(); ++i) {
        const std::string path = indexed("forces.wrenches", i);
        Obj wo((*ws)[i], path);
        WrenchSpec w;
        w.body = wo.string("body", s.type == SystemType::RigidBody ? s.bodies[0].label : "");
        bool known = false;
        for (const auto& b : s.bodies) known = known || b.label == w.body;
        if (!known) fail(wo.path("body"), "unknown body '" + w.body + "'");
        const std::string frame = wo.string("frame", "body");
        if (frame != "body" && frame != "world") fail(wo.path("frame"), "expected 'body' or 'world'");
        w.world_frame = frame == "world";
        w.force = wo.vec3("force", Vec3::Zero());
        w.torque = wo.vec3("torque", Vec3::Zero());
        wo.finish();
        s.forces.wrenches.push_back(w);
      }
    }
    fo.finish();
  }

  Obj in(o.req("integrator"), "integrator");
  s.integrator.method = in.choice("method", kMethodNames, std::optional<IntegratorMethod>(IntegratorMethod::RK4));
  s.integrator.step = in.number("step");
  s.integrator.duration = in.number("duration");
  if (!(s.integrator.step > 0.0)) fail("integrator.step", "must be positive");
  if (!(s.integrator.duration >= s.integrator.step)) fail("integrator.duration", "must be at least one step");
  const double n = s.integrator.duration / s.integrator.step;
  if (std::abs(n - std::round(n)) > 1e-6 * n) fail("integrator.duration", "must be a whole number of steps");
  if (n > 1e9) fail("integrator.duration", "too many steps");
  if (const json* every = in.opt("output_every")) {
    if (!every->is_number_integer() || every->get<long long>() < 1)
      fail("integrator.output_every", "expected a positive integer");
    s.integrator.output_every = every->get<int>();
  }
  in.finish();

  s.rotation = o.choice("rotation", kRotationNames, std::optional<RotationParamKind>(RotationParamKind::Quaternion));
  if (s.formulation == Formulation::Lagrange && s.rotation == RotationParamKind::Quaternion) {
    bool has_free = false;
    for (const auto& b : s.bodies) has_free = has_free || b.joint.type == JointType::Free;
    if (has_free) fail("rotation", "the lagrange formulation needs 'euler' or 'fedorov' for free joints");
  }
  if (const json* fl = o.opt("flags")) {
    Obj fo(*fl, "flags");
    s.renormalize_quaternions = fo.boolean("renormalize_quaternions", true);
    s.project_constraints = fo.boolean("project_constraints", false);
    fo.finish();
  }
  o.finish();
  return s;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Scenario& s) {
  json root;
  root["schema"] = s.schema;
  root["name"] = s.name;
  json sys;
  sys["type"] = name_of(kSystemNames, s.type);
  sys["formulation"] = name_of(kFormulationNames, s.formulation);
  if (s.type == SystemType::Points) {
    json arr = json::array();
    for (const auto& p : s.points) {
      json jp;
      jp["label"] = p.label;
      jp["mass"] = p.mass;
      if (p.constraint) {
        const ConstraintSpec& c = *p.constraint;
        json jc;
        jc["type"] = name_of(kConstraintNames, c.type);
        jc["center"] = vec_json(c.center);
        if (c.type == ConstraintType::Circle || c.type == ConstraintType::Sphere) jc["radius"] = c.radius;
        if (c.type != ConstraintType::Sphere) jc["e1"] = vec_json(c.e1);
        if (c.type == ConstraintType::Circle || c.type == ConstraintType::Plane) jc["e2"] = vec_json(c.e2);
        jp["constraint"] = jc;
      }
      if (p.constraint && s.formulation == Formulation::Generalized) {
        jp["q"] = p.q;
        jp["qdot"] = p.qdot;
      } else {
        jp["position"] = vec_json(p.position);
        jp["velocity"] = vec_json(p.velocity);
      }
      arr.push_back(jp);
    }
    sys["points"] = arr;
  } else {
    json arr = json::array();
    for (const auto& b : s.bodies) {
      json jb;
      jb["label"] = b.label;
      if (s.type == SystemType::Multibody) {
        if (!b.parent.empty()) jb["parent"] = b.parent;
        json jj;
        jj["type"] = name_of(kJointNames, b.joint.type);
        if (b.joint.type == JointType::Revolute || b.joint.type == JointType::Prismatic)
          jj["axis"] = vec_json(b.joint.axis);
        jj["offset"] = {{"position", vec_json(b.joint.offset_position)},
                        {"orientation", vec_json(b.joint.offset_orientation)}};
        jb["joint"] = jj;
      }
      jb["mass"] = b.mass;
      jb["com"] = vec_json(b.com);
      jb["inertia"] = {vec_json(b.inertia.row(0).transpose()), vec_json(b.inertia.row(1).transpose()),
                       vec_json(b.inertia.row(2).transpose())};
      if (b.joint.type == JointType::Free) {
        jb["position"] = vec_json(b.position);
        jb["orientation"] = vec_json(b.orientation);
        jb["velocity"] = vec_json(b.velocity);
        jb["angular_velocity"] = vec_json(b.angular_velocity);
      } else if (b.joint.type != JointType::Fixed) {
        jb["q"] = b.q;
        jb["qdot"] = b.qdot;
      }
      arr.push_back(jb);
    }
    if (s.type == SystemType::RigidBody)
      sys["body"] = arr[0];
    else
      sys["bodies"] = arr;
  }
  root["system"] = sys;
  json ws = json::array();
  for (const auto& w : s.forces.wrenches)
    ws.push_back({{"body", w.body},
                  {"frame", w.world_frame ? "world" : "body"},
                  {"force", vec_json(w.force)},
                  {"torque", vec_json(w.torque)}});
  root["forces"] = {{"gravity", vec_json(s.forces.gravity)}, {"nbody_gamma", s.forces.nbody_gamma}, {"wrenches", ws}};
  root["integrator"] = {{"method", name_of(kMethodNames, s.integrator.method)},
                        {"step", s.integrator.step},
                        {"duration", s.integrator.duration},
                        {"output_every", s.integrator.output_every}};
  root["rotation"] = name_of(kRotationNames, s.rotation);
  root["flags"] = {{"renormalize_quaternions", s.renormalize_quaternions},
                   {"project_constraints", s.project_constraints}};
  return root;
}

MotionTransform offset_of(const JointSpec& j) {
  const Eigen::Vector4d q = j.offset_orientation.normalized();
  return {rotation_from_quat(UnitQuaternion::normalized(Quaternion::from_vector(q))), j.offset_position};
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_root(root);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string serialize_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

ConstraintManifold build_manifold(const ConstraintSpec& c) {
  switch (c.type) {
    case ConstraintType::Circle:
      return ConstraintManifold::circle(c.center, c.radius, c.e1, c.e2);
    case ConstraintType::Sphere:
      return ConstraintManifold::sphere(c.center, c.radius);
    case ConstraintType::Plane:
      return ConstraintManifold::plane(c.center, c.e1, c.e2);
    case ConstraintType::Line:
      return ConstraintManifold::line(c.center, c.e1);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown constraint type");
}

TreeSetup build_tree(const Scenario& s) {
  if (s.type == SystemType::Points) throw Error(ErrorKind::InvalidArgument, "point scenarios have no tree");
  TreeSetup out;
  std::map<std::string, int> index;
  std::vector<double> q, u;
  for (const BodySpec& b : s.bodies) {
    Joint joint;
    const MotionTransform offset = offset_of(b.joint);
    switch (b.joint.type) {
      case JointType::Revolute:
        joint = Joint::revolute(b.joint.axis, offset);
        break;
      case JointType::Prismatic:
        joint = Joint::prismatic(b.joint.axis, offset);
        break;
      case JointType::Free:
        joint = Joint::free(s.rotation, offset);
        break;
      case JointType::Fixed:
        joint = Joint::fixed(offset);
        break;
    }
    const int parent = b.parent.empty() ? -1 : index.at(b.parent);
    index[b.label] = out.tree.add_body(b.label, parent, SpatialInertia::from_mass_props(b.mass, b.com, b.inertia), joint);
    if (b.joint.type == JointType::Free) {
      const RotationMatrix c = rotation_from_quat(UnitQuaternion::normalized(Quaternion::from_vector(b.orientation)));
      const Eigen::VectorXd lam = param_from_rotation(s.rotation, c);
      for (int i = 0; i < 3; ++i) q.push_back(b.position(i));
      for (int i = 0; i < lam.size(); ++i) q.push_back(lam(i));
      for (int i = 0; i < 3; ++i) u.push_back(b.velocity(i));
      for (int i = 0; i < 3; ++i) u.push_back(b.angular_velocity(i));
    } else if (b.joint.type != JointType::Fixed) {
      q.push_back(b.q);
      u.push_back(b.qdot);
    }
  }
  out.q = Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
  out.u = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  out.loads.gravity = s.forces.gravity;
  out.loads.nbody_gamma = s.forces.nbody_gamma;
  for (const WrenchSpec& w : s.forces.wrenches)
    out.loads.wrenches.push_back({index.at(w.body), w.world_frame, w.force, w.torque});
  return out;
}

}  // namespace screwdyn::sim
