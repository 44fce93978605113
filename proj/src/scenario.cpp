#include "lf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lf/errors.hpp"

namespace lf {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where, what);
}

std::string num_str(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// One JSON object being consumed: typed getters record the keys they read so
// finish() can reject everything unrecognized with a precise path.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string sub(const char* key) const { return path_ + "/" + key; }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double num(const char* key, double def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) fail(sub(key), "expected a number");
    return v->get<double>();
  }

  bool boolean(const char* key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(sub(key), "expected true or false");
    return v->get<bool>();
  }

  std::uint64_t uint(const char* key, std::uint64_t def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_integer()) fail(sub(key), "expected a non-negative integer");
    if (!v->is_number_unsigned() && v->get<std::int64_t>() < 0) {
      fail(sub(key), "expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  int integer(const char* key, int def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_integer()) fail(sub(key), "expected an integer");
    return v->get<int>();
  }

  std::string str(const char* key, const char* def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) fail(sub(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(path_ + "/" + it.key(), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

Vec3 vec3_at(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected [x, y, z]");
  return {number_at(j[0], where + "/0"), number_at(j[1], where + "/1"),
          number_at(j[2], where + "/2")};
}

std::vector<Vec3> points_at(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of [x, y, z] points");
  std::vector<Vec3> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(vec3_at(j[i], where + "/" + std::to_string(i)));
  }
  return out;
}

std::vector<std::pair<double, Vec3>> schedule_at(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of [t, x, y, z]");
  std::vector<std::pair<double, Vec3>> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "/" + std::to_string(i);
    const json& e = j[i];
    if (!e.is_array() || e.size() != 4) fail(at, "expected [t, x, y, z]");
    double t = number_at(e[0], at + "/0");
    Vec3 p{number_at(e[1], at + "/1"), number_at(e[2], at + "/2"),
           number_at(e[3], at + "/3")};
    if (!out.empty() && t <= out.back().first) {
      fail(at + "/0", "schedule times must be strictly increasing");
    }
    out.emplace_back(t, p);
  }
  return out;
}

Obstacle obstacle_at(const json& j, const std::string& where, const Workspace& ws) {
  Obj o(j, where);
  const std::string type = o.str("type", "");
  Obstacle ob;
  if (type == "pole") {
    ob.kind = Obstacle::Kind::Pole;
    const json* xy = o.find("xy");
    if (!xy) fail(o.sub("xy"), "required for pole obstacles");
    if (!xy->is_array() || xy->size() != 2) fail(o.sub("xy"), "expected [x, y]");
    ob.center = {number_at((*xy)[0], o.sub("xy") + "/0"),
                 number_at((*xy)[1], o.sub("xy") + "/1"), 0.0};
    ob.radius = o.num("radius", 0.0);
    if (const json* z = o.find("z")) {
      if (!z->is_array() || z->size() != 2) fail(o.sub("z"), "expected [z0, z1]");
      ob.z0 = number_at((*z)[0], o.sub("z") + "/0");
      ob.z1 = number_at((*z)[1], o.sub("z") + "/1");
    } else {
      ob.z0 = ws.bounds_min.z;
      ob.z1 = ws.bounds_max.z;
    }
    if (ob.z1 < ob.z0) fail(o.sub("z"), "pole needs z1 >= z0");
    if (!(ob.radius > 0.0)) fail(o.sub("radius"), "pole needs radius > 0");
  } else if (type == "sphere") {
    ob.kind = Obstacle::Kind::Sphere;
    const json* c = o.find("center");
    if (!c) fail(o.sub("center"), "required for sphere obstacles");
    ob.center = vec3_at(*c, o.sub("center"));
    ob.radius = o.num("radius", 0.0);
    if (!(ob.radius > 0.0)) fail(o.sub("radius"), "sphere needs radius > 0");
  } else if (type == "box") {
    ob.kind = Obstacle::Kind::Box;
    const json* lo = o.find("min");
    const json* hi = o.find("max");
    if (!lo) fail(o.sub("min"), "required for box obstacles");
    if (!hi) fail(o.sub("max"), "required for box obstacles");
    ob.box_min = vec3_at(*lo, o.sub("min"));
    ob.box_max = vec3_at(*hi, o.sub("max"));
    if (ob.box_max.x < ob.box_min.x || ob.box_max.y < ob.box_min.y ||
        ob.box_max.z < ob.box_min.z) {
      fail(o.sub("max"), "box needs max >= min componentwise");
    }
  } else {
    fail(o.sub("type"), "expected \"pole\", \"sphere\", or \"box\"");
  }
  if (const json* s = o.find("schedule")) {
    ob.schedule = schedule_at(*s, o.sub("schedule"));
  }
  o.finish();
  return ob;
}

MissionMode mode_from(const std::string& name, const std::string& where) {
  if (name == "oneshot") return MissionMode::Oneshot;
  if (name == "synchronous") return MissionMode::Synchronous;
  if (name == "asynchronous") return MissionMode::Asynchronous;
  if (name == "target_following") return MissionMode::TargetFollowing;
  fail(where,
       "expected one of \"oneshot\", \"synchronous\", \"asynchronous\", "
       "\"target_following\"");
}

// Placement checks shared by starts and explicit goals.
void check_placement(const Vec3& p, const Workspace& ws, double r,
                     const std::string& where, const char* what) {
  if (ws.planar && std::abs(p.z - ws.bounds_min.z) > 1e-9) {
    fail(where, std::string(what) + " must sit at z = " + num_str(ws.bounds_min.z) +
                    " in a planar workspace");
  }
  if (!ws.inside_shrunk(p, r)) {
    fail(where, std::string(what) + " sphere of radius " + num_str(r) +
                    " leaves the workspace bounds");
  }
  if (!ws.point_free(p, r, 0.0, 0.0)) {
    fail(where, std::string(what) + " collides with an obstacle");
  }
}

void validate(const Scenario& s) {
  const Workspace& ws = s.workspace;
  if (!(ws.bounds_max.x > ws.bounds_min.x) || !(ws.bounds_max.y > ws.bounds_min.y) ||
      (!ws.planar && !(ws.bounds_max.z > ws.bounds_min.z)) ||
      (ws.planar && ws.bounds_max.z < ws.bounds_min.z)) {
    fail("/workspace/bounds", "max must exceed min on every traversable axis");
  }
  if (ws.dynamic_margin < 0.0) fail("/workspace/dynamic_margin", "must be >= 0");
  if (s.n_agents < 1) fail("/agents/n", "need at least one agent");
  if (!(s.r_agent > 0.0)) fail("/agents/r_agent", "must be > 0");

  if (!s.starts.empty()) {
    if (s.starts.size() != s.n_agents) {
      fail("/agents/starts", "expected " + std::to_string(s.n_agents) +
                                 " starts, got " + std::to_string(s.starts.size()));
    }
    for (std::size_t i = 0; i < s.starts.size(); ++i) {
      check_placement(s.starts[i], ws, s.r_agent,
                      "/agents/starts/" + std::to_string(i), "start");
    }
    for (std::size_t i = 0; i < s.starts.size(); ++i) {
      for (std::size_t j = i + 1; j < s.starts.size(); ++j) {
        const double d = s.starts[i].dist(s.starts[j]);
        if (d < 2.0 * s.r_agent) {
          fail("/agents/starts", "agents " + std::to_string(i) + " and " +
                                     std::to_string(j) + " start " + num_str(d) +
                                     " m apart; minimum separation is 2*r_agent = " +
                                     num_str(2.0 * s.r_agent));
        }
      }
    }
  }

  const MissionSpec& m = s.mission;
  if (!(m.duration_s > 0.0)) fail("/mission/duration_s", "must be > 0");
  if (!(m.speed_mps > 0.0)) fail("/mission/speed_mps", "must be > 0");
  const bool has_goals = !m.goals.empty();
  const bool has_region = m.goal_region.has_value();
  const bool has_target = !m.target_path.empty();
  switch (m.mode) {
    case MissionMode::Oneshot:
      if (has_target) fail("/mission/target_path", "only used by target_following");
      if (has_goals == has_region) {
        fail("/mission", "oneshot needs exactly one of \"goals\" or \"goal_region\"");
      }
      break;
    case MissionMode::Synchronous:
    case MissionMode::Asynchronous:
      if (has_target) fail("/mission/target_path", "only used by target_following");
      if (has_goals) {
        fail("/mission/goals",
             "goal streams are sampled; use \"goal_region\" for this mode");
      }
      if (!has_region) fail("/mission", "this mode needs a \"goal_region\"");
      break;
    case MissionMode::TargetFollowing:
      if (has_goals || has_region) {
        fail("/mission", "target_following takes goals from \"target_path\" only");
      }
      if (!has_target) fail("/mission", "target_following needs a \"target_path\"");
      if (!(m.formation_radius > 0.0)) fail("/mission/formation_radius", "must be > 0");
      break;
  }
  if (has_goals) {
    if (m.goals.size() != s.n_agents) {
      fail("/mission/goals", "expected " + std::to_string(s.n_agents) + " goals, got " +
                                 std::to_string(m.goals.size()));
    }
    for (std::size_t i = 0; i < m.goals.size(); ++i) {
      check_placement(m.goals[i], ws, s.r_agent, "/mission/goals/" + std::to_string(i),
                      "goal");
    }
    // Below this separation two settled agents cannot both sit within
    // r_target of their goals while keeping 2*r_agent apart.
    const double floor_sep = 2.0 * (s.r_agent - s.planner.r_target);
    for (std::size_t i = 0; i < m.goals.size(); ++i) {
      for (std::size_t j = i + 1; j < m.goals.size(); ++j) {
        const double d = m.goals[i].dist(m.goals[j]);
        if (d < floor_sep) {
          fail("/mission/goals", "goals " + std::to_string(i) + " and " +
                                     std::to_string(j) + " are " + num_str(d) +
                                     " m apart; agents of radius " + num_str(s.r_agent) +
                                     " cannot both settle within r_target = " +
                                     num_str(s.planner.r_target));
        }
      }
    }
  }
  if (has_region) {
    if (!(m.goal_region->radius > 0.0)) fail("/mission/goal_region/radius", "must be > 0");
    check_placement(m.goal_region->center, ws, s.r_agent, "/mission/goal_region/center",
                    "goal region center");
  }
  if (has_target && ws.planar) {
    for (std::size_t i = 0; i < m.target_path.size(); ++i) {
      if (std::abs(m.target_path[i].second.z - ws.bounds_min.z) > 1e-9) {
        fail("/mission/target_path/" + std::to_string(i),
             "must sit at z = " + num_str(ws.bounds_min.z) + " in a planar workspace");
      }
    }
  }

  const PlannerSpec& p = s.planner;
  if (p.d_travel < 0.0) fail("/planner/d_travel", "must be >= 0 (0 = speed / replan rate)");
  if (!(p.r_target > 0.0)) fail("/planner/r_target", "must be > 0");
  if (p.p_skip < 0.0 || p.p_skip > 1.0) fail("/planner/p_skip", "must be in [0, 1]");
  if (p.lns_k < 1) fail("/planner/lns_k", "must be >= 1");

  if (!(s.roadmap.lattice_h > 0.0)) fail("/roadmap/lattice_h", "must be > 0");
  if (!(s.roadmap.connect_radius > 0.0)) fail("/roadmap/connect_radius", "must be > 0");
  if (!(s.roadmap.neighbor_radius > 0.0)) fail("/roadmap/neighbor_radius", "must be > 0");

  const TrackerParams& c = s.controller;
  if (!(c.ctrl_hz > 0.0)) fail("/controller/ctrl_hz", "must be > 0");
  if (!(c.q_pos > 0.0)) fail("/controller/q_pos", "must be > 0");
  if (!(c.q_vel > 0.0)) fail("/controller/q_vel", "must be > 0");
  if (!(c.r_acc > 0.0)) fail("/controller/r_acc", "must be > 0");
  if (c.k_ff < 0.0) fail("/controller/k_ff", "must be >= 0");
  if (!(c.a_max > 0.0)) fail("/controller/a_max", "must be > 0");

  const RuntimeSpec& r = s.runtime;
  if (!(r.replan_hz > 0.0)) fail("/runtime/replan_hz", "must be > 0");
  if (r.replan_hz > 20.0) fail("/runtime/replan_hz", "at most 20 Hz");
  if (c.ctrl_hz < 5.0 * r.replan_hz) {
    fail("/controller/ctrl_hz", "must be >= 5 * replan_hz (" + num_str(r.replan_hz) +
                                    " Hz -> >= " + num_str(5.0 * r.replan_hz) + " Hz)");
  }
  if (!(r.sigma_repair > 0.0)) fail("/runtime/sigma_repair", "must be > 0");
  if (!(r.deadline_fraction > 0.0) || r.deadline_fraction > 1.0) {
    fail("/runtime/deadline_fraction", "must be in (0, 1]");
  }
  if (r.kappa_miss < 1) fail("/runtime/kappa_miss", "must be >= 1");
  if (r.sigma_disturbance < 0.0) fail("/runtime/sigma_disturbance", "must be >= 0");
}

}  // namespace

const char* to_string(MissionMode m) {
  switch (m) {
    case MissionMode::Oneshot: return "oneshot";
    case MissionMode::Synchronous: return "synchronous";
    case MissionMode::Asynchronous: return "asynchronous";
    case MissionMode::TargetFollowing: return "target_following";
  }
  return "?";
}

double Scenario::d_travel() const {
  return planner.d_travel > 0.0 ? planner.d_travel
                                : mission.speed_mps / runtime.replan_hz;
}

double Scenario::delta_reuse() const {
  return runtime.delta_reuse > 0.0 ? runtime.delta_reuse : 0.5 * d_travel();
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("/", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("/", "expected a JSON object");

  Scenario s;
  Obj root(doc, "");
  const int version = root.integer("version", 1);
  if (version != 1) fail("/version", "unsupported schema version (expected 1)");
  s.version = version;
  s.seed = root.uint("seed", 0);

  if (const json* w = root.find("workspace")) {
    Obj o(*w, "/workspace");
    if (const json* b = o.find("bounds")) {
      Obj bo(*b, "/workspace/bounds");
      if (const json* lo = bo.find("min")) s.workspace.bounds_min = vec3_at(*lo, bo.sub("min"));
      if (const json* hi = bo.find("max")) s.workspace.bounds_max = vec3_at(*hi, bo.sub("max"));
      bo.finish();
    }
    s.workspace.planar = o.boolean("planar", false);
    s.workspace.dynamic_margin = o.num("dynamic_margin", 0.05);
    if (const json* obs = o.find("obstacles")) {
      if (!obs->is_array()) fail(o.sub("obstacles"), "expected an array");
      for (std::size_t i = 0; i < obs->size(); ++i) {
        s.workspace.obstacles.push_back(obstacle_at(
            (*obs)[i], "/workspace/obstacles/" + std::to_string(i), s.workspace));
      }
    }
    o.finish();
  }

  if (const json* a = root.find("agents")) {
    Obj o(*a, "/agents");
    s.n_agents = static_cast<std::size_t>(o.uint("n", 1));
    s.r_agent = o.num("r_agent", 0.2);
    if (const json* st = o.find("starts")) s.starts = points_at(*st, o.sub("starts"));
    o.finish();
  }

  if (const json* m = root.find("mission")) {
    Obj o(*m, "/mission");
    s.mission.mode = mode_from(o.str("mode", "oneshot"), o.sub("mode"));
    s.mission.duration_s = o.num("duration_s", 60.0);
    s.mission.speed_mps = o.num("speed_mps", 0.5);
    s.mission.formation_radius = o.num("formation_radius", 1.0);
    if (const json* g = o.find("goals")) s.mission.goals = points_at(*g, o.sub("goals"));
    if (const json* r = o.find("goal_region")) {
      Obj ro(*r, "/mission/goal_region");
      GoalRegion region;
      const json* c = ro.find("center");
      if (!c) fail(ro.sub("center"), "required");
      region.center = vec3_at(*c, ro.sub("center"));
      region.radius = ro.num("radius", 2.0);
      ro.finish();
      s.mission.goal_region = region;
    }
    if (const json* t = o.find("target_path")) {
      s.mission.target_path = schedule_at(*t, o.sub("target_path"));
    }
    o.finish();
  }

  if (const json* p = root.find("planner")) {
    Obj o(*p, "/planner");
    s.planner.d_travel = o.num("d_travel", 0.0);
    s.planner.r_target = o.num("r_target", 0.15);
    s.planner.eps_dup = o.num("eps_dup", -1.0);
    s.planner.p_skip = o.num("p_skip", 0.5);
    s.planner.lns_k = o.integer("lns_k", 2);
    o.finish();
  }

  if (const json* r = root.find("roadmap")) {
    Obj o(*r, "/roadmap");
    s.roadmap.lattice_h = o.num("lattice_h", 0.5);
    s.roadmap.connect_radius = o.num("connect_radius", 0.95);
    s.roadmap.neighbor_radius = o.num("neighbor_radius", 1.0);
    o.finish();
  }

  if (const json* c = root.find("controller")) {
    Obj o(*c, "/controller");
    s.controller.ctrl_hz = o.num("ctrl_hz", 100.0);
    s.controller.q_pos = o.num("q_pos", 8.0);
    s.controller.q_vel = o.num("q_vel", 4.0);
    s.controller.r_acc = o.num("r_acc", 1.0);
    s.controller.k_ff = o.num("k_ff", 1.0);
    s.controller.a_max = o.num("a_max", 6.0);
    o.finish();
  }

  if (const json* r = root.find("runtime")) {
    Obj o(*r, "/runtime");
    s.runtime.replan_hz = o.num("replan_hz", 10.0);
    s.runtime.delta_reuse = o.num("delta_reuse", -1.0);
    s.runtime.sigma_repair = o.num("sigma_repair", 0.05);
    s.runtime.deadline_fraction = o.num("deadline_fraction", 0.8);
    s.runtime.kappa_miss = o.integer("kappa_miss", 10);
    s.runtime.budget_expansions = o.uint("budget_expansions", 0);
    s.runtime.sigma_disturbance = o.num("sigma_disturbance", 0.0);
    o.finish();
  }

  root.finish();
  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot read file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

ojson v3(const Vec3& p) { return ojson::array({p.x, p.y, p.z}); }

ojson schedule_json(const std::vector<std::pair<double, Vec3>>& sched) {
  ojson arr = ojson::array();
  for (const auto& [t, p] : sched) arr.push_back(ojson::array({t, p.x, p.y, p.z}));
  return arr;
}

ojson obstacle_json(const Obstacle& ob) {
  ojson j;
  switch (ob.kind) {
    case Obstacle::Kind::Pole:
      j["type"] = "pole";
      j["xy"] = ojson::array({ob.center.x, ob.center.y});
      j["radius"] = ob.radius;
      j["z"] = ojson::array({ob.z0, ob.z1});
      break;
    case Obstacle::Kind::Sphere:
      j["type"] = "sphere";
      j["center"] = v3(ob.center);
      j["radius"] = ob.radius;
      break;
    case Obstacle::Kind::Box:
      j["type"] = "box";
      j["min"] = v3(ob.box_min);
      j["max"] = v3(ob.box_max);
      break;
  }
  if (!ob.schedule.empty()) j["schedule"] = schedule_json(ob.schedule);
  return j;
}

}  // namespace

std::string dump_scenario(const Scenario& s) {
  ojson j;
  j["version"] = s.version;
  j["seed"] = s.seed;

  ojson w;
  w["bounds"] = {{"min", v3(s.workspace.bounds_min)}, {"max", v3(s.workspace.bounds_max)}};
  w["planar"] = s.workspace.planar;
  w["dynamic_margin"] = s.workspace.dynamic_margin;
  ojson obs = ojson::array();
  for (const auto& ob : s.workspace.obstacles) obs.push_back(obstacle_json(ob));
  w["obstacles"] = std::move(obs);
  j["workspace"] = std::move(w);

  ojson a;
  a["n"] = s.n_agents;
  a["r_agent"] = s.r_agent;
  if (!s.starts.empty()) {
    ojson pts = ojson::array();
    for (const auto& p : s.starts) pts.push_back(v3(p));
    a["starts"] = std::move(pts);
  }
  j["agents"] = std::move(a);

  ojson m;
  m["mode"] = to_string(s.mission.mode);
  m["duration_s"] = s.mission.duration_s;
  m["speed_mps"] = s.mission.speed_mps;
  m["formation_radius"] = s.mission.formation_radius;
  if (!s.mission.goals.empty()) {
    ojson pts = ojson::array();
    for (const auto& p : s.mission.goals) pts.push_back(v3(p));
    m["goals"] = std::move(pts);
  }
  if (s.mission.goal_region) {
    m["goal_region"] = {{"center", v3(s.mission.goal_region->center)},
                        {"radius", s.mission.goal_region->radius}};
  }
  if (!s.mission.target_path.empty()) {
    m["target_path"] = schedule_json(s.mission.target_path);
  }
  j["mission"] = std::move(m);

  j["planner"] = {{"d_travel", s.planner.d_travel},
                  {"r_target", s.planner.r_target},
                  {"eps_dup", s.planner.eps_dup},
                  {"p_skip", s.planner.p_skip},
                  {"lns_k", s.planner.lns_k}};
  j["roadmap"] = {{"lattice_h", s.roadmap.lattice_h},
                  {"connect_radius", s.roadmap.connect_radius},
                  {"neighbor_radius", s.roadmap.neighbor_radius}};
  j["controller"] = {{"ctrl_hz", s.controller.ctrl_hz}, {"q_pos", s.controller.q_pos},
                     {"q_vel", s.controller.q_vel},     {"r_acc", s.controller.r_acc},
                     {"k_ff", s.controller.k_ff},       {"a_max", s.controller.a_max}};
  j["runtime"] = {{"replan_hz", s.runtime.replan_hz},
                  {"delta_reuse", s.runtime.delta_reuse},
                  {"sigma_repair", s.runtime.sigma_repair},
                  {"deadline_fraction", s.runtime.deadline_fraction},
                  {"kappa_miss", s.runtime.kappa_miss},
                  {"budget_expansions", s.runtime.budget_expansions},
                  {"sigma_disturbance", s.runtime.sigma_disturbance}};
  return j.dump(2) + "\n";
}

std::string plan_to_json(const Plan& plan) {
  ojson j;
  ojson steps = ojson::array();
  for (const auto& q : plan.steps) {
    ojson row = ojson::array();
    for (const auto& p : q) row.push_back(v3(p));
    steps.push_back(std::move(row));
  }
  j["steps"] = std::move(steps);
  j["flowtime"] = plan.flowtime;
  j["normalized_cost"] = plan.normalized_cost;
  j["feasible"] = plan.feasible;
  return j.dump(2) + "\n";
}

Plan plan_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("/", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("/", "expected a JSON object");
  auto it = doc.find("steps");
  if (it == doc.end()) fail("/steps", "required");
  // An empty array is the degenerate "already settled" plan.
  if (!it->is_array()) fail("/steps", "expected an array of steps");

  Plan plan;
  plan.steps.reserve(it->size());
  std::size_t n = 0;
  for (std::size_t k = 0; k < it->size(); ++k) {
    const std::string at = "/steps/" + std::to_string(k);
    const json& row = (*it)[k];
    if (!row.is_array() || row.empty()) fail(at, "expected a non-empty array of points");
    if (k == 0) {
      n = row.size();
    } else if (row.size() != n) {
      fail(at, "expected " + std::to_string(n) + " agents, got " +
                   std::to_string(row.size()));
    }
    Configuration q;
    q.reserve(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      q.push_back(vec3_at(row[i], at + "/" + std::to_string(i)));
    }
    plan.steps.push_back(std::move(q));
  }
  plan.settled = settled_steps(plan.steps);
  plan.flowtime = flowtime_of(plan.settled);
  if (auto f = doc.find("flowtime"); f != doc.end()) {
    plan.flowtime = number_at(*f, "/flowtime");
  }
  if (auto c = doc.find("normalized_cost"); c != doc.end()) {
    plan.normalized_cost = number_at(*c, "/normalized_cost");
  }
  if (auto b = doc.find("feasible"); b != doc.end()) {
    if (!b->is_boolean()) fail("/feasible", "expected true or false");
    plan.feasible = b->get<bool>();
  }
  return plan;
}

Plan load_plan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot read file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return plan_from_json(buf.str());
}

}  // namespace lf
