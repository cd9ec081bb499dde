#include "bezreach/config.h"

#include <cmath>
#include <fstream>
#include <set>

#include "bezreach/errors.h"
#include "bezreach/io.h"

namespace bezreach {
namespace {

using Json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// A JSON object being read at a known field path.
class Section {
 public:
  Section(const Json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ != nullptr && !j_->is_object()) {
      throw ConfigError(path_, "must be an object");
    }
  }

  void only(std::initializer_list<const char*> keys) const {
    if (j_ == nullptr) return;
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& item : j_->items()) {
      if (!known.count(item.key())) {
        throw ConfigError(join(path_, item.key()), "unknown field");
      }
    }
  }

  const Json* find(const char* key) const {
    if (j_ == nullptr) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() || it->is_null() ? nullptr : &*it;
  }

  std::string at(const char* key) const { return join(path_, key); }

  Section section(const char* key) const { return Section(find(key), at(key)); }

  double number(const char* key, double fallback) const {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ConfigError(at(key), "must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
    return x;
  }

  double positive(const char* key, double fallback) const {
    const double x = number(key, fallback);
    if (!(x > 0)) throw ConfigError(at(key), "must be positive");
    return x;
  }

  double nonnegative(const char* key, double fallback) const {
    const double x = number(key, fallback);
    if (!(x >= 0)) throw ConfigError(at(key), "must be nonnegative");
    return x;
  }

  long integer(const char* key, long fallback, long lo, long hi) const {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw ConfigError(at(key), "must be an integer");
    const long x = v->get<long>();
    if (x < lo || x > hi) {
      throw ConfigError(at(key), "must lie in [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "]");
    }
    return x;
  }

  std::uint64_t seed(const char* key, std::uint64_t fallback) const {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long>() >= 0)) {
      throw ConfigError(at(key), "must be a nonnegative integer");
    }
    return v->get<std::uint64_t>();
  }

  bool boolean(const char* key, bool fallback) const {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key), "must be true or false");
    return v->get<bool>();
  }

  std::string text(const char* key, const std::string& fallback,
                   std::initializer_list<const char*> choices = {}) const {
    const Json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(at(key), "must be a string");
    const std::string s = v->get<std::string>();
    if (choices.size() == 0) return s;
    std::string options;
    for (const char* c : choices) {
      if (s == c) return s;
      options += options.empty() ? c : std::string(", ") + c;
    }
    throw ConfigError(at(key), "must be one of " + options);
  }

  std::optional<Eigen::VectorXd> vector(const char* key, int size = -1) const {
    const Json* v = find(key);
    if (v == nullptr) return std::nullopt;
    Eigen::VectorXd out;
    try {
      out = io::vector_from_json(*v);
    } catch (const StructuralError&) {
      throw ConfigError(at(key), "must be an array of numbers");
    }
    if (!out.allFinite()) throw ConfigError(at(key), "must be finite");
    if (size >= 0 && out.size() != size) {
      throw ConfigError(at(key), "must have " + std::to_string(size) + " entries");
    }
    return out;
  }

  std::optional<Eigen::MatrixXd> matrix(const char* key) const {
    const Json* v = find(key);
    if (v == nullptr) return std::nullopt;
    try {
      return io::matrix_from_json(*v);
    } catch (const StructuralError&) {
      throw ConfigError(at(key), "must be a nonempty array of equal-length rows");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const Json* j_;
  std::string path_;
};

Box box_from(const Section& s, int n) {
  s.only({"lower", "upper"});
  const auto lower = s.vector("lower", n);
  const auto upper = s.vector("upper", n);
  if (!lower || !upper) throw ConfigError(s.path(), "needs lower and upper");
  if ((lower->array() > upper->array()).any()) {
    throw ConfigError(s.path(), "lower must not exceed upper");
  }
  return Box{*lower, *upper};
}

Json box_json(const Box& b) {
  return Json{{"lower", io::to_json(b.lower)}, {"upper", io::to_json(b.upper)}};
}

}  // namespace

bool OutputConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::string policy_name(ReferencePolicy policy) {
  switch (policy) {
    case ReferencePolicy::kConstant: return "constant";
    case ReferencePolicy::kDriftFlow: return "drift_flow";
    case ReferencePolicy::kFixed: return "fixed";
  }
  return "";
}

std::string disturbance_name(DisturbancePolicy policy) {
  switch (policy) {
    case DisturbancePolicy::kZero: return "zero";
    case DisturbancePolicy::kWorstCaseSign: return "worst_case";
    case DisturbancePolicy::kRandom: return "random";
  }
  return "";
}

RunConfig parse_config(const Json& j) {
  RunConfig c;
  const Section root(&j, "");
  root.only({"model", "tracker", "certificate", "constraints", "curve", "planner",
             "reach", "sim", "output"});

  const Section model = root.section("model");
  model.only({"kind", "mass", "length", "gravity", "ripple", "gamma", "m"});
  c.model.kind = model.text("kind", c.model.kind, {"pendulum", "integrator"});
  c.model.mass = model.positive("mass", c.model.mass);
  c.model.length = model.positive("length", c.model.length);
  c.model.gravity = model.nonnegative("gravity", c.model.gravity);
  c.model.ripple = model.nonnegative("ripple", c.model.ripple);
  if (c.model.ripple >= 1) throw ConfigError(model.at("ripple"), "must be below 1");
  c.model.gamma = static_cast<int>(model.integer("gamma", c.model.gamma, 1, 6));
  c.model.m = static_cast<int>(model.integer("m", c.model.m, 1, 6));
  if (c.model.kind == "pendulum") {
    c.model.gamma = 2;
    c.model.m = 1;
  }
  const int n = c.model.gamma * c.model.m;

  const Section tracker = root.section("tracker");
  tracker.only({"natural_frequency", "gains"});
  c.tracker.natural_frequency =
      tracker.positive("natural_frequency", c.tracker.natural_frequency);
  c.tracker.gains = tracker.vector("gains", c.model.gamma);

  const Section cert = root.section("certificate");
  cert.only({"e0", "lipschitz_e", "lipschitz_pi", "lipschitz_psi", "lipschitz_k",
             "k_reference"});
  c.certificate.e0 = cert.nonnegative("e0", c.certificate.e0);
  c.certificate.lipschitz_e = cert.nonnegative("lipschitz_e", c.certificate.lipschitz_e);
  c.certificate.lipschitz_pi = cert.nonnegative("lipschitz_pi", c.certificate.lipschitz_pi);
  c.certificate.lipschitz_psi =
      cert.nonnegative("lipschitz_psi", c.certificate.lipschitz_psi);
  if (cert.find("lipschitz_k")) {
    c.certificate.lipschitz_k = cert.nonnegative("lipschitz_k", 0.0);
  }
  c.certificate.k_reference = cert.nonnegative("k_reference", c.certificate.k_reference);

  const Section cons = root.section("constraints");
  cons.only({"box", "C", "d", "u_max", "W"});
  if (cons.find("box")) {
    if (cons.find("C") || cons.find("d")) {
      throw ConfigError(cons.path(), "give either box or C and d, not both");
    }
    const Box b = box_from(cons.section("box"), n);
    const ConstraintSet cs = ConstraintSet::box(b.lower, b.upper, 1.0);
    c.constraints.C = cs.C;
    c.constraints.d = cs.d;
  } else {
    const auto C = cons.matrix("C");
    const auto d = cons.vector("d");
    if (!C || !d) throw ConfigError(cons.path(), "needs box, or C and d");
    if (C->cols() != n) {
      throw ConfigError(cons.at("C"), "must have " + std::to_string(n) + " columns");
    }
    if (d->size() != C->rows()) {
      throw ConfigError(cons.at("d"), "must have one entry per row of C");
    }
    c.constraints.C = *C;
    c.constraints.d = *d;
  }
  c.constraints.u_max = cons.positive("u_max", c.constraints.u_max);
  if (auto W = cons.vector("W", c.model.m)) {
    if (!(W->array() > 0).all()) throw ConfigError(cons.at("W"), "must be positive");
    c.constraints.W = *W;
  }

  const Section curve = root.section("curve");
  curve.only({"order", "duration", "segments", "reference_policy", "references",
              "boundary_solver"});
  c.curve.order = static_cast<int>(curve.integer("order", c.curve.order, 1, kMaxOrder));
  c.curve.duration = curve.positive("duration", c.curve.duration);
  c.curve.segments = static_cast<int>(curve.integer("segments", c.curve.segments, 1, 200));
  const std::string policy =
      curve.text("reference_policy", "constant", {"constant", "drift_flow", "fixed"});
  c.curve.policy = policy == "drift_flow" ? ReferencePolicy::kDriftFlow
                   : policy == "fixed"    ? ReferencePolicy::kFixed
                                          : ReferencePolicy::kConstant;
  if (c.curve.policy == ReferencePolicy::kFixed) {
    const auto refs = curve.matrix("references");
    if (!refs || refs->rows() != c.curve.segments || refs->cols() != n) {
      throw ConfigError(curve.at("references"),
                        "fixed policy needs one reference state per segment");
    }
    for (int r = 0; r < refs->rows(); ++r) {
      c.curve.fixed_references.push_back(refs->row(r).transpose());
    }
  } else if (curve.find("references")) {
    throw ConfigError(curve.at("references"), "only used by the fixed policy");
  }
  c.curve.solver = curve.text("boundary_solver", "min_energy",
                              {"min_energy", "min_norm"}) == "min_norm"
                       ? BoundarySolver::kMinNorm
                       : BoundarySolver::kMinEnergy;
  if (c.curve.order < 2 * c.model.gamma - 1) {
    throw ConfigError(curve.at("order"), "must be at least 2 gamma - 1 = " +
                                             std::to_string(2 * c.model.gamma - 1));
  }

  const Section planner = root.section("planner");
  planner.only({"bounds", "vertices", "seed", "start", "goal", "edge_mode"});
  if (planner.find("bounds")) c.planner.bounds = box_from(planner.section("bounds"), n);
  c.planner.vertices =
      static_cast<int>(planner.integer("vertices", c.planner.vertices, 0, 100000));
  c.planner.seed = planner.seed("seed", c.planner.seed);
  c.planner.start = planner.vector("start", n);
  c.planner.goal = planner.vector("goal", n);
  c.planner.mode = planner.text("edge_mode", "intersection", {"intersection", "direct"}) ==
                           "direct"
                       ? EdgeMode::kDirect
                       : EdgeMode::kIntersection;

  const Section reach = root.section("reach");
  reach.only({"anchor", "direction", "samples", "thin", "u_max_sweep", "volume_draws"});
  c.reach.anchor = reach.vector("anchor", n);
  c.reach.forward = reach.text("direction", "forward", {"forward", "backward"}) == "forward";
  c.reach.samples = static_cast<int>(reach.integer("samples", c.reach.samples, 0, 1000000));
  c.reach.thin = static_cast<int>(reach.integer("thin", c.reach.thin, 1, 10000));
  if (auto sweep = reach.vector("u_max_sweep")) {
    for (int i = 0; i < sweep->size(); ++i) {
      if (!((*sweep)(i) > 0)) throw ConfigError(reach.at("u_max_sweep"), "must be positive");
      c.reach.u_max_sweep.push_back((*sweep)(i));
    }
  }
  c.reach.volume_draws = reach.integer("volume_draws", c.reach.volume_draws, 0, 100000000);

  const Section sim = root.section("sim");
  sim.only({"dt", "disturbance", "inflation", "seeds", "trajectory"});
  c.sim.dt = sim.nonnegative("dt", c.sim.dt);
  const std::string dist = sim.text("disturbance", "worst_case", {"zero", "worst_case", "random"});
  c.sim.policy = dist == "zero"     ? DisturbancePolicy::kZero
                 : dist == "random" ? DisturbancePolicy::kRandom
                                    : DisturbancePolicy::kWorstCaseSign;
  c.sim.inflation = sim.nonnegative("inflation", c.sim.inflation);
  c.sim.seeds = static_cast<int>(sim.integer("seeds", c.sim.seeds, 1, 100000));
  c.sim.trajectory = sim.text("trajectory", "");
  if (c.sim.dt > 0 && c.sim.dt > c.curve.duration / 200) {
    throw ConfigError(sim.at("dt"), "must not exceed curve.duration / 200");
  }

  const Section output = root.section("output");
  output.only({"directory", "formats", "sample_rate", "timing"});
  c.output.directory = output.text("directory", c.output.directory);
  if (const Json* formats = output.find("formats")) {
    if (!formats->is_array()) throw ConfigError(output.at("formats"), "must be an array");
    c.output.formats.clear();
    for (const auto& f : *formats) {
      if (!f.is_string() || (f != "csv" && f != "json" && f != "svg")) {
        throw ConfigError(output.at("formats"), "entries must be csv, json or svg");
      }
      c.output.formats.push_back(f.get<std::string>());
    }
  }
  c.output.sample_rate = output.positive("sample_rate", c.output.sample_rate);
  c.output.timing = output.boolean("timing", c.output.timing);

  // Semantic checks through the library's own validation.
  try {
    make_constraints(c, c.constraints.u_max).validate(n, c.model.m);
  } catch (const DomainError& e) {
    throw ConfigError("constraints", e.what());
  }
  try {
    make_certificate(c);
  } catch (const DomainError& e) {
    throw ConfigError("certificate", e.what());
  }
  if (c.planner.bounds) {
    const Eigen::MatrixXd& C = c.constraints.C;
    const Box& b = *c.planner.bounds;
    // The box lies in C_X iff its worst corner satisfies every row.
    for (int r = 0; r < C.rows(); ++r) {
      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        worst += C(r, i) > 0 ? C(r, i) * b.upper(i) : C(r, i) * b.lower(i);
      }
      if (worst > c.constraints.d(r) + 1e-9) {
        throw ConfigError(planner.at("bounds"), "must lie inside the state constraints");
      }
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  RunConfig c = parse_config(j);
  c.base_directory = path.parent_path();
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json out;
  out["model"] = {{"kind", c.model.kind}};
  if (c.model.kind == "pendulum") {
    out["model"]["mass"] = c.model.mass;
    out["model"]["length"] = c.model.length;
    out["model"]["gravity"] = c.model.gravity;
    out["model"]["ripple"] = c.model.ripple;
  } else {
    out["model"]["gamma"] = c.model.gamma;
    out["model"]["m"] = c.model.m;
  }
  if (c.tracker.gains) {
    out["tracker"] = {{"gains", io::to_json(*c.tracker.gains)}};
  } else {
    out["tracker"] = {{"natural_frequency", c.tracker.natural_frequency}};
  }
  const TrackingCertificate cert = make_certificate(c);
  out["certificate"] = {{"e0", cert.e0},
                        {"lipschitz_e", cert.lipschitz_e},
                        {"lipschitz_pi", cert.lipschitz_pi},
                        {"lipschitz_psi", cert.lipschitz_psi},
                        {"lipschitz_k", cert.lipschitz_k},
                        {"k_reference", c.certificate.k_reference}};
  out["constraints"] = {{"C", io::to_json(c.constraints.C)},
                        {"d", io::to_json(c.constraints.d)},
                        {"u_max", c.constraints.u_max}};
  if (c.constraints.W.size() > 0) out["constraints"]["W"] = io::to_json(c.constraints.W);
  out["curve"] = {{"order", c.curve.order},
                  {"duration", c.curve.duration},
                  {"segments", c.curve.segments},
                  {"reference_policy", policy_name(c.curve.policy)},
                  {"boundary_solver",
                   c.curve.solver == BoundarySolver::kMinNorm ? "min_norm" : "min_energy"}};
  if (c.curve.policy == ReferencePolicy::kFixed) {
    Json refs = Json::array();
    for (const auto& r : c.curve.fixed_references) refs.push_back(io::to_json(r));
    out["curve"]["references"] = refs;
  }
  const Box bounds = c.planner.bounds.value_or(
      *bounding_box(make_constraints(c, c.constraints.u_max).state_polytope()));
  out["planner"] = {{"bounds", box_json(bounds)},
                    {"vertices", c.planner.vertices},
                    {"seed", c.planner.seed},
                    {"edge_mode",
                     c.planner.mode == EdgeMode::kDirect ? "direct" : "intersection"}};
  if (c.planner.start) out["planner"]["start"] = io::to_json(*c.planner.start);
  if (c.planner.goal) out["planner"]["goal"] = io::to_json(*c.planner.goal);
  out["reach"] = {{"direction", c.reach.forward ? "forward" : "backward"},
                  {"samples", c.reach.samples},
                  {"thin", c.reach.thin},
                  {"u_max_sweep", c.reach.u_max_sweep},
                  {"volume_draws", c.reach.volume_draws}};
  if (c.reach.anchor) out["reach"]["anchor"] = io::to_json(*c.reach.anchor);
  out["sim"] = {{"dt", c.sim.dt > 0 ? c.sim.dt : c.curve.duration / 500},
                {"disturbance", disturbance_name(c.sim.policy)},
                {"inflation", c.sim.inflation},
                {"seeds", c.sim.seeds}};
  if (!c.sim.trajectory.empty()) out["sim"]["trajectory"] = c.sim.trajectory;
  out["output"] = {{"directory", c.output.directory},
                   {"formats", c.output.formats},
                   {"sample_rate", c.output.sample_rate},
                   {"timing", c.output.timing}};
  return out;
}

PlanningModel make_model(const RunConfig& c) {
  if (c.model.kind == "integrator") return integrator_chain(c.model.gamma, c.model.m);
  return pendulum_model(c.model.mass, c.model.length, c.model.gravity, c.model.ripple);
}

PdTracker make_tracker(const RunConfig& c) {
  if (c.tracker.gains) return PdTracker{*c.tracker.gains};
  return PdTracker::critically_damped(c.model.gamma, c.tracker.natural_frequency);
}

TrackingCertificate make_certificate(const RunConfig& c) {
  TrackingCertificate cert = make_tracker(c).certificate(c.certificate.e0,
                                                         c.certificate.lipschitz_e);
  cert.lipschitz_pi = c.certificate.lipschitz_pi;
  cert.lipschitz_psi = c.certificate.lipschitz_psi;
  if (c.certificate.lipschitz_k) cert.lipschitz_k = *c.certificate.lipschitz_k;
  if (c.certificate.k_reference > 0) {
    const double k_ref = c.certificate.k_reference;
    cert.k_ref_norm = [k_ref](const Eigen::VectorXd&) { return k_ref; };
  }
  cert.validate();
  return cert;
}

ConstraintSet make_constraints(const RunConfig& c, double u_max) {
  ConstraintSet cs;
  cs.C = c.constraints.C;
  cs.d = c.constraints.d;
  cs.u_max = u_max;
  cs.W = c.constraints.W;
  return cs;
}

CertificateSynthesizer make_synthesizer(const RunConfig& c, double u_max, int segments) {
  return CertificateSynthesizer(make_model(c), make_certificate(c),
                                make_constraints(c, u_max), c.curve.order,
                                c.curve.duration, segments);
}

ReachSpec make_spec(const RunConfig& c, double u_max, int segments) {
  std::vector<Eigen::VectorXd> refs;
  if (c.curve.policy == ReferencePolicy::kFixed) {
    if (segments != c.curve.segments) {
      throw ConfigError("curve.references", "fixed references need the configured segment count");
    }
    refs = c.curve.fixed_references;
  }
  return ReachSpec(make_synthesizer(c, u_max, segments), c.curve.policy, refs,
                   c.curve.solver);
}

}  // namespace bezreach
