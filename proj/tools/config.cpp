#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace gibbslab::tools {

namespace {

enum class Type { number, integer, boolean, string, int_list, num_list, object };

struct Field;
using Schema = std::map<std::string, Field>;

struct Field {
  Type type = Type::number;
  std::vector<std::string> choices;
  const Schema* sub = nullptr;
  bool required = false;
};

Field num() { return {Type::number}; }
Field integer() { return {Type::integer}; }
Field boolean() { return {Type::boolean}; }
Field text(std::vector<std::string> choices = {}) { return {Type::string, std::move(choices)}; }
Field ints() { return {Type::int_list}; }
Field nums() { return {Type::num_list}; }
Field object(const Schema& s) { return {Type::object, {}, &s}; }

const Schema lattice_schema = {{"dim", integer()}, {"n", integer()}, {"oversample", integer()}};
const Schema potential_schema = {
    {"type", text({"cosine", "soft_sphere"})}, {"height", num()}, {"width", num()}};
const Schema shift_schema = {{"N0", num()}, {"kappa", num()}, {"s", num()}};
const Schema model_schema = {
    {"type", text({"nls", "kdv", "zakharov", "gp"})},
    {"p", integer()},
    {"lambda", num()},
    {"lambda_fraction", num()},
    {"B", num()},
    {"kappa", num()},
    {"rho", num()},
    {"form", text({"renormalized", "mean_subtracted"})},
    {"mass_shift", num()},
    {"critical_shift", object(shift_schema)},
    {"potential", object(potential_schema)},
};
const Schema domain_schema = {
    {"type", text({"unrestricted", "mass_ball", "mass_and_sobolev", "decay"})},
    {"N", num()}, {"kappa", num()}, {"s", num()}, {"K1", num()}, {"K2", num()}, {"eps", num()},
};
const Schema reference_schema = {{"type", text({"loop", "massive", "real_loop"})}, {"rho", num()}};
const Schema sampler_schema = {
    {"steps", integer()}, {"burn_in", integer()}, {"thin", integer()}, {"beta", num()}, {"chains", integer()},
};
const Schema flow_schema = {
    {"dt", num()},
    {"T", num()},
    {"scheme", text({"strang", "lie"})},
    {"nonlinear", text({"automatic", "rotation", "midpoint"})},
    {"stride", integer()},
};
const Schema archive_schema = {{"write", boolean()}, {"file", text()}};
const Schema initial_schema = {{"type", text({"smooth", "reference"})}, {"decay", num()}, {"amplitude", num()}};
const Schema checks_schema = {
    {"mass_tol", num()}, {"energy_tol", num()}, {"order", boolean()}, {"order_tol", num()},
};
const Schema expect_schema = {{"acceptance_min", num()}};
const Schema lsi_schema = {
    {"mode", text({"lsi", "poincare"})}, {"metric_s", num()}, {"kmax", integer()}, {"alpha", num()},
};
const Schema invariance_schema = {
    {"kmax", integer()},
    {"energy_tol", num()},
    {"ensemble", text({"gibbs", "gaussian"})},
    {"expect", text({"invariant", "broken"})},
};
const Schema convexity_schema = {{"pairs", integer()}, {"decay", num()}, {"tol", num()}};
const Schema critical_schema = {{"lo", num()}, {"hi", num()}, {"iterations", integer()}, {"seeds", ints()}};
const Schema normalizability_schema = {
    {"p", integer()},        {"lambda", num()},        {"N", num()},
    {"n_list", ints()},      {"z_samples", integer()}, {"random_starts", integer()},
    {"max_iter", integer()}, {"critical", object(critical_schema)}, {"partition", boolean()},
};
const Schema transport_schema = {
    {"samples", integer()},   {"coupling_n_list", ints()}, {"tolerance", num()},
    {"tail_s", num()},        {"tail_n_list", ints()},     {"entropy_n_list", ints()},
    {"coupling_cutoff", integer()}, {"entropy_samples", integer()},
};
const Schema gp_schema = {
    {"T", num()},        {"probe_T", num()},  {"panels", integer()},
    {"nodes", integer()}, {"max_iter", integer()}, {"tol", num()},
    {"levels", integer()},
};
const Schema decay_grid_schema = {
    {"K1", nums()}, {"K2", nums()}, {"s", num()}, {"eps", num()}, {"samples", integer()},
};
const Schema tail_schema = {
    {"s", num()},
    {"kappas", nums()},
    {"source", text({"gibbs", "reference"})},
    {"samples", integer()},
    {"decay", object(decay_grid_schema)},
};

const std::map<std::string, std::vector<std::pair<std::string, Field>>> kind_blocks = {
    {"sample",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"domain", object(domain_schema)},
      {"reference", object(reference_schema)},
      {"sampler", object(sampler_schema)},
      {"archive", object(archive_schema)},
      {"expect", object(expect_schema)}}},
    {"flow",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"flow", object(flow_schema)},
      {"initial", object(initial_schema)},
      {"checks", object(checks_schema)}}},
    {"invariance",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"domain", object(domain_schema)},
      {"reference", object(reference_schema)},
      {"sampler", object(sampler_schema)},
      {"flow", object(flow_schema)},
      {"invariance", object(invariance_schema)}}},
    {"lsi",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"domain", object(domain_schema)},
      {"reference", object(reference_schema)},
      {"sampler", object(sampler_schema)},
      {"lsi", object(lsi_schema)},
      {"archive", object(archive_schema)}}},
    {"convexity",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"domain", object(domain_schema)},
      {"convexity", object(convexity_schema)}}},
    {"normalizability", {{"normalizability", object(normalizability_schema)}}},
    {"transport",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"domain", object(domain_schema)},
      {"reference", object(reference_schema)},
      {"transport", object(transport_schema)}}},
    {"gp-solve",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"domain", object(domain_schema)},
      {"reference", object(reference_schema)},
      {"gp_solve", object(gp_schema)}}},
    {"zakharov",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"reference", object(reference_schema)},
      {"sampler", object(sampler_schema)},
      {"flow", object(flow_schema)},
      {"checks", object(checks_schema)},
      {"archive", object(archive_schema)}}},
    {"tail",
     {{"lattice", object(lattice_schema)},
      {"model", object(model_schema)},
      {"domain", object(domain_schema)},
      {"reference", object(reference_schema)},
      {"sampler", object(sampler_schema)},
      {"tail", object(tail_schema)}}},
};

const char* type_name(Type t) {
  switch (t) {
    case Type::number: return "number";
    case Type::integer: return "integer";
    case Type::boolean: return "boolean";
    case Type::string: return "string";
    case Type::int_list: return "array of integers";
    case Type::num_list: return "array of numbers";
    case Type::object: return "object";
  }
  return "?";
}

bool matches(const json& v, Type t) {
  switch (t) {
    case Type::number: return v.is_number();
    case Type::integer: return v.is_number_integer();
    case Type::boolean: return v.is_boolean();
    case Type::string: return v.is_string();
    case Type::int_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); });
    case Type::num_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
    case Type::object: return v.is_object();
  }
  return false;
}

void check(const json& obj, const Schema& schema, const std::string& path, std::vector<std::string>& errs) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    std::string where = path.empty() ? it.key() : path + "." + it.key();
    auto f = schema.find(it.key());
    if (f == schema.end()) {
      errs.push_back("unknown key '" + where + "'");
      continue;
    }
    const Field& spec = f->second;
    if (!matches(it.value(), spec.type)) {
      errs.push_back("'" + where + "' must be " + type_name(spec.type));
      continue;
    }
    if (!spec.choices.empty()) {
      auto s = it.value().get<std::string>();
      if (std::find(spec.choices.begin(), spec.choices.end(), s) == spec.choices.end()) {
        std::string opts;
        for (const auto& c : spec.choices) opts += (opts.empty() ? "" : ", ") + c;
        errs.push_back("'" + where + "' must be one of {" + opts + "}, got '" + s + "'");
      }
    }
    if (spec.type == Type::object) check(it.value(), *spec.sub, where, errs);
  }
  for (const auto& [k, spec] : schema)
    if (spec.required && !obj.contains(k)) errs.push_back("missing key '" + (path.empty() ? k : path + "." + k) + "'");
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError("'" + path + "' " + what);
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& [name, blocks] : kind_blocks) k.push_back(name);
    return k;
  }();
  return kinds;
}

void validate_config(const json& doc) {
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw SchemaError("missing string key 'kind'");
  std::string kind = doc["kind"].get<std::string>();
  auto kb = kind_blocks.find(kind);
  if (kb == kind_blocks.end()) {
    std::string opts;
    for (const auto& k : experiment_kinds()) opts += (opts.empty() ? "" : ", ") + k;
    throw SchemaError("unknown experiment kind '" + kind + "' (expected one of {" + opts + "})");
  }
  Schema top = {{"kind", text()}, {"name", text()}, {"seed", integer()}, {"output", text()}};
  top["output"].required = true;
  for (const auto& [k, f] : kb->second) top[k] = f;
  std::vector<std::string> errs;
  check(doc, top, "", errs);
  if (doc.contains("seed") && doc["seed"].is_number_integer() && doc["seed"].get<long long>() < 0)
    errs.push_back("'seed' must be non-negative");
  if (doc.contains("model") && doc["model"].is_object() && doc["model"].contains("lambda") &&
      doc["model"].contains("lambda_fraction"))
    errs.push_back("'model.lambda' and 'model.lambda_fraction' are mutually exclusive");
  if (!errs.empty()) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& e : errs) os << "\n  " << e;
    throw SchemaError(os.str());
  }
}

bool Block::has(const std::string& key) const { return j_ && j_->contains(key); }

double Block::number(const std::string& key, double fallback) const {
  return has(key) ? (*j_)[key].get<double>() : fallback;
}

int Block::integer(const std::string& key, int fallback) const {
  return has(key) ? (*j_)[key].get<int>() : fallback;
}

std::uint64_t Block::seed(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? (*j_)[key].get<std::uint64_t>() : fallback;
}

bool Block::flag(const std::string& key, bool fallback) const {
  return has(key) ? (*j_)[key].get<bool>() : fallback;
}

std::string Block::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? (*j_)[key].get<std::string>() : fallback;
}

std::vector<int> Block::integers(const std::string& key, std::vector<int> fallback) const {
  return has(key) ? (*j_)[key].get<std::vector<int>>() : fallback;
}

std::vector<double> Block::numbers(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? (*j_)[key].get<std::vector<double>>() : fallback;
}

Block Block::block(const std::string& key) const {
  std::string p = path_.empty() ? key : path_ + "." + key;
  return has(key) ? Block(&(*j_)[key], p) : Block(nullptr, p);
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base) {
  validate_config(doc);
  ExperimentConfig c;
  c.raw = doc;
  c.kind = doc["kind"].get<std::string>();
  c.name = doc.value("name", c.kind);
  c.seed = doc.value("seed", std::uint64_t(1));
  std::filesystem::path out = doc["output"].get<std::string>();
  c.output = out.is_absolute() ? out : base / out;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

Lattice make_lattice(const Block& b, int default_dim) {
  int dim = b.integer("dim", default_dim), n = b.integer("n", 16), q = b.integer("oversample", 3);
  if (dim != 1 && dim != 2) fail("lattice.dim", "must be 1 or 2");
  if (n < 1) fail("lattice.n", "must be >= 1");
  if (q < 2) fail("lattice.oversample", "must be >= 2");
  return Lattice(dim, n, q);
}

ModelSpec make_model(const Block& b, const Lattice& lat, double N) {
  constexpr double pi = std::numbers::pi;
  std::string type = b.text("type", "nls");
  ModelSpec m;
  double lambda = b.number("lambda", 0.0);
  if (type == "nls") {
    m = ModelSpec::nls(b.integer("p", 4), lambda, lat.dim());
  } else if (type == "kdv") {
    m = ModelSpec::kdv(lambda);
  } else if (type == "zakharov") {
    m = ModelSpec::zakharov(b.number("B", 1.0));
  } else {
    FourierField V;
    Block pot = b.block("potential");
    std::string pt = pot.text("type", "cosine");
    if (lat.dim() != 2) fail("lattice.dim", "must be 2 for the GP model");
    if (pt == "cosine") V = cosine_potential(lat);
    else V = soft_sphere_potential(lat, pot.number("height", 1.0), pot.number("width", 1.0));
    GpForm form = b.text("form", "renormalized") == "renormalized" ? GpForm::renormalized : GpForm::mean_subtracted;
    m = ModelSpec::gp(V, lambda, b.number("kappa", 1.0), b.number("rho", 1.0), b.number("B", 0.0), form);
  }
  if (b.has("lambda_fraction")) {
    // fraction of the closed-form convexity threshold at mass N
    double f = b.number("lambda_fraction", 0.5);
    if (m.kind == ModelKind::nls && m.p == 4 && m.dim == 1) m.lambda = f * 3.0 / (14.0 * pi * pi * N);
    else if (m.kind == ModelKind::kdv) m.lambda = f * 3.0 / (pi * pi * std::sqrt(N));
    else fail("model.lambda_fraction", "is defined for the cubic NLS and KdV models");
  }
  if (b.has("mass_shift")) m.mass_shift = b.number("mass_shift", 0.0);
  if (b.has("critical_shift")) {
    Block cs = b.block("critical_shift");
    m.mass_shift = critical_mass_shift(cs.number("N0", 1.0), cs.number("kappa", 1.0), cs.number("s", 0.3));
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
  return m;
}

PhaseDomain make_domain(const Block& b) {
  std::string t = b.text("type", "unrestricted");
  try {
    if (t == "mass_ball") return PhaseDomain::mass_ball(b.number("N", 1.0));
    if (t == "mass_and_sobolev")
      return PhaseDomain::mass_and_sobolev(b.number("N", 1.0), b.number("kappa", 1.0), b.number("s", 0.3));
    if (t == "decay")
      return PhaseDomain::decay(b.number("K1", 8.0), b.number("K2", 6.0), b.number("s", 0.2), b.number("eps", 0.1));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("domain: ") + e.what());
  }
  return PhaseDomain::unrestricted();
}

GaussianReference make_reference(const Block& b, const ModelSpec& model, const Lattice& lat) {
  std::string fallback = model.real_field() ? "real_loop"
                         : (model.kind == ModelKind::gp && model.form == GpForm::renormalized) ? "massive"
                                                                                               : "loop";
  std::string t = b.text("type", fallback);
  if (t == "massive") {
    double rho = b.number("rho", model.kind == ModelKind::gp ? model.rho : 1.0);
    if (!(rho > 0)) fail("reference.rho", "must be positive");
    return GaussianReference::massive(lat, rho);
  }
  if (t == "real_loop") return GaussianReference::real_loop(lat);
  return GaussianReference::loop(lat);
}

ChainConfig make_chain(const Block& b, std::uint64_t seed) {
  ChainConfig c;
  c.steps = b.integer("steps", 20000);
  c.burn_in = b.integer("burn_in", 2000);
  c.thin = b.integer("thin", 10);
  c.beta = b.number("beta", 0.0);
  c.seed = seed;
  if (c.steps < 1 || c.thin < 1 || c.burn_in < 0) fail("sampler", "needs steps >= 1, thin >= 1, burn_in >= 0");
  if (c.beta < 0 || c.beta > 1) fail("sampler.beta", "must lie in [0, 1] (0 tunes automatically)");
  return c;
}

FlowConfig make_flow(const Block& b) {
  FlowConfig f;
  f.dt = b.number("dt", 1e-3);
  f.T = b.number("T", 1.0);
  f.scheme = b.text("scheme", "strang") == "lie" ? Scheme::lie : Scheme::strang;
  std::string nl = b.text("nonlinear", "automatic");
  f.nonlinear = nl == "rotation" ? NonlinearStep::rotation
                : nl == "midpoint" ? NonlinearStep::midpoint
                                   : NonlinearStep::automatic;
  f.stride = b.integer("stride", 10);
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("flow: ") + e.what());
  }
  return f;
}

}  // namespace gibbslab::tools
