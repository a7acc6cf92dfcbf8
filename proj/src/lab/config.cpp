#include "soullab/lab/config.hpp"

#include "soullab/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace soullab::lab {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& message) {
  raise(ErrorKind::ConfigError, path + ": " + message);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Typed access to one JSON object; every error names the field.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  const std::string& path() const { return path_; }

  const json& at(const std::string& key) const {
    used_.insert(key);
    if (!node_.contains(key)) config_error(join(path_, key), "missing required field");
    return node_.at(key);
  }

  Reader object(const std::string& key) const { return Reader(at(key), join(path_, key)); }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) config_error(join(path_, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) config_error(join(path_, key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) config_error(join(path_, key), "expected an integer");
    return v.get<long long>();
  }
  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const long long x = integer(key);
    if (x < -1000000000LL || x > 1000000000LL) config_error(join(path_, key), "integer out of range");
    return static_cast<int>(x);
  }

  std::string text(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) config_error(join(path_, key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) config_error(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) config_error(join(path_, key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        config_error(fmt::format("{}[{}]", join(path_, key), i), "expected a finite number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : fallback;
  }

  // Unknown keys are typos more often than not.
  void finish() const {
    for (const auto& item : node_.items()) {
      if (!used_.count(item.key())) config_error(join(path_, item.key()), "unknown field");
    }
  }

 private:
  const json& node_;
  std::string path_;
  mutable std::set<std::string> used_;
};

// Runs a library call and re-raises its failure against the config field.
template <class Fn>
auto at_field(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    config_error(path, e.what());
  }
}

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) config_error(path, message);
}

struct SphereBlock {
  SphereProfile profile;
  bool soul_target = false;
  json echo;
};

SphereBlock read_sphere(const Reader& r) {
  const std::string family = r.text("family");
  SphereBlock out{SphereProfile::round(1.0), r.flag("soul_target", false), json::object()};
  out.echo["family"] = family;
  if (family == "round") {
    const double R = r.number("R");
    require(R > 0.0, join(r.path(), "R"), "radius must be positive");
    out.profile = SphereProfile::round(R);
    out.echo["R"] = R;
  } else if (family == "spline") {
    const double length = r.number("length");
    const std::vector<double> knots = r.numbers("knots");
    require(length > 0.0, join(r.path(), "length"), "length must be positive");
    out.profile = at_field(join(r.path(), "knots"), [&] { return SphereProfile::spline(length, knots); });
    out.echo["length"] = length;
    out.echo["knots"] = knots;
  } else {
    config_error(join(r.path(), "family"), "unknown sphere family '" + family + "' (round, spline)");
  }
  out.echo["soul_target"] = out.soul_target;
  r.finish();
  return out;
}

PlaneProfile read_plane(const Reader& r, json& echo) {
  const std::string family = r.text("family");
  const double rho_max = r.number("rho_max");
  require(rho_max > 0.0, join(r.path(), "rho_max"), "must be positive");
  echo = {{"family", family}, {"rho_max", rho_max}};
  PlaneProfile out = PlaneProfile::flat(rho_max);
  if (family != "flat") {
    const double R = r.number("R");
    require(R > 0.0, join(r.path(), "R"), "radius must be positive");
    echo["R"] = R;
    out = at_field(r.path(), [&] {
      if (family == "cap") return PlaneProfile::cap(R, rho_max);
      if (family == "tanh") return PlaneProfile::tanh(R, rho_max);
      if (family == "sinh") return PlaneProfile::sinh(R, rho_max);
      config_error(join(r.path(), "family"), "unknown plane family '" + family + "' (flat, cap, tanh, sinh)");
    });
  }
  r.finish();
  return out;
}

NumericConfig read_numeric(const Reader& r) {
  NumericConfig n;
  const std::string& p = r.path();
  n.fd_step = r.number("fd_step", n.fd_step);
  require(n.fd_step > 0.0 && n.fd_step <= 0.05, join(p, "fd_step"), "must lie in (0, 0.05]");
  n.soul_grid_nodes = r.integer("soul_grid_nodes", n.soul_grid_nodes);
  require(n.soul_grid_nodes >= 3 && n.soul_grid_nodes % 2 == 1, join(p, "soul_grid_nodes"), "must be odd and >= 3");
  n.oracle_points = r.integer("oracle_points", n.oracle_points);
  require(n.oracle_points >= 100, join(p, "oracle_points"), "sample counts must be >= 100");
  n.nonneg_samples = r.integer("nonneg_samples", n.nonneg_samples);
  require(n.nonneg_samples >= 100, join(p, "nonneg_samples"), "sample counts must be >= 100");
  if (r.has("seed")) {
    const json& v = r.at("seed");
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), join(p, "seed"),
            "expected a nonnegative integer");
    n.seed = v.get<std::uint64_t>();
  }
  n.rigidity_points = r.integer("rigidity_points", n.rigidity_points);
  require(n.rigidity_points >= 1, join(p, "rigidity_points"), "must be >= 1");
  n.directions = r.integer("directions", n.directions);
  require(n.directions >= 1, join(p, "directions"), "must be >= 1");
  n.geodesic_step = r.number("geodesic_step", n.geodesic_step);
  require(n.geodesic_step > 0.0, join(p, "geodesic_step"), "must be positive");
  n.geodesic_steps_per_unit = r.integer("geodesic_steps_per_unit", n.geodesic_steps_per_unit);
  require(n.geodesic_steps_per_unit >= 10, join(p, "geodesic_steps_per_unit"), "must be >= 10");
  n.bundle_points = r.integer("bundle_points", n.bundle_points);
  require(n.bundle_points >= 1, join(p, "bundle_points"), "must be >= 1");
  n.bundle_radii = r.numbers("bundle_radii", n.bundle_radii);
  require(!n.bundle_radii.empty(), join(p, "bundle_radii"), "needs at least one radius");
  for (std::size_t i = 0; i < n.bundle_radii.size(); ++i) {
    require(n.bundle_radii[i] > 0.0, fmt::format("{}[{}]", join(p, "bundle_radii"), i), "must be positive");
  }
  n.distance_radii = r.numbers("distance_radii", n.distance_radii);
  require(n.distance_radii.size() >= 2, join(p, "distance_radii"), "needs at least two radii");
  n.distance_points = r.integer("distance_points", n.distance_points);
  require(n.distance_points >= 1, join(p, "distance_points"), "must be >= 1");
  n.probe_samples = r.integer("probe_samples", n.probe_samples);
  require(n.probe_samples >= 100, join(p, "probe_samples"), "sample counts must be >= 100");
  n.round_nodes = r.integer("round_nodes", n.round_nodes);
  require(n.round_nodes >= 9, join(p, "round_nodes"), "must be >= 9");
  n.quadrature_panels = r.integer("quadrature_panels", n.quadrature_panels);
  require(n.quadrature_panels >= 1, join(p, "quadrature_panels"), "must be >= 1");
  n.azimuth_nodes = r.integer("azimuth_nodes", n.azimuth_nodes);
  require(n.azimuth_nodes >= 4, join(p, "azimuth_nodes"), "must be >= 4");
  n.build_points = r.integer("build_points", n.build_points);
  require(n.build_points >= 1, join(p, "build_points"), "must be >= 1");
  r.finish();
  return n;
}

Tolerances read_tolerances(const Reader& r) {
  Tolerances t;
  t.nonneg_tol = r.number("nonneg_tol", t.nonneg_tol);
  t.equality_tol = r.number("equality_tol", t.equality_tol);
  t.oracle_tol = r.number("oracle_tol", t.oracle_tol);
  require(t.nonneg_tol > 0.0, join(r.path(), "nonneg_tol"), "tolerances must be > 0");
  require(t.equality_tol > 0.0, join(r.path(), "equality_tol"), "tolerances must be > 0");
  require(t.oracle_tol > 0.0, join(r.path(), "oracle_tol"), "tolerances must be > 0");
  r.finish();
  return t;
}

OutputConfig read_output(const Reader& r) {
  OutputConfig o;
  o.report = r.text("report", o.report);
  o.csv_dir = r.text("csv_dir", o.csv_dir);
  require(!o.report.empty(), join(r.path(), "report"), "must not be empty");
  r.finish();
  return o;
}

// Distance spheres need ρ0 inside the plane box and a real model radius.
void check_distance_radii(const LabConfig& c) {
  const double h = c.numeric.fd_step;
  const double half = c.spec.plane.rho_max() / std::sqrt(2.0);
  const double C2 = c.spec.killing.C2;
  for (std::size_t i = 0; i < c.numeric.distance_radii.size(); ++i) {
    const std::string path = fmt::format("numeric.distance_radii[{}]", i);
    const double rho0 = c.numeric.distance_radii[i];
    require(rho0 >= 10.0 * h && rho0 <= half - 10.0 * h, path,
            fmt::format("radius must lie in [{:.6g}, {:.6g}] (plane chart box)", 10.0 * h, half - 10.0 * h));
    const double b = c.spec.plane.b(rho0);
    require(1.0 / (b * b) + C2 * C2 - 1.0 > 0.0, path,
            fmt::format("no circle-bundle model: 1/b^2 + C2^2 - 1 = {:.6g} <= 0", 1.0 / (b * b) + C2 * C2 - 1.0));
  }
}

}  // namespace

LabConfig parse_config(const json& doc) {
  const Reader root(doc, "");
  LabConfig c;
  c.name = root.text("name", "unnamed");

  const Reader spec = root.object("spec");
  const double C1 = spec.number("C1");
  const double C2 = spec.number("C2");
  SphereBlock sphere = read_sphere(spec.object("sphere"));
  json plane_echo;
  const PlaneProfile plane = read_plane(spec.object("plane"), plane_echo);
  spec.finish();

  at_field("spec.sphere", [&] { sphere.profile.validate(true); });
  at_field("spec.plane", [&] { plane.validate(true); });
  SphereProfile g0 = sphere.profile;
  if (sphere.soul_target) g0 = at_field("spec.C1", [&] { return prescribe_soul_profile(sphere.profile, C1); });
  c.spec = QuotientSpec{g0, plane, {C1, C2}};
  at_field("spec", [&] { c.spec.validate(); });

  c.numeric = root.has("numeric") ? read_numeric(root.object("numeric")) : NumericConfig{};
  c.tolerances = root.has("tolerances") ? read_tolerances(root.object("tolerances")) : Tolerances{};
  c.output = root.has("output") ? read_output(root.object("output")) : OutputConfig{};
  root.finish();
  check_distance_radii(c);

  const NumericConfig& n = c.numeric;
  c.echo = {
      {"name", c.name},
      {"spec", {{"sphere", sphere.echo}, {"plane", plane_echo}, {"C1", C1}, {"C2", C2}}},
      {"numeric",
       {{"fd_step", n.fd_step},
        {"soul_grid_nodes", n.soul_grid_nodes},
        {"oracle_points", n.oracle_points},
        {"nonneg_samples", n.nonneg_samples},
        {"seed", n.seed},
        {"rigidity_points", n.rigidity_points},
        {"directions", n.directions},
        {"geodesic_step", n.geodesic_step},
        {"geodesic_steps_per_unit", n.geodesic_steps_per_unit},
        {"bundle_points", n.bundle_points},
        {"bundle_radii", n.bundle_radii},
        {"distance_radii", n.distance_radii},
        {"distance_points", n.distance_points},
        {"probe_samples", n.probe_samples},
        {"round_nodes", n.round_nodes},
        {"quadrature_panels", n.quadrature_panels},
        {"azimuth_nodes", n.azimuth_nodes},
        {"build_points", n.build_points}}},
      {"tolerances",
       {{"nonneg_tol", c.tolerances.nonneg_tol},
        {"equality_tol", c.tolerances.equality_tol},
        {"oracle_tol", c.tolerances.oracle_tol}}},
      {"output", {{"report", c.output.report}, {"csv_dir", c.output.csv_dir}}},
  };
  return c;
}

LabConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::IOError, "cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    raise(ErrorKind::ConfigError, path.string() + ": not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::string config_hash(const json& echo) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : echo.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace soullab::lab
