#include "soullab/bundle.hpp"
#include "soullab/error.hpp"
#include "soullab/lab/report.hpp"
#include "soullab/parallel.hpp"
#include "soullab/rigidity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace soullab::lab {

namespace {

using nlohmann::ordered_json;
using std::numbers::pi;

// Fixed limits of the checks that have no config knob.
constexpr double kIntegralTol = 1e-5;
constexpr double kGeodesicTol = 1e-6;
constexpr double kSymmetryTol = 1e-6;
constexpr double kBundleRelTol = 1e-6;
constexpr double kOrthogonalityTol = 1e-10;
constexpr double kCoefficientTol = 1e-8;
constexpr double kDictionaryTol = 1e-12;
constexpr double kParallelTol = 1e-8;
constexpr double kModelTol = 1e-6;
constexpr double kSoulExtractTol = 1e-10;
constexpr double kProbeFloor = -1e-5;
constexpr double kProbeCeiling = 0.05;
constexpr double kNonvacuousLhs = 1e-3;
constexpr double kFitTol = 1e-3;
constexpr double kRayleighTol = 1e-5;
constexpr double kAmplitudeTol = 1e-3;
constexpr double kOffsetTol = 1e-3;
constexpr double kDriftTol = 1e-4;
constexpr double kTraceTol = 1e-4;
constexpr double kZeroField = 1e-9;

constexpr SoulRegion kRegions[] = {SoulRegion::Polar, SoulRegion::North, SoulRegion::South};

ordered_json to_json(const Vec& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

ordered_json to_json(const CurvatureReport& r) {
  return {{"samples", r.sample_count},
          {"min", r.min_K},
          {"max", r.max_K},
          {"argmin", {{"point", to_json(r.argmin.point)}, {"u", to_json(r.argmin.u)}, {"v", to_json(r.argmin.v)}}},
          {"argmax", {{"point", to_json(r.argmax.point)}}}};
}

ordered_json to_json(const AtlasAuditReport& r) {
  ordered_json out = to_json(r.merged);
  ordered_json regions = ordered_json::object();
  for (std::size_t i = 0; i < 3; ++i) regions[to_string(kRegions[i])] = to_json(r.per_region[i]);
  out["regions"] = regions;
  return out;
}

std::vector<double> interior(double length, int n) { return interior_grid(length, n); }

// Points (sphere coordinates, θ) inside the scanned part of a region: the
// band t ∈ [L/4, 3L/4] or the pole disk of radius L/4.
std::vector<Vec> region_points(SoulRegion region, double L, int count) {
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) {
    const double u = (i + 0.5) / count;
    const double theta = 2.0 * pi * std::fmod(0.618034 * i, 1.0);
    if (region == SoulRegion::Polar) {
      pts.push_back(make_vec({L * (0.25 + 0.5 * u), 2.0 * pi * std::fmod(0.414214 * i, 1.0), theta}));
    } else {
      const double rad = 0.25 * L * u, ang = 2.0 * pi * std::fmod(0.732051 * i, 1.0);
      pts.push_back(make_vec({rad * std::cos(ang), rad * std::sin(ang), theta}));
    }
  }
  return pts;
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// Uniform point of a chart box keeping `margin` from non-periodic edges.
Vec box_point(const MetricChart& chart, double margin, std::uint64_t& state) {
  Vec p(chart.dim());
  for (int d = 0; d < chart.dim(); ++d) {
    const Interval& iv = chart.box()[static_cast<std::size_t>(d)];
    const double m = iv.periodic ? 0.0 : margin;
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    p[d] = iv.lo + m + (iv.width() - 2.0 * m) * u;
  }
  return p;
}

Section nonneg_section(const LabConfig& c, int threads) {
  Section s{"nonneg"};
  const SoulAtlas atlas(c.spec, c.numeric.fd_step);
  const AtlasAuditReport r = nonneg_audit_atlas(atlas, static_cast<std::size_t>(c.numeric.nonneg_samples),
                                                c.numeric.seed, c.tolerances.nonneg_tol, threads);
  s.checks.push_back(at_least("min_sectional_curvature", r.merged.min_K, -c.tolerances.nonneg_tol));
  s.checks.push_back(at_least("sample_count", static_cast<double>(r.merged.sample_count), 100.0));
  s.details["scan"] = to_json(r);
  return s;
}

Section oracle_section(const LabConfig& c, int threads) {
  Section s{"oracle"};
  const NumericConfig& n = c.numeric;
  const auto count = static_cast<std::size_t>(n.oracle_points);

  double worst_projection = 0.0, worst_symmetry = 0.0;
  for (SoulRegion region : kRegions) {
    const QuotientChart q = build_quotient(c.spec, region, n.fd_step);
    std::uint64_t state = n.seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(region) + 1));
    std::vector<Vec> loose, inner;
    for (std::size_t i = 0; i < count; ++i) loose.push_back(box_point(q.chart, 1e-3, state));
    for (std::size_t i = 0; i < count; ++i) inner.push_back(box_point(q.chart, 6.0 * n.fd_step, state));
    std::vector<double> projection(count), symmetry(count);
    parallel_for(count, threads, [&](std::size_t i) {
      projection[i] = max_abs(q.chart.metric(loose[i]) - quotient_projection_oracle(c.spec, region, loose[i]));
      symmetry[i] = riemann(q.chart, inner[i]).symmetry_residual();
    });
    worst_projection = std::max(worst_projection, *std::max_element(projection.begin(), projection.end()));
    worst_symmetry = std::max(worst_symmetry, *std::max_element(symmetry.begin(), symmetry.end()));
  }
  s.checks.push_back(at_most("projection_oracle", worst_projection, c.tolerances.oracle_tol));
  s.checks.push_back(at_most("riemann_symmetry", worst_symmetry, kSymmetryTol));

  const SoulAtlas atlas(c.spec, n.fd_step);
  const double L = atlas.length();
  const SoulData data = soul_data(atlas, simpson_grid(L, n.soul_grid_nodes), threads, c.hessian());
  s.checks.push_back(at_most("integral_F", std::abs(integral_f(data)), kIntegralTol));

  double worst_normal = 0.0;
  for (int i = 0; i <= 10; ++i) worst_normal = std::max(worst_normal, atlas.normal_christoffel(L * i / 10.0, 0.3));
  s.checks.push_back(at_most("normal_christoffel", worst_normal, kGeodesicTol));

  s.details["points_per_region"] = n.oracle_points;
  s.details["soul_grid_nodes"] = n.soul_grid_nodes;
  s.details["F_sign_convention"] = "F = R(X,Y,W,V) with X,Y the g_soul-unit (d_t, d_s) and W,V the unit (d_x, d_y) of the plane";
  std::ostringstream csv;
  data.write_csv(csv);
  s.csv.push_back({"soul_data.csv", csv.str()});
  return s;
}

Section bundle_section(const LabConfig& c, int threads) {
  Section s{"bundle"};
  const NumericConfig& n = c.numeric;
  const SoulAtlas atlas(c.spec, n.fd_step);
  const double L = atlas.length();
  const double chat = c.spec.killing.C1 * c.spec.killing.C2;
  const SphereProfile soul = soul_profile(c.spec);

  std::vector<DistanceSphereMatch> matches;
  for (double rho0 : n.distance_radii) matches.push_back(match_distance_sphere(c.spec, rho0));
  const SphereProfile g1 = matches.front().model.g1;

  // fiber length and horizontal coefficient against the rescaled product
  const std::vector<double> grid = interior(L, n.bundle_points);
  const double s_angle = 0.3;
  double worst_rel = 0.0, worst_orth = 0.0, worst_coef = 0.0, coef_spread = 0.0;
  std::vector<double> coef_first(grid.size());
  for (std::size_t k = 0; k < n.bundle_radii.size(); ++k) {
    const ProductBundleData data{g1, n.bundle_radii[k], chat};
    data.validate();
    const auto rows = bundle_oracle_rows(data, grid, s_angle, threads);
    for (const BundleOracleRow& row : rows) {
      worst_rel = std::max(worst_rel, std::abs(row.oracle - row.closed_form) / row.closed_form);
      worst_orth = std::max(worst_orth, std::abs(row.orthogonality));
    }
    const MetricChart h = bundle_metric_numeric(data, SoulRegion::Polar, n.fd_step);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Mat m = h.metric(make_vec({grid[i], s_angle, 0.0}));
      const double coef = -chat * m(2, 1) / m(2, 2);
      const double fs = soul.f(grid[i]);
      worst_coef = std::max(worst_coef, std::abs(coef - chat * chat * fs * fs));
      if (k == 0) coef_first[i] = coef;
      coef_spread = std::max(coef_spread, std::abs(coef - coef_first[i]));
    }
    std::ostringstream csv;
    write_bundle_csv(csv, rows);
    s.csv.push_back({fmt::format("bundle_oracle_r{}.csv", k), csv.str()});
  }
  s.checks.push_back(at_most("fiber_length_relative", worst_rel, kBundleRelTol));
  s.checks.push_back(at_most("orthogonality", worst_orth, kOrthogonalityTol));
  s.checks.push_back(at_most("horizontal_coefficient", worst_coef, kCoefficientTol));
  s.checks.push_back(at_most("coefficient_r_spread", coef_spread, kOrthogonalityTol));

  // submersion form ↔ product form dictionary
  const double X_scale = chat != 0.0 ? chat : 1.0;
  const Vec rot = make_vec({0.0, 1.0});
  double worst_len = 0.0, worst_angle = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double a = 2.0 * pi * i / 21.0;
    const MatchedParameters mp = match_parameters(a, X_scale);
    for (int j = 0; j < 20; ++j) {
      const double x2 = std::min(1.0, a * a) * j / 20.0;
      const double xhat2 = 4.0 * pi * pi / std::pow(a, 4) * x2;
      worst_len = std::max(worst_len, std::abs(fiber_length_submersion(a, x2) - fiber_length_product(mp.r, xhat2)));
      if (xhat2 < 1.0) {
        const Vec sub = horizontal_vector(horizontal_submersion(a, x2), X_scale, rot);
        const Vec prod = horizontal_vector(horizontal_product(xhat2), mp.Xhat_scale, rot);
        worst_angle = std::max(worst_angle, line_angle(sub, prod));
      }
    }
  }
  s.checks.push_back(at_most("dictionary_fiber_length", worst_len, kDictionaryTol));
  s.checks.push_back(at_most("dictionary_plane_angle", worst_angle, kParallelTol));

  // distance spheres against their circle-bundle models
  std::vector<BundleCharts> induced;
  double worst_model = 0.0, worst_r = 0.0, worst_killing = 0.0;
  ordered_json radii = ordered_json::array();
  for (const DistanceSphereMatch& m : matches) {
    induced.push_back(distance_sphere_charts(atlas, m.rho0));
    const BundleCharts model = bundle_charts(m.model, n.fd_step);
    worst_r = std::max(worst_r, std::abs(m.r_measured - m.r_closed_form));
    for (std::size_t r = 0; r < 3; ++r) {
      for (const Vec& p : region_points(kRegions[r], L, n.distance_points)) {
        worst_model = std::max(worst_model, max_abs(induced.back()[r].metric(p) - model[r].metric(p)));
        worst_killing = std::max(worst_killing, fiber_killing_angle(induced.back()[r], kRegions[r], soul, chat, p));
      }
    }
    radii.push_back({{"rho0", m.rho0}, {"r_measured", m.r_measured}, {"r_closed_form", m.r_closed_form}});
  }
  s.checks.push_back(at_most("model_radius", worst_r, kModelTol));
  s.checks.push_back(at_most("induced_vs_model", worst_model, kModelTol));
  s.checks.push_back(at_most("fibers_are_killing_orbits", worst_killing, kParallelTol));

  double worst_base = 0.0, worst_connection = 0.0, worst_soul = 0.0;
  for (std::size_t k = 1; k < induced.size(); ++k) {
    for (std::size_t r = 0; r < 3; ++r) {
      for (const Vec& p : region_points(kRegions[r], L, n.distance_points)) {
        const FiberSplit a = split_along_fiber(induced[0][r].metric(p));
        const FiberSplit b = split_along_fiber(induced[k][r].metric(p));
        worst_base = std::max(worst_base, max_abs(a.base - b.base));
        worst_connection = std::max(worst_connection, (a.connection - b.connection).cwiseAbs().maxCoeff());
        if (kRegions[r] == SoulRegion::Polar) {
          const double fs2 = std::pow(soul.f(p[0]), 2);
          worst_soul = std::max(worst_soul, std::abs(a.base(1, 1) - fs2));
          worst_soul = std::max(worst_soul, std::abs(a.connection[1] + chat * fs2));
        }
      }
    }
  }
  s.checks.push_back(at_most("soul_metric_between_radii", worst_base, kModelTol));
  s.checks.push_back(at_most("horizontal_between_radii", worst_connection, kModelTol));
  s.checks.push_back(at_most("soul_metric_extracted", worst_soul, kSoulExtractTol));

  // report-only curvature probe of each distance sphere
  ordered_json probes = ordered_json::array();
  for (std::size_t k = 0; k < induced.size(); ++k) {
    const AtlasAuditReport rep = bundle_curvature_scan(induced[k], L, static_cast<std::size_t>(n.probe_samples), n.seed,
                                                       c.tolerances.nonneg_tol, threads);
    s.checks.push_back(within(fmt::format("probe_min_curvature_r{}", k), rep.merged.min_K, kProbeFloor, kProbeCeiling,
                              false));
    ordered_json probe = to_json(rep);
    probe["rho0"] = matches[k].rho0;
    probes.push_back(probe);
  }

  s.details["xhat_scale"] = chat;
  s.details["bundle_radii"] = n.bundle_radii;
  s.details["bundle_points"] = n.bundle_points;
  s.details["distance_spheres"] = radii;
  s.details["probe"] = probes;
  return s;
}

Section rigidity_section(const LabConfig& c, int threads) {
  Section s{"rigidity"};
  const NumericConfig& n = c.numeric;
  const EqualityAudit a = equality_audit(c.spec, interior(c.spec.sphere.length(), n.rigidity_points), n.directions,
                                         threads, n.fd_step, c.hessian());
  s.checks.push_back(at_most("max_abs_residual", a.max_abs_residual, c.tolerances.equality_tol));
  s.checks.push_back(at_least("max_abs_lhs", a.max_abs_lhs, kNonvacuousLhs, false));
  s.details["points"] = n.rigidity_points;
  s.details["directions"] = n.directions;
  s.details["records"] = a.records.size();
  s.details["max_violation"] = a.max_violation;
  s.details["min_k"] = a.min_k;
  std::ostringstream csv;
  write_rigidity_csv(csv, a.records);
  s.csv.push_back({"rigidity.csv", csv.str()});
  return s;
}

Section round_section(const LabConfig& c, int threads) {
  Section s{"round"};
  const NumericConfig& n = c.numeric;
  const SphereQuadrature quad{n.quadrature_panels, n.azimuth_nodes};

  // the detector must reject F ≡ 0, G = cos θ whatever the spec
  const SphereField zero = [](const Eigen::Vector3d&) { return 0.0; };
  const SphereField cosine = [](const Eigen::Vector3d& p) { return p.z(); };
  const TraceCheck violating = trace_inequality_check(zero, cosine, 91, 72, quad);
  s.checks.push_back(at_least("violating_input_flagged", violating.max_residual, kTraceTol));

  const SoulAtlas atlas(c.spec, n.fd_step, 4);
  RoundSoulFields fields;
  try {
    fields = round_soul_fields(atlas, n.round_nodes, threads);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidArgument) throw;
    s.applicable = false;
    s.note = e.what();
    return s;
  }
  s.details["radius"] = fields.radius;
  s.details["curvature_spread"] = fields.curvature_spread;

  std::ostringstream csv;
  csv << "theta,F,G\n";
  double peak_F = 0.0, min_G = std::numeric_limits<double>::infinity(), max_G = -min_G;
  for (int i = 0; i <= 180; ++i) {
    const double theta = pi * i / 180.0;
    const Eigen::Vector3d p = sphere_point(Eigen::Vector3d::UnitZ(), theta, 0.0);
    const double F = fields.F(p), G = fields.G(p);
    peak_F = std::max(peak_F, std::abs(F));
    min_G = std::min(min_G, G);
    max_G = std::max(max_G, G);
    csv << fmt::format("{:.17g},{:.17g},{:.17g}\n", theta, F, G);
  }
  s.csv.push_back({"round_profile.csv", csv.str()});

  const TraceCheck trace = trace_inequality_check(fields.F, fields.G, 91, 72, quad);
  s.checks.push_back(at_most("trace_inequality", trace.max_residual, kTraceTol));
  s.details["laplacian_integral"] = trace.laplacian_integral;

  if (peak_F <= kZeroField) {
    s.note = "F vanishes; the spectral suite is vacuous";
    s.details["G_spread"] = max_G - min_G;
    return s;
  }

  const LinearFit fit = fit_linear_eigenfunction(fields.F, 1e-4, quad);
  s.checks.push_back(at_most("linear_fit_residual", fit.residual, kFitTol));
  const double q = rayleigh(fields.F, 1e-4, quad);
  s.checks.push_back(at_most("rayleigh_minus_2", std::abs(q - 2.0), kRayleighTol));

  const GreatCircleProfile prof = great_circle_profile_check(fields.G, fit.Z);
  s.checks.push_back(at_most("amplitude_vs_quarter_Z2", std::abs(prof.amplitude - prof.amplitude_literal), kAmplitudeTol));
  s.checks.push_back(at_most("offset_spread", prof.offset_spread, kOffsetTol));
  s.checks.push_back(at_most("linear_drift", prof.drift, kDriftTol));
  s.checks.push_back(
      at_most("amplitude_vs_three_eighths_Z2", std::abs(prof.amplitude - prof.amplitude_trace), kAmplitudeTol, false));

  s.details["Z"] = {fit.Z.x(), fit.Z.y(), fit.Z.z()};
  s.details["Z_norm"] = fit.Z.norm();
  s.details["rayleigh"] = q;
  s.details["amplitude"] = prof.amplitude;
  s.details["amplitude_quarter_Z2"] = prof.amplitude_literal;
  s.details["amplitude_three_eighths_Z2"] = prof.amplitude_trace;
  s.details["offset"] = prof.offset;
  s.details["profile_max_deviation"] = prof.max_deviation;
  return s;
}

}  // namespace

Section run_section(const std::string& name, const LabConfig& config, int threads) {
  Section s{name};
  try {
    if (name == "nonneg") return nonneg_section(config, threads);
    if (name == "oracle") return oracle_section(config, threads);
    if (name == "bundle") return bundle_section(config, threads);
    if (name == "rigidity") return rigidity_section(config, threads);
    if (name == "round") return round_section(config, threads);
  } catch (const Error& e) {
    s.errored = true;
    s.note = e.what();
    return s;
  }
  raise(ErrorKind::InvalidArgument, "unknown section " + name);
}

}  // namespace soullab::lab
