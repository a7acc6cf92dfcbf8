#include "soullab/bundle.hpp"

#include "soullab/error.hpp"
#include "soullab/parallel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace soullab {

using std::numbers::pi;

namespace {

constexpr double kTwoPi = 2.0 * pi;

MetricChart sphere_chart_for(const SphereProfile& prof, SoulRegion region, double fd_step) {
  switch (region) {
    case SoulRegion::Polar: return sphere_chart(prof, fd_step);
    case SoulRegion::North: return sphere_pole_chart(prof, Pole::North, default_pole_half_width(prof), fd_step);
    case SoulRegion::South: return sphere_pole_chart(prof, Pole::South, default_pole_half_width(prof), fd_step);
  }
  return sphere_chart(prof, fd_step);
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) raise(ErrorKind::InvalidArgument, fmt::format("{} must be finite", what));
}

}  // namespace

void ProductBundleData::validate() const {
  // g1 need not come from a surface of revolution: matched models exceed |f'| = 1 near the poles.
  g1.validate(false, false);
  if (!(r > 0.0) || !std::isfinite(r)) raise(ErrorKind::InvalidArgument, fmt::format("fiber radius r={:.6g} must be > 0", r));
  require_finite(Xhat_scale, "Xhat_scale");
}

SphereProfile ProductBundleData::soul() const {
  return Xhat_scale == 0.0 ? g1 : g1.warped(Xhat_scale * Xhat_scale);
}

void SubmersionBundleData::validate() const {
  g0.validate(false);
  require_finite(X_scale, "X_scale");
  if (!(a > 0.0 && a < kTwoPi)) raise(ErrorKind::OutOfRange, fmt::format("translation speed a={:.6g} not in (0, 2*pi)", a));
}

double fiber_length_product(double r, double x2) {
  if (!(r > 0.0) || !std::isfinite(r)) raise(ErrorKind::InvalidArgument, fmt::format("fiber radius r={:.6g} must be > 0", r));
  if (!(x2 >= 0.0)) raise(ErrorKind::InvalidArgument, fmt::format("squared norm x2={:.6g} must be >= 0", x2));
  const double denom = 1.0 + r * r * (1.0 - x2);
  if (!(denom > 0.0)) {
    raise(ErrorKind::DegenerateFiber, fmt::format("1 + r^2(1 - x2) = {:.6g} <= 0 (r={:.6g}, x2={:.6g})", denom, r, x2));
  }
  return kTwoPi * r / std::sqrt(denom);
}

double fiber_length_submersion(double a, double x2) {
  if (!(a > 0.0) || !std::isfinite(a)) raise(ErrorKind::InvalidArgument, fmt::format("translation speed a={:.6g} must be > 0", a));
  if (!(x2 < a * a)) raise(ErrorKind::DegenerateFiber, fmt::format("x2={:.6g} >= a^2={:.6g}", x2, a * a));
  return a * a / std::sqrt(a * a - x2);
}

HorizontalPlane horizontal_product(double x2) {
  if (!(x2 >= 0.0 && x2 < 1.0)) raise(ErrorKind::InvalidArgument, fmt::format("x2={:.6g} not in [0, 1)", x2));
  return {1.0, x2};
}

HorizontalPlane horizontal_submersion(double a, double x2) {
  if (!(a > 0.0) || !std::isfinite(a)) raise(ErrorKind::InvalidArgument, fmt::format("translation speed a={:.6g} must be > 0", a));
  if (!(x2 >= 0.0 && x2 < a * a)) raise(ErrorKind::InvalidArgument, fmt::format("x2={:.6g} not in [0, a^2)", x2));
  return {-1.0, kTwoPi / (a * a) * x2};
}

Vec horizontal_vector(const HorizontalPlane& plane, double rotation_scale, const Vec& rotation) {
  Vec out(rotation.size() + 1);
  out.head(rotation.size()) = plane.rotation * rotation_scale * rotation;
  out[rotation.size()] = plane.fiber;
  return out;
}

double line_angle(const Vec& u, const Vec& v, const Mat& metric) {
  const Mat g = metric.size() == 0 ? Mat(Mat::Identity(u.size(), u.size())) : metric;
  const double nu = std::sqrt(u.dot(g * u)), nv = std::sqrt(v.dot(g * v));
  if (!(nu > 0.0 && nv > 0.0)) raise(ErrorKind::DegeneratePlane, "line_angle needs nonzero vectors");
  const Vec a = u / nu;
  Vec b = v / nv;
  if (a.dot(g * b) < 0.0) b = -b;
  // Half-angle form; the Gram-determinant form cancels to ~1e-8 for parallel lines.
  const Vec d = a - b, s = a + b;
  return 2.0 * std::atan2(std::sqrt(std::max(0.0, d.dot(g * d))), std::sqrt(std::max(0.0, s.dot(g * s))));
}

MatchedParameters match_parameters(double a, double X_scale) {
  if (!(a > 0.0 && a < kTwoPi)) {
    raise(ErrorKind::OutOfRange, fmt::format("a={:.6g}: 1/a^2 = (1+r^2)/(4 pi^2 r^2) has no real r outside (0, 2*pi)", a));
  }
  require_finite(X_scale, "X_scale");
  return {a / std::sqrt(4.0 * pi * pi - a * a), -kTwoPi / (a * a) * X_scale};
}

MetricChart bundle_metric_numeric(const ProductBundleData& data, SoulRegion region, double fd_step, int fd_order) {
  data.validate();
  const MetricChart base = sphere_chart_for(data.g1, region, fd_step);
  std::vector<Interval> box = base.box();
  box.push_back({0.0, kTwoPi, true});
  const double r2 = data.r * data.r;
  const MetricChart product(
      fmt::format("bundle({},{})", to_string(region), data.g1.describe()), box,
      [base, r2](const Vec& p) {
        Mat g = Mat::Zero(3, 3);
        g.topLeftCorner(2, 2) = base.metric(p.head(2));
        g(2, 2) = r2;
        return g;
      },
      fd_step, fd_order);
  const double c = data.Xhat_scale;
  return cheeger_rescale(
      product,
      [region, c](const Vec& p) {
        const Vec rot = sphere_rotation_field(region, p);
        return make_vec({c * rot[0], c * rot[1], 1.0});
      },
      1.0);
}

double orbit_fiber_length(const MetricChart& chart3, const Vec& p, int nodes) {
  if (nodes < 3 || nodes % 2 == 0) raise(ErrorKind::InvalidArgument, fmt::format("orbit nodes={} must be odd and >= 3", nodes));
  const std::vector<double> w = simpson_weights(nodes, kTwoPi);
  double sum = 0.0;
  Vec q = p;
  for (int i = 0; i < nodes; ++i) {
    q[2] = kTwoPi * i / (nodes - 1);
    const double h = chart3.metric(q)(2, 2);
    if (!(h >= 0.0) || !std::isfinite(h)) raise(ErrorKind::NonFiniteFieldValue, "fiber norm is negative or not finite");
    sum += w[static_cast<std::size_t>(i)] * std::sqrt(h);
  }
  return sum;
}

FiberSplit split_along_fiber(const Mat& h3) {
  const double hff = h3(2, 2);
  if (!(hff > 0.0)) raise(ErrorKind::SingularMetric, fmt::format("fiber norm^2 {:.6g} <= 0", hff));
  const Vec cross = h3.block(0, 2, 2, 1);
  FiberSplit out;
  out.fiber_norm2 = hff;
  out.connection = cross / hff;
  out.base = h3.topLeftCorner(2, 2) - cross * cross.transpose() / hff;
  return out;
}

MetricChart distance_sphere_induced(const QuotientChart& q, double rho0) {
  const double h = q.chart.fd_step();
  const double half = q.chart.box()[2].hi;
  if (!(rho0 >= 10.0 * h && rho0 + 10.0 * h <= half)) {
    raise(ErrorKind::OutOfDomain,
          fmt::format("distance sphere radius {:.6g} outside [{:.6g}, {:.6g}]", rho0, 10.0 * h, half - 10.0 * h));
  }
  std::vector<Interval> box{q.chart.box()[0], q.chart.box()[1], {0.0, kTwoPi, true}};
  const MetricChart quotient = q.chart;
  return MetricChart(
      fmt::format("distance_sphere({},rho={:.17g})", to_string(q.region), rho0), box,
      [quotient, rho0](const Vec& p) {
        const double c = std::cos(p[2]), s = std::sin(p[2]);
        const Mat H = quotient.metric(make_vec({p[0], p[1], rho0 * c, rho0 * s}));
        Eigen::Matrix<double, 4, 3> J = Eigen::Matrix<double, 4, 3>::Zero();
        J(0, 0) = 1.0;
        J(1, 1) = 1.0;
        J(2, 2) = -rho0 * s;
        J(3, 2) = rho0 * c;
        return Mat(J.transpose() * H * J);
      },
      q.chart.fd_step(), q.chart.fd_order());
}

DistanceSphereMatch match_distance_sphere(const QuotientSpec& spec, double rho0) {
  const double C1 = spec.killing.C1, C2 = spec.killing.C2;
  const double b = spec.plane.b(rho0);
  const double inv_r2 = 1.0 / (b * b) + C2 * C2 - 1.0;
  if (!(inv_r2 > 0.0)) {
    raise(ErrorKind::OutOfRange,
          fmt::format("no fiber radius matches rho0={:.6g}: 1/b^2 + C2^2 - 1 = {:.6g} <= 0", rho0, inv_r2));
  }
  DistanceSphereMatch out;
  out.rho0 = rho0;
  out.r_closed_form = 1.0 / std::sqrt(inv_r2);

  const double chat = C1 * C2;
  const SphereProfile soul = soul_profile(spec);
  const double L = soul.length();
  const MetricChart induced = distance_sphere_induced(build_quotient(spec, SoulRegion::Polar), rho0);
  const double fiber = orbit_fiber_length(induced, make_vec({0.5 * L, 0.0, 0.0}), 129);
  const double fs = soul.f(0.5 * L);
  const double x2 = chat * chat * fs * fs;
  const double denom = 4.0 * pi * pi - fiber * fiber * (1.0 - x2);
  if (!(denom > 0.0)) raise(ErrorKind::OutOfRange, fmt::format("measured fiber length {:.6g} admits no radius", fiber));
  out.r_measured = fiber / std::sqrt(denom);

  out.model.g1 = chat == 0.0 ? soul : soul.warped(-chat * chat);
  out.model.r = out.r_measured;
  out.model.Xhat_scale = chat;
  return out;
}

double fiber_killing_angle(const MetricChart& chart3, SoulRegion region, const SphereProfile& soul,
                           double Xhat_scale, const Vec& p) {
  const Vec a = p.head(2);
  const Vec rot = sphere_rotation_field(region, a);
  const Mat g_soul = sphere_chart_for(soul, region, chart3.fd_step()).metric(a);
  const double x2 = Xhat_scale * Xhat_scale * rot.dot(g_soul * rot);

  Eigen::Vector3d e1, e2;
  if (rot.norm() < 1e-9 || Xhat_scale == 0.0) {
    // X̂ vanishes (pole or no rotation): the horizontal plane is the sphere tangent plane
    e1 << 1.0, 0.0, 0.0;
    e2 << 0.0, 1.0, 0.0;
  } else {
    // Y orthogonal to the rotation: ∂_t in the polar chart, radial at a pole
    if (region == SoulRegion::Polar) {
      e1 << 1.0, 0.0, 0.0;
    } else {
      e1 << a[0], a[1], 0.0;
    }
    const Vec hv = horizontal_vector(horizontal_product(x2), Xhat_scale, rot);
    e2 << hv[0], hv[1], hv[2];
  }
  const Mat h = chart3.metric(p);
  const Eigen::Matrix3d h3 = h;
  const Eigen::Vector3d normal_covector = e1.cross(e2);
  const Eigen::Vector3d fiber = h3.ldlt().solve(normal_covector);
  return line_angle(Vec(fiber), make_vec({0.0, 0.0, 1.0}), h);
}

std::vector<BundleOracleRow> bundle_oracle_rows(const ProductBundleData& data, const std::vector<double>& t_grid,
                                                double s, int threads) {
  const MetricChart chart = bundle_metric_numeric(data);
  const SphereProfile soul = data.soul();
  std::vector<BundleOracleRow> rows(t_grid.size());
  parallel_for(t_grid.size(), threads, [&](std::size_t i) {
    const double t = t_grid[i];
    const double fs = soul.f(t);
    const double x2 = data.Xhat_scale * data.Xhat_scale * fs * fs;
    const Vec p = make_vec({t, s, 0.0});
    const Mat h = chart.metric(p);
    const Vec hv = horizontal_vector(horizontal_product(x2), data.Xhat_scale, make_vec({0.0, 1.0}));
    rows[i] = {t, fiber_length_product(data.r, x2), orbit_fiber_length(chart, p), (h * hv)[2]};
  });
  return rows;
}

void write_bundle_csv(std::ostream& out, const std::vector<BundleOracleRow>& rows) {
  out << "t,closed_form_fiber_length,oracle_fiber_length,orthogonality_residual\n";
  for (const BundleOracleRow& r : rows) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t, r.closed_form, r.oracle, r.orthogonality);
  }
}

BundleCharts bundle_charts(const ProductBundleData& data, double fd_step, int fd_order) {
  return {bundle_metric_numeric(data, SoulRegion::Polar, fd_step, fd_order),
          bundle_metric_numeric(data, SoulRegion::North, fd_step, fd_order),
          bundle_metric_numeric(data, SoulRegion::South, fd_step, fd_order)};
}

BundleCharts distance_sphere_charts(const SoulAtlas& atlas, double rho0) {
  return {distance_sphere_induced(atlas.quotient(SoulRegion::Polar), rho0),
          distance_sphere_induced(atlas.quotient(SoulRegion::North), rho0),
          distance_sphere_induced(atlas.quotient(SoulRegion::South), rho0)};
}

AtlasAuditReport bundle_curvature_scan(const BundleCharts& charts, double length, std::size_t samples,
                                       std::uint64_t seed, double tol, int threads) {
  if (samples < 4) raise(ErrorKind::EmptySample, "bundle scan needs at least 4 samples");
  const double L = length;
  const Interval circle{0.0, kTwoPi, true};
  const Interval pole_box{-0.25 * L, 0.25 * L};
  const std::size_t n_polar = samples / 2, n_north = samples / 4, n_south = samples - n_polar - n_north;
  const PlaneSampler s_polar({{0.25 * L, 0.75 * L}, circle, circle}, n_polar, seed);
  const PlaneSampler s_north({pole_box, pole_box, circle}, n_north, seed + 1);
  const PlaneSampler s_south({pole_box, pole_box, circle}, n_south, seed + 2);
  return merge_region_reports({min_sectional_scan(charts[0], s_polar, tol, threads),
                               min_sectional_scan(charts[1], s_north, tol, threads),
                               min_sectional_scan(charts[2], s_south, tol, threads)},
                              tol);
}

}  // namespace soullab
