#include "soullab/quotient.hpp"

#include "soullab/error.hpp"
#include "soullab/parallel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace soullab {

using std::numbers::pi;

void QuotientSpec::validate() const {
  sphere.validate(true);
  plane.validate(true);
  if (!std::isfinite(killing.C1)) raise(ErrorKind::InvalidArgument, "KillingSpec: C1 must be finite");
  if (!std::isfinite(killing.C2)) raise(ErrorKind::InvalidArgument, "KillingSpec: C2 must be finite");
}

std::string to_string(SoulRegion region) {
  switch (region) {
    case SoulRegion::Polar: return "polar";
    case SoulRegion::North: return "north";
    case SoulRegion::South: return "south";
  }
  return "?";
}

namespace {

std::size_t slot(SoulRegion region) { return static_cast<std::size_t>(region); }

Pole pole_of(SoulRegion region) { return region == SoulRegion::South ? Pole::South : Pole::North; }

// Sphere rotation field in the given sphere chart.
Vec sphere_rotation(SoulRegion region, double a1, double a2) {
  switch (region) {
    case SoulRegion::Polar: return make_vec({0.0, 1.0});
    case SoulRegion::North: return make_vec({-a2, a1});
    case SoulRegion::South: return make_vec({a2, -a1});
  }
  return make_vec({0.0, 0.0});
}

Mat closed_form(const QuotientSpec& spec, SoulRegion region, const Vec& p) {
  const double C1 = spec.killing.C1, C2 = spec.killing.C2;
  const double x = p[2], y = p[3];
  const double rho = std::hypot(x, y);
  const double eB = spec.plane.ratio_excess(rho);
  const double qB = (1.0 + eB * rho * rho) * (1.0 + eB * rho * rho);  // (b/ρ)²
  const double b2 = qB * rho * rho;

  Mat g = Mat::Zero(4, 4);
  Vec v(4);
  double f2 = 0.0;
  if (region == SoulRegion::Polar) {
    const double f = spec.sphere.f(p[0]);
    f2 = f * f;
    g(0, 0) = 1.0;
    g(1, 1) = f2;
    v[0] = 0.0;
    v[1] = C1 * f2;
  } else {
    const double r = std::hypot(p[0], p[1]);
    const double eA = spec.sphere.pole_excess(r, pole_of(region));
    const double qA = (1.0 + eA * r * r) * (1.0 + eA * r * r);  // (f/r)²
    f2 = qA * r * r;
    g.block(0, 0, 2, 2) = rotational_cartesian_metric(p[0], p[1], eA);
    const Vec kA = sphere_rotation(region, p[0], p[1]);
    v[0] = C1 * qA * kA[0];
    v[1] = C1 * qA * kA[1];
  }
  g.block(2, 2, 2, 2) = rotational_cartesian_metric(x, y, eB);
  v[2] = -C2 * qB * y;
  v[3] = C2 * qB * x;
  const double N = 1.0 + C1 * C1 * f2 + C2 * C2 * b2;
  return g - v * v.transpose() / N;
}

}  // namespace

Vec sphere_rotation_field(SoulRegion region, const Vec& p) { return sphere_rotation(region, p[0], p[1]); }

Vec action_field(const QuotientSpec& spec, SoulRegion region, const Vec& p) {
  const Vec kA = sphere_rotation(region, p[0], p[1]);
  return make_vec({spec.killing.C1 * kA[0], spec.killing.C1 * kA[1], -spec.killing.C2 * p[3],
                   spec.killing.C2 * p[2]});
}

QuotientChart build_quotient(const QuotientSpec& spec, SoulRegion region, double fd_step, int fd_order) {
  const double L = spec.sphere.length();
  const double w = spec.plane.rho_max() / std::sqrt(2.0);
  std::vector<Interval> box;
  if (region == SoulRegion::Polar) {
    box = {{0.0, L}, {0.0, 2.0 * pi, true}};
  } else {
    const double pw = default_pole_half_width(spec.sphere);
    box = {{-pw, pw}, {-pw, pw}};
  }
  box.push_back({-w, w});
  box.push_back({-w, w});
  MetricChart chart("quotient_" + to_string(region), std::move(box),
                    [spec, region](const Vec& p) { return closed_form(spec, region, p); }, fd_step, fd_order);
  return QuotientChart{std::move(chart), spec, region};
}

SphereProfile soul_profile(const QuotientSpec& spec) {
  const double C1 = spec.killing.C1;
  return C1 == 0.0 ? spec.sphere : spec.sphere.warped(C1 * C1);
}

MetricChart soul_metric(const QuotientSpec& spec, double fd_step) { return sphere_chart(soul_profile(spec), fd_step); }

SphereProfile prescribe_soul_profile(const SphereProfile& target, double C1) {
  if (!std::isfinite(C1)) raise(ErrorKind::InvalidArgument, "C1 must be finite");
  if (C1 == 0.0) return target;
  const double fmax = target.max_f();
  if (!(std::abs(C1) * fmax < 1.0)) {
    raise(ErrorKind::RescaleNotInvertible,
          fmt::format("C1 * max f_soul = {:.6g} must be < 1 to invert the soul rescale", std::abs(C1) * fmax));
  }
  return target.warped(-C1 * C1);
}

// ---------------------------------------------------------------- atlas

SoulAtlas::SoulAtlas(QuotientSpec spec, double fd_step, int fd_order)
    : spec_(std::move(spec)),
      quotients_{build_quotient(spec_, SoulRegion::Polar, fd_step, fd_order),
                 build_quotient(spec_, SoulRegion::North, fd_step, fd_order),
                 build_quotient(spec_, SoulRegion::South, fd_step, fd_order)},
      souls_{sphere_chart(soul_profile(spec_), fd_step).with_fd(fd_step, fd_order),
             sphere_pole_chart(soul_profile(spec_), Pole::North, default_pole_half_width(spec_.sphere), fd_step)
                 .with_fd(fd_step, fd_order),
             sphere_pole_chart(soul_profile(spec_), Pole::South, default_pole_half_width(spec_.sphere), fd_step)
                 .with_fd(fd_step, fd_order)} {}

SoulRegion SoulAtlas::region_for(double t) const {
  const double L = length();
  if (t < 0.25 * L) return SoulRegion::North;
  if (t > 0.75 * L) return SoulRegion::South;
  return SoulRegion::Polar;
}

const QuotientChart& SoulAtlas::quotient(SoulRegion region) const { return quotients_[slot(region)]; }
const MetricChart& SoulAtlas::soul_chart(SoulRegion region) const { return souls_[slot(region)]; }

Vec SoulAtlas::soul_point(SoulRegion region, double t, double s) const {
  switch (region) {
    case SoulRegion::Polar: return make_vec({t, s});
    case SoulRegion::North: return make_vec({t * std::cos(s), t * std::sin(s)});
    case SoulRegion::South: {
      const double r = length() - t;
      return make_vec({r * std::cos(s), -r * std::sin(s)});
    }
  }
  return make_vec({0.0, 0.0});
}

std::array<Vec, 2> SoulAtlas::polar_frame(SoulRegion region, double t, double s) const {
  const double c = std::cos(s), sn = std::sin(s);
  switch (region) {
    case SoulRegion::Polar: return {make_vec({1.0, 0.0}), make_vec({0.0, 1.0})};
    case SoulRegion::North: {
      const double r = t > 0.0 ? t : 1.0;
      return {make_vec({c, sn}), make_vec({-r * sn, r * c})};
    }
    case SoulRegion::South: {
      const double r = length() - t > 0.0 ? length() - t : 1.0;
      return {make_vec({-c, sn}), make_vec({-r * sn, -r * c})};
    }
  }
  return {};
}

SoulCurvatures SoulAtlas::curvatures(SoulRegion region, const Vec& soul_point) const {
  const QuotientChart& q = quotient(region);
  const Vec p = make_vec({soul_point[0], soul_point[1], 0.0, 0.0});
  const Riemann R = riemann(q.chart, p);
  const Mat h = q.chart.metric(p);

  const Eigen::SelfAdjointEigenSolver<Mat> eig(h.block(0, 0, 2, 2));
  const double cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  if (!(cond <= 1e8)) {
    raise(ErrorKind::FrameDegeneracy, fmt::format("soul frame condition number {:.3g} exceeds 1e8", cond));
  }
  auto inner = [&](const Vec& a, const Vec& b) { return a.dot(h * b); };
  auto orthonormal = [&](Vec a, Vec b) {
    a /= std::sqrt(inner(a, a));
    b -= inner(a, b) * a;
    b /= std::sqrt(inner(b, b));
    return std::array<Vec, 2>{a, b};
  };
  const auto [X, Y] = orthonormal(make_vec({1, 0, 0, 0}), make_vec({0, 1, 0, 0}));
  const auto [W, V] = orthonormal(make_vec({0, 0, 1, 0}), make_vec({0, 0, 0, 1}));
  return {R.contract(X, Y, Y, X), R.contract(X, Y, W, V), R.contract(W, V, V, W)};
}

SoulCurvatures SoulAtlas::curvatures_at(double t, double s) const {
  const SoulRegion region = region_for(t);
  return curvatures(region, soul_point(region, t, s));
}

double SoulAtlas::normal_christoffel(double t, double s) const {
  const SoulRegion region = region_for(t);
  const Vec a = soul_point(region, t, s);
  const Christoffel gamma = christoffel(quotient(region).chart, make_vec({a[0], a[1], 0.0, 0.0}));
  double worst = 0.0;
  for (int k = 2; k < 4; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(gamma(k, i, j)));
  return worst;
}

// ---------------------------------------------------------------- soul data

SoulData soul_data(const SoulAtlas& atlas, const std::vector<double>& grid, int threads,
                   const HessianOptions& hessian) {
  const double L = atlas.length();
  for (double t : grid) {
    if (!(t >= 0.0 && t <= L)) raise(ErrorKind::OutOfDomain, fmt::format("soul grid value t={:.6g} outside [0, L]", t));
  }
  const std::size_t n = grid.size();
  SoulData data{grid,
                std::vector<double>(n),
                std::vector<double>(n),
                std::vector<double>(n),
                std::vector<double>(n),
                std::vector<double>(n),
                soul_profile(atlas.spec()),
                atlas.soul_chart(SoulRegion::Polar)};
  parallel_for(n, threads, [&](std::size_t i) {
    const double t = grid[i];
    const SoulRegion region = atlas.region_for(t);
    const Vec p = atlas.soul_point(region, t, 0.0);
    const SoulCurvatures c = atlas.curvatures(region, p);
    data.k[i] = c.k;
    data.F[i] = c.F;
    data.G[i] = c.G;
    const MetricChart& soul = atlas.soul_chart(region);
    const Mat g = soul.metric(p);
    const ScalarField G = [&atlas, region](const Vec& q) { return atlas.curvatures(region, q).G; };
    auto frame = atlas.polar_frame(region, t, 0.0);
    for (Vec& e : frame) e /= std::sqrt(e.dot(g * e));
    data.hessG_tt[i] = hessian_scalar(soul, G, p, frame[0], hessian);
    data.hessG_ss[i] = hessian_scalar(soul, G, p, frame[1], hessian);
  });
  return data;
}

void SoulData::write_csv(std::ostream& out) const {
  out << "t,k,F,G,hessG_tt,hessG_ss\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", t[i], k[i], F[i], G[i], hessG_tt[i],
                       hessG_ss[i]);
  }
}

std::vector<double> simpson_grid(double length, int nodes) {
  if (nodes < 3 || nodes % 2 == 0) raise(ErrorKind::InvalidArgument, "Simpson grid needs an odd node count >= 3");
  std::vector<double> grid(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) grid[static_cast<std::size_t>(i)] = length * i / (nodes - 1);
  return grid;
}

double integral_f(const SoulData& data) {
  const std::size_t n = data.t.size();
  const double L = data.soul.length();
  if (n < 3 || n % 2 == 0 || data.t.front() != 0.0 || std::abs(data.t.back() - L) > 1e-12 * L) {
    raise(ErrorKind::InvalidArgument, "integral_f needs soul data on a Simpson grid over [0, L]");
  }
  const std::vector<double> w = simpson_weights(static_cast<int>(n), L);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += w[i] * data.F[i] * data.soul.f(data.t[i]);
  return 2.0 * pi * total;
}

// ---------------------------------------------------------------- audits

CurvatureReport nonneg_audit(const QuotientChart& q, const PlaneSampler& sampler, double tol, int threads) {
  return min_sectional_scan(q.chart, sampler, tol, threads);
}

AtlasAuditReport merge_region_reports(const std::array<CurvatureReport, 3>& reports, double tol) {
  AtlasAuditReport out;
  out.per_region = reports;
  out.merged = reports[0];
  out.merged.sample_count = 0;
  for (const CurvatureReport& rep : reports) {
    out.merged.sample_count += rep.sample_count;
    if (rep.min_K < out.merged.min_K) {
      out.merged.min_K = rep.min_K;
      out.merged.argmin = rep.argmin;
    }
    if (rep.max_K > out.merged.max_K) {
      out.merged.max_K = rep.max_K;
      out.merged.argmax = rep.argmax;
    }
  }
  out.merged.tolerance = tol;
  out.merged.pass = out.merged.min_K >= -tol;
  return out;
}

AtlasAuditReport nonneg_audit_atlas(const SoulAtlas& atlas, std::size_t samples, std::uint64_t seed, double tol,
                                    int threads) {
  if (samples < 4) raise(ErrorKind::EmptySample, "atlas audit needs at least 4 samples");
  const double L = atlas.length();
  const QuotientChart& polar = atlas.quotient(SoulRegion::Polar);
  const double c = polar.chart.box()[2].hi - 10.0 * polar.chart.fd_step();
  const Interval plane{-c, c};
  const std::size_t n_polar = samples / 2, n_north = samples / 4, n_south = samples - n_polar - n_north;
  const PlaneSampler s_polar({{0.25 * L, 0.75 * L}, {0.0, 2.0 * pi, true}, plane, plane}, n_polar, seed);
  const PlaneSampler s_north({{-0.25 * L, 0.25 * L}, {-0.25 * L, 0.25 * L}, plane, plane}, n_north, seed + 1);
  const PlaneSampler s_south({{-0.25 * L, 0.25 * L}, {-0.25 * L, 0.25 * L}, plane, plane}, n_south, seed + 2);

  AtlasAuditReport out;
  out.per_region[0] = nonneg_audit(polar, s_polar, tol, threads);
  out.per_region[1] = nonneg_audit(atlas.quotient(SoulRegion::North), s_north, tol, threads);
  out.per_region[2] = nonneg_audit(atlas.quotient(SoulRegion::South), s_south, tol, threads);
  out = merge_region_reports(out.per_region, tol);
  out.merged.sample_count = samples;
  return out;
}

}  // namespace soullab
