#pragma once

#include "soullab/profiles.hpp"
#include "soullab/sampling.hpp"
#include "soullab/tensor.hpp"

#include <array>
#include <ostream>
#include <string>
#include <vector>

namespace soullab {

/// Sphere factor, plane factor and the speeds of the diagonal line action.
struct QuotientSpec {
  SphereProfile sphere;
  PlaneProfile plane;
  KillingSpec killing;

  /// All profile invariants plus nonnegative curvature of both factors.
  void validate() const;
};

/// Which sphere chart carries the first two coordinates.
enum class SoulRegion { Polar, North, South };

std::string to_string(SoulRegion region);

/// The quotient metric on the slice u = 0 in coordinates
/// (sphere chart) × (Cartesian plane chart).
struct QuotientChart {
  MetricChart chart;
  QuotientSpec spec;
  SoulRegion region = SoulRegion::Polar;
};

/// Closed-form quotient components. With N = 1 + C1²f² + C2²b² and
/// v = (C1·G_A k_A, C2·G_B k_B) the slice metric is blockdiag(G_A, G_B) − v vᵀ/N.
QuotientChart build_quotient(const QuotientSpec& spec, SoulRegion region = SoulRegion::Polar,
                             double fd_step = kDefaultFdStep, int fd_order = 2);

/// Brute-force oracle: horizontal projection of the 5-dim product metric
/// (sphere × plane × line) along the action field, restricted to the slice.
Mat quotient_projection_oracle(const QuotientSpec& spec, SoulRegion region, const Vec& p);

/// Unit-speed rotation field of the sphere factor in the chart of `region`,
/// evaluated at sphere coordinates (p[0], p[1]).
Vec sphere_rotation_field(SoulRegion region, const Vec& p);

/// Chart image of the action field's slice part (C1 k_A, C2 k_B).
Vec action_field(const QuotientSpec& spec, SoulRegion region, const Vec& p);

/// Soul metric dt² + f²/(1 + C1²f²) ds², i.e. the profile warped by C1².
SphereProfile soul_profile(const QuotientSpec& spec);
MetricChart soul_metric(const QuotientSpec& spec, double fd_step = kDefaultFdStep);

/// Inverse of the soul rescale: f = f_Σ/√(1 − C1²f_Σ²).
SphereProfile prescribe_soul_profile(const SphereProfile& target, double C1);

/// k = R(X,Y,Y,X), F = R(X,Y,W,V), G = R(W,V,V,W) in an oriented orthonormal
/// frame {X,Y} of the soul and {W,V} of the normal plane.
struct SoulCurvatures {
  double k = 0.0;
  double F = 0.0;
  double G = 0.0;
};

/// Polar chart on the band t ∈ [L/4, 3L/4] and Cartesian pole charts
/// elsewhere, for both the quotient and the soul.
class SoulAtlas {
 public:
  explicit SoulAtlas(QuotientSpec spec, double fd_step = kDefaultFdStep, int fd_order = 2);

  const QuotientSpec& spec() const { return spec_; }
  double length() const { return spec_.sphere.length(); }

  SoulRegion region_for(double t) const;
  const QuotientChart& quotient(SoulRegion region) const;
  const MetricChart& soul_chart(SoulRegion region) const;

  /// Soul-chart coordinates of the soul point with polar coordinates (t, s).
  Vec soul_point(SoulRegion region, double t, double s) const;

  /// Chart vectors of ∂_t and ∂_s at that point (in the pole charts ∂_t is
  /// ±radial; at the pole itself the pair (x̂, ±ŷ) is returned).
  std::array<Vec, 2> polar_frame(SoulRegion region, double t, double s) const;

  SoulCurvatures curvatures(SoulRegion region, const Vec& soul_point) const;
  SoulCurvatures curvatures_at(double t, double s = 0.0) const;

  /// Largest |Γ^normal_{tangent,tangent}| at the soul point.
  double normal_christoffel(double t, double s = 0.0) const;

 private:
  QuotientSpec spec_;
  std::array<QuotientChart, 3> quotients_;
  std::array<MetricChart, 3> souls_;
};

struct SoulData {
  std::vector<double> t;
  std::vector<double> k;
  std::vector<double> F;
  std::vector<double> G;
  std::vector<double> hessG_tt;  // hess_G on g_Σ-unit ∂_t
  std::vector<double> hessG_ss;  // hess_G on g_Σ-unit ∂_s
  SphereProfile soul;            // g_Σ profile
  MetricChart soul_metric;

  void write_csv(std::ostream& out) const;
};

/// Curvature functions at each t of the grid (poles allowed).
SoulData soul_data(const SoulAtlas& atlas, const std::vector<double>& grid, int threads = 1,
                   const HessianOptions& hessian = {});

/// Uniform odd-sized grid over [0, L] suitable for integral_f.
std::vector<double> simpson_grid(double length, int nodes);

/// ∫F dvol_Σ = 2π ∫ F f_Σ dt by Simpson's rule. Requires data on a simpson_grid.
double integral_f(const SoulData& data);

/// Sectional-curvature scan of a single quotient chart.
CurvatureReport nonneg_audit(const QuotientChart& q, const PlaneSampler& sampler, double tol, int threads = 1);

struct AtlasAuditReport {
  CurvatureReport merged;
  std::array<CurvatureReport, 3> per_region;  // polar, north, south
};

/// Combines polar/north/south reports. Ties keep the earlier region.
AtlasAuditReport merge_region_reports(const std::array<CurvatureReport, 3>& reports, double tol);

/// Scans the whole quotient: half the samples on the polar band, a quarter
/// on each pole disk (radius L/4); plane coordinates keep 10 fd steps from
/// the chart edge. The merged minimum breaks ties by region order.
AtlasAuditReport nonneg_audit_atlas(const SoulAtlas& atlas, std::size_t samples, std::uint64_t seed, double tol,
                                    int threads = 1);

}  // namespace soullab
