#pragma once

#include "soullab/quotient.hpp"

#include <array>
#include <ostream>
#include <vector>

namespace soullab {

/// (S², g1) × S¹(r) × ℝ modulo the line acting by X̂ + Θ̂ + ∂_u. X̂ is
/// Xhat_scale times the unit-speed rotation field of g1; Θ̂ = ∂_θ has
/// length r, so the fiber circle has circumference 2πr before rescaling.
struct ProductBundleData {
  SphereProfile g1 = SphereProfile::round(1.0);
  double r = 1.0;
  double Xhat_scale = 0.0;

  void validate() const;

  /// Base metric g_Σ of the bundle: g1 shrunk along X̂ with a = 1.
  SphereProfile soul() const;
};

/// (S², g0) × ℝ modulo (p, u) ~ (flow_s(p), u + a·s), with the flow of X =
/// X_scale times the rotation field.
struct SubmersionBundleData {
  SphereProfile g0 = SphereProfile::round(1.0);
  double X_scale = 0.0;
  double a = 1.0;

  /// Requires a ∈ (0, 2π) so the data can be matched to a product bundle.
  void validate() const;
};

/// 2πr/√(1 + r²(1 − x2)) with x2 = |X̂|²_{g_Σ}.
double fiber_length_product(double r, double x2);

/// a²/√(a² − x2) with x2 = |X|²_{g_Σ}.
double fiber_length_submersion(double a, double x2);

/// Horizontal plane span{Y, rotation·R + fiber·Θ̂}. Y is the sphere
/// direction orthogonal to the rotation field R of the parameterization
/// (X̂ for the product form, X for the submersion form). Planes are compared
/// as unoriented spans.
struct HorizontalPlane {
  double rotation = 1.0;
  double fiber = 0.0;
};

/// Coefficient c = x2, independent of r.
HorizontalPlane horizontal_product(double x2);

/// −X + (2π/a²)·x2·Θ̂.
HorizontalPlane horizontal_submersion(double a, double x2);

/// Chart vector (rotation_scale·R, fiber) of the non-Y spanning vector, where
/// `rotation` holds the chart image of the unit-speed rotation field.
Vec horizontal_vector(const HorizontalPlane& plane, double rotation_scale, const Vec& rotation);

/// Angle in [0, π/2] between the lines through u and v, measured in `metric`
/// (Euclidean when empty).
double line_angle(const Vec& u, const Vec& v, const Mat& metric = Mat());

struct MatchedParameters {
  double r = 0.0;
  double Xhat_scale = 0.0;
};

/// r = a/√(4π² − a²) and X̂ = −(2π/a²)X. Raises OutOfRange unless 0 < a < 2π.
MatchedParameters match_parameters(double a, double X_scale);

/// Chart (sphere chart of g1) × θ carrying the rescale of g1 ⊕ r²dθ² along
/// X̂ + Θ̂ with a = 1.
MetricChart bundle_metric_numeric(const ProductBundleData& data, SoulRegion region = SoulRegion::Polar,
                                  double fd_step = kDefaultFdStep, int fd_order = 2);

/// Length of the θ-orbit through p: ∫₀^{2π} √h_θθ dθ by Simpson with `nodes`
/// (odd) nodes. The orbit keeps the sphere coordinates fixed.
double orbit_fiber_length(const MetricChart& chart3, const Vec& p, int nodes = 65);

/// Decomposition of a 3-metric along the fiber ∂_θ: the quotient metric on the
/// sphere coordinates, the connection h_aθ/h_θθ and h_θθ itself.
struct FiberSplit {
  Mat base;
  Vec connection;
  double fiber_norm2 = 0.0;
};

FiberSplit split_along_fiber(const Mat& h3);

/// Metric induced on {ρ = ρ0} in coordinates (sphere chart, θ), pulled back
/// through the Cartesian plane coordinates of `q`. Raises OutOfDomain unless
/// ρ0 keeps 10 fd steps from the vertex and from the plane box.
MetricChart distance_sphere_induced(const QuotientChart& q, double rho0);

/// Product-form model of the distance sphere at ρ0. X̂ = C1·C2 times the
/// rotation field and g1 = g_Σ unshrunk by X̂. The model radius is measured
/// from the fiber circumference of the induced chart at t = L/2;
/// r_closed_form = (1/b² + C2² − 1)^{−1/2} is reported alongside.
struct DistanceSphereMatch {
  ProductBundleData model;
  double rho0 = 0.0;
  double r_closed_form = 0.0;
  double r_measured = 0.0;
};

DistanceSphereMatch match_distance_sphere(const QuotientSpec& spec, double rho0);

/// Angle between ∂_θ and the h-normal of the closed-form horizontal plane
/// span{Y, X̂ + x2·Θ̂} at p. `soul` supplies g_Σ for x2 = |X̂|²_{g_Σ}.
double fiber_killing_angle(const MetricChart& chart3, SoulRegion region, const SphereProfile& soul,
                           double Xhat_scale, const Vec& p);

struct BundleOracleRow {
  double t = 0.0;
  double closed_form = 0.0;    // fiber_length_product
  double oracle = 0.0;         // orbit length on bundle_metric_numeric
  double orthogonality = 0.0;  // ⟨Θ̂, X̂ + x2·Θ̂⟩_h
};

/// One row per t (interior of [0, L]) at sphere angle s.
std::vector<BundleOracleRow> bundle_oracle_rows(const ProductBundleData& data, const std::vector<double>& t_grid,
                                                double s = 0.0, int threads = 1);

/// Columns t, closed_form_fiber_length, oracle_fiber_length, orthogonality_residual.
void write_bundle_csv(std::ostream& out, const std::vector<BundleOracleRow>& rows);

/// Polar, north and south charts of a circle bundle over the sphere.
using BundleCharts = std::array<MetricChart, 3>;

BundleCharts bundle_charts(const ProductBundleData& data, double fd_step = kDefaultFdStep, int fd_order = 2);
BundleCharts distance_sphere_charts(const SoulAtlas& atlas, double rho0);

/// Sectional scan of the three charts with the same split as
/// nonneg_audit_atlas: half the samples on the band t ∈ [L/4, 3L/4], a
/// quarter on each pole box [−L/4, L/4]², θ over the full circle.
AtlasAuditReport bundle_curvature_scan(const BundleCharts& charts, double length, std::size_t samples,
                                       std::uint64_t seed, double tol, int threads = 1);

}  // namespace soullab
