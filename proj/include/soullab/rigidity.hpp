#pragma once

#include "soullab/quotient.hpp"

#include <Eigen/Dense>

#include <functional>
#include <ostream>
#include <vector>

namespace soullab {

/// One evaluation of (XF)² ≤ (F² + (2/3)·hess_G(X,X))·k at soul parameter t
/// along the unit direction at `angle` in the g_Σ-orthonormal frame
/// (∂_t, ∂_s/|∂_s|).
struct RigidityRecord {
  double t = 0.0;
  double angle = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // lhs − rhs
};

/// Records for every t of the grid and `directions` equally spaced angles,
/// sorted by (t, angle). XF is the derivative of F along the g_Σ-geodesic,
/// hess_G comes from hessian_scalar on the soul chart of t's region. Both are
/// Richardson-extrapolated over the steps d and d/2.
std::vector<RigidityRecord> eq1_records(const SoulAtlas& atlas, const std::vector<double>& t_grid,
                                        int directions = 16, double s = 0.0, int threads = 1,
                                        const HessianOptions& hessian = {});

/// Columns t, angle, lhs, rhs, residual.
void write_rigidity_csv(std::ostream& out, const std::vector<RigidityRecord>& records);

struct EqualityAudit {
  std::vector<RigidityRecord> records;
  double max_abs_residual = 0.0;
  double max_violation = 0.0;  // max(lhs − rhs); > 0 breaks the inequality
  double max_abs_lhs = 0.0;
  double min_k = 0.0;
};

/// Equality audit on an atlas built with fd_order 4. Raises InvalidArgument
/// unless k > 0 at every grid point.
EqualityAudit equality_audit(const QuotientSpec& spec, const std::vector<double>& t_grid, int directions = 16,
                             int threads = 1, double fd_step = kDefaultFdStep, const HessianOptions& hessian = {});

/// Interior uniform grid t_i = L(i + 1/2)/n.
std::vector<double> interior_grid(double length, int n);

// ---------------------------------------------------------------- unit sphere

/// Scalar field on the unit sphere S² ⊂ ℝ³, evaluated at unit vectors.
using SphereField = std::function<double(const Eigen::Vector3d&)>;

/// Gauss–Legendre (30 nodes per panel) in z = cos θ times the trapezoid rule
/// in the azimuth.
struct SphereQuadrature {
  int panels = 2;
  int azimuth_nodes = 64;
};

double sphere_integral(const SphereField& field, const SphereQuadrature& quad = {});

/// Derivatives along great circles through p (5-node stencils of angular
/// step h). The gradient is returned as a tangent vector in ℝ³.
Eigen::Vector3d sphere_gradient(const SphereField& field, const Eigen::Vector3d& p, double h = 1e-3);
double sphere_laplacian(const SphereField& field, const Eigen::Vector3d& p, double h = 3e-3);

/// Point at polar angle θ from `pole` and azimuth s around it.
Eigen::Vector3d sphere_point(const Eigen::Vector3d& pole, double theta, double s);

/// ∫|∇f|² / ∫f². Raises NotMeanZero when |∫f| > mean_tol·√(4π)·‖f‖.
double rayleigh(const SphereField& field, double mean_tol = 1e-4, const SphereQuadrature& quad = {});

struct LinearFit {
  Eigen::Vector3d Z = Eigen::Vector3d::Zero();
  double residual = 0.0;  // ‖F − ⟨p, Z⟩‖ / ‖F‖
};

/// L² projection onto the degree-1 harmonics: Z = (3/4π)∫F·p.
LinearFit fit_linear_eigenfunction(const SphereField& field, double mean_tol = 1e-4,
                                   const SphereQuadrature& quad = {});

/// max |Δf + 2f| for f = ⟨p, Z⟩ over a latitude/longitude grid.
double linear_eigen_residual(const Eigen::Vector3d& Z);

/// Per-great-circle least-squares fits A·cos 2θ + D·θ + C of G over
/// θ ∈ [0, π] measured from Z/|Z|.
struct GreatCircleProfile {
  double amplitude = 0.0;         // mean A
  double amplitude_spread = 0.0;  // max |A_j − A|
  double offset = 0.0;            // mean C
  double offset_spread = 0.0;     // max |C_j − C|
  double drift = 0.0;             // max |D_j|
  double max_deviation = 0.0;     // max |G − fit|
  double amplitude_literal = 0.0;  // |Z|²/4
  double amplitude_trace = 0.0;    // 3|Z|²/8, forced by ΔG when the trace inequality is an equality
};

/// Raises ZeroZ when Z = 0.
GreatCircleProfile great_circle_profile_check(const SphereField& G, const Eigen::Vector3d& Z, int circles = 8,
                                              int samples = 181);

/// |∇F|² − 2F² − (2/3)ΔG at p.
double trace_gap(const SphereField& F, const SphereField& G, const Eigen::Vector3d& p);

struct TraceCheck {
  double max_residual = 0.0;  // max(gap, 0) over the grid
  double max_abs_gap = 0.0;
  Eigen::Vector3d argmax = Eigen::Vector3d::UnitZ();
  double laplacian_integral = 0.0;  // ∫ΔG dvol
};

/// Gap on a latitude/longitude grid that includes both poles.
TraceCheck trace_inequality_check(const SphereField& F, const SphereField& G, int latitudes = 91,
                                  int longitudes = 72, const SphereQuadrature& quad = {});

/// F and G of a soul with constant curvature, normalized to the unit sphere:
/// g_Σ = R²·round, F_unit(θ) = R²F(Rθ), same for G. Profiles are sampled on
/// `nodes` uniform t and interpolated by an even-extended quintic spline.
struct RoundSoulFields {
  SphereField F;
  SphereField G;
  double radius = 1.0;
  double curvature_spread = 0.0;  // max |k·R² − 1| on the sample grid
};

/// Raises InvalidArgument when the soul curvature deviates from 1/R² by more
/// than `round_tol` (relative).
RoundSoulFields round_soul_fields(const SoulAtlas& atlas, int nodes = 129, int threads = 1, double round_tol = 1e-3);

}  // namespace soullab
