#pragma once

#include "soullab/chart.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace soullab {

/// Value and first two derivatives of a one-variable profile.
struct Jet1 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

enum class Pole { North, South };

/// Warping function f on [0, L] of a rotationally symmetric sphere
/// dt² + f(t)² ds². The meridian generator φ = ∫√(1 − f′²) is never stored.
class SphereProfile {
 public:
  /// f = R sin(t/R), L = πR.
  static SphereProfile round(double radius);

  /// Spline profile from samples of f on uniform knots over [0, L] (first and
  /// last samples must be 0, at least 9 knots). Stored as f = ψ·u with
  /// ψ = (L/π) sin(πt/L) and u a quintic B-spline with u = 1, u′ = 0 at the
  /// poles and u″ there fitted from the adjacent knots. Quintic keeps the
  /// metric C⁴, so finite-difference curvature stays O(h²) across knots.
  static SphereProfile spline(double length, std::vector<double> samples);

  /// f / √(1 + κf²). κ > 0 shrinks along the rotation field; κ < 0 inverts
  /// that shrinking and requires 1 + κf² > 0 everywhere.
  SphereProfile warped(double kappa) const;

  double length() const;
  Jet1 eval(double t) const;
  double f(double t) const { return eval(t).value; }

  /// (f(r)/r − 1)/r² at distance r from the given pole, stable as r → 0.
  double pole_excess(double r, Pole pole) const;

  /// Largest f over a uniform grid of `samples` points.
  double max_f(int samples = 2001) const;

  /// Short description such as "round(R=1)" used in reports.
  std::string describe() const;

  /// Checks pole closure, positivity, |f′| ≤ 1 and (optionally) f″ ≤ 0 on a
  /// grid. Raises InvalidProfile naming the failed condition. The slope bound
  /// only matters for a meridian generator; a bare metric may skip it.
  void validate(bool require_nonneg_curvature, bool require_arclength_bound = true) const;

  struct Impl;

 private:
  explicit SphereProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Fiber warping function b on [0, ρ_max] of a rotationally symmetric plane
/// dρ² + b(ρ)² dθ².
class PlaneProfile {
 public:
  using Evaluator = std::function<Jet1(double)>;

  static PlaneProfile flat(double rho_max);
  /// b = R sin(ρ/R); requires ρ_max < πR.
  static PlaneProfile cap(double radius, double rho_max);
  /// b = R tanh(ρ/R), vertex curvature 2/R².
  static PlaneProfile tanh(double radius, double rho_max);
  /// b = R sinh(ρ/R). Negatively curved; exists to exercise validation.
  static PlaneProfile sinh(double radius, double rho_max);
  /// Arbitrary profile. The vertex limit is computed by direct evaluation.
  static PlaneProfile custom(std::string name, double rho_max, Evaluator evaluator);

  double rho_max() const;
  Jet1 eval(double rho) const;
  double b(double rho) const { return eval(rho).value; }

  /// (b(ρ)/ρ − 1)/ρ², stable as ρ → 0.
  double ratio_excess(double rho) const;

  /// Gaussian curvature at the vertex: −6·b₃ from a least-squares fit of
  /// (b/ρ − 1)/ρ² = b₃ + b₅ρ² + b₇ρ⁴ on small ρ.
  double vertex_curvature() const;

  std::string describe() const;

  /// Checks b(0) = 0, b′(0) = 1 and odd-series regularity (NonSmoothVertex),
  /// positivity and (optionally) b″ ≤ 0 (InvalidProfile).
  void validate(bool require_nonneg_curvature) const;

  struct Impl;

 private:
  explicit PlaneProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Angular speeds of the diagonal action on the sphere and plane factors;
/// the line factor moves at unit speed.
struct KillingSpec {
  double C1 = 0.0;
  double C2 = 0.0;
};

/// Polar chart (t, s) ∈ [0, L] × [0, 2π) with metric dt² + f² ds².
MetricChart sphere_chart(const SphereProfile& prof, double fd_step = kDefaultFdStep);

/// Cartesian chart around a pole: (x, y) = r(cos s, ±sin s) with r the
/// distance to the pole (minus sign at the south pole, so both charts keep
/// the orientation of (t, s)). Box half-width is `half_width`.
MetricChart sphere_pole_chart(const SphereProfile& prof, Pole pole, double half_width,
                              double fd_step = kDefaultFdStep);

/// Default pole-chart half-width 0.4·L.
double default_pole_half_width(const SphereProfile& prof);

/// Cartesian chart of the plane on [−ρ_max/√2, ρ_max/√2]², smooth at the vertex.
MetricChart plane_chart_cartesian(const PlaneProfile& prof, double fd_step = kDefaultFdStep);

/// Polar chart (ρ, θ) ∈ [0, ρ_max] × [0, 2π) with metric dρ² + b² dθ².
MetricChart plane_chart_polar(const PlaneProfile& prof, double fd_step = kDefaultFdStep);

/// Cartesian metric δ + m·w wᵀ with w = (−y, x) for a rotationally
/// symmetric warping with (warp(r)/r − 1)/r² = excess.
Mat rotational_cartesian_metric(double x, double y, double excess);

/// |C|·f(t): norm of C times the unit-speed rotation field.
double killing_norm(const SphereProfile& prof, double C, double t);

using VectorField = std::function<Vec(const Vec&)>;

/// Shrinks the metric along V: h(u,w) − h(u,V)h(w,V)/(a² + |V|²).
MetricChart cheeger_rescale(const MetricChart& chart, VectorField V, double a);

/// a²·x2/(a² + x2).
double rescaled_norm(double x2_g0, double a);

}  // namespace soullab
