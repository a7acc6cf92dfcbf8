#pragma once

#include "soullab/chart.hpp"
#include "soullab/sampling.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace soullab {

/// Metric with central-difference first and second derivatives at a point.
struct MetricJet {
  Mat g;
  std::array<Mat, 4> d;                   // d[k] = ∂_k g
  std::array<std::array<Mat, 4>, 4> dd;   // dd[k][l] = ∂_k ∂_l g (symmetric in k, l)
};

/// Levi-Civita connection coefficients Γ^k_{ij}.
class Christoffel {
 public:
  explicit Christoffel(int dim) : dim_(dim) { data_.fill(0.0); }

  int dim() const { return dim_; }
  double operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }
  double& operator()(int k, int i, int j) { return data_[index(k, i, j)]; }

  /// Γ^k_{ij} a^i b^j
  Vec contract(const Vec& a, const Vec& b) const;

 private:
  static std::size_t index(int k, int i, int j) { return static_cast<std::size_t>((k * 4 + i) * 4 + j); }
  int dim_;
  std::array<double, 64> data_;
};

/// Fully covariant curvature tensor R_{ijkl} = <R(∂_i, ∂_j)∂_k, ∂_l> with
/// R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]. Sectional curvature is R(u,v,v,u)/|u∧v|².
class Riemann {
 public:
  explicit Riemann(int dim) : dim_(dim) { data_.fill(0.0); }

  int dim() const { return dim_; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }

  double contract(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const;

  /// Largest violation of antisymmetry, pair symmetry and first Bianchi,
  /// divided by the largest component magnitude (or 1 if that is smaller).
  double symmetry_residual() const;

 private:
  static std::size_t index(int i, int j, int k, int l) {
    return static_cast<std::size_t>(((i * 4 + j) * 4 + k) * 4 + l);
  }
  int dim_;
  std::array<double, 256> data_;
};

struct TangentPlane {
  Vec point;
  Vec u;
  Vec v;
};

struct CurvatureReport {
  std::size_t sample_count = 0;
  double min_K = 0.0;
  double max_K = 0.0;
  TangentPlane argmin;
  TangentPlane argmax;
  double tolerance = 0.0;
  bool pass = false;
};

struct GeodesicState {
  Vec x;
  Vec v;
};

using ScalarField = std::function<double(const Vec&)>;

struct HessianOptions {
  double step = 0.05;         // geodesic arclength between stencil nodes
  int steps_per_unit = 1000;  // RK4 steps per unit arclength
};

MetricJet metric_jet(const MetricChart& chart, const Vec& p, bool second_derivatives);

Christoffel christoffel(const MetricChart& chart, const Vec& p);
Christoffel christoffel(const MetricJet& jet);

Riemann riemann(const MetricChart& chart, const Vec& p);
Riemann riemann(const MetricJet& jet);

double sectional(const MetricChart& chart, const TangentPlane& plane);
double sectional(const Riemann& r, const Mat& g, const Vec& u, const Vec& v);

/// RK4 integration of the geodesic equation with `steps` fixed steps over
/// parameter length `arclen`. Returns steps + 1 states (initial state first).
std::vector<GeodesicState> geodesic(const MetricChart& chart, const Vec& p, const Vec& v,
                                    double arclen, int steps);

/// Default step count: 1000 per unit arclength.
std::vector<GeodesicState> geodesic(const MetricChart& chart, const Vec& p, const Vec& v,
                                    double arclen);

/// Second derivative of field∘γ at 0 for the geodesic with γ'(0) = x,
/// i.e. the covariant hessian applied to (x, x). Five-node stencil.
double hessian_scalar(const MetricChart& chart, const ScalarField& field, const Vec& p,
                      const Vec& x, const HessianOptions& options = {});

/// First derivative of field∘γ at 0 along the geodesic with γ'(0) = x.
double directional_derivative(const MetricChart& chart, const ScalarField& field, const Vec& p,
                              const Vec& x, const HessianOptions& options = {});

/// Composite Simpson rule for ∫ field √det g over the chart box.
/// `nodes` holds one odd node count (≥ 3) per coordinate. Error is O(h⁴)
/// for smooth integrands.
double integrate_scalar(const MetricChart& chart, const ScalarField& field,
                        std::span<const int> nodes);

/// Exact min / max of the sectional curvature over the sampler's planes.
CurvatureReport min_sectional_scan(const MetricChart& chart, const PlaneSampler& sampler,
                                   double tol, int threads = 1);

/// Simpson weights for `n` (odd) equally spaced nodes over an interval of width `width`.
std::vector<double> simpson_weights(int n, double width);

}  // namespace soullab
