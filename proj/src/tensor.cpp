#include "soullab/tensor.hpp"

#include "soullab/error.hpp"
#include "soullab/parallel.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace soullab {

namespace {

std::string describe(const Vec& p) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

Mat checked_metric(const MetricChart& chart, const Vec& p) {
  Mat g = chart.metric(p);
  if (!g.allFinite()) {
    raise(ErrorKind::SingularMetric, "non-finite metric components at " + describe(p) + " in chart '" + chart.name() + "'");
  }
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    raise(ErrorKind::SingularMetric, "metric not positive definite at " + describe(p) + " in chart '" + chart.name() + "'");
  }
  return g;
}

void require_margin(const MetricChart& chart, const Vec& p, double multiple) {
  if (p.size() != chart.dim()) raise(ErrorKind::InvalidArgument, "point dimension does not match chart");
  if (chart.boundary_distance(p) < multiple * chart.fd_step()) {
    raise(ErrorKind::PointTooCloseToBoundary,
          "point " + describe(p) + " is closer than " + std::to_string(multiple) +
              " fd steps to the boundary of chart '" + chart.name() + "'");
  }
}

// Weights of the 4th-order first-derivative stencil at offsets -2, -1, 1, 2.
constexpr std::array<int, 4> kOffsets4 = {-2, -1, 1, 2};
constexpr std::array<double, 4> kFirst4 = {1.0, -8.0, 8.0, -1.0};

}  // namespace

Vec Christoffel::contract(const Vec& a, const Vec& b) const {
  Vec out = Vec::Zero(dim_);
  for (int k = 0; k < dim_; ++k) {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) s += (*this)(k, i, j) * a[i] * b[j];
    }
    out[k] = s;
  }
  return out;
}

double Riemann::contract(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; j < dim_; ++j) {
      if (b[j] == 0.0) continue;
      for (int k = 0; k < dim_; ++k) {
        if (c[k] == 0.0) continue;
        for (int l = 0; l < dim_; ++l) s += (*this)(i, j, k, l) * a[i] * b[j] * c[k] * d[l];
      }
    }
  }
  return s;
}

double Riemann::symmetry_residual() const {
  double scale = 1.0;
  double worst = 0.0;
  const int n = dim_;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double r = (*this)(i, j, k, l);
          scale = std::max(scale, std::abs(r));
          worst = std::max({worst, std::abs(r + (*this)(j, i, k, l)), std::abs(r + (*this)(i, j, l, k)),
                            std::abs(r - (*this)(k, l, i, j)),
                            std::abs(r + (*this)(j, k, i, l) + (*this)(k, i, j, l))});
        }
  return worst / scale;
}

MetricJet metric_jet(const MetricChart& chart, const Vec& p, bool second_derivatives) {
  const int n = chart.dim();
  const double h = chart.fd_step();
  MetricJet jet;
  jet.g = checked_metric(chart, p);
  auto at = [&](int k, double a, int l, double b) {
    Vec q = p;
    q[k] += a * h;
    if (l >= 0) q[l] += b * h;
    return checked_metric(chart, q);
  };
  if (chart.fd_order() == 2) {
    // First derivatives always use the five-point stencil; the connection
    // error would otherwise dominate geodesic drift.
    for (int k = 0; k < n; ++k) {
      const Mat plus = at(k, 1, -1, 0);
      const Mat minus = at(k, -1, -1, 0);
      jet.d[static_cast<std::size_t>(k)] = (at(k, -2, -1, 0) - 8.0 * minus + 8.0 * plus - at(k, 2, -1, 0)) / (12.0 * h);
      if (second_derivatives) {
        jet.dd[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = (plus - 2.0 * jet.g + minus) / (h * h);
      }
    }
    if (second_derivatives) {
      for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
          const Mat m = (at(k, 1, l, 1) - at(k, 1, l, -1) - at(k, -1, l, 1) + at(k, -1, l, -1)) / (4.0 * h * h);
          jet.dd[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = m;
          jet.dd[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = m;
        }
      }
    }
    return jet;
  }

  for (int k = 0; k < n; ++k) {
    const Mat m2 = at(k, -2, -1, 0), m1 = at(k, -1, -1, 0), p1 = at(k, 1, -1, 0), p2 = at(k, 2, -1, 0);
    jet.d[static_cast<std::size_t>(k)] = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    if (second_derivatives) {
      jet.dd[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] =
          (-m2 + 16.0 * m1 - 30.0 * jet.g + 16.0 * p1 - p2) / (12.0 * h * h);
    }
  }
  if (second_derivatives) {
    for (int k = 0; k < n; ++k) {
      for (int l = k + 1; l < n; ++l) {
        Mat m = Mat::Zero(n, n);
        for (std::size_t a = 0; a < 4; ++a) {
          for (std::size_t b = 0; b < 4; ++b) {
            m += (kFirst4[a] * kFirst4[b]) * at(k, kOffsets4[a], l, kOffsets4[b]);
          }
        }
        m /= 144.0 * h * h;
        jet.dd[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = m;
        jet.dd[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = m;
      }
    }
  }
  return jet;
}

Christoffel christoffel(const MetricJet& jet) {
  const int n = static_cast<int>(jet.g.rows());
  const Mat ginv = jet.g.inverse();
  Christoffel gamma(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // lowered[l] = Γ_{l,ij}
      Vec lowered(n);
      for (int l = 0; l < n; ++l) {
        lowered[l] = 0.5 * (jet.d[static_cast<std::size_t>(i)](j, l) + jet.d[static_cast<std::size_t>(j)](i, l) -
                            jet.d[static_cast<std::size_t>(l)](i, j));
      }
      const Vec raised = ginv * lowered;
      for (int k = 0; k < n; ++k) {
        gamma(k, i, j) = raised[k];
        gamma(k, j, i) = raised[k];
      }
    }
  }
  return gamma;
}

Christoffel christoffel(const MetricChart& chart, const Vec& p) {
  require_margin(chart, p, 2.0);
  return christoffel(metric_jet(chart, p, false));
}

Riemann riemann(const MetricJet& jet) {
  const int n = static_cast<int>(jet.g.rows());
  const Christoffel gamma = christoffel(jet);
  auto d2 = [&](int a, int b, int c, int d) {
    return jet.dd[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)](a, b);
  };
  Riemann r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.5 * (d2(i, k, j, l) + d2(j, l, i, k) - d2(i, l, j, k) - d2(j, k, i, l));
          for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
              v += jet.g(p, q) * (gamma(p, i, k) * gamma(q, j, l) - gamma(p, j, k) * gamma(q, i, l));
            }
          }
          r(i, j, k, l) = v;
        }
  return r;
}

Riemann riemann(const MetricChart& chart, const Vec& p) {
  require_margin(chart, p, 3.0);
  return riemann(metric_jet(chart, p, true));
}

double sectional(const Riemann& r, const Mat& g, const Vec& u, const Vec& v) {
  const double uu = u.dot(g * u);
  const double vv = v.dot(g * v);
  const double uv = u.dot(g * v);
  const double gram = uu * vv - uv * uv;
  if (!(gram > 1e-12 * uu * vv)) {
    raise(ErrorKind::DegeneratePlane, "spanning vectors are (nearly) linearly dependent");
  }
  return r.contract(u, v, v, u) / gram;
}

double sectional(const MetricChart& chart, const TangentPlane& plane) {
  const Riemann r = riemann(chart, plane.point);
  return sectional(r, chart.metric(plane.point), plane.u, plane.v);
}

std::vector<GeodesicState> geodesic(const MetricChart& chart, const Vec& p, const Vec& v, double arclen,
                                    int steps) {
  if (steps < 1) raise(ErrorKind::InvalidArgument, "geodesic needs at least one step");
  if (p.size() != chart.dim() || v.size() != chart.dim()) {
    raise(ErrorKind::InvalidArgument, "geodesic point/velocity dimension mismatch");
  }
  const double margin = 3.0 * chart.fd_step();
  auto accel = [&](const Vec& x, const Vec& vel) -> Vec {
    if (chart.boundary_distance(x) < margin) {
      raise(ErrorKind::LeftChartDomain, "geodesic left chart '" + chart.name() + "' near " + describe(x));
    }
    return -christoffel(metric_jet(chart, x, false)).contract(vel, vel);
  };
  const double dt = arclen / steps;
  std::vector<GeodesicState> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back({p, v});
  Vec x = p, vel = v;
  for (int s = 0; s < steps; ++s) {
    const Vec k1x = vel;
    const Vec k1v = accel(x, vel);
    const Vec k2x = vel + 0.5 * dt * k1v;
    const Vec k2v = accel(x + 0.5 * dt * k1x, k2x);
    const Vec k3x = vel + 0.5 * dt * k2v;
    const Vec k3v = accel(x + 0.5 * dt * k2x, k3x);
    const Vec k4x = vel + dt * k3v;
    const Vec k4v = accel(x + dt * k3x, k4x);
    x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    vel += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (chart.boundary_distance(x) < margin) {
      raise(ErrorKind::LeftChartDomain, "geodesic left chart '" + chart.name() + "' near " + describe(x));
    }
    path.push_back({x, vel});
  }
  return path;
}

std::vector<GeodesicState> geodesic(const MetricChart& chart, const Vec& p, const Vec& v, double arclen) {
  const int steps = std::max(1, static_cast<int>(std::ceil(1000.0 * std::abs(arclen))));
  return geodesic(chart, p, v, arclen, steps);
}

namespace {

// field values at geodesic parameters -2δ, -δ, 0, δ, 2δ
std::array<double, 5> stencil_values(const MetricChart& chart, const ScalarField& field, const Vec& p,
                                     const Vec& x, const HessianOptions& options) {
  int steps = std::max(2, static_cast<int>(std::ceil(options.steps_per_unit * 2.0 * options.step)));
  if (steps % 2) ++steps;
  const auto fwd = geodesic(chart, p, x, 2.0 * options.step, steps);
  const auto bwd = geodesic(chart, p, Vec(-x), 2.0 * options.step, steps);
  const auto half = static_cast<std::size_t>(steps / 2);
  const auto full = static_cast<std::size_t>(steps);
  std::array<double, 5> f = {field(bwd[full].x), field(bwd[half].x), field(p), field(fwd[half].x), field(fwd[full].x)};
  for (double value : f) {
    if (!std::isfinite(value)) raise(ErrorKind::NonFiniteFieldValue, "field is not finite along geodesic");
  }
  return f;
}

}  // namespace

double hessian_scalar(const MetricChart& chart, const ScalarField& field, const Vec& p, const Vec& x,
                      const HessianOptions& options) {
  const auto f = stencil_values(chart, field, p, x, options);
  const double d = options.step;
  return (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * d * d);
}

double directional_derivative(const MetricChart& chart, const ScalarField& field, const Vec& p, const Vec& x,
                              const HessianOptions& options) {
  const auto f = stencil_values(chart, field, p, x, options);
  const double d = options.step;
  return (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * d);
}

std::vector<double> simpson_weights(int n, double width) {
  if (n < 3 || n % 2 == 0) raise(ErrorKind::InvalidArgument, "Simpson rule needs an odd node count >= 3");
  const double h = width / (n - 1);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    w[static_cast<std::size_t>(i)] = c * h / 3.0;
  }
  return w;
}

double integrate_scalar(const MetricChart& chart, const ScalarField& field, std::span<const int> nodes) {
  const int n = chart.dim();
  if (static_cast<int>(nodes.size()) != n) raise(ErrorKind::InvalidArgument, "one node count per coordinate required");
  std::vector<std::vector<double>> weights;
  for (int d = 0; d < n; ++d) {
    weights.push_back(simpson_weights(nodes[static_cast<std::size_t>(d)], chart.box()[static_cast<std::size_t>(d)].width()));
  }
  std::array<int, 4> idx{};
  double total = 0.0;
  Vec p(n);
  while (true) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const auto& iv = chart.box()[static_cast<std::size_t>(d)];
      const int k = idx[static_cast<std::size_t>(d)];
      p[d] = iv.lo + iv.width() * k / (nodes[static_cast<std::size_t>(d)] - 1);
      w *= weights[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)];
    }
    const double value = field(p);
    if (!std::isfinite(value)) raise(ErrorKind::NonFiniteFieldValue, "integrand is not finite at " + describe(p));
    const double det = chart.metric(p).determinant();
    total += w * value * std::sqrt(std::max(det, 0.0));
    int d = 0;
    while (d < n && ++idx[static_cast<std::size_t>(d)] == nodes[static_cast<std::size_t>(d)]) {
      idx[static_cast<std::size_t>(d)] = 0;
      ++d;
    }
    if (d == n) break;
  }
  return total;
}

CurvatureReport min_sectional_scan(const MetricChart& chart, const PlaneSampler& sampler, double tol, int threads) {
  const auto& region = sampler.region();
  if (static_cast<int>(region.size()) != chart.dim()) raise(ErrorKind::InvalidArgument, "sampler region dimension mismatch");
  const double margin = 5.0 * chart.fd_step();
  for (int d = 0; d < chart.dim(); ++d) {
    const auto& iv = chart.box()[static_cast<std::size_t>(d)];
    if (iv.periodic) continue;
    const auto& r = region[static_cast<std::size_t>(d)];
    if (r.lo < iv.lo + margin || r.hi > iv.hi - margin) {
      raise(ErrorKind::PointTooCloseToBoundary,
            "sampler region violates the 5 fd-step margin of chart '" + chart.name() + "'");
    }
  }
  const std::size_t n = sampler.size();
  std::vector<double> values(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const PlaneSample s = sampler.sample(i, chart);
    values[i] = sectional(riemann(chart, s.point), chart.metric(s.point), s.u, s.v);
  });
  std::size_t imin = 0, imax = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (values[i] < values[imin]) imin = i;
    if (values[i] > values[imax]) imax = i;
  }
  CurvatureReport report;
  report.sample_count = n;
  report.min_K = values[imin];
  report.max_K = values[imax];
  const PlaneSample smin = sampler.sample(imin, chart);
  const PlaneSample smax = sampler.sample(imax, chart);
  report.argmin = {smin.point, smin.u, smin.v};
  report.argmax = {smax.point, smax.u, smax.v};
  report.tolerance = tol;
  report.pass = report.min_K >= -tol;
  return report;
}

}  // namespace soullab
