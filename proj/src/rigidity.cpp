#include "soullab/rigidity.hpp"

#include "soullab/error.hpp"
#include "soullab/parallel.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace soullab {

using std::numbers::pi;

std::vector<double> interior_grid(double length, int n) {
  if (n < 1) raise(ErrorKind::InvalidArgument, "grid needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = length * (i + 0.5) / n;
  return grid;
}

std::vector<RigidityRecord> eq1_records(const SoulAtlas& atlas, const std::vector<double>& t_grid, int directions,
                                        double s, int threads, const HessianOptions& hessian) {
  if (directions < 1) raise(ErrorKind::InvalidArgument, "eq1_records needs at least one direction");
  const auto n_dir = static_cast<std::size_t>(directions);
  std::vector<RigidityRecord> out(t_grid.size() * n_dir);
  parallel_for(t_grid.size(), threads, [&](std::size_t i) {
    const double t = t_grid[i];
    const SoulRegion region = atlas.region_for(t);
    const MetricChart& chart = atlas.soul_chart(region);
    const Vec p = atlas.soul_point(region, t, s);
    const Mat g = chart.metric(p);
    const auto frame = atlas.polar_frame(region, t, s);
    const Vec e1 = frame[0] / std::sqrt(frame[0].dot(g * frame[0]));
    const Vec e2 = frame[1] / std::sqrt(frame[1].dot(g * frame[1]));
    const ScalarField F = [&atlas, region](const Vec& q) { return atlas.curvatures(region, q).F; };
    const ScalarField G = [&atlas, region](const Vec& q) { return atlas.curvatures(region, q).G; };
    const SoulCurvatures here = atlas.curvatures(region, p);
    HessianOptions half = hessian;
    half.step = 0.5 * hessian.step;
    // Richardson over steps d and d/2: the 5-point stencils are O(d^4) and
    // near the poles d is not small against t.
    const auto extrapolate = [](double coarse, double fine) { return (16.0 * fine - coarse) / 15.0; };
    for (std::size_t j = 0; j < n_dir; ++j) {
      const double angle = 2.0 * pi * static_cast<double>(j) / static_cast<double>(n_dir);
      const Vec X = std::cos(angle) * e1 + std::sin(angle) * e2;
      const double XF = extrapolate(directional_derivative(chart, F, p, X, hessian),
                                    directional_derivative(chart, F, p, X, half));
      const double hessG =
          extrapolate(hessian_scalar(chart, G, p, X, hessian), hessian_scalar(chart, G, p, X, half));
      RigidityRecord& r = out[i * n_dir + j];
      r.t = t;
      r.angle = angle;
      r.lhs = XF * XF;
      r.rhs = (here.F * here.F + (2.0 / 3.0) * hessG) * here.k;
      r.residual = r.lhs - r.rhs;
    }
  });
  std::stable_sort(out.begin(), out.end(), [](const RigidityRecord& a, const RigidityRecord& b) {
    return a.t != b.t ? a.t < b.t : a.angle < b.angle;
  });
  return out;
}

void write_rigidity_csv(std::ostream& out, const std::vector<RigidityRecord>& records) {
  out << "t,angle,lhs,rhs,residual\n";
  for (const RigidityRecord& r : records) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t, r.angle, r.lhs, r.rhs, r.residual);
  }
}

EqualityAudit equality_audit(const QuotientSpec& spec, const std::vector<double>& t_grid, int directions, int threads,
                             double fd_step, const HessianOptions& hessian) {
  spec.validate();
  if (t_grid.empty()) raise(ErrorKind::EmptySample, "equality audit needs a nonempty grid");
  const SoulAtlas atlas(spec, fd_step, 4);
  EqualityAudit out;
  out.min_k = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const double k = atlas.curvatures_at(t).k;
    out.min_k = std::min(out.min_k, k);
    if (!(k > 0.0)) raise(ErrorKind::InvalidArgument, fmt::format("soul curvature k={:.6g} <= 0 at t={:.6g}", k, t));
  }
  out.records = eq1_records(atlas, t_grid, directions, 0.0, threads, hessian);
  for (const RigidityRecord& r : out.records) {
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r.residual));
    out.max_violation = std::max(out.max_violation, r.residual);
    out.max_abs_lhs = std::max(out.max_abs_lhs, std::abs(r.lhs));
  }
  return out;
}

// ---------------------------------------------------------------- unit sphere

namespace {

struct Node {
  Eigen::Vector3d p;
  double w;
};

std::vector<Node> quadrature_nodes(const SphereQuadrature& quad) {
  if (quad.panels < 1 || quad.azimuth_nodes < 3) raise(ErrorKind::InvalidArgument, "sphere quadrature too coarse");
  using GL = boost::math::quadrature::gauss<double, 30>;
  std::vector<double> x, w;
  for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
    x.push_back(GL::abscissa()[i]);
    w.push_back(GL::weights()[i]);
    x.push_back(-GL::abscissa()[i]);
    w.push_back(GL::weights()[i]);
  }
  std::vector<Node> nodes;
  const double panel = 2.0 / quad.panels;
  const double ds = 2.0 * pi / quad.azimuth_nodes;
  for (int k = 0; k < quad.panels; ++k) {
    const double mid = -1.0 + panel * (k + 0.5);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = mid + 0.5 * panel * x[i];
      const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int j = 0; j < quad.azimuth_nodes; ++j) {
        const double s = ds * j;
        nodes.push_back({{rxy * std::cos(s), rxy * std::sin(s), z}, 0.5 * panel * w[i] * ds});
      }
    }
  }
  return nodes;
}

// Orthonormal tangent pair at p; deterministic in p.
std::pair<Eigen::Vector3d, Eigen::Vector3d> tangent_frame(const Eigen::Vector3d& p) {
  const Eigen::Vector3d helper = std::abs(p.x()) > 0.9 ? Eigen::Vector3d::UnitY() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d e1 = (helper - helper.dot(p) * p).normalized();
  return {e1, p.cross(e1)};
}

double along(const SphereField& f, const Eigen::Vector3d& p, const Eigen::Vector3d& e, double tau) {
  return f(std::cos(tau) * p + std::sin(tau) * e);
}

double check_mean_zero(const SphereField& field, double mean_tol, const std::vector<Node>& nodes) {
  double mean = 0.0, sq = 0.0;
  for (const Node& n : nodes) {
    const double v = field(n.p);
    if (!std::isfinite(v)) raise(ErrorKind::NonFiniteFieldValue, "sphere field is not finite");
    mean += n.w * v;
    sq += n.w * v * v;
  }
  const double bound = mean_tol * std::sqrt(4.0 * pi * sq);
  if (!(std::abs(mean) <= bound)) {
    raise(ErrorKind::NotMeanZero, fmt::format("integral {:.6g} exceeds {:.6g} (mean_tol {:.3g} of the L2 norm)", mean,
                                              bound, mean_tol));
  }
  return sq;
}

}  // namespace

double sphere_integral(const SphereField& field, const SphereQuadrature& quad) {
  double sum = 0.0;
  for (const Node& n : quadrature_nodes(quad)) sum += n.w * field(n.p);
  return sum;
}

Eigen::Vector3d sphere_point(const Eigen::Vector3d& pole, double theta, double s) {
  const Eigen::Vector3d z = pole.normalized();
  const auto [e1, e2] = tangent_frame(z);
  return std::cos(theta) * z + std::sin(theta) * (std::cos(s) * e1 + std::sin(s) * e2);
}

Eigen::Vector3d sphere_gradient(const SphereField& field, const Eigen::Vector3d& p, double h) {
  const auto [e1, e2] = tangent_frame(p);
  const auto d = [&](const Eigen::Vector3d& e) {
    return (along(field, p, e, -2 * h) - 8 * along(field, p, e, -h) + 8 * along(field, p, e, h) -
            along(field, p, e, 2 * h)) /
           (12 * h);
  };
  return d(e1) * e1 + d(e2) * e2;
}

double sphere_laplacian(const SphereField& field, const Eigen::Vector3d& p, double h) {
  const auto [e1, e2] = tangent_frame(p);
  const double f0 = field(p);
  const auto dd = [&](const Eigen::Vector3d& e) {
    return (-along(field, p, e, -2 * h) + 16 * along(field, p, e, -h) - 30 * f0 + 16 * along(field, p, e, h) -
            along(field, p, e, 2 * h)) /
           (12 * h * h);
  };
  return dd(e1) + dd(e2);
}

double rayleigh(const SphereField& field, double mean_tol, const SphereQuadrature& quad) {
  const std::vector<Node> nodes = quadrature_nodes(quad);
  const double sq = check_mean_zero(field, mean_tol, nodes);
  if (!(sq > 0.0)) raise(ErrorKind::NotMeanZero, "rayleigh quotient of the zero field");
  double grad = 0.0;
  for (const Node& n : nodes) grad += n.w * sphere_gradient(field, n.p).squaredNorm();
  return grad / sq;
}

LinearFit fit_linear_eigenfunction(const SphereField& field, double mean_tol, const SphereQuadrature& quad) {
  const std::vector<Node> nodes = quadrature_nodes(quad);
  const double sq = check_mean_zero(field, mean_tol, nodes);
  LinearFit fit;
  for (const Node& n : nodes) fit.Z += n.w * field(n.p) * n.p;
  fit.Z *= 3.0 / (4.0 * pi);
  if (!(sq > 0.0)) return fit;
  double rest = 0.0;
  for (const Node& n : nodes) {
    const double d = field(n.p) - n.p.dot(fit.Z);
    rest += n.w * d * d;
  }
  fit.residual = std::sqrt(rest / sq);
  return fit;
}

double linear_eigen_residual(const Eigen::Vector3d& Z) {
  const SphereField f = [Z](const Eigen::Vector3d& p) { return p.dot(Z); };
  double worst = 0.0;
  for (int i = 0; i <= 18; ++i) {
    for (int j = 0; j < 24; ++j) {
      const Eigen::Vector3d p = sphere_point(Eigen::Vector3d::UnitZ(), pi * i / 18.0, 2.0 * pi * j / 24.0);
      worst = std::max(worst, std::abs(sphere_laplacian(f, p) + 2.0 * f(p)));
    }
  }
  return worst;
}

GreatCircleProfile great_circle_profile_check(const SphereField& G, const Eigen::Vector3d& Z, int circles,
                                              int samples) {
  const double z2 = Z.squaredNorm();
  if (!(z2 > 0.0)) raise(ErrorKind::ZeroZ, "great-circle profile needs Z != 0");
  if (circles < 1 || samples < 4) raise(ErrorKind::InvalidArgument, "great-circle profile needs circles >= 1 and samples >= 4");
  GreatCircleProfile out;
  out.amplitude_literal = z2 / 4.0;
  out.amplitude_trace = 3.0 * z2 / 8.0;
  std::vector<Eigen::Vector3d> coef;
  Eigen::MatrixXd A(samples, 3);
  Eigen::VectorXd y(samples);
  for (int c = 0; c < circles; ++c) {
    const double s = pi * c / circles;  // half-turn covers every circle through Z once
    for (int i = 0; i < samples; ++i) {
      const double theta = pi * i / (samples - 1);
      A(i, 0) = std::cos(2.0 * theta);
      A(i, 1) = theta;
      A(i, 2) = 1.0;
      y[i] = G(sphere_point(Z, theta, s));
    }
    const Eigen::Vector3d x = A.colPivHouseholderQr().solve(y);
    out.max_deviation = std::max(out.max_deviation, (A * x - y).cwiseAbs().maxCoeff());
    out.drift = std::max(out.drift, std::abs(x[1]));
    coef.push_back(x);
  }
  for (const auto& x : coef) {
    out.amplitude += x[0] / circles;
    out.offset += x[2] / circles;
  }
  for (const auto& x : coef) {
    out.amplitude_spread = std::max(out.amplitude_spread, std::abs(x[0] - out.amplitude));
    out.offset_spread = std::max(out.offset_spread, std::abs(x[2] - out.offset));
  }
  return out;
}

double trace_gap(const SphereField& F, const SphereField& G, const Eigen::Vector3d& p) {
  const double f = F(p);
  return sphere_gradient(F, p).squaredNorm() - 2.0 * f * f - (2.0 / 3.0) * sphere_laplacian(G, p);
}

TraceCheck trace_inequality_check(const SphereField& F, const SphereField& G, int latitudes, int longitudes,
                                  const SphereQuadrature& quad) {
  if (latitudes < 2 || longitudes < 1) raise(ErrorKind::InvalidArgument, "trace check grid too coarse");
  TraceCheck out;
  out.max_residual = -1.0;
  for (int i = 0; i < latitudes; ++i) {
    for (int j = 0; j < longitudes; ++j) {
      const Eigen::Vector3d p =
          sphere_point(Eigen::Vector3d::UnitZ(), pi * i / (latitudes - 1), 2.0 * pi * j / longitudes);
      const double gap = trace_gap(F, G, p);
      out.max_abs_gap = std::max(out.max_abs_gap, std::abs(gap));
      if (gap > out.max_residual) {
        out.max_residual = gap;
        out.argmax = p;
      }
    }
  }
  out.max_residual = std::max(0.0, out.max_residual);
  out.laplacian_integral = sphere_integral([&](const Eigen::Vector3d& p) { return sphere_laplacian(G, p); }, quad);
  return out;
}

RoundSoulFields round_soul_fields(const SoulAtlas& atlas, int nodes, int threads, double round_tol) {
  if (nodes < 17) raise(ErrorKind::InvalidArgument, "round soul fields need at least 17 nodes");
  const double L = atlas.length();
  const double R = L / pi;
  const auto n = static_cast<std::size_t>(nodes);
  const double h = L / (nodes - 1);
  std::vector<SoulCurvatures> curv(n);
  parallel_for(n, threads, [&](std::size_t i) { curv[i] = atlas.curvatures_at(h * static_cast<double>(i)); });

  RoundSoulFields out;
  out.radius = R;
  for (const SoulCurvatures& c : curv) out.curvature_spread = std::max(out.curvature_spread, std::abs(c.k * R * R - 1.0));
  if (!(out.curvature_spread <= round_tol)) {
    raise(ErrorKind::InvalidArgument,
          fmt::format("soul is not round: k*R^2 deviates from 1 by {:.3g} (tolerance {:.3g})", out.curvature_spread, round_tol));
  }

  // Smooth rotationally symmetric fields are even in t about both poles;
  // padding by reflection keeps the spline's endpoint estimates away from [0, L].
  constexpr int kPad = 10;
  const auto spline = [&](double SoulCurvatures::*member) {
    std::vector<double> y;
    for (int i = -kPad; i < nodes + kPad; ++i) {
      int k = i < 0 ? -i : i;
      if (k > nodes - 1) k = 2 * (nodes - 1) - k;
      y.push_back(curv[static_cast<std::size_t>(k)].*member);
    }
    return boost::math::interpolators::cardinal_quintic_b_spline<double>(y, -kPad * h, h);
  };
  const auto wrap = [R](boost::math::interpolators::cardinal_quintic_b_spline<double> s) -> SphereField {
    return [s = std::move(s), R](const Eigen::Vector3d& p) {
      const double theta = std::atan2(std::hypot(p.x(), p.y()), p.z());
      return R * R * s(R * theta);
    };
  };
  out.F = wrap(spline(&SoulCurvatures::F));
  out.G = wrap(spline(&SoulCurvatures::G));
  return out;
}

}  // namespace soullab
