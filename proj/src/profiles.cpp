#include "soullab/profiles.hpp"

#include "soullab/error.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace soullab {

using std::numbers::pi;

namespace {

// (sin x / x − 1)/x²
double sinc_excess(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 1e-2) return -1.0 / 6.0 + x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 / 362880.0));
  return (std::sin(x) / x - 1.0) / x2;
}

// (tanh x / x − 1)/x²
double tanh_excess(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 1e-2) return -1.0 / 3.0 + x2 * (2.0 / 15.0 - x2 * (17.0 / 315.0 - x2 * 62.0 / 2835.0));
  return (std::tanh(x) / x - 1.0) / x2;
}

// (sinh x / x − 1)/x²
double sinh_excess(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 1e-2) return 1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (1.0 / 5040.0 + x2 / 362880.0));
  return (std::sinh(x) / x - 1.0) / x2;
}

[[noreturn]] void invalid(const std::string& what, const std::string& condition, double at) {
  raise(ErrorKind::InvalidProfile, fmt::format("{}: condition '{}' violated at {:.6g}", what, condition, at));
}

}  // namespace

// ---------------------------------------------------------------- sphere

struct SphereProfile::Impl {
  virtual ~Impl() = default;
  virtual double length() const = 0;
  virtual Jet1 eval(double t) const = 0;
  virtual double excess(double r, Pole pole) const = 0;
  virtual std::string describe() const = 0;
};

namespace {

struct RoundSphere final : SphereProfile::Impl {
  double R;
  explicit RoundSphere(double radius) : R(radius) {}
  double length() const override { return pi * R; }
  Jet1 eval(double t) const override {
    return {R * std::sin(t / R), std::cos(t / R), -std::sin(t / R) / R};
  }
  double excess(double r, Pole) const override { return sinc_excess(r / R) / (R * R); }
  std::string describe() const override { return fmt::format("round(R={:.17g})", R); }
};

struct SplineSphere final : SphereProfile::Impl {
  double L;
  std::size_t knots;
  boost::math::interpolators::cardinal_quintic_b_spline<double> u;
  double u2_pole[2];  // u''(0), u''(L)
  double t_end;  // last knot as boost computes it; may sit an ulp below L

  SplineSphere(double len, std::size_t n_knots, const std::vector<double>& u_values, double u2_north, double u2_south)
      : L(len),
        knots(n_knots),
        u(u_values.data(), u_values.size(), 0.0, len / static_cast<double>(n_knots - 1), {0.0, u2_north},
          {0.0, u2_south}),
        u2_pole{u2_north, u2_south},
        t_end(u.t_max()) {}

  double knot_t(double t) const { return std::clamp(t, 0.0, std::min(L, t_end)); }

  double length() const override { return L; }

  Jet1 eval(double t) const override {
    t = std::clamp(t, 0.0, L);
    const double w = pi / L;
    const double psi = std::sin(w * t) / w, dpsi = std::cos(w * t), ddpsi = -w * std::sin(w * t);
    const double tk = knot_t(t);
    const double u0 = u(tk), u1 = u.prime(tk), u2 = u.double_prime(tk);
    return {psi * u0, dpsi * u0 + psi * u1, ddpsi * u0 + 2.0 * dpsi * u1 + psi * u2};
  }

  double excess(double r, Pole pole) const override {
    const double t = pole == Pole::North ? r : L - r;
    const double w = pi / L;
    const double uv = u(knot_t(t));
    // (u − 1)/r² loses digits as r → 0 but only ever multiplies r² downstream.
    const double u_minus_1 = r < 1e-6 ? 0.5 * u2_pole[pole == Pole::North ? 0 : 1] : (uv - 1.0) / (r * r);
    return sinc_excess(w * r) * w * w * uv + u_minus_1;
  }

  std::string describe() const override { return fmt::format("spline(knots={},L={:.17g})", knots, L); }
};

// u''(0) from a least-squares fit of 1 + a r² + c r⁴ to the knots next to the pole.
double pole_curvature_of_u(const std::vector<double>& u, double h, bool from_end) {
  constexpr int kUsed = 4;
  Eigen::Matrix<double, kUsed, 2> A;
  Eigen::Matrix<double, kUsed, 1> y;
  for (int i = 1; i <= kUsed; ++i) {
    const double r = h * i;
    const double value = from_end ? u[u.size() - 1 - static_cast<std::size_t>(i)] : u[static_cast<std::size_t>(i)];
    A(i - 1, 0) = r * r;
    A(i - 1, 1) = r * r * r * r;
    y[i - 1] = value - 1.0;
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  return 2.0 * c[0];
}

struct WarpedSphere final : SphereProfile::Impl {
  std::shared_ptr<const SphereProfile::Impl> base;
  double kappa;
  WarpedSphere(std::shared_ptr<const SphereProfile::Impl> b, double k) : base(std::move(b)), kappa(k) {}
  double length() const override { return base->length(); }
  Jet1 eval(double t) const override {
    const Jet1 f = base->eval(t);
    const double F = 1.0 + kappa * f.value * f.value;
    const double s = std::sqrt(F);
    return {f.value / s, f.d1 / (F * s), f.d2 / (F * s) - 3.0 * kappa * f.value * f.d1 * f.d1 / (F * F * s)};
  }
  double excess(double r, Pole pole) const override {
    const double E = base->excess(r, pole);
    const double ratio = 1.0 + E * r * r;  // f/r
    const double f = ratio * r;
    const double s = std::sqrt(1.0 + kappa * f * f);
    const double D_over_r2 = -kappa * ratio * ratio / (s * (1.0 + s));
    return E + D_over_r2 + E * D_over_r2 * r * r;
  }
  std::string describe() const override {
    return fmt::format("{}|warped(kappa={:.17g})", base->describe(), kappa);
  }
};

}  // namespace

SphereProfile SphereProfile::round(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) invalid("round sphere", "radius > 0", radius);
  return SphereProfile(std::make_shared<RoundSphere>(radius));
}

SphereProfile SphereProfile::spline(double length, std::vector<double> samples) {
  if (!(length > 0.0) || !std::isfinite(length)) invalid("spline sphere", "length > 0", length);
  if (samples.size() < 9) invalid("spline sphere", "at least 9 knots", static_cast<double>(samples.size()));
  for (double v : samples) {
    if (!std::isfinite(v)) invalid("spline sphere", "finite knot values", v);
  }
  const std::size_t n = samples.size() - 1;
  if (std::abs(samples.front()) > 1e-12) invalid("spline sphere", "pole closure f(0) = 0", 0.0);
  if (std::abs(samples.back()) > 1e-12) invalid("spline sphere", "pole closure f(L) = 0", length);
  const double h = length / static_cast<double>(n);
  // One-sided second-order slope estimates at the poles.
  const double slope0 = (4.0 * samples[1] - samples[2]) / (2.0 * h);
  const double slopeL = -(4.0 * samples[n - 1] - samples[n - 2]) / (2.0 * h);
  if (std::abs(slope0 - 1.0) > 0.05) invalid("spline sphere", "pole closure f'(0) = 1", 0.0);
  if (std::abs(slopeL + 1.0) > 0.05) invalid("spline sphere", "pole closure f'(L) = -1", length);
  std::vector<double> u(samples.size(), 1.0);
  const double w = pi / length;
  for (std::size_t i = 1; i < n; ++i) {
    const double psi = std::sin(w * h * static_cast<double>(i)) / w;
    if (!(samples[i] > 0.0)) invalid("spline sphere", "positivity f > 0 on (0, L)", h * static_cast<double>(i));
    u[i] = samples[i] / psi;
  }
  const double u2n = pole_curvature_of_u(u, h, false), u2s = pole_curvature_of_u(u, h, true);
  return SphereProfile(std::make_shared<SplineSphere>(length, samples.size(), u, u2n, u2s));
}

SphereProfile SphereProfile::warped(double kappa) const {
  if (!std::isfinite(kappa)) raise(ErrorKind::InvalidArgument, "warp coefficient must be finite");
  if (kappa < 0.0) {
    const double fmax = max_f();
    if (!(1.0 + kappa * fmax * fmax > 0.0)) {
      raise(ErrorKind::RescaleNotInvertible,
            fmt::format("1 + kappa*f^2 must stay positive (kappa={:.6g}, max f={:.6g})", kappa, fmax));
    }
  }
  return SphereProfile(std::make_shared<WarpedSphere>(impl_, kappa));
}

double SphereProfile::length() const { return impl_->length(); }
Jet1 SphereProfile::eval(double t) const { return impl_->eval(t); }
double SphereProfile::pole_excess(double r, Pole pole) const { return impl_->excess(r, pole); }
std::string SphereProfile::describe() const { return impl_->describe(); }

double SphereProfile::max_f(int samples) const {
  double m = 0.0;
  const double L = length();
  for (int i = 0; i < samples; ++i) m = std::max(m, f(L * i / (samples - 1)));
  return m;
}

void SphereProfile::validate(bool require_nonneg_curvature, bool require_arclength_bound) const {
  const std::string what = "SphereProfile " + describe();
  const double L = length();
  if (!(L > 0.0) || !std::isfinite(L)) invalid(what, "meridian length L > 0", L);
  const Jet1 north = eval(0.0), south = eval(L);
  if (std::abs(north.value) > 1e-12) invalid(what, "pole closure f(0) = 0", 0.0);
  if (std::abs(south.value) > 1e-12) invalid(what, "pole closure f(L) = 0", L);
  if (std::abs(north.d1 - 1.0) > 1e-8) invalid(what, "pole closure f'(0) = 1", 0.0);
  if (std::abs(south.d1 + 1.0) > 1e-8) invalid(what, "pole closure f'(L) = -1", L);
  constexpr int kGrid = 2001;
  for (int i = 0; i < kGrid; ++i) {
    const double t = L * i / (kGrid - 1);
    const Jet1 j = eval(t);
    if (!std::isfinite(j.value) || !std::isfinite(j.d1) || !std::isfinite(j.d2)) invalid(what, "finite profile", t);
    if (i > 0 && i < kGrid - 1 && !(j.value > 0.0)) invalid(what, "positivity f > 0 on (0, L)", t);
    if (require_arclength_bound && std::abs(j.d1) > 1.0 + 1e-9) invalid(what, "arclength bound |f'| <= 1", t);
    if (require_nonneg_curvature && j.d2 > 1e-9) invalid(what, "nonnegative curvature f'' <= 0", t);
  }
}

// ---------------------------------------------------------------- plane

struct PlaneProfile::Impl {
  virtual ~Impl() = default;
  double rho_max = 0.0;
  virtual Jet1 eval(double rho) const = 0;
  virtual double excess(double rho) const = 0;
  virtual std::string describe() const = 0;
};

namespace {

struct FlatPlane final : PlaneProfile::Impl {
  Jet1 eval(double rho) const override { return {rho, 1.0, 0.0}; }
  double excess(double) const override { return 0.0; }
  std::string describe() const override { return fmt::format("flat(rho_max={:.17g})", rho_max); }
};

struct CapPlane final : PlaneProfile::Impl {
  double R;
  explicit CapPlane(double radius) : R(radius) {}
  Jet1 eval(double rho) const override {
    return {R * std::sin(rho / R), std::cos(rho / R), -std::sin(rho / R) / R};
  }
  double excess(double rho) const override { return sinc_excess(rho / R) / (R * R); }
  std::string describe() const override { return fmt::format("cap(R={:.17g},rho_max={:.17g})", R, rho_max); }
};

struct TanhPlane final : PlaneProfile::Impl {
  double R;
  explicit TanhPlane(double radius) : R(radius) {}
  Jet1 eval(double rho) const override {
    const double th = std::tanh(rho / R), sech2 = 1.0 - th * th;
    return {R * th, sech2, -2.0 * th * sech2 / R};
  }
  double excess(double rho) const override { return tanh_excess(rho / R) / (R * R); }
  std::string describe() const override { return fmt::format("tanh(R={:.17g},rho_max={:.17g})", R, rho_max); }
};

struct SinhPlane final : PlaneProfile::Impl {
  double R;
  explicit SinhPlane(double radius) : R(radius) {}
  Jet1 eval(double rho) const override {
    return {R * std::sinh(rho / R), std::cosh(rho / R), std::sinh(rho / R) / R};
  }
  double excess(double rho) const override { return sinh_excess(rho / R) / (R * R); }
  std::string describe() const override { return fmt::format("sinh(R={:.17g},rho_max={:.17g})", R, rho_max); }
};

struct CustomPlane final : PlaneProfile::Impl {
  std::string name;
  PlaneProfile::Evaluator fn;
  Jet1 eval(double rho) const override { return fn(rho); }
  double excess(double rho) const override {
    const double r = std::max(rho, 1e-4);
    return (fn(r).value / r - 1.0) / (r * r);
  }
  std::string describe() const override { return fmt::format("{}(rho_max={:.17g})", name, rho_max); }
};

template <class T, class... Args>
T* make_plane(double rho_max, Args&&... args) {
  if (!(rho_max > 0.0) || !std::isfinite(rho_max)) {
    raise(ErrorKind::InvalidProfile, "PlaneProfile: condition 'rho_max > 0' violated");
  }
  auto* p = new T(std::forward<Args>(args)...);
  p->rho_max = rho_max;
  return p;
}

void check_radius(const char* family, double R) {
  if (!(R > 0.0) || !std::isfinite(R)) {
    raise(ErrorKind::InvalidProfile, fmt::format("PlaneProfile {}: condition 'R > 0' violated", family));
  }
}

struct VertexFit {
  double b3 = 0.0;
  double b5 = 0.0;
  double residual = 0.0;
};

VertexFit fit_vertex(const PlaneProfile::Impl& impl) {
  constexpr int kSamples = 10;
  const double delta = std::min(0.02, impl.rho_max / 20.0);
  Eigen::Matrix<double, kSamples, 3> A;
  Eigen::Matrix<double, kSamples, 1> y;
  for (int k = 0; k < kSamples; ++k) {
    const double rho = delta * (k + 1);
    A(k, 0) = 1.0;
    A(k, 1) = rho * rho;
    A(k, 2) = rho * rho * rho * rho;
    y[k] = (impl.eval(rho).value / rho - 1.0) / (rho * rho);
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
  return VertexFit{c[0], c[1], (A * c - y).cwiseAbs().maxCoeff()};
}

}  // namespace

PlaneProfile PlaneProfile::flat(double rho_max) {
  return PlaneProfile(std::shared_ptr<const Impl>(make_plane<FlatPlane>(rho_max)));
}

PlaneProfile PlaneProfile::cap(double radius, double rho_max) {
  check_radius("cap", radius);
  if (!(rho_max < pi * radius)) {
    raise(ErrorKind::InvalidProfile, "PlaneProfile cap: condition 'rho_max < pi*R' violated");
  }
  return PlaneProfile(std::shared_ptr<const Impl>(make_plane<CapPlane>(rho_max, radius)));
}

PlaneProfile PlaneProfile::tanh(double radius, double rho_max) {
  check_radius("tanh", radius);
  return PlaneProfile(std::shared_ptr<const Impl>(make_plane<TanhPlane>(rho_max, radius)));
}

PlaneProfile PlaneProfile::sinh(double radius, double rho_max) {
  check_radius("sinh", radius);
  return PlaneProfile(std::shared_ptr<const Impl>(make_plane<SinhPlane>(rho_max, radius)));
}

PlaneProfile PlaneProfile::custom(std::string name, double rho_max, Evaluator evaluator) {
  auto* p = make_plane<CustomPlane>(rho_max);
  p->name = std::move(name);
  p->fn = std::move(evaluator);
  return PlaneProfile(std::shared_ptr<const Impl>(p));
}

double PlaneProfile::rho_max() const { return impl_->rho_max; }
Jet1 PlaneProfile::eval(double rho) const { return impl_->eval(rho); }
double PlaneProfile::ratio_excess(double rho) const { return impl_->excess(rho); }
std::string PlaneProfile::describe() const { return impl_->describe(); }

double PlaneProfile::vertex_curvature() const { return -6.0 * fit_vertex(*impl_).b3; }

void PlaneProfile::validate(bool require_nonneg_curvature) const {
  const std::string what = "PlaneProfile " + describe();
  const Jet1 v = eval(0.0);
  auto vertex = [&](const std::string& condition) {
    raise(ErrorKind::NonSmoothVertex, fmt::format("{}: vertex condition '{}' violated", what, condition));
  };
  if (std::abs(v.value) > 1e-12) vertex("b(0) = 0");
  if (std::abs(v.d1 - 1.0) > 1e-8) vertex("b'(0) = 1");
  if (std::abs(v.d2) > 1e-8) vertex("odd series b''(0) = 0");
  const VertexFit fit = fit_vertex(*impl_);
  if (fit.residual > 1e-6 * std::max(1.0, std::abs(fit.b3))) vertex("odd series b = rho + b3 rho^3 + O(rho^5)");
  constexpr int kGrid = 2001;
  const double rmax = rho_max();
  for (int i = 1; i < kGrid; ++i) {
    const double rho = rmax * i / (kGrid - 1);
    const Jet1 j = eval(rho);
    if (!std::isfinite(j.value) || !std::isfinite(j.d1) || !std::isfinite(j.d2)) invalid(what, "finite profile", rho);
    if (!(j.value > 0.0)) invalid(what, "positivity b > 0 on (0, rho_max]", rho);
    if (require_nonneg_curvature && j.d2 > 1e-9) invalid(what, "concavity b'' <= 0 (nonnegative curvature)", rho);
  }
}

// ---------------------------------------------------------------- charts

Mat rotational_cartesian_metric(double x, double y, double excess) {
  const double r2 = x * x + y * y;
  const double m = excess * (2.0 + excess * r2);
  Mat g(2, 2);
  g(0, 0) = 1.0 + m * y * y;
  g(0, 1) = -m * x * y;
  g(1, 0) = g(0, 1);
  g(1, 1) = 1.0 + m * x * x;
  return g;
}

MetricChart sphere_chart(const SphereProfile& prof, double fd_step) {
  return MetricChart(
      "sphere_polar", {{0.0, prof.length()}, {0.0, 2.0 * pi, true}},
      [prof](const Vec& p) {
        Mat g = Mat::Zero(2, 2);
        const double f = prof.f(p[0]);
        g(0, 0) = 1.0;
        g(1, 1) = f * f;
        return g;
      },
      fd_step);
}

double default_pole_half_width(const SphereProfile& prof) { return 0.4 * prof.length(); }

MetricChart sphere_pole_chart(const SphereProfile& prof, Pole pole, double half_width, double fd_step) {
  if (!(half_width > 0.0) || !(std::sqrt(2.0) * half_width < prof.length())) {
    raise(ErrorKind::InvalidArgument, "pole chart half-width must keep the box inside one hemisphere chain");
  }
  return MetricChart(
      pole == Pole::North ? "sphere_north" : "sphere_south", {{-half_width, half_width}, {-half_width, half_width}},
      [prof, pole](const Vec& p) {
        const double r = std::hypot(p[0], p[1]);
        return rotational_cartesian_metric(p[0], p[1], prof.pole_excess(r, pole));
      },
      fd_step);
}

MetricChart plane_chart_cartesian(const PlaneProfile& prof, double fd_step) {
  const double w = prof.rho_max() / std::sqrt(2.0);
  return MetricChart(
      "plane_cartesian", {{-w, w}, {-w, w}},
      [prof](const Vec& p) {
        const double r = std::hypot(p[0], p[1]);
        return rotational_cartesian_metric(p[0], p[1], prof.ratio_excess(r));
      },
      fd_step);
}

MetricChart plane_chart_polar(const PlaneProfile& prof, double fd_step) {
  return MetricChart(
      "plane_polar", {{0.0, prof.rho_max()}, {0.0, 2.0 * pi, true}},
      [prof](const Vec& p) {
        Mat g = Mat::Zero(2, 2);
        const double b = prof.b(p[0]);
        g(0, 0) = 1.0;
        g(1, 1) = b * b;
        return g;
      },
      fd_step);
}

double killing_norm(const SphereProfile& prof, double C, double t) {
  if (!(t > 0.0 && t < prof.length())) {
    raise(ErrorKind::OutOfDomain, fmt::format("killing_norm: t={:.6g} outside (0, L)", t));
  }
  return std::abs(C) * prof.f(t);
}

MetricChart cheeger_rescale(const MetricChart& chart, VectorField V, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) raise(ErrorKind::NonPositiveScale, fmt::format("rescale scale a={:.6g}", a));
  const double a2 = a * a;
  const MetricChart base = chart;
  return MetricChart(
      chart.name() + "/rescaled", chart.box(),
      [base, V = std::move(V), a2](const Vec& p) {
        const Mat h = base.metric(p);
        const Vec v = V(p);
        const Vec hv = h * v;
        return Mat(h - hv * hv.transpose() / (a2 + v.dot(hv)));
      },
      chart.fd_step(), chart.fd_order());
}

double rescaled_norm(double x2_g0, double a) {
  if (x2_g0 < 0.0) raise(ErrorKind::NegativeSquaredNorm, fmt::format("squared norm {:.6g} < 0", x2_g0));
  if (!(a > 0.0) || !std::isfinite(a)) raise(ErrorKind::NonPositiveScale, fmt::format("rescale scale a={:.6g}", a));
  return a * a * x2_g0 / (a * a + x2_g0);
}

}  // namespace soullab
