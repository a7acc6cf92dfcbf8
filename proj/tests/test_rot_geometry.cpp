#include "doctest.h"

#include "soullab/error.hpp"
#include "soullab/profiles.hpp"
#include "soullab/tensor.hpp"

#include <cmath>
#include <numbers>
#include <string>

using namespace soullab;
using std::numbers::pi;

namespace {

double polar_K(const MetricChart& chart, double t) {
  return sectional(chart, {make_vec({t, 0.7}), make_vec({1, 0}), make_vec({0, 1})});
}

double cartesian_K(const MetricChart& chart, double x, double y) {
  return sectional(chart, {make_vec({x, y}), make_vec({1, 0}), make_vec({0, 1})});
}

std::vector<double> knots_of(double L, int n, const std::function<double(double)>& f) {
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(i == 0 || i == n ? 0.0 : f(L * i / n));
  return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;  // sentinel for "did not throw"; callers never expect it
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("sphere profiles and charts") {
  SUBCASE("round spheres") {
    const MetricChart s1 = sphere_chart(SphereProfile::round(1.0));
    const MetricChart s2 = sphere_chart(SphereProfile::round(2.0));
    for (double t : {0.6, 1.3, 2.2}) {
      CHECK(std::abs(polar_K(s1, t) - 1.0) <= 1e-5);
      CHECK(std::abs(polar_K(s2, 2 * t) - 0.25) <= 1e-5);
    }
    CHECK(SphereProfile::round(2.0).length() == doctest::Approx(2 * pi));
  }
  SUBCASE("pole charts resolve the poles") {
    const SphereProfile prof = SphereProfile::round(1.0);
    for (Pole pole : {Pole::North, Pole::South}) {
      const MetricChart chart = sphere_pole_chart(prof, pole, default_pole_half_width(prof));
      for (double x : {0.0, 0.01, 0.3}) CHECK(std::abs(cartesian_K(chart, x, 0.5 * x) - 1.0) <= 1e-5);
    }
  }
  SUBCASE("spline approximating sin t on 50 knots") {
    const SphereProfile prof = SphereProfile::spline(pi, knots_of(pi, 49, [](double t) { return std::sin(t); }));
    CHECK_NOTHROW(prof.validate(true));
    const MetricChart polar = sphere_chart(prof);
    for (double t : {0.8, 1.5, 2.4}) CHECK(std::abs(polar_K(polar, t) - 1.0) <= 1e-3);
    const MetricChart north = sphere_pole_chart(prof, Pole::North, default_pole_half_width(prof));
    const MetricChart south = sphere_pole_chart(prof, Pole::South, default_pole_half_width(prof));
    for (double x : {0.0, 0.05, 0.4}) {
      CHECK(std::abs(cartesian_K(north, x, 0.0) - 1.0) <= 1e-3);
      CHECK(std::abs(cartesian_K(south, 0.0, x) - 1.0) <= 1e-3);
    }
  }
  SUBCASE("chart curvature equals -f''/f") {
    const SphereProfile spline =
        SphereProfile::spline(pi, knots_of(pi, 48, [](double t) { return (std::sin(t) + 0.05 * std::sin(3 * t)) / 1.15; }));
    for (const SphereProfile& prof :
         {SphereProfile::round(1.3), spline, SphereProfile::round(1.0).warped(0.8), spline.warped(-0.5)}) {
      const MetricChart chart = sphere_chart(prof);
      const double L = prof.length();
      for (double frac : {0.3, 0.45, 0.6, 0.7}) {
        const double t = frac * L;
        const Jet1 j = prof.eval(t);
        CHECK(std::abs(polar_K(chart, t) + j.d2 / j.value) <= 1e-4);
      }
    }
  }
  SUBCASE("pole excess matches direct evaluation away from the pole") {
    const SphereProfile spline =
        SphereProfile::spline(pi, knots_of(pi, 48, [](double t) { return (std::sin(t) + 0.05 * std::sin(3 * t)) / 1.15; }));
    for (const SphereProfile& prof : {SphereProfile::round(1.0), spline, spline.warped(0.7), spline.warped(-0.3)}) {
      for (Pole pole : {Pole::North, Pole::South}) {
        for (double r : {0.03, 0.3}) {
          const double t = pole == Pole::North ? r : prof.length() - r;
          const double direct = (prof.f(t) / r - 1.0) / (r * r);
          CHECK(std::abs(prof.pole_excess(r, pole) - direct) <= 1e-8);
        }
        CHECK(std::isfinite(prof.pole_excess(0.0, pole)));
      }
    }
  }
  SUBCASE("warped profile derivatives") {
    const SphereProfile prof = SphereProfile::round(1.0).warped(2.0);
    const double t = 0.9, h = 1e-4;
    const Jet1 j = prof.eval(t);
    CHECK(j.d1 == doctest::Approx((prof.f(t + h) - prof.f(t - h)) / (2 * h)).epsilon(1e-7));
    CHECK(j.d2 == doctest::Approx((prof.f(t + h) - 2 * prof.f(t) + prof.f(t - h)) / (h * h)).epsilon(1e-5));
  }
  SUBCASE("validation names the failed condition") {
    const double L = pi;
    CHECK(kind_of([&] { SphereProfile::spline(L, knots_of(L, 40, [](double t) { return 2 * std::sin(t); })); }) ==
          ErrorKind::InvalidProfile);
    CHECK(message_of([&] { SphereProfile::spline(L, knots_of(L, 40, [](double t) { return 2 * std::sin(t); })); })
              .find("f'(0) = 1") != std::string::npos);
    const SphereProfile steep =
        SphereProfile::spline(L, knots_of(L, 60, [](double t) { return std::sin(t) * (1 + 0.5 * std::sin(t) * std::sin(t)); }));
    CHECK(message_of([&] { steep.validate(false); }).find("|f'| <= 1") != std::string::npos);
    CHECK(kind_of([&] { SphereProfile::round(-1.0); }) == ErrorKind::InvalidProfile);
    CHECK(kind_of([&] { SphereProfile::round(1.0).warped(-1.0); }) == ErrorKind::RescaleNotInvertible);
  }
}

TEST_CASE("plane profiles and charts") {
  SUBCASE("flat plane is the identity") {
    const MetricChart chart = plane_chart_cartesian(PlaneProfile::flat(2.0));
    for (double x : {0.0, 0.3, -1.2}) {
      const Mat g = chart.metric(make_vec({x, 0.7}));
      CHECK((g - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
  SUBCASE("spherical cap") {
    const PlaneProfile cap = PlaneProfile::cap(1.0, 2.5);
    CHECK_NOTHROW(cap.validate(true));
    const MetricChart chart = plane_chart_cartesian(cap);
    for (double x : {0.0, 0.2, 1.0}) CHECK(std::abs(cartesian_K(chart, x, -0.4 * x) - 1.0) <= 1e-5);
    CHECK(cap.vertex_curvature() == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("tanh vertex curvature") {
    const PlaneProfile th = PlaneProfile::tanh(1.0, 2.0);
    CHECK(std::abs(th.vertex_curvature() - 2.0) <= 1e-3);
    // −b''/b extrapolated to the vertex.
    const Jet1 j = th.eval(1e-4);
    CHECK(std::abs(-j.d2 / j.value - th.vertex_curvature()) <= 1e-3);
    CHECK(std::abs(cartesian_K(plane_chart_cartesian(th), 0.0, 0.0) - 2.0) <= 1e-5);
  }
  SUBCASE("polar and Cartesian forms agree on annuli") {
    for (const PlaneProfile& prof : {PlaneProfile::cap(1.0, 2.5), PlaneProfile::tanh(1.0, 2.0), PlaneProfile::flat(1.0)}) {
      const MetricChart cart = plane_chart_cartesian(prof);
      const MetricChart polar = plane_chart_polar(prof);
      const double rmax = prof.rho_max() / std::sqrt(2.0);
      for (double rho : {0.1, 0.5 * rmax, rmax}) {
        for (double th : {0.0, 1.0, 4.0}) {
          Mat J(2, 2);
          J << std::cos(th), -rho * std::sin(th), std::sin(th), rho * std::cos(th);
          const Mat pulled = J.transpose() * cart.metric(make_vec({rho * std::cos(th), rho * std::sin(th)})) * J;
          CHECK((pulled - polar.metric(make_vec({rho, th}))).cwiseAbs().maxCoeff() <= 1e-8);
        }
      }
    }
  }
  SUBCASE("validation") {
    const PlaneProfile sh = PlaneProfile::sinh(1.0, 1.0);
    CHECK(kind_of([&] { sh.validate(true); }) == ErrorKind::InvalidProfile);
    CHECK(message_of([&] { sh.validate(true); }).find("concavity") != std::string::npos);
    CHECK_NOTHROW(sh.validate(false));
    const PlaneProfile cone = PlaneProfile::custom("cone", 1.0, [](double r) { return Jet1{0.5 * r, 0.5, 0.0}; });
    CHECK(kind_of([&] { cone.validate(true); }) == ErrorKind::NonSmoothVertex);
    const PlaneProfile even =
        PlaneProfile::custom("even", 1.0, [](double r) { return Jet1{r - 0.1 * r * r, 1 - 0.2 * r, -0.2}; });
    CHECK(kind_of([&] { even.validate(true); }) == ErrorKind::NonSmoothVertex);
    CHECK(kind_of([&] { PlaneProfile::cap(1.0, 3.2); }) == ErrorKind::InvalidProfile);
  }
}

TEST_CASE("killing fields and rescaling") {
  const SphereProfile round = SphereProfile::round(1.0);
  CHECK(killing_norm(round, 1.0, pi / 2) == doctest::Approx(1.0));
  CHECK(killing_norm(round, 0.0, 1.0) == 0.0);
  CHECK(killing_norm(round, 2.0, pi / 6) == doctest::Approx(1.0));
  CHECK(kind_of([&] { killing_norm(round, 1.0, 0.0); }) == ErrorKind::OutOfDomain);

  CHECK(rescaled_norm(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(rescaled_norm(0.0, 1.0) == 0.0);
  CHECK(rescaled_norm(3.0, 2.0) == doctest::Approx(12.0 / 7.0).epsilon(1e-12));
  CHECK(kind_of([] { rescaled_norm(-1.0, 1.0); }) == ErrorKind::NegativeSquaredNorm);
  CHECK(kind_of([] { rescaled_norm(1.0, 0.0); }) == ErrorKind::NonPositiveScale);

  const MetricChart base = sphere_chart(round);
  const VectorField rot = [](const Vec&) { return make_vec({0, 1}); };
  SUBCASE("unit Killing norm halves") {
    const MetricChart r = cheeger_rescale(base, rot, 1.0);
    CHECK(r.metric(make_vec({pi / 2, 0.0}))(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("zero field and huge scale leave the metric unchanged") {
    const MetricChart zero = cheeger_rescale(base, [](const Vec&) { return make_vec({0, 0}); }, 1.0);
    const MetricChart huge = cheeger_rescale(base, rot, 1e6);
    for (double t : {0.4, 1.7}) {
      const Vec p = make_vec({t, 0.0});
      CHECK((zero.metric(p) - base.metric(p)).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((huge.metric(p) - base.metric(p)).cwiseAbs().maxCoeff() <= 1e-9 * base.metric(p).norm());
    }
    CHECK(kind_of([&] { cheeger_rescale(base, rot, -1.0); }) == ErrorKind::NonPositiveScale);
  }
  SUBCASE("complement unchanged, V shrinks, closed form agrees") {
    const MetricChart plane = plane_chart_cartesian(PlaneProfile::cap(1.0, 2.0));
    const VectorField V = [](const Vec& p) { return make_vec({1.0 + p[1], 0.5 - p[0]}); };
    for (double a : {0.5, 1.0, 3.0}) {
      const MetricChart r = cheeger_rescale(plane, V, a);
      for (double x : {-0.8, 0.1, 0.9}) {
        const Vec p = make_vec({x, 0.3});
        const Mat h = plane.metric(p), hn = r.metric(p);
        const Vec v = V(p);
        Vec w(2);
        const Vec hv = h * v;
        w << -hv[1], hv[0];  // h-orthogonal to v
        CHECK(std::abs(w.dot(hn * w) - w.dot(h * w)) <= 1e-10);
        CHECK(std::abs(w.dot(hn * v)) <= 1e-10);
        const double old2 = v.dot(h * v), new2 = v.dot(hn * v);
        CHECK(new2 <= old2);
        CHECK(std::abs(new2 - rescaled_norm(old2, a)) <= 1e-10);
        CHECK(Eigen::LLT<Mat>(hn).info() == Eigen::Success);
      }
    }
  }
}
