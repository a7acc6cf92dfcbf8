#include "doctest.h"

#include "soullab/error.hpp"
#include "soullab/quotient.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace soullab;
using std::numbers::pi;

namespace {

QuotientSpec spec(SphereProfile s, PlaneProfile p, double C1, double C2) { return {std::move(s), std::move(p), {C1, C2}}; }

QuotientSpec round_flat(double C1, double C2) {
  return spec(SphereProfile::round(1.0), PlaneProfile::flat(1.5), C1, C2);
}

SphereProfile bumpy_spline() {
  std::vector<double> knots;
  for (int i = 0; i <= 48; ++i) {
    const double t = pi * i / 48;
    knots.push_back(i == 0 || i == 48 ? 0.0 : (std::sin(t) + 0.05 * std::sin(3 * t)) / 1.15);
  }
  return SphereProfile::spline(pi, knots);
}

std::vector<QuotientSpec> sample_specs() {
  return {round_flat(0.0, 0.0), round_flat(1.0, 1.0),
          spec(SphereProfile::round(1.0), PlaneProfile::tanh(1.0, 1.5), 0.5, 2.0),
          spec(bumpy_spline(), PlaneProfile::flat(1.5), 0.7, 0.8),
          spec(SphereProfile::round(1.0), PlaneProfile::cap(1.0, 2.5), 2.0, 0.5)};
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("closed-form quotient components") {
  SUBCASE("trivial action gives the product") {
    const QuotientSpec s = round_flat(0.0, 0.0);
    const QuotientChart q = build_quotient(s);
    const Mat h = q.chart.metric(make_vec({1.0, 0.3, 0.2, -0.4}));
    Mat product = Mat::Identity(4, 4);
    product(1, 1) = std::sin(1.0) * std::sin(1.0);
    CHECK((h - product).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("equator value with C1 = 1") {
    const QuotientChart q = build_quotient(round_flat(1.0, 0.0));
    CHECK(q.chart.metric(make_vec({pi / 2, 0.0, 0.7, 0.1}))(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("polar-form components") {
    const QuotientSpec s = spec(SphereProfile::round(1.0), PlaneProfile::tanh(1.0, 2.0), 0.5, 2.0);
    const QuotientChart q = build_quotient(s);
    const double t = 1.1, rho = 0.8, th = 0.6;
    const Mat h = q.chart.metric(make_vec({t, 0.0, rho * std::cos(th), rho * std::sin(th)}));
    const double f = std::sin(t), b = std::tanh(rho), C1 = 0.5, C2 = 2.0;
    const double N = 1 + C1 * C1 * f * f + C2 * C2 * b * b;
    // ∂_θ = (−y, x) in the plane chart.
    const Vec dth = make_vec({0, 0, -rho * std::sin(th), rho * std::cos(th)});
    const Vec ds = make_vec({0, 1, 0, 0});
    const Vec drho = make_vec({0, 0, std::cos(th), std::sin(th)});
    CHECK(ds.dot(h * ds) == doctest::Approx(f * f - C1 * C1 * std::pow(f, 4) / N).epsilon(1e-12));
    CHECK(dth.dot(h * dth) == doctest::Approx(b * b - C2 * C2 * std::pow(b, 4) / N).epsilon(1e-12));
    CHECK(ds.dot(h * dth) == doctest::Approx(-C1 * C2 * f * f * b * b / N).epsilon(1e-12));
    CHECK(drho.dot(h * drho) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(drho.dot(h * ds)) <= 1e-12);
  }
  SUBCASE("projection oracle agreement at random points") {
    std::uint64_t state = 42;
    auto uniform = [&](double lo, double hi) {
      return lo + (hi - lo) * static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    };
    for (const QuotientSpec& s : sample_specs()) {
      for (SoulRegion region : {SoulRegion::Polar, SoulRegion::North, SoulRegion::South}) {
        const QuotientChart q = build_quotient(s, region);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
          Vec p(4);
          for (int d = 0; d < 4; ++d) {
            const auto& iv = q.chart.box()[static_cast<std::size_t>(d)];
            p[d] = uniform(iv.lo + 1e-3, iv.hi - 1e-3);
          }
          worst = std::max(worst, (q.chart.metric(p) - quotient_projection_oracle(s, region, p)).cwiseAbs().maxCoeff());
          // The action field is null for h after projection: it is what the quotient removes.
          const Mat h5 = quotient_projection_oracle(s, region, p);
          CHECK(Eigen::LLT<Mat>(h5).info() == Eigen::Success);
        }
        CHECK(worst <= 1e-10);
      }
    }
  }
}

TEST_CASE("soul metric") {
  SUBCASE("trivial rescale") {
    const MetricChart g = soul_metric(round_flat(0.0, 0.0));
    CHECK(g.metric(make_vec({1.0, 0.0}))(1, 1) == doctest::Approx(std::sin(1.0) * std::sin(1.0)));
  }
  SUBCASE("matches Cheeger rescale along the C1-rotation field") {
    for (double C1 : {0.5, 1.0, 2.0}) {
      const QuotientSpec s = round_flat(C1, 0.3);
      const MetricChart soul = soul_metric(s);
      const MetricChart resc = cheeger_rescale(
          sphere_chart(s.sphere), [C1](const Vec&) { return make_vec({0.0, C1}); }, 1.0);
      for (double t : {0.2, 1.0, pi / 2, 2.9}) {
        const Vec p = make_vec({t, 0.0});
        CHECK((soul.metric(p) - resc.metric(p)).cwiseAbs().maxCoeff() <= 1e-10);
      }
      CHECK(soul.metric(make_vec({pi / 2, 0.0}))(1, 1) == doctest::Approx(rescaled_norm(C1 * C1, 1.0) / (C1 * C1)));
    }
    CHECK(soul_metric(round_flat(1.0, 0.0)).metric(make_vec({pi / 2, 0.0}))(1, 1) == doctest::Approx(0.5));
  }
  SUBCASE("large C1 collapses the equator") {
    const SphereProfile soul = soul_profile(round_flat(100.0, 0.0));
    CHECK(std::abs(2 * pi * soul.f(pi / 2) / (2 * pi / 100) - 1.0) <= 0.01);
  }
  SUBCASE("prescribed profiles") {
    const SphereProfile target = SphereProfile::round(1.0);
    CHECK(prescribe_soul_profile(target, 0.5).f(pi / 2) == doctest::Approx(2 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(prescribe_soul_profile(target, 0.0).f(1.0) == target.f(1.0));
    CHECK(kind_of([&] { prescribe_soul_profile(target, 1.0); }) == ErrorKind::RescaleNotInvertible);
    for (const SphereProfile& tgt : {SphereProfile::round(0.5), bumpy_spline()}) {
      const double C1 = 0.8;
      const SphereProfile g0 = prescribe_soul_profile(tgt, C1 * 0.9 / tgt.max_f());
      const QuotientSpec s{g0, PlaneProfile::flat(1.0), {C1 * 0.9 / tgt.max_f(), 1.0}};
      const MetricChart back = soul_metric(s), want = sphere_chart(tgt);
      for (double frac : {0.1, 0.37, 0.5, 0.81}) {
        const Vec p = make_vec({frac * tgt.length(), 0.0});
        CHECK((back.metric(p) - want.metric(p)).cwiseAbs().maxCoeff() <= 1e-8);
      }
    }
  }
}

TEST_CASE("soul curvature functions") {
  SUBCASE("products") {
    for (const auto& [plane, Lambda] :
         std::vector<std::pair<PlaneProfile, double>>{{PlaneProfile::flat(1.5), 0.0}, {PlaneProfile::cap(1.0, 2.5), 1.0}}) {
      const SoulAtlas atlas(spec(SphereProfile::round(1.0), plane, 0.0, 0.0));
      for (double t : {0.0, 0.3, 1.2, 2.0, 3.0, pi}) {
        const SoulCurvatures c = atlas.curvatures_at(t);
        CHECK(std::abs(c.k - 1.0) <= 1e-5);
        CHECK(std::abs(c.F) <= 1e-8);
        CHECK(std::abs(c.G - Lambda) <= 1e-5);
      }
    }
  }
  SUBCASE("closed forms in terms of the soul profile") {
    // With φ the soul profile: k = −φ''/φ, |F| = 2|C1 C2 φ'|, G = Λ + 3C2²/(1 + C1²f²).
    for (const QuotientSpec& s : sample_specs()) {
      const SoulAtlas atlas(s, 1e-3, 4);
      const SphereProfile soul = soul_profile(s);
      const double C1 = s.killing.C1, C2 = s.killing.C2, Lambda = s.plane.vertex_curvature();
      for (double frac : {0.05, 0.2, 0.33, 0.5, 0.66, 0.9}) {
        const double t = frac * s.sphere.length();
        const SoulCurvatures c = atlas.curvatures_at(t, 0.4);
        const Jet1 phi = soul.eval(t);
        const double f = s.sphere.f(t);
        CHECK(std::abs(c.k + phi.d2 / phi.value) <= 1e-7);
        CHECK(std::abs(std::abs(c.F) - 2 * std::abs(C1 * C2 * phi.d1)) <= 1e-7);
        // Λ comes from a series fit, accurate to about 1e-5.
        CHECK(std::abs(c.G - Lambda - 3 * C2 * C2 / (1 + C1 * C1 * f * f)) <= 2e-5);
      }
    }
  }
  SUBCASE("rotational symmetry") {
    const SoulAtlas atlas(spec(SphereProfile::round(1.0), PlaneProfile::tanh(1.0, 1.5), 0.5, 2.0));
    for (double t : {0.3, 1.4, 2.9}) {
      const SoulCurvatures a = atlas.curvatures_at(t, 0.0), b = atlas.curvatures_at(t, 2.0);
      CHECK(std::abs(a.k - b.k) <= 1e-8);
      CHECK(std::abs(a.F - b.F) <= 1e-8);
      CHECK(std::abs(a.G - b.G) <= 1e-8);
    }
  }
  SUBCASE("soul is totally geodesic") {
    for (const QuotientSpec& s : sample_specs()) {
      const SoulAtlas atlas(s);
      for (double frac : {0.0, 0.1, 0.4, 0.7, 1.0}) CHECK(atlas.normal_christoffel(frac * s.sphere.length(), 0.3) <= 1e-6);
    }
  }
  SUBCASE("integral of F vanishes") {
    for (const QuotientSpec& s : sample_specs()) {
      const SoulAtlas atlas(s);
      const SoulData data = soul_data(atlas, simpson_grid(s.sphere.length(), 101), 4);
      CHECK(std::abs(integral_f(data)) <= 1e-5);
      if (s.killing.C1 * s.killing.C2 != 0.0) {
        double peak = 0.0;
        for (double F : data.F) peak = std::max(peak, std::abs(F));
        CHECK(peak > 1e-2);
      }
    }
  }
  SUBCASE("soul data is deterministic across threads and serializes") {
    const SoulAtlas atlas(round_flat(1.0, 1.0));
    const auto grid = simpson_grid(pi, 11);
    std::ostringstream a, b;
    soul_data(atlas, grid, 1).write_csv(a);
    soul_data(atlas, grid, 8).write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("t,k,F,G,hessG_tt,hessG_ss\n", 0) == 0);
  }
}

TEST_CASE("nonnegativity audits") {
  SUBCASE("product range") {
    const SoulAtlas atlas(round_flat(0.0, 0.0));
    const AtlasAuditReport r = nonneg_audit_atlas(atlas, 400, 5, 1e-5, 4);
    CHECK(std::abs(r.merged.min_K) <= 1e-5);
    CHECK(std::abs(r.merged.max_K - 1.0) <= 1e-5);
    CHECK(r.merged.pass);
  }
  SUBCASE("nontrivial actions") {
    for (const QuotientSpec& s : {round_flat(1.0, 1.0), spec(SphereProfile::round(1.0), PlaneProfile::cap(1.0, 2.5), 2.0, 0.5)}) {
      const AtlasAuditReport r = nonneg_audit_atlas(SoulAtlas(s), 2000, 9, 1e-5, 8);
      CHECK(r.merged.min_K >= -1e-5);
      CHECK(r.merged.pass);
    }
  }
}
