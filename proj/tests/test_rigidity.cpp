#include "doctest.h"

#include "soullab/error.hpp"
#include "soullab/rigidity.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

using namespace soullab;
using std::numbers::pi;
using V3 = Eigen::Vector3d;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

// cos of the angle from the north pole
double cz(const V3& p) { return p.z(); }

QuotientSpec round_soul_spec() {
  return {prescribe_soul_profile(SphereProfile::round(0.5), 1.0), PlaneProfile::flat(1.5), {1.0, 1.0}};
}

}  // namespace

TEST_CASE("inequality records") {
  SUBCASE("product spec is identically zero") {
    const QuotientSpec spec{SphereProfile::round(1.0), PlaneProfile::flat(1.5), {0.0, 0.0}};
    const EqualityAudit audit = equality_audit(spec, interior_grid(pi, 8), 16, 4);
    REQUIRE(audit.records.size() == 8 * 16);
    CHECK(audit.max_abs_residual <= 1e-10);
    CHECK(audit.max_abs_lhs <= 1e-10);
    CHECK(audit.min_k == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("equality on nontrivial specs") {
    const std::vector<QuotientSpec> specs{
        {SphereProfile::round(1.0), PlaneProfile::flat(1.5), {1.0, 1.0}},
        {SphereProfile::round(1.0), PlaneProfile::cap(1.0, 2.5), {0.5, 2.0}},
    };
    for (const QuotientSpec& spec : specs) {
      const EqualityAudit audit = equality_audit(spec, interior_grid(pi, 12), 16, 8);
      CHECK(audit.max_abs_residual <= 1e-4);
      CHECK(audit.max_abs_lhs > 1e-3);
      CHECK(audit.max_violation <= 1e-4);
    }
  }
  SUBCASE("direction along the rotation") {
    const SoulAtlas atlas({SphereProfile::round(1.0), PlaneProfile::cap(1.0, 2.5), {0.5, 2.0}}, kDefaultFdStep, 4);
    const auto records = eq1_records(atlas, {0.7, 1.6, 2.9}, 4, 0.4, 1);
    for (const RigidityRecord& r : records) {
      if (std::abs(r.angle - pi / 2) < 1e-12) {
        CHECK(r.lhs <= 1e-12);
        CHECK(r.rhs >= -1e-4);
      }
    }
  }
  SUBCASE("records are sorted and thread independent") {
    const SoulAtlas atlas({SphereProfile::round(1.0), PlaneProfile::flat(1.5), {1.0, 1.0}}, kDefaultFdStep, 4);
    const std::vector<double> grid{2.0, 0.5, 1.0};
    std::ostringstream a, b;
    write_rigidity_csv(a, eq1_records(atlas, grid, 4, 0.0, 1));
    write_rigidity_csv(b, eq1_records(atlas, grid, 4, 0.0, 3));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("t,angle,lhs,rhs,residual\n0.5,0,", 0) == 0);
  }
  SUBCASE("empty grid is rejected") {
    CHECK(kind_of([] { equality_audit({SphereProfile::round(1.0), PlaneProfile::flat(1.5), {0.0, 0.0}}, {}); }) ==
          ErrorKind::EmptySample);
  }
}

TEST_CASE("round sphere calculus") {
  SUBCASE("quadrature") {
    CHECK(sphere_integral([](const V3&) { return 1.0; }) == doctest::Approx(4.0 * pi).epsilon(1e-13));
    CHECK(sphere_integral([](const V3& p) { return p.z() * p.z(); }) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-13));
    CHECK(std::abs(sphere_integral([](const V3& p) { return p.x() * p.y() * p.z(); })) <= 1e-14);
  }
  SUBCASE("laplacian of harmonics") {
    const SphereField y1 = cz;
    const SphereField y2 = [](const V3& p) { return 3.0 * p.z() * p.z() - 1.0; };
    for (const V3& p : {V3(0, 0, 1), V3(0.6, 0.0, 0.8), V3(-0.48, 0.6, -0.64)}) {
      CHECK(sphere_laplacian(y1, p) == doctest::Approx(-2.0 * y1(p)).epsilon(1e-8));
      CHECK(std::abs(sphere_laplacian(y2, p) + 6.0 * y2(p)) <= 1e-8);
      CHECK(std::abs(sphere_gradient(y1, p).squaredNorm() - (1.0 - p.z() * p.z())) <= 1e-10);
    }
    CHECK(linear_eigen_residual(V3(1.0, -2.0, 0.5)) <= 1e-4);
  }
  SUBCASE("rayleigh quotient") {
    CHECK(std::abs(rayleigh(cz) - 2.0) <= 1e-5);
    const SphereField quad = [](const V3& p) { return std::cos(2.0 * std::acos(p.z())) + 1.0 / 3.0; };
    CHECK(std::abs(rayleigh(quad) - 6.0) <= 1e-4);
    CHECK(kind_of([] { rayleigh([](const V3&) { return 1.0; }); }) == ErrorKind::NotMeanZero);
    // spectral gap: a mixture sits above 2
    const SphereField mix = [](const V3& p) { return p.x() + 0.3 * (3.0 * p.z() * p.z() - 1.0); };
    CHECK(rayleigh(mix) >= 2.0);
  }
  SUBCASE("linear fit") {
    const LinearFit lin = fit_linear_eigenfunction([](const V3& p) { return 3.0 * p.z(); });
    CHECK((lin.Z - V3(0, 0, 3)).norm() <= 1e-6);
    CHECK(lin.residual <= 1e-6);
    const LinearFit zonal = fit_linear_eigenfunction([](const V3& p) { return 3.0 * p.z() * p.z() - 1.0; });
    CHECK(zonal.Z.norm() <= 1e-12);
    CHECK(zonal.residual == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kind_of([] { fit_linear_eigenfunction([](const V3&) { return 2.0; }); }) == ErrorKind::NotMeanZero);
  }
  SUBCASE("great-circle profile") {
    const V3 Z(0, 0, 3);
    const SphereField G = [](const V3& p) { return 2.25 * (2.0 * p.z() * p.z() - 1.0) + 5.0; };
    const GreatCircleProfile prof = great_circle_profile_check(G, Z);
    CHECK(std::abs(prof.amplitude - 2.25) <= 1e-6);
    CHECK(std::abs(prof.offset - 5.0) <= 1e-6);
    CHECK(prof.max_deviation <= 1e-6);
    CHECK(prof.drift <= 1e-10);
    CHECK(prof.amplitude_literal == 2.25);
    CHECK(prof.amplitude_trace == 3.375);
    const GreatCircleProfile flat = great_circle_profile_check([](const V3&) { return 7.0; }, V3(1e-9, 0, 0));
    CHECK(std::abs(flat.amplitude) <= 1e-12);
    CHECK(flat.offset == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(kind_of([] { great_circle_profile_check([](const V3&) { return 0.0; }, V3::Zero()); }) == ErrorKind::ZeroZ);
  }
  SUBCASE("trace inequality") {
    const V3 Z(0.3, -0.4, 1.2);
    const V3 zhat = Z.normalized();
    const SphereField F = [Z](const V3& p) { return p.dot(Z); };
    const auto zonal = [zhat](double A, double C) {
      return SphereField([zhat, A, C](const V3& p) { return A * (2.0 * std::pow(p.dot(zhat), 2) - 1.0) + C; });
    };
    // ΔG = |Z|²(1 − 3cos²) · (3/2) forces the amplitude 3|Z|²/8
    const TraceCheck exact = trace_inequality_check(F, zonal(3.0 * Z.squaredNorm() / 8.0, 0.7));
    CHECK(exact.max_abs_gap <= 1e-4);
    CHECK(std::abs(exact.laplacian_integral) <= 1e-8);
    // with |Z|²/4 the gap is |Z|²(1 − 3cos²)/3, positive off the Z axis
    const TraceCheck literal = trace_inequality_check(F, zonal(Z.squaredNorm() / 4.0, 0.7));
    CHECK(literal.max_residual == doctest::Approx(Z.squaredNorm() / 3.0).epsilon(1e-3));

    const SphereField zero = [](const V3&) { return 0.0; };
    CHECK(trace_inequality_check(zero, zero).max_residual == 0.0);
    const TraceCheck bad = trace_inequality_check(zero, cz);
    CHECK(std::abs(bad.max_residual - 4.0 / 3.0) <= 1e-3);
    CHECK(bad.argmax.z() == doctest::Approx(1.0));
    CHECK(std::abs(bad.laplacian_integral) <= 1e-8);
  }
}

TEST_CASE("round soul pipeline") {
  const QuotientSpec spec = round_soul_spec();
  spec.validate();
  const SoulAtlas atlas(spec, kDefaultFdStep, 4);
  const RoundSoulFields fields = round_soul_fields(atlas, 129, 8);
  CHECK(fields.radius == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fields.curvature_spread <= 1e-6);

  const LinearFit fit = fit_linear_eigenfunction(fields.F);
  CHECK(fit.residual <= 1e-3);
  // F = 2C1C2·φ' rescaled: |Z| = 2C1C2R²
  CHECK(fit.Z.norm() == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(std::abs(rayleigh(fields.F) - 2.0) <= 1e-5);

  const GreatCircleProfile prof = great_circle_profile_check(fields.G, fit.Z);
  CHECK(prof.drift <= 1e-4);
  CHECK(prof.offset_spread <= 1e-3);
  CHECK(std::abs(prof.amplitude - prof.amplitude_trace) <= 1e-3);
  // the literal |Z|²/4 amplitude is off by |Z|²/8
  CHECK(std::abs(prof.amplitude - prof.amplitude_literal) >= 1e-2);

  const TraceCheck trace = trace_inequality_check(fields.F, fields.G);
  CHECK(trace.max_residual <= 1e-4);
  CHECK(std::abs(trace.laplacian_integral) <= 1e-6);

  SUBCASE("trace of the records matches the trace check") {
    const double R = fields.radius;
    const auto records = eq1_records(atlas, {0.3, 0.8, 1.2}, 4, 0.0, 2);
    for (std::size_t i = 0; i < 3; ++i) {
      const double sum = records[4 * i].residual + records[4 * i + 1].residual;
      const double t = records[4 * i].t;
      const double gap = trace_gap(fields.F, fields.G, sphere_point(V3::UnitZ(), t / R, 0.0));
      CHECK(std::abs(std::pow(R, 6) * sum - gap) <= 1e-6);
    }
  }
}
