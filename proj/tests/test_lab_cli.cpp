#include "doctest.h"

#include "soullab/error.hpp"
#include "soullab/lab/config.hpp"
#include "soullab/lab/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace soullab;
using nlohmann::json;

namespace {

json product_doc() {
  return json::parse(R"({
    "name": "unit",
    "spec": {"sphere": {"family": "round", "R": 1.0}, "plane": {"family": "flat", "rho_max": 3.0},
             "C1": 0.0, "C2": 0.0},
    "numeric": {"distance_radii": [0.3, 0.6], "nonneg_samples": 200, "probe_samples": 200,
                "rigidity_points": 4, "directions": 4, "bundle_points": 5, "soul_grid_nodes": 21}
  })");
}

// Message of the ConfigError raised by parsing `doc`.
std::string config_error(const json& doc) {
  try {
    lab::parse_config(doc);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  FAIL("expected a ConfigError");
  return {};
}

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("config loading") {
  SUBCASE("defaults are resolved and echoed") {
    const lab::LabConfig c = lab::parse_config(product_doc());
    CHECK(c.name == "unit");
    CHECK(c.tolerances.equality_tol == 1e-4);
    CHECK(c.numeric.seed == 7);
    CHECK(c.echo["numeric"]["fd_step"] == 1e-3);
    CHECK(c.echo["spec"]["sphere"]["soul_target"] == false);
    CHECK(c.echo["output"]["report"] == "report.json");
  }
  SUBCASE("hash follows content, not formatting") {
    const std::string a = lab::config_hash(lab::parse_config(product_doc()).echo);
    CHECK(a.size() == 16);
    json spelled_out = product_doc();
    spelled_out["tolerances"] = {{"equality_tol", 1e-4}};
    CHECK(lab::config_hash(lab::parse_config(spelled_out).echo) == a);
    json changed = product_doc();
    changed["numeric"]["seed"] = 8;
    CHECK(lab::config_hash(lab::parse_config(changed).echo) != a);
  }
  SUBCASE("soul target is prescribed through C1") {
    json doc = product_doc();
    doc["spec"]["sphere"] = {{"family", "round"}, {"R", 0.5}, {"soul_target", true}};
    doc["spec"]["C1"] = 1.0;
    const lab::LabConfig c = lab::parse_config(doc);
    // f = f_Σ/√(1 − f_Σ²) at the equator, f_Σ = 0.5
    CHECK(c.spec.sphere.f(c.spec.sphere.length() / 2) == doctest::Approx(0.5 / std::sqrt(0.75)).epsilon(1e-10));
    doc["spec"]["C1"] = 2.0;
    CHECK(contains(config_error(doc), "spec.C1"));
  }
  SUBCASE("errors name the offending field") {
    json doc = product_doc();
    doc["spec"]["plane"] = {{"family", "sinh"}, {"R", 1.0}, {"rho_max", 2.0}};
    const std::string msg = config_error(doc);
    CHECK(contains(msg, "spec.plane"));
    CHECK(contains(msg, "concavity"));

    doc = product_doc();
    doc["tolerances"] = {{"nonneg_tol", 0.0}};
    CHECK(contains(config_error(doc), "tolerances.nonneg_tol"));

    doc = product_doc();
    doc["numeric"]["nonneg_samples"] = 99;
    CHECK(contains(config_error(doc), "numeric.nonneg_samples"));

    doc = product_doc();
    doc["spec"]["C2"] = "one";
    CHECK(contains(config_error(doc), "spec.C2: expected a number"));

    doc = product_doc();
    doc["spec"]["sphere"]["radius"] = 1.0;
    CHECK(contains(config_error(doc), "spec.sphere.radius: unknown field"));

    doc = product_doc();
    doc["spec"].erase("C1");
    CHECK(contains(config_error(doc), "spec.C1: missing"));

    doc = product_doc();
    doc["spec"]["sphere"] = {{"family", "spline"}, {"length", 3.0}, {"knots", {0.0, 0.5, 0.0}}};
    CHECK(contains(config_error(doc), "spec.sphere.knots"));
  }
  SUBCASE("distance radii must admit a bundle model") {
    json doc = product_doc();
    doc["numeric"]["distance_radii"] = {0.3, 1.5};  // b = 1.5 ≥ 1 with C2 = 0
    CHECK(contains(config_error(doc), "numeric.distance_radii[1]"));
    doc["numeric"]["distance_radii"] = {0.3, 2.5};  // outside the plane box
    CHECK(contains(config_error(doc), "numeric.distance_radii[1]"));
    doc["numeric"]["distance_radii"] = {0.3};
    CHECK(contains(config_error(doc), "numeric.distance_radii"));
  }
  SUBCASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "soullab_lab_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "broken.json") << "{ \"name\": ";
    try {
      lab::load_config(dir / "broken.json");
      FAIL("expected a ConfigError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConfigError);
    }
    try {
      lab::load_config(dir / "absent.json");
      FAIL("expected an IOError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IOError);
    }
  }
}

TEST_CASE("checks and sections") {
  CHECK(lab::at_most("a", 1.0, 1.0).pass());
  CHECK_FALSE(lab::at_least("a", 0.5, 1.0).pass());
  CHECK(lab::within("a", 0.0, -1.0, 1.0).pass());
  CHECK_FALSE(lab::at_most("a", std::nan(""), 1.0).pass());

  lab::Section s("x");
  s.checks.push_back(lab::at_most("gating", 2.0, 1.0, false));
  CHECK(s.pass());  // report-only checks never fail a section
  s.checks.push_back(lab::at_most("gating", 2.0, 1.0));
  CHECK_FALSE(s.pass());
  lab::Section broken("y");
  broken.errored = true;
  CHECK_FALSE(broken.pass());
}

TEST_CASE("commands and reports") {
  const lab::LabConfig c = lab::parse_config(product_doc());
  SUBCASE("section order") {
    CHECK(lab::sections_for("audit-all") == std::vector<std::string>{"nonneg", "oracle", "bundle", "rigidity", "round"});
    CHECK(lab::sections_for("audit-nonneg") == std::vector<std::string>{"nonneg", "oracle"});
    CHECK(lab::sections_for("build").empty());
    CHECK_THROWS_AS(lab::sections_for("audit-some"), Error);
  }
  SUBCASE("build gives a report with zero sections") {
    const lab::AuditReport r = lab::run_command("build", c, 2);
    CHECK(r.sections.empty());
    CHECK(r.pass());
    const json doc = json::parse(lab::report_json(r));
    CHECK(doc["sections"].empty());
    CHECK(doc["pass"] == true);
    REQUIRE(r.csv.size() == 2);
    CHECK(r.csv[0].content.rfind("region,t,s,c0,c1,x,y,h00,", 0) == 0);
  }
  SUBCASE("product spec passes every section trivially") {
    const lab::AuditReport r = lab::run_command("audit-all", c, 2);
    CHECK(r.pass());
    const json doc = json::parse(lab::report_json(r));
    std::vector<std::string> names;
    for (const auto& s : doc["sections"]) names.push_back(s["name"]);
    CHECK(names == lab::sections_for("audit-all"));
    CHECK(doc["config_hash"] == "fnv1a64:" + lab::config_hash(c.echo));
    CHECK(lab::report_json(r) == lab::report_json(lab::run_command("audit-all", c, 3)));
    CHECK(contains(lab::report_summary(r), "overall: PASS"));
  }
  SUBCASE("changing the seed keeps the verdict") {
    json doc = product_doc();
    doc["spec"]["C1"] = 1.0;
    doc["spec"]["C2"] = 1.0;
    doc["spec"]["plane"]["rho_max"] = 1.5;
    const lab::Section a = lab::run_section("nonneg", lab::parse_config(doc), 2);
    doc["numeric"]["seed"] = 99;
    const lab::Section b = lab::run_section("nonneg", lab::parse_config(doc), 2);
    CHECK(a.pass());
    CHECK(b.pass());
    CHECK(a.details["scan"]["argmin"]["point"] != b.details["scan"]["argmin"]["point"]);
  }
  SUBCASE("artifacts land under the output directory") {
    const auto dir = std::filesystem::temp_directory_path() / "soullab_lab_out";
    std::filesystem::remove_all(dir);
    const lab::AuditReport r = lab::run_command("audit-rigidity", c, 1);
    lab::write_artifacts(r, c, dir);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "summary.txt"));
    CHECK(std::filesystem::exists(dir / "csv" / "rigidity.csv"));
  }
}
