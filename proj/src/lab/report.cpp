#include "soullab/lab/report.hpp"

#include "soullab/error.hpp"
#include "soullab/rigidity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace soullab::lab {

using nlohmann::ordered_json;

bool Check::pass() const {
  if (!std::isfinite(value)) return false;
  switch (relation) {
    case Relation::AtMost: return value <= limit;
    case Relation::AtLeast: return value >= limit;
    case Relation::Within: return value >= limit && value <= limit_hi;
  }
  return false;
}

Check at_most(std::string name, double value, double limit, bool gating) {
  return {std::move(name), value, Check::Relation::AtMost, limit, 0.0, gating};
}
Check at_least(std::string name, double value, double limit, bool gating) {
  return {std::move(name), value, Check::Relation::AtLeast, limit, 0.0, gating};
}
Check within(std::string name, double value, double lo, double hi, bool gating) {
  return {std::move(name), value, Check::Relation::Within, lo, hi, gating};
}

bool Section::pass() const {
  if (errored) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.gating || c.pass(); });
}

const Check* Section::find(const std::string& check) const {
  for (const Check& c : checks) {
    if (c.name == check) return &c;
  }
  return nullptr;
}

bool AuditReport::pass() const {
  return std::all_of(sections.begin(), sections.end(), [](const Section& s) { return s.pass(); });
}

const Section* AuditReport::find(const std::string& section) const {
  for (const Section& s : sections) {
    if (s.name == section) return &s;
  }
  return nullptr;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"build",          "audit-nonneg", "audit-bundle",
                                              "audit-rigidity", "audit-round",  "audit-all"};
  return names;
}

std::vector<std::string> sections_for(const std::string& command) {
  if (command == "build") return {};
  if (command == "audit-nonneg") return {"nonneg", "oracle"};
  if (command == "audit-bundle") return {"bundle"};
  if (command == "audit-rigidity") return {"rigidity"};
  if (command == "audit-round") return {"round"};
  if (command == "audit-all") return {"nonneg", "oracle", "bundle", "rigidity", "round"};
  raise(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
}

namespace {

// Quotient metric at a few plane points over each soul sample.
std::string quotient_samples_csv(const LabConfig& c) {
  const SoulAtlas atlas(c.spec, c.numeric.fd_step);
  const double half = c.spec.plane.rho_max() / std::sqrt(2.0) - 10.0 * c.numeric.fd_step;
  std::ostringstream out;
  out << "region,t,s,c0,c1,x,y,h00,h01,h02,h03,h11,h12,h13,h22,h23,h33\n";
  for (double t : interior_grid(atlas.length(), c.numeric.build_points)) {
    const SoulRegion region = atlas.region_for(t);
    const Vec sp = atlas.soul_point(region, t, 0.0);
    for (int j = 0; j <= 4; ++j) {
      const double rho = half * j / 4.0;
      const double x = rho * std::cos(std::numbers::pi / 4), y = rho * std::sin(std::numbers::pi / 4);
      const Mat h = atlas.quotient(region).chart.metric(make_vec({sp[0], sp[1], x, y}));
      out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", to_string(region), t, 0.0, sp[0], sp[1], x,
                         y);
      for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) out << fmt::format(",{:.17g}", h(a, b));
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string soul_data_csv(const LabConfig& c, int threads) {
  const SoulAtlas atlas(c.spec, c.numeric.fd_step);
  std::ostringstream out;
  soul_data(atlas, simpson_grid(atlas.length(), c.numeric.soul_grid_nodes), threads, c.hessian()).write_csv(out);
  return out.str();
}

const char* relation_name(Check::Relation r) {
  switch (r) {
    case Check::Relation::AtMost: return "<=";
    case Check::Relation::AtLeast: return ">=";
    case Check::Relation::Within: return "in";
  }
  return "?";
}

ordered_json finite_or_null(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

ordered_json check_json(const Check& c) {
  ordered_json out{{"name", c.name}, {"value", finite_or_null(c.value)}, {"relation", relation_name(c.relation)}};
  if (c.relation == Check::Relation::Within) {
    out["limit"] = {c.limit, c.limit_hi};
  } else {
    out["limit"] = c.limit;
  }
  out["gating"] = c.gating;
  out["pass"] = c.pass();
  return out;
}

std::string describe(const Check& c) {
  if (c.relation == Check::Relation::Within) {
    return fmt::format("{} = {:.6g} in [{:.3g}, {:.3g}]", c.name, c.value, c.limit, c.limit_hi);
  }
  return fmt::format("{} = {:.6g} {} {:.3g}", c.name, c.value, relation_name(c.relation), c.limit);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) raise(ErrorKind::IOError, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) raise(ErrorKind::IOError, "cannot write " + path.string());
}

}  // namespace

AuditReport run_command(const std::string& command, const LabConfig& config, int threads) {
  AuditReport report;
  report.command = command;
  report.config = config.echo;
  report.config_hash = config_hash(config.echo);
  const std::vector<std::string> names = sections_for(command);
  if (command == "build") {
    report.csv.push_back({"quotient_samples.csv", quotient_samples_csv(config)});
    report.csv.push_back({"soul_data.csv", soul_data_csv(config, threads)});
  }
  for (const std::string& name : names) report.sections.push_back(run_section(name, config, threads));
  return report;
}

std::string report_json(const AuditReport& report) {
  ordered_json doc;
  doc["schema"] = "soul-lab-report/1";
  doc["command"] = report.command;
  doc["config_hash"] = "fnv1a64:" + report.config_hash;
  doc["config"] = ordered_json::parse(report.config.dump());
  ordered_json artifacts = ordered_json::array();
  for (const Artifact& a : report.csv) artifacts.push_back(a.file);
  doc["csv"] = artifacts;
  ordered_json sections = ordered_json::array();
  for (const Section& s : report.sections) {
    ordered_json js{{"name", s.name}, {"pass", s.pass()}, {"applicable", s.applicable}, {"errored", s.errored}};
    js["note"] = s.note;
    ordered_json checks = ordered_json::array();
    for (const Check& c : s.checks) checks.push_back(check_json(c));
    js["checks"] = checks;
    js["details"] = s.details;
    ordered_json files = ordered_json::array();
    for (const Artifact& a : s.csv) files.push_back(a.file);
    js["csv"] = files;
    sections.push_back(js);
  }
  doc["sections"] = sections;
  doc["pass"] = report.pass();
  return doc.dump(2) + "\n";
}

std::string report_summary(const AuditReport& report) {
  std::string out = fmt::format("soul-lab {} config={} hash={}\n", report.command,
                                report.config.value("name", std::string("unnamed")), report.config_hash);
  for (const Section& s : report.sections) {
    std::string tag = s.pass() ? "PASS" : "FAIL";
    if (!s.applicable) tag += " (not applicable)";
    out += fmt::format("[{}] {}\n", tag, s.name);
    if (!s.note.empty()) out += "  note: " + s.note + "\n";
    for (const Check& c : s.checks) {
      if (c.pass()) continue;
      out += fmt::format("  {} {}\n", c.gating ? "fail" : "outside (report only)", describe(c));
    }
  }
  out += fmt::format("overall: {}\n", report.pass() ? "PASS" : "FAIL");
  return out;
}

void write_artifacts(const AuditReport& report, const LabConfig& config, const std::filesystem::path& out_dir) {
  const std::filesystem::path report_path = out_dir / config.output.report;
  write_file(report_path, report_json(report));
  write_file(report_path.parent_path() / "summary.txt", report_summary(report));
  const std::filesystem::path csv_dir = out_dir / config.output.csv_dir;
  for (const Artifact& a : report.csv) write_file(csv_dir / a.file, a.content);
  for (const Section& s : report.sections) {
    for (const Artifact& a : s.csv) write_file(csv_dir / a.file, a.content);
  }
}

}  // namespace soullab::lab
