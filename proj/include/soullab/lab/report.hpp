#pragma once

#include "soullab/lab/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace soullab::lab {

/// One compared quantity. Non-gating checks are reported but never fail
/// their section.
struct Check {
  enum class Relation { AtMost, AtLeast, Within };

  std::string name;
  double value = 0.0;
  Relation relation = Relation::AtMost;
  double limit = 0.0;
  double limit_hi = 0.0;  // upper end for Within
  bool gating = true;

  bool pass() const;
};

Check at_most(std::string name, double value, double limit, bool gating = true);
Check at_least(std::string name, double value, double limit, bool gating = true);
Check within(std::string name, double value, double lo, double hi, bool gating = true);

struct Artifact {
  std::string file;
  std::string content;
};

struct Section {
  explicit Section(std::string section_name = {}) : name(std::move(section_name)) {}

  std::string name;
  bool applicable = true;
  std::string note;               // why the section is not applicable, or the error that stopped it
  bool errored = false;
  std::vector<Check> checks;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  std::vector<Artifact> csv;

  bool pass() const;
  const Check* find(const std::string& check) const;
};

struct AuditReport {
  std::string command;
  nlohmann::json config;
  std::string config_hash;
  std::vector<Section> sections;
  std::vector<Artifact> csv;  // command-level artifacts (build)

  bool pass() const;
  const Section* find(const std::string& section) const;
};

/// Commands of the CLI in their canonical spelling.
const std::vector<std::string>& commands();

/// Sections run by a command, in report order.
std::vector<std::string> sections_for(const std::string& command);

/// Runs one section. Library errors inside a section mark it failed.
Section run_section(const std::string& name, const LabConfig& config, int threads);

/// Raises InvalidArgument for an unknown command.
AuditReport run_command(const std::string& command, const LabConfig& config, int threads);

/// Pretty-printed JSON with a trailing newline. Never depends on threads,
/// wall time or paths.
std::string report_json(const AuditReport& report);

/// One line per section and failed check.
std::string report_summary(const AuditReport& report);

/// Writes the report, summary.txt and every CSV under `out_dir`. Raises
/// IOError naming the path that could not be written.
void write_artifacts(const AuditReport& report, const LabConfig& config, const std::filesystem::path& out_dir);

}  // namespace soullab::lab
