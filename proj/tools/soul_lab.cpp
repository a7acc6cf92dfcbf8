// soul-lab <command> --config <path> [--out <dir>] [--threads N]
//
// Exit codes: 0 every section passed, 1 an audit failed, 2 bad input.

#include "soullab/error.hpp"
#include "soullab/lab/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kPass = 0;
constexpr int kAuditFailure = 1;
constexpr int kInputError = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace soullab;

  CLI::App app{"Build and audit quotient metrics on S2 x R2", "soul-lab"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  app.add_option("command", command, "build | audit-nonneg | audit-bundle | audit-rigidity | audit-round | audit-all")
      ->required()
      ->check(CLI::IsMember(lab::commands()));
  app.add_option("--config", config_path, "JSON config")->required();
  app.add_option("--out", out_dir, "output directory (default $SOUL_LAB_OUT, then .)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  if (out_dir.empty()) {
    const char* env = std::getenv("SOUL_LAB_OUT");
    out_dir = (env != nullptr && *env != '\0') ? env : ".";
  }

  lab::LabConfig config;
  try {
    config = lab::load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "soul-lab: input error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    const lab::AuditReport report = lab::run_command(command, config, threads);
    lab::write_artifacts(report, config, out_dir);
    std::cout << lab::report_summary(report);
    return report.pass() ? kPass : kAuditFailure;
  } catch (const Error& e) {
    std::cerr << "soul-lab: " << e.what() << "\n";
    return e.kind() == ErrorKind::IOError ? kInputError : kAuditFailure;
  }
}
