#pragma once

#include "soullab/quotient.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace soullab::lab {

struct NumericConfig {
  double fd_step = kDefaultFdStep;
  int soul_grid_nodes = 101;        // odd, Simpson grid for ∫F and soul_data.csv
  int oracle_points = 100;          // random points per region
  int nonneg_samples = 2000;
  std::uint64_t seed = 7;
  int rigidity_points = 40;
  int directions = 16;
  double geodesic_step = 0.05;
  int geodesic_steps_per_unit = 1000;
  int bundle_points = 50;
  std::vector<double> bundle_radii{0.5, 1.0, 2.0};
  std::vector<double> distance_radii{0.5, 1.0};
  int distance_points = 20;         // per region
  int probe_samples = 2000;
  int round_nodes = 129;
  int quadrature_panels = 2;
  int azimuth_nodes = 64;
  int build_points = 17;
};

struct Tolerances {
  double nonneg_tol = 1e-5;
  double equality_tol = 1e-4;
  double oracle_tol = 1e-10;
};

struct OutputConfig {
  std::string report = "report.json";
  std::string csv_dir = "csv";
};

struct LabConfig {
  std::string name;
  QuotientSpec spec{SphereProfile::round(1.0), PlaneProfile::flat(1.0), {}};
  NumericConfig numeric;
  Tolerances tolerances;
  OutputConfig output;
  /// Resolved document with every default filled in; hashed and echoed.
  nlohmann::json echo;

  HessianOptions hessian() const { return {numeric.geodesic_step, numeric.geodesic_steps_per_unit}; }
};

/// Parses and validates eagerly. Every failure is a ConfigError whose
/// message starts with the dotted path of the offending field.
LabConfig parse_config(const nlohmann::json& doc);
LabConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the compact dump of the resolved config, as 16 hex digits.
std::string config_hash(const nlohmann::json& echo);

}  // namespace soullab::lab
