#pragma once

// Batch experiments driven by a JSON configuration, and their reports.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hct/serialize.hpp"

namespace hct {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kConfigSchema = 1;

struct ExperimentSpec {
  std::string name;
  Json options = Json::object();
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string mesh_generator;  // empty when mesh_file is set
  int mesh_n = 0;
  std::string mesh_file;       // resolved path
  std::vector<std::string> partitions{"none"};
  Json weights = "unit";
  MassScheme scheme = MassScheme::WhitneyGalerkin;
  std::vector<int> degrees;    // empty: all degrees of the mesh
  std::vector<ExperimentSpec> experiments;
  std::string output_path;     // empty: no file
  std::string output_format = "json";
  Json echo;                   // the parsed document, for the report
};

/// Throws ParseError (with line and column) for malformed JSON and
/// ConfigError (with the offending field path) for invalid content.
/// Relative mesh file paths are resolved against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

const std::vector<std::string>& experiment_names();

struct Record {
  std::string mesh;
  std::string partition;
  int q = -1;  // -1: not tied to a degree
  std::string quantity;
  double value = 0.0;
  double tolerance = 0.0;
  std::string status;  // pass | fail | info
};

struct ExperimentResult {
  std::string name;
  std::vector<Record> records;
  Json details = Json::array();
  bool passed = true;
};

struct Report {
  Json config;
  std::string generated_at;
  std::vector<ExperimentResult> experiments;
  bool all_passed = true;
};

Report run(const ExperimentConfig& config);

Json report_to_json(const Report& r);
std::string report_json_string(const Report& r);
/// Columns: experiment, mesh, partition, q, quantity, value, tolerance, status.
std::string report_to_csv(const Json& report);
std::string report_to_csv(const Report& r);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Number of worker threads: HCT_THREADS if set and positive, else the
/// hardware concurrency, at least 1.
int thread_budget();

/// Runs fn(0..n-1) on up to thread_budget() threads; results keep index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hct
