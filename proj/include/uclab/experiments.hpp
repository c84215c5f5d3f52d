#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uclab/config.hpp"
#include "uclab/csvio.hpp"
#include "uclab/parallel.hpp"

namespace uclab {

// Experiment kinds the orchestrator accepts for the `kind` key.
const std::vector<std::string>& experiment_kinds();

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out_dir;
  par::Exec exec = par::Exec::OpenMP;
  bool dry_run = false;  // validate and plan only, write nothing
};

struct ResultRecord {
  std::string kind;
  std::string digest;  // config content hash, hex
  std::uint64_t seed = 1;
  io::Table table;
  bool all_pass = true;
  double wall_seconds = 0.0;  // console reporting only, never persisted
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
};

// Parse-level checks plus the full per-kind validation; empty means valid.
std::vector<std::string> validate_config(const Config& config);

// Executes the configured sweep. CSV rows are written and flushed in sweep
// order as they are produced; the JSON mirror is written at the end. Throws
// ConfigError for invalid configs; module errors propagate tagged with the
// offending sweep coordinates.
ResultRecord run_experiment(const Config& config, const RunOverrides& overrides);

// Tidy tab-separated plot data from the JSON mirror of one run.
std::string plotdata_from_json(const std::string& json_text);

}  // namespace uclab
