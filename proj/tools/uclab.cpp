#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "uclab/config.hpp"
#include "uclab/experiments.hpp"
#include "uclab/parallel.hpp"
#include "uclab/version.hpp"

namespace {

struct CliState {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  bool strict = true;
  bool serial = false;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void add_common(CLI::App* cmd, CliState& state) {
  cmd->add_option("--config", state.config_path, "experiment config file")->required();
  cmd->add_option("--out", state.out_dir, "output directory (overrides the config)");
  cmd->add_option("--seed", state.seed, "seed override")->each([&](const std::string&) {
    state.seed_set = true;
  });
  cmd->add_option("--jobs", state.jobs, "worker thread count (0 = library default)");
  cmd->add_flag("--strict,!--no-strict", state.strict,
                "fail the exit status on FAIL verdicts (default on)");
  cmd->add_flag("--serial", state.serial, "run kernels in the serial reference mode");
}

int print_config_problems(const std::vector<std::string>& problems) {
  std::fprintf(stderr, "configuration rejected:\n");
  for (const auto& p : problems) std::fprintf(stderr, "  - %s\n", p.c_str());
  return 2;
}

uclab::Config parse_or_exit(const std::string& path) {
  return uclab::Config::parse(slurp(path));
}

int run_kind(const std::string& kind, const CliState& state) {
  const uclab::Config config = parse_or_exit(state.config_path);
  const uclab::ConfigEntry* kind_entry = config.find("", "kind");
  if (!kind_entry || kind_entry->raw != kind) {
    std::fprintf(stderr, "config kind '%s' does not match subcommand '%s'\n",
                 kind_entry ? kind_entry->raw.c_str() : "(missing)", kind.c_str());
    return 2;
  }
  uclab::RunOverrides overrides;
  if (!state.out_dir.empty()) overrides.out_dir = state.out_dir;
  if (state.seed_set) overrides.seed = state.seed;
  if (state.jobs > 0) overrides.jobs = state.jobs;
  overrides.exec = state.serial ? uclab::par::Exec::Serial : uclab::par::Exec::OpenMP;

  const uclab::ResultRecord rec = uclab::run_experiment(config, overrides);
  std::printf("%s digest=%s seed=%llu rows=%zu all_pass=%s\n", rec.kind.c_str(),
              rec.digest.c_str(), static_cast<unsigned long long>(rec.seed),
              rec.table.rows().size(), rec.all_pass ? "yes" : "no");
  std::printf("csv=%s\njson=%s\nwall=%.3fs\n", rec.csv_path.string().c_str(),
              rec.json_path.string().c_str(), rec.wall_seconds);
  if (!rec.all_pass) {
    std::fprintf(stderr, "one or more verdict rows FAILED\n");
    return state.strict ? 3 : 0;
  }
  return 0;
}

int run_validate(const CliState& state) {
  const uclab::Config config = parse_or_exit(state.config_path);
  const std::vector<std::string> problems = uclab::validate_config(config);
  if (!problems.empty()) return print_config_problems(problems);
  std::printf("ok digest=%s\n", config.digest_hex().c_str());
  return 0;
}

int run_plotdata(const CliState& state) {
  const uclab::Config config = parse_or_exit(state.config_path);
  uclab::ConfigReader reader(config);
  const std::string kind = reader.word_or("", "kind", "run");
  const std::string label = reader.word_or("", "label", kind);
  const std::string out =
      !state.out_dir.empty() ? state.out_dir : reader.word_or("", "out", "results");
  const std::filesystem::path json_path = std::filesystem::path(out) / (label + ".json");
  std::ifstream in(json_path, std::ios::binary);
  if (!in)
    throw std::runtime_error("no result mirror at " + json_path.string() +
                             "; run the experiment first");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string tsv = uclab::plotdata_from_json(ss.str());
  const std::filesystem::path tsv_path = std::filesystem::path(out) / (label + "-plot.tsv");
  std::ofstream out_file(tsv_path, std::ios::binary);
  out_file << tsv;
  out_file.close();
  std::printf("plotdata=%s\n", tsv_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("uclab ") + uclab::kToolVersion +
               " - spectral subspace estimate laboratory"};
  app.require_subcommand(1);

  std::map<std::string, CliState> states;
  std::map<std::string, CLI::App*> commands;
  for (const std::string& kind : uclab::experiment_kinds()) {
    CLI::App* cmd = app.add_subcommand(kind, "run a '" + kind + "' experiment config");
    add_common(cmd, states[kind]);
    commands[kind] = cmd;
  }
  CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
  add_common(validate, states["validate"]);
  CLI::App* plotdata =
      app.add_subcommand("plotdata", "emit tidy plot data from a finished run");
  add_common(plotdata, states["plotdata"]);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return run_validate(states["validate"]);
    if (plotdata->parsed()) return run_plotdata(states["plotdata"]);
    for (const auto& [kind, cmd] : commands)
      if (cmd->parsed()) return run_kind(kind, states[kind]);
    std::fprintf(stderr, "no subcommand selected\n");
    return 2;
  } catch (const uclab::ConfigError& e) {
    return print_config_problems(e.problems());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
