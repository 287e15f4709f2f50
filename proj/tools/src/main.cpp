#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "scorelab/errors.hpp"

#include "datagen.hpp"
#include "experiments.hpp"

namespace fs = std::filesystem;
using scorelab::cli::ConfigError;
using scorelab::cli::json;

namespace {

int cmd_run(const std::string& config_path, std::string output_dir, bool no_timestamp) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
  json config;
  try {
    in >> config;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  if (output_dir.empty()) {
    if (const char* env = std::getenv("SCORELAB_OUTPUT_DIR")) output_dir = env;
  }
  if (output_dir.empty() && config.contains("output_dir"))
    output_dir = config.at("output_dir").get<std::string>();
  if (output_dir.empty()) output_dir = "scorelab-out";

  bool timestamp = !no_timestamp;
  if (config.contains("timestamp") && no_timestamp == false)
    timestamp = config.at("timestamp").get<bool>();

  scorelab::cli::run_experiment(config, fs::path(output_dir), timestamp);
  std::printf("wrote artifacts to %s\n", output_dir.c_str());
  return 0;
}

int cmd_gen_data(const std::string& spec, const std::string& out_path) {
  const scorelab::Dataset d = scorelab::cli::gen_dataset(spec);
  d.save(out_path);
  std::printf("wrote %d points (d=%d, m=%d) to %s\n", d.size(), d.dim(), d.obs_dim(),
              out_path.c_str());
  return 0;
}

int cmd_list() {
  for (const auto& e : scorelab::cli::experiment_catalog())
    std::printf("%-22s %s\n", e.name.c_str(), e.summary.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scorelab: exact-score diffusion dynamics, memorization metrics and sweeps"};
  app.require_subcommand(1);

  std::string config_path, output_dir, spec, out_path;
  bool no_timestamp = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("-o,--output-dir", output_dir,
                  "output directory (overrides config and SCORELAB_OUTPUT_DIR)");
  run->add_flag("--no-timestamp", no_timestamp, "suppress the timestamp comment in SVG output");

  CLI::App* gen = app.add_subcommand("gen-data", "generate a dataset file");
  gen->add_option("spec", spec,
                  "generator spec: gaussian2d:N:SEED | symmetric2 | symmetric4 | "
                  "paired-linear:N:SEED | file:PATH")
      ->required();
  gen->add_option("-o,--output", out_path, "output dataset file")->required();

  app.add_subcommand("list-experiments", "list available experiments");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path, output_dir, no_timestamp);
    if (gen->parsed()) return cmd_gen_data(spec, out_path);
    return cmd_list();
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {  // config/contract errors
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {  // undefined observation, singular time
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {  // runtime failures
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 1;
  }
}
