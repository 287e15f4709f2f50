#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace scorelab::cli {

using json = nlohmann::json;

struct ExperimentInfo {
  std::string name;
  std::string summary;
};

const std::vector<ExperimentInfo>& experiment_catalog();

// Resolved config = per-experiment defaults deep-merged with the user config.
json resolve_config(const json& user_config);

// Runs the experiment named in the config, writing all artifacts plus a
// manifest into out_dir.
void run_experiment(const json& config, const std::filesystem::path& out_dir, bool timestamp);

}  // namespace scorelab::cli
