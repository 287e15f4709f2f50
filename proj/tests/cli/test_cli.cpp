// End-to-end checks of the scorelab command line tool: exit codes, artifact
// layout, manifest completeness, and byte-level reproducibility.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return SCORELAB_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("scorelab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      out[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
  }
  return out;
}

}  // namespace

TEST_CASE("list-experiments and usage errors") {
  CHECK(run_cli("list-experiments") == 0);
  CHECK(run_cli("definitely-not-a-command") == 2);
  CHECK(run_cli("run /nonexistent/config.json") == 2);
}

TEST_CASE("gen-data is deterministic and validates its spec") {
  const fs::path dir = fresh_dir("gendata");
  const fs::path a = dir / "a.txt", b = dir / "b.txt";
  CHECK(run_cli("gen-data gaussian2d:20:7 -o " + a.string()) == 0);
  CHECK(run_cli("gen-data gaussian2d:20:7 -o " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(run_cli("gen-data bogus:3 -o " + (dir / "c.txt").string()) == 2);
  CHECK(run_cli("gen-data symmetric2 -o " + (dir / "s2.txt").string()) == 0);
  const std::string s2 = slurp(dir / "s2.txt");
  CHECK(s2.find("2 2 0") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("two-point experiment writes a complete, reproducible artifact set") {
  const fs::path dir = fresh_dir("twopoint");
  const fs::path cfg_path = dir / "config.json";
  write_file(cfg_path, R"({
    "experiment": "two-point",
    "sampling": {"count": 40, "seed": 11},
    "grid_side": 5
  })");

  const fs::path out1 = dir / "run1", out2 = dir / "run2";
  CHECK(run_cli("run " + cfg_path.string() + " -o " + out1.string() + " --no-timestamp") == 0);
  CHECK(run_cli("run " + cfg_path.string() + " -o " + out2.string() + " --no-timestamp") == 0);

  for (const char* name :
       {"config.json", "dataset.csv", "trajectories.csv", "terminals.csv", "scatter.svg",
        "report.json", "manifest.json"}) {
    CHECK(fs::exists(out1 / name));
  }

  SUBCASE("byte-identical CSVs on rerun") {
    const auto files1 = csv_files(out1);
    const auto files2 = csv_files(out2);
    REQUIRE(files1.size() == files2.size());
    REQUIRE(!files1.empty());
    for (const auto& [name, content] : files1) {
      CHECK(files2.at(name) == content);
    }
    CHECK(slurp(out1 / "scatter.svg") == slurp(out2 / "scatter.svg"));
  }

  SUBCASE("manifest lists every output with its size and hash") {
    const json manifest = json::parse(slurp(out1 / "manifest.json"));
    std::map<std::string, json> listed;
    for (const auto& e : manifest.at("outputs")) listed[e.at("path")] = e;
    for (const auto& entry : fs::recursive_directory_iterator(out1)) {
      if (!entry.is_regular_file()) continue;
      const std::string rel = fs::relative(entry.path(), out1).string();
      if (rel == "manifest.json") continue;
      REQUIRE_MESSAGE(listed.count(rel) == 1, "missing from manifest: ", rel);
      const std::string content = slurp(entry.path());
      CHECK(listed[rel].at("bytes").get<std::uint64_t>() == content.size());
      char hex[32];
      std::snprintf(hex, sizeof(hex), "%016llx",
                    static_cast<unsigned long long>(fnv1a64(content)));
      CHECK(listed[rel].at("fnv1a64").get<std::string>() == hex);
    }
  }

  SUBCASE("report records the on-axis invariant") {
    const json report = json::parse(slurp(out1 / "report.json"));
    CHECK(report.at("on_axis_max_error").get<double>() <= 1e-6);
    CHECK(report.at("fraction_collapsed").get<double>() == 1.0);
  }

  fs::remove_all(dir);
}

TEST_CASE("conditional demo: unseen observation exits with code 2") {
  const fs::path dir = fresh_dir("conditional");
  const fs::path good = dir / "good.json", bad = dir / "bad.json";
  write_file(good, R"({
    "experiment": "conditional-demo",
    "dataset": {"generator": "paired-linear", "n": 4, "seed": 3},
    "sampling": {"count": 10, "seed": 5, "steps": 120}
  })");
  write_file(bad, R"({
    "experiment": "conditional-demo",
    "dataset": {"generator": "paired-linear", "n": 4, "seed": 3},
    "sampling": {"count": 10, "seed": 5, "steps": 120},
    "query": [[123.456]]
  })");
  CHECK(run_cli("run " + good.string() + " -o " + (dir / "out").string()) == 0);
  CHECK(run_cli("run " + bad.string() + " -o " + (dir / "out_bad").string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("environment variable overrides the output directory") {
  const fs::path dir = fresh_dir("envdir");
  const fs::path cfg_path = dir / "config.json";
  write_file(cfg_path, R"({
    "experiment": "two-point",
    "sampling": {"count": 5, "seed": 1},
    "grid_side": 3,
    "output_dir": ")" + (dir / "ignored").string() + R"("
  })");
  const fs::path target = dir / "from_env";
  const std::string cmd = "SCORELAB_OUTPUT_DIR=" + target.string() + " " + cli_path() +
                          " run " + cfg_path.string() + " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(fs::exists(target / "manifest.json"));
  CHECK(!fs::exists(dir / "ignored"));
  fs::remove_all(dir);
}
