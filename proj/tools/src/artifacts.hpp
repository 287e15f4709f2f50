#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace scorelab::cli {

std::string fmt_g17(double v);
std::uint64_t fnv1a64(std::string_view data);

// Collects every file an experiment writes and emits a manifest listing
// path, byte size and content hash alongside the config hash.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& relative_path, std::string_view content);
  void write_manifest(std::uint64_t config_hash);

 private:
  struct Entry {
    std::string path;
    std::uint64_t bytes;
    std::uint64_t hash;
  };
  std::filesystem::path dir_;
  std::vector<Entry> entries_;
};

}  // namespace scorelab::cli
