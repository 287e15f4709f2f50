#include "artifacts.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scorelab::cli {

std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write(const std::string& relative_path, std::string_view content) {
  const std::filesystem::path full = dir_ / relative_path;
  std::filesystem::create_directories(full.parent_path());
  std::ofstream out(full, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + full.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  entries_.push_back({relative_path, content.size(), fnv1a64(content)});
}

void ArtifactWriter::write_manifest(std::uint64_t config_hash) {
  std::vector<Entry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(),
            [](const Entry& a, const Entry& b) { return a.path < b.path; });
  std::ostringstream os;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config_hash));
  os << "{\n  \"config_hash\": \"" << hex << "\",\n  \"outputs\": [\n";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(sorted[i].hash));
    os << "    {\"path\": \"" << sorted[i].path << "\", \"bytes\": " << sorted[i].bytes
       << ", \"fnv1a64\": \"" << hex << "\"}";
    os << (i + 1 < sorted.size() ? ",\n" : "\n");
  }
  os << "  ]\n}\n";
  const std::filesystem::path full = dir_ / "manifest.json";
  std::ofstream out(full, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + full.string() + "'");
  const std::string text = os.str();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace scorelab::cli
