#ifndef RRUM_MANIFEST_HPP
#define RRUM_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace rrum {

/// FNV-1a 64-bit content hash, hex-encoded. Used to record artifact
/// identity in manifests; a reproducibility aid, not a security boundary.
std::string hash_file(const std::filesystem::path& path);

/// Record of one CLI run: command, full config, input/output files with
/// content hashes, and a timestamp. Re-running the recorded command with
/// the recorded config must reproduce the listed output hashes.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, hash
  std::vector<std::pair<std::string, std::string>> outputs;  // path, hash
  std::uint64_t seed = 0;

  void add_input(const std::filesystem::path& p) {
    inputs.emplace_back(p.string(), hash_file(p));
  }
  /// Outputs are recorded by file name, relative to the manifest's own
  /// directory, so seeded runs into different directories stay
  /// byte-identical.
  void add_output(const std::filesystem::path& p) {
    outputs.emplace_back(p.filename().string(), hash_file(p));
  }

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  /// Writes dir/manifest.json. The timestamp honors SOURCE_DATE_EPOCH so
  /// seeded runs can be byte-identical end to end.
  std::filesystem::path write(const std::filesystem::path& dir) const;
};

RunManifest load_manifest(const std::filesystem::path& path);

/// ISO-8601 UTC now, or the SOURCE_DATE_EPOCH override when set.
std::string manifest_timestamp();

}  // namespace rrum

#endif  // RRUM_MANIFEST_HPP
