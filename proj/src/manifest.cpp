#include "rrum/manifest.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>

#include "rrum/common.hpp"

namespace rrum {

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot hash missing file " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[8192];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char out[32];
  std::snprintf(out, sizeof out, "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return out;
}

std::string manifest_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  else
    t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["timestamp"] = manifest_timestamp();
  auto files = [](const std::vector<std::pair<std::string, std::string>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [path, hash] : v)
      arr.push_back({{"path", path}, {"hash", hash}});
    return arr;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& f : j.at("inputs"))
    m.inputs.emplace_back(f.at("path").get<std::string>(),
                          f.at("hash").get<std::string>());
  for (const auto& f : j.at("outputs"))
    m.outputs.emplace_back(f.at("path").get<std::string>(),
                           f.at("hash").get<std::string>());
  return m;
}

std::filesystem::path RunManifest::write(const std::filesystem::path& dir) const {
  const auto path = dir / "manifest.json";
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out) throw io_error("write failed: " + path.string());
  return path;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    return RunManifest::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw io_error("bad manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace rrum
