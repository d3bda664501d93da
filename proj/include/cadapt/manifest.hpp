#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cadapt/error.hpp"

namespace cadapt {

inline constexpr const char* kToolVersion = "0.1.0";

/// 64-bit FNV-1a of a byte range, as 16 lowercase hex digits.
inline std::string Fnv1aHex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

inline std::string HashFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return Fnv1aHex(buf.str());
}

inline std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

struct RunManifest {
  std::string command;
  std::vector<std::string> config_paths;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::vector<std::pair<std::string, std::string>> input_hashes;  // path, hex
  std::string timestamp;

  void AddInput(const std::string& path) {
    input_hashes.emplace_back(path, HashFile(path));
  }

  /// Recomputes every input hash; false if any file changed or vanished.
  bool Verify() const {
    for (const auto& [path, hex] : input_hashes) {
      try {
        if (HashFile(path) != hex) return false;
      } catch (const Error&) {
        return false;
      }
    }
    return true;
  }

  nlohmann::json ToJson() const {
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [path, hex] : input_hashes) hashes[path] = hex;
    return {{"command", command},
            {"config_paths", config_paths},
            {"seed", seed},
            {"tool_version", tool_version},
            {"input_hashes", std::move(hashes)},
            {"timestamp", timestamp}};
  }

  void Write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
    out << ToJson().dump(2) << '\n';
  }
};

inline RunManifest StartManifest(std::string command, std::uint64_t seed) {
  RunManifest m;
  m.command = std::move(command);
  m.seed = seed;
  m.timestamp = UtcTimestamp();
  return m;
}

}  // namespace cadapt
