#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace repread {

inline constexpr const char *kToolVersion = "0.1.0";

struct ManifestOutput {
  std::string path;  // relative to the manifest directory
  std::string sha256;
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::string subcommand;
  std::string started_utc;
  std::string finished_utc;
  std::uint64_t seed = 0;
  bool seed_generated = false;
  unsigned threads = 1;
  std::vector<std::string> applied_defaults;
  std::vector<ManifestOutput> outputs;
  std::string summary_json = "{}";  // subcommand-specific results
};

std::string utc_now();

/// Hashes every listed output (which must exist), then writes
/// `<dir>/manifest.json` through a temporary file and an atomic rename.
/// Returns the manifest path.
std::string write_manifest(const std::string &dir, RunManifest &manifest, const std::vector<std::string> &outputs);

/// True when every output listed in the manifest exists and matches its hash.
bool verify_manifest(const std::string &manifest_path);

}  // namespace repread
