#include "repread/manifest.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "repread/error.hpp"
#include "repread/hashing.hpp"

namespace repread {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string write_manifest(const std::string &dir, RunManifest &manifest, const std::vector<std::string> &outputs) {
  manifest.outputs.clear();
  for (const std::string &name : outputs) {
    const fs::path p = fs::path(dir) / name;
    if (!fs::exists(p)) throw IoError("output '" + p.string() + "' missing at manifest time");
    manifest.outputs.push_back({name, sha256_file_hex(p.string())});
  }
  manifest.finished_utc = utc_now();

  ojson j;
  j["config_hash"] = manifest.config_hash;
  j["tool_version"] = manifest.tool_version;
  j["subcommand"] = manifest.subcommand;
  j["started_utc"] = manifest.started_utc;
  j["finished_utc"] = manifest.finished_utc;
  j["seed"] = manifest.seed;
  j["seed_generated"] = manifest.seed_generated;
  j["threads"] = manifest.threads;
  j["applied_defaults"] = manifest.applied_defaults;
  ojson outs = ojson::array();
  for (const ManifestOutput &o : manifest.outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  j["outputs"] = outs;
  j["summary"] = ojson::parse(manifest.summary_json);

  const fs::path final_path = fs::path(dir) / "manifest.json";
  const fs::path tmp = fs::path(dir) / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, final_path);
  return final_path.string();
}

bool verify_manifest(const std::string &manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) return false;
  std::stringstream ss;
  ss << in.rdbuf();
  const auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.contains("outputs")) return false;
  const fs::path dir = fs::path(manifest_path).parent_path();
  for (const auto &o : j["outputs"]) {
    const fs::path p = dir / o.at("path").get<std::string>();
    if (!fs::exists(p) || sha256_file_hex(p.string()) != o.at("sha256").get<std::string>()) return false;
  }
  return true;
}

}  // namespace repread
