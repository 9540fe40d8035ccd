#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace repread::cli {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 0;
};

struct CommandOptions {
  std::string state = "ground";  // levels
  std::string initial = "both";  // simulate-histogram, alt-simulate
  std::optional<std::uint64_t> trials;
  std::optional<long> n;
  std::optional<std::string> two_point;  // prepare state for the two-readout scheme
  std::vector<std::string> histograms;   // fit-rates: STATE:N:PATH
  std::vector<std::string> fix;          // fit-rates: fixed parameter names
  std::string input;
  bool refit = false;  // ramsey
};

/// Runs one subcommand end to end, writing CSV outputs and the manifest.
/// Errors propagate as repread::Error.
void run_command(const std::string &name, const GlobalOptions &global, const CommandOptions &opts);

}  // namespace repread::cli
