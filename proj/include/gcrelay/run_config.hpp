#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcrelay::cli {

// Raised for malformed input the user must fix; the CLI maps it to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int n = 64;
  double delta = 0.5;
  double p_delta = 0.3;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  int trials = 5;
  std::int64_t slots = 0;    // 0: derived from n (see default_slots)
  std::int64_t warmup = -1;  // -1: 20% of slots
  double band_low = 0.5;
  double band_high = 2.0;
  std::string out_path;      // empty: stdout
  std::string format = "json";
  bool log_events = false;

  // Flag-only knobs for the analysis subcommands.
  int m = 8;
  std::string kind = "natural-product";
  int samples = 100000;
  std::vector<int> n_list = {64, 144, 256};

  void validate() const;  // throws UsageError naming the offending key
};

// Parses `key = value` lines ('#' starts a comment) and applies them over
// the given config. Unknown keys and malformed values raise UsageError.
void apply_config_file(const std::string& path, RunConfig& cfg);

// Applies one key/value pair (the file parser and flag layer share this).
void apply_key_value(const std::string& key, const std::string& value,
                     RunConfig& cfg);

std::vector<int> parse_n_list(const std::string& csv);

}  // namespace gcrelay::cli
