#include "gcrelay/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gcrelay::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof())
    throw UsageError("malformed value for key '" + key + "': " + value);
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw UsageError("malformed value for key '" + key + "': " + value);
}

}  // namespace

std::vector<int> parse_n_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number<int>("n_list", item));
  }
  if (out.empty()) throw UsageError("malformed value for key 'n_list': " + csv);
  return out;
}

void apply_key_value(const std::string& key, const std::string& value,
                     RunConfig& cfg) {
  if (key == "n") cfg.n = parse_number<int>(key, value);
  else if (key == "delta") cfg.delta = parse_number<double>(key, value);
  else if (key == "p_delta") cfg.p_delta = parse_number<double>(key, value);
  else if (key == "alpha") cfg.alpha = parse_number<double>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "trials") cfg.trials = parse_number<int>(key, value);
  else if (key == "slots") cfg.slots = parse_number<std::int64_t>(key, value);
  else if (key == "warmup") cfg.warmup = parse_number<std::int64_t>(key, value);
  else if (key == "band_low") cfg.band_low = parse_number<double>(key, value);
  else if (key == "band_high") cfg.band_high = parse_number<double>(key, value);
  else if (key == "out_path") cfg.out_path = value;
  else if (key == "format") cfg.format = value;
  else if (key == "log_events") cfg.log_events = parse_bool(key, value);
  else throw UsageError("unknown key '" + key + "'");
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("malformed line " + std::to_string(lineno) + " in " +
                       path + " (expected key = value)");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw UsageError("malformed line " + std::to_string(lineno) + " in " + path);
    apply_key_value(key, value, cfg);
  }
}

void RunConfig::validate() const {
  const int root = static_cast<int>(std::lround(std::sqrt(double(n))));
  if (n < 4 || root * root != n || n % 2 != 0)
    throw UsageError("n must be an even perfect square");
  if (!(delta > 0.0)) throw UsageError("delta must be positive");
  if (!(p_delta > 0.0 && p_delta < 1.0))
    throw UsageError("p_delta must be in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must be in (0,1)");
  if (trials < 1) throw UsageError("trials must be at least 1");
  if (slots < 0) throw UsageError("slots must be positive (or 0 for the default rule)");
  if (warmup < -1) throw UsageError("warmup must be >= 0 (or -1 for the default rule)");
  if (slots > 0 && warmup >= 0 && warmup >= slots)
    throw UsageError("warmup must be smaller than slots");
  if (!(band_low > 0.0 && band_low < band_high))
    throw UsageError("band_low must satisfy 0 < band_low < band_high");
  if (format != "csv" && format != "json")
    throw UsageError("format must be 'csv' or 'json'");
  if (m < 2) throw UsageError("m must be at least 2");
  if (samples < 1) throw UsageError("samples must be at least 1");
  for (int v : n_list) {
    const int r = static_cast<int>(std::lround(std::sqrt(double(v))));
    if (v < 4 || r * r != v || v % 2 != 0)
      throw UsageError("n_list entries must be even perfect squares");
  }
}

}  // namespace gcrelay::cli
