#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gcrelay {

// Purpose tags for substream derivation. Every random stream in a run is
// derived as mix_seed(master, trial, node, tag), so runs are reproducible
// from a single 64-bit seed and trials/nodes never share a stream.
enum class StreamTag : std::uint64_t {
  config = 1,
  node = 2,
  trial = 3,
  walk = 4,
  queue_arrivals = 5,
  queue_service = 6,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t trial,
                              std::uint64_t node, StreamTag tag) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s ^= trial + 0x632be59bd9b4e019ull;
  h ^= splitmix64(s);
  s ^= node + 0x9e6c63d0876a9a47ull;
  h ^= splitmix64(s);
  s ^= static_cast<std::uint64_t>(tag) * 0xd1b54a32d192ed03ull;
  h ^= splitmix64(s);
  return h;
}

// mt19937_64 with hand-rolled distributions. The standard pins the engine's
// output sequence but not the library distributions, so uniforms, ints and
// normals are generated here to keep byte-identical results across stdlibs.
class RngStream {
 public:
  RngStream() : eng_(0) {}
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0,1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer in [0, bound) by rejection.
  std::uint32_t next_below(std::uint32_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return static_cast<std::uint32_t>(v % bound);
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Standard normal via the polar method (no cached spare).
  double normal() {
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gcrelay
