#include "gcrelay/mobility.hpp"

#include <cmath>
#include <stdexcept>

namespace gcrelay::mobility {

NodePositions init_positions(int n, std::span<RngStream> node_rng) {
  NodePositions p;
  p.pos.resize(n);
  const int m = static_cast<int>(std::lround(std::sqrt(double(n))));
  for (int i = 0; i < n; ++i)
    p.pos[i] = static_cast<std::int32_t>(node_rng[i].next_below(m));
  p.t = 0;
  return p;
}

void step(const geom::Configuration& config, NodePositions& positions,
          std::span<RngStream> node_rng) {
  const int m = config.m;
  for (int i = 0; i < config.n; ++i)
    positions.pos[i] = natural_step(positions.pos[i], m, node_rng[i]);
  ++positions.t;
}

bool are_neighbors(const geom::Configuration& config,
                   const NodePositions& positions, int i, int j) {
  if (i == j) throw std::invalid_argument("are_neighbors needs distinct nodes");
  const auto& pg = config.pairs[config.pair_index(i, j)];
  return positions.pos[pg.i] == pg.a && positions.pos[pg.j] == pg.b;
}

void collect_neighbors(const geom::Configuration& config,
                       const NodePositions& positions, int i,
                       std::vector<std::int32_t>& out) {
  const auto [first, last] =
      config.neighbor_index.at(i, positions.pos[i]);
  for (const auto* e = first; e != last; ++e)
    if (positions.pos[e->other] == e->other_pos) out.push_back(e->other);
}

std::vector<std::int32_t> neighbors_of(const geom::Configuration& config,
                                       const NodePositions& positions, int i) {
  std::vector<std::int32_t> out;
  collect_neighbors(config, positions, i, out);
  return out;
}

IntermeetingStats sample_intermeeting(int m, int samples, RngStream& rng) {
  if (m < 2) throw std::invalid_argument("torus side must be at least 2");
  if (samples < 1) throw std::invalid_argument("need at least one sample");

  IntermeetingStats st;
  st.samples = samples;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  int x = 0, y = 0;  // both walks start at the meeting state
  for (int s = 0; s < samples; ++s) {
    std::int64_t tau = 0;
    do {
      x = natural_step(x, m, rng);
      y = natural_step(y, m, rng);
      ++tau;
    } while (x != 0 || y != 0);
    const double t = static_cast<double>(tau);
    sum += t;
    sum2 += t * t;
    sum4 += t * t * t * t;
  }
  const double inv = 1.0 / samples;
  st.mean = sum * inv;
  st.second_moment = sum2 * inv;
  const double var_tau = sum2 * inv - st.mean * st.mean;
  const double var_tau2 = sum4 * inv - st.second_moment * st.second_moment;
  st.se_mean = std::sqrt(std::max(0.0, var_tau) * inv);
  st.se_second_moment = std::sqrt(std::max(0.0, var_tau2) * inv);
  return st;
}

}  // namespace gcrelay::mobility
