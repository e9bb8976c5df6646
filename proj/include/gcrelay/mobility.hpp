#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gcrelay/geometry.hpp"
#include "gcrelay/rng.hpp"

namespace gcrelay::mobility {

// Lattice indices of all nodes at slot t.
struct NodePositions {
  std::vector<std::int32_t> pos;
  std::int64_t t = 0;
};

struct IntermeetingStats {
  double mean = 0.0;
  double second_moment = 0.0;
  double se_mean = 0.0;
  double se_second_moment = 0.0;
  int samples = 0;
};

// One move of the natural random walk: stay, +1 or -1 mod m, each 1/3.
inline int natural_step(int pos, int m, RngStream& rng) {
  switch (rng.next_below(3)) {
    case 0: return pos;
    case 1: return pos + 1 == m ? 0 : pos + 1;
    default: return pos == 0 ? m - 1 : pos - 1;
  }
}

// Every node i.i.d. uniform on {0..m-1}, one draw from each node's stream.
NodePositions init_positions(int n, std::span<RngStream> node_rng);

// Advances every node by one natural-walk move; increments t.
void step(const geom::Configuration& config, NodePositions& positions,
          std::span<RngStream> node_rng);

// True iff i and j sit at the lattice points nearest their intersection.
bool are_neighbors(const geom::Configuration& config,
                   const NodePositions& positions, int i, int j);

// All j != i currently neighboring i, ascending by id.
std::vector<std::int32_t> neighbors_of(const geom::Configuration& config,
                                       const NodePositions& positions, int i);

// Appends instead of allocating; used by the per-slot protocol loop.
void collect_neighbors(const geom::Configuration& config,
                       const NodePositions& positions, int i,
                       std::vector<std::int32_t>& out);

// Simulates two independent natural walks on a torus of side m, starting at
// the joint meeting state, and returns sample moments of the successive
// return times to that state.
IntermeetingStats sample_intermeeting(int m, int samples, RngStream& rng);

}  // namespace gcrelay::mobility
