#include "gcrelay/protocol.hpp"

#include <stdexcept>

namespace gcrelay::protocol {

void SchemeParams::validate() const {
  if (!(p_delta > 0.0 && p_delta < 1.0))
    throw std::invalid_argument("p_delta must be in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(W > 0.0)) throw std::invalid_argument("W must be positive");
}

RelayQueueBank::RelayQueueBank(int n, const geom::Configuration& config)
    : n_(n), npairs_(n / 2), pair_of_node_(config.pair_of_node) {
  queues_.resize(std::size_t(n_) * npairs_);
}

std::size_t RelayQueueBank::index(int relay, int pair) const {
  if (pair_of_node_[relay] == pair)
    throw std::logic_error("a relay holds no queue for its own pair");
  return std::size_t(relay) * npairs_ + pair;
}

std::deque<Packet>& RelayQueueBank::at(int relay, int pair) {
  return queues_[index(relay, pair)];
}

const std::deque<Packet>& RelayQueueBank::at(int relay, int pair) const {
  return queues_[index(relay, pair)];
}

void RelayQueueBank::push(int relay, int pair, Packet p) {
  auto& q = queues_[index(relay, pair)];
  q.push_back(p);
  ++total_;
  max_len_ = std::max(max_len_, static_cast<std::int32_t>(q.size()));
}

Packet RelayQueueBank::pop(int relay, int pair) {
  auto& q = queues_[index(relay, pair)];
  if (q.empty()) throw std::logic_error("pop from empty relay queue");
  Packet p = q.front();
  q.pop_front();
  --total_;
  return p;
}

NetworkState make_state(const geom::Configuration& config, std::uint64_t seed) {
  NetworkState st;
  st.node_rng.reserve(config.n);
  for (int i = 0; i < config.n; ++i)
    st.node_rng.emplace_back(mix_seed(seed, 0, i, StreamTag::node));
  st.positions = mobility::init_positions(config.n, st.node_rng);
  st.queues = RelayQueueBank(config.n, config);
  st.next_seq.assign(config.n / 2, 0);
  return st;
}

std::vector<bool> resolve_interference(
    const std::vector<TransmissionAttempt>& attempts,
    const geom::Configuration& config, const mobility::NodePositions& positions,
    double delta) {
  const std::size_t k = attempts.size();
  std::vector<bool> ok(k, true);
  if (k == 0) return ok;

  std::vector<geom::Vec3> tx_pos(k);
  for (std::size_t i = 0; i < k; ++i)
    tx_pos[i] = config.position_of(attempts[i].tx, positions.pos[attempts[i].tx]);

  for (std::size_t i = 0; i < k; ++i) {
    const auto& at = attempts[i];
    const geom::Vec3 rx_pos = config.position_of(at.rx, positions.pos[at.rx]);
    const double guard = (1.0 + delta) * geom::geodesic_distance(tx_pos[i], rx_pos);
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      if (geom::geodesic_distance(tx_pos[j], rx_pos) < guard) {
        ok[i] = false;
        break;
      }
    }
  }
  return ok;
}

namespace {

void emit(const NetworkState& st, char subslot, const TransmissionAttempt& at,
          Outcome outcome, std::int64_t seq) {
  if (st.sink) st.sink(st.positions.t, subslot, at, outcome, seq);
}

}  // namespace

std::vector<Success> run_subslot_A(NetworkState& state,
                                   const geom::Configuration& config,
                                   const SchemeParams& params) {
  std::vector<TransmissionAttempt> attempts;
  std::vector<std::int32_t> nbrs;
  for (int p = 0; p < config.n / 2; ++p) {
    const int s = config.sd_pairs[p][0];
    if (!state.node_rng[s].bernoulli(params.p_delta)) continue;
    nbrs.clear();
    mobility::collect_neighbors(config, state.positions, s, nbrs);
    if (nbrs.empty()) continue;
    if (!state.node_rng[s].bernoulli(params.alpha)) continue;
    const int v = nbrs[state.node_rng[s].next_below(
        static_cast<std::uint32_t>(nbrs.size()))];
    const bool direct = (v == config.sd_pairs[p][1]);
    attempts.push_back({s, v,
                        direct ? AttemptKind::direct : AttemptKind::source_to_relay,
                        p});
  }

  const std::vector<bool> ok =
      resolve_interference(attempts, config, state.positions, params.delta);

  std::vector<Success> successes;
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const auto& at = attempts[i];
    if (!ok[i]) {
      emit(state, 'A', at, Outcome::interference, -1);
      continue;
    }
    Packet pk;
    pk.pair = at.pair;
    pk.seq = state.next_seq[at.pair]++;
    pk.depart_source_slot = state.positions.t;
    pk.arrive_relay_slot = state.positions.t;
    ++state.created;

    Success s;
    s.attempt = at;
    s.moved_packet = true;
    if (at.kind == AttemptKind::direct) {
      pk.deliver_slot = state.positions.t;
      ++state.delivered;
      s.delivered = true;
    } else {
      pk.relay = at.rx;
      state.queues.push(at.rx, at.pair, pk);
    }
    s.packet = pk;
    emit(state, 'A', at, Outcome::success, pk.seq);
    successes.push_back(std::move(s));
  }
  return successes;
}

std::vector<Success> run_subslot_B(NetworkState& state,
                                   const geom::Configuration& config,
                                   const SchemeParams& params) {
  std::vector<TransmissionAttempt> attempts;
  std::vector<std::int32_t> nbrs, dest_nbrs;
  for (int u = 0; u < config.n; ++u) {
    if (!state.node_rng[u].bernoulli(params.p_delta)) continue;
    nbrs.clear();
    mobility::collect_neighbors(config, state.positions, u, nbrs);
    dest_nbrs.clear();
    for (int j : nbrs)
      if (config.is_dest[j]) dest_nbrs.push_back(j);
    if (dest_nbrs.empty()) continue;
    const int d = dest_nbrs[state.node_rng[u].next_below(
        static_cast<std::uint32_t>(dest_nbrs.size()))];
    attempts.push_back({u, d, AttemptKind::relay_forward, config.pair_of_node[d]});
  }

  const std::vector<bool> ok =
      resolve_interference(attempts, config, state.positions, params.delta);

  std::vector<Success> successes;
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const auto& at = attempts[i];
    if (!ok[i]) {
      emit(state, 'B', at, Outcome::interference, -1);
      continue;
    }
    Success s;
    s.attempt = at;
    // A node never relays its own pair; its sub-slot B win carries nothing.
    const bool has_queue = config.pair_of_node[at.tx] != at.pair;
    if (has_queue && !state.queues.at(at.tx, at.pair).empty()) {
      Packet pk = state.queues.pop(at.tx, at.pair);
      pk.deliver_slot = state.positions.t;
      ++state.delivered;
      s.delivered = true;
      s.moved_packet = true;
      s.packet = pk;
      emit(state, 'B', at, Outcome::success, pk.seq);
    } else {
      emit(state, 'B', at, Outcome::empty, -1);
    }
    successes.push_back(std::move(s));
  }
  return successes;
}

Success run_fallback_slot(NetworkState& state, const geom::Configuration& config,
                          std::int64_t slot) {
  const int pair = static_cast<int>(slot % (config.n / 2));
  Packet pk;
  pk.pair = pair;
  pk.seq = state.next_seq[pair]++;
  pk.depart_source_slot = slot;
  pk.deliver_slot = slot;
  ++state.created;
  ++state.delivered;

  Success s;
  s.attempt = {config.sd_pairs[pair][0], config.sd_pairs[pair][1],
               AttemptKind::direct, pair};
  s.delivered = true;
  s.moved_packet = true;
  s.packet = pk;
  if (state.sink) state.sink(slot, 'F', s.attempt, Outcome::success, pk.seq);
  return s;
}

}  // namespace gcrelay::protocol
