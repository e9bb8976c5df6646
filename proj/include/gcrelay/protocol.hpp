#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "gcrelay/geometry.hpp"
#include "gcrelay/mobility.hpp"
#include "gcrelay/rng.hpp"

namespace gcrelay::protocol {

struct SchemeParams {
  double p_delta = 0.3;  // activation probability, both sub-slots
  double alpha = 0.5;    // source transmit probability, sub-slot A only
  double W = 1.0;        // packet size; throughput is counted in packets
  double delta = 0.5;    // interference guard-zone parameter

  void validate() const;
};

struct Packet {
  std::int32_t pair = -1;
  std::int64_t seq = -1;
  std::int64_t depart_source_slot = -1;
  std::int64_t arrive_relay_slot = -1;
  std::int64_t deliver_slot = -1;  // -1 until delivered
  std::int32_t relay = -1;         // -1 for direct deliveries

  std::int64_t delay() const { return deliver_slot - depart_source_slot + 1; }
};

enum class AttemptKind { source_to_relay, relay_forward, direct };

struct TransmissionAttempt {
  std::int32_t tx = -1;
  std::int32_t rx = -1;
  AttemptKind kind = AttemptKind::source_to_relay;
  std::int32_t pair = -1;
};

enum class Outcome { success, interference, empty };

// Optional per-attempt observer; wired to the CSV event log by the CLI.
using EventSink = std::function<void(std::int64_t slot, char subslot,
                                     const TransmissionAttempt&, Outcome,
                                     std::int64_t seq)>;

// One FIFO per (relay, pair), absent for the relay's own pair.
class RelayQueueBank {
 public:
  RelayQueueBank() = default;
  RelayQueueBank(int n, const geom::Configuration& config);

  std::deque<Packet>& at(int relay, int pair);
  const std::deque<Packet>& at(int relay, int pair) const;

  std::int64_t total_packets() const { return total_; }
  std::int32_t max_length_seen() const { return max_len_; }

  void push(int relay, int pair, Packet p);
  Packet pop(int relay, int pair);

 private:
  int n_ = 0, npairs_ = 0;
  std::vector<std::int32_t> pair_of_node_;
  std::vector<std::deque<Packet>> queues_;
  std::int64_t total_ = 0;
  std::int32_t max_len_ = 0;

  std::size_t index(int relay, int pair) const;
};

// Everything one trial mutates slot by slot.
struct NetworkState {
  mobility::NodePositions positions;
  RelayQueueBank queues;
  std::vector<RngStream> node_rng;
  std::vector<std::int64_t> next_seq;  // per pair
  std::int64_t created = 0;
  std::int64_t delivered = 0;
  EventSink sink;  // may be empty

  std::int64_t slot() const { return positions.t; }
};

NetworkState make_state(const geom::Configuration& config, std::uint64_t seed);

// Result of one successful transmission in a sub-slot.
struct Success {
  TransmissionAttempt attempt;
  bool delivered = false;  // false for source->relay handoffs and empty sends
  Packet packet;           // valid when a packet moved (delivered or enqueued)
  bool moved_packet = false;
};

// The Relaxed Protocol rule, applied simultaneously: attempt (i -> j)
// survives iff every other transmitter k of the sub-slot satisfies
// d(k, j) >= (1+delta) d(i, j). A receiver that transmits kills the
// attempt aimed at it via the k = receiver term.
std::vector<bool> resolve_interference(
    const std::vector<TransmissionAttempt>& attempts,
    const geom::Configuration& config, const mobility::NodePositions& positions,
    double delta);

// Sub-slot A: sources activate w.p. p_delta, transmit w.p. alpha to a
// uniformly chosen neighbor. A surviving attempt creates a fresh packet
// (sources are saturated); if the chosen relay is the pair's destination the
// packet is delivered immediately with delay 1.
std::vector<Success> run_subslot_A(NetworkState& state,
                                   const geom::Configuration& config,
                                   const SchemeParams& params);

// Sub-slot B: every node activates w.p. p_delta; a node with neighboring
// destinations picks one uniformly and sends the head of that pair's queue.
// A node with nothing to send still occupies the sub-slot as a transmitter.
std::vector<Success> run_subslot_B(NetworkState& state,
                                   const geom::Configuration& config,
                                   const SchemeParams& params);

// Round-robin direct transmission for atypical configurations: in slot t the
// source of pair (t mod n/2) delivers one packet with delay 1.
Success run_fallback_slot(NetworkState& state, const geom::Configuration& config,
                          std::int64_t slot);

}  // namespace gcrelay::protocol
