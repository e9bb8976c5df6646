#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gcrelay/rng.hpp"

namespace gcrelay::queueing {

enum class ChainKind { natural_product, simple_2d };

std::string to_string(ChainKind kind);
ChainKind chain_kind_from_string(const std::string& s);

// Exact solver for the joint two-node walk on the m x m torus (m^2 states,
// uniform stationary distribution). natural_product is the joint motion of
// two independent natural 1-D walks; simple_2d is the four-neighbor walk.
class TorusChainOracle {
 public:
  TorusChainOracle(int m, ChainKind kind);

  int m() const { return m_; }
  int n() const { return n_; }
  ChainKind kind() const { return kind_; }

  int state_index(int x, int y) const { return x * m_ + y; }

  // h(x) = expected slots to reach target, h(target) = 0. Solved from
  // h = 1 + P h on the non-target states; residual below 1e-9 is verified.
  std::vector<double> hitting_times(int target) const;

  // g(x) = E_x[T^2] for the hitting time to target, g(target) = 0.
  std::vector<double> hitting_second_moments(int target) const;

  // Expected first return time via the one-step relation 1 + sum P(s,.) h.
  double mean_return_time_via_solve(int state) const;

  // 1/pi(state) = n, after checking the linear-solve route agrees to 1e-6.
  double mean_return_time(int state) const;

  // E_pi[T_target] = sum_x pi(x) h(x); independent of target by symmetry.
  double stationary_mean_hitting(int target) const;

  // Kac: E[T^2] = (2 E_pi[T_0] + 1) / pi(state).
  double return_time_second_moment(int state) const;

  // Same quantity through the second-moment linear solve; cross-check route.
  double return_time_second_moment_via_solve(int state) const;

  // Transition probability between two states (row-stochastic).
  double transition(int from, int to) const;

 private:
  int m_;
  int n_;
  ChainKind kind_;
  // (dx, dy, probability) move table; wraps mod m.
  std::vector<std::array<int, 2>> moves_;
  double move_prob_;
};

struct MomentSummary {
  double mean = 0.0;
  double second_moment = 0.0;
  std::string source;  // "oracle" or "monte-carlo"

  double variance() const { return second_moment - mean * mean; }
};

// GI/G/1 FCFS mean-sojourn upper bound: Kingman's waiting-time bound plus the
// mean service time. Throws if the queue is unstable (rho >= 1).
double kingman_bound(const MomentSummary& interarrival,
                     const MomentSummary& service);

struct Q4Analysis {
  double E_A = 0.0;          // mean arrivals per inter-departure, 2/3
  double E_A2 = 0.0;         // second moment of that count
  double P_Q_positive = 0.0; // sampled-chain P(Q > 0) = E[A]
  double E_Q = 0.0;          // sampled-chain mean queue length
  double E_D4_upper = 0.0;   // mean-delay upper bound via Little's law
};

// Closed forms for the virtual Bernoulli(2/3n)-fed queue served at meeting
// instants, given the exact inter-meeting moments EZ (= n) and EZ2.
Q4Analysis q4_analysis(int n, double EZ, double EZ2);

// Event processes for the slot-synchronous queue simulator.
struct BernoulliSpec {
  double p = 0.0;
};
struct RenewalSpec {
  // Returns the next inter-event gap in slots (>= 1).
  std::function<std::int64_t(RngStream&)> next_gap;
};
struct ThinnedRenewalSpec {
  std::function<std::int64_t(RngStream&)> next_gap;
  double keep = 1.0;  // each renewal event kept with this probability
};

struct EventSpec {
  enum class Type { bernoulli, renewal, thinned_renewal } type;
  BernoulliSpec bernoulli;
  RenewalSpec renewal;
  ThinnedRenewalSpec thinned;

  static EventSpec make_bernoulli(double p);
  static EventSpec make_renewal(std::function<std::int64_t(RngStream&)> gap);
  static EventSpec make_thinned(std::function<std::int64_t(RngStream&)> gap,
                                double keep);
};

struct QueueTrace {
  // Sojourns (departure - arrival + 1) of departed packets, arrival order.
  std::vector<std::int64_t> delays;

  // Sampled chain at potential-departure instants.
  std::int64_t potential_departures = 0;
  std::int64_t sampled_nonempty = 0;      // instants with Q > 0
  double sampled_mean_q = 0.0;            // mean of Q_i
  double mean_arrivals_between = 0.0;     // mean of A_i
  double second_moment_arrivals = 0.0;    // mean of A_i^2

  std::int64_t arrivals = 0;
  std::int64_t departures = 0;
  std::int64_t slots = 0;

  double time_mean_q = 0.0;  // mid-slot queue length averaged over slots

  // Per-slot / per-instant records, kept only when record_trace is set.
  std::vector<std::int32_t> slot_lengths;
  std::vector<std::int32_t> sampled_q;
  std::vector<std::int32_t> sampled_a;

  double p_q_positive() const {
    return potential_departures ? double(sampled_nonempty) / double(potential_departures) : 0.0;
  }
  double mean_delay() const;
  // Little's law triple over the run: L (time_mean_q), lambda, W.
  double little_lambda() const { return slots ? double(arrivals) / double(slots) : 0.0; }
};

// Slot-synchronous FIFO single-server queue: arrivals first, then one
// potential departure. Sampling at potential-departure instants follows
// Q_{i+1} = Q_i - 1{Q_i > 0} + A_{i+1}.
QueueTrace simulate_queue(const EventSpec& arrivals, const EventSpec& service,
                          std::int64_t slots, RngStream arrival_rng,
                          RngStream service_rng, bool record_trace = false);

// Gap sampler for the joint meeting process of two natural walks of side m.
std::function<std::int64_t(RngStream&)> torus_meeting_gap_sampler(int m);

struct TandemResult {
  std::vector<std::int64_t> q2_delays;      // per real packet
  std::vector<std::int64_t> tandem_delays;  // per real packet, Q3 then Q4
  std::int64_t completed = 0;               // packets that departed both
};

// Coupled run of the direct queue Q2 (arrivals: meetings of pair (S,R)
// thinned by 1/2; service: meetings of pair (R,D)) against the tandem
// Q3 (same arrivals; Bernoulli(2/3n) potential departures, dummy packets fed
// when empty) -> Q4 (served by the same (R,D) meeting stream).
TandemResult simulate_q2_vs_tandem(int m, std::int64_t slots,
                                   std::uint64_t seed);

}  // namespace gcrelay::queueing
