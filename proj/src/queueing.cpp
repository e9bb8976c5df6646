#include "gcrelay/queueing.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <cmath>
#include <deque>

#include "gcrelay/mobility.hpp"
#include <stdexcept>

namespace gcrelay::queueing {

std::string to_string(ChainKind kind) {
  return kind == ChainKind::natural_product ? "natural-product" : "simple-2d";
}

ChainKind chain_kind_from_string(const std::string& s) {
  if (s == "natural-product" || s == "natural") return ChainKind::natural_product;
  if (s == "simple-2d" || s == "simple") return ChainKind::simple_2d;
  throw std::invalid_argument("unknown chain kind: " + s);
}

TorusChainOracle::TorusChainOracle(int m, ChainKind kind)
    : m_(m), n_(m * m), kind_(kind) {
  if (m < 2) throw std::invalid_argument("torus side must be at least 2");
  if (kind == ChainKind::natural_product) {
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) moves_.push_back({dx, dy});
    move_prob_ = 1.0 / 9.0;
  } else {
    moves_ = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    move_prob_ = 0.25;
  }
}

double TorusChainOracle::transition(int from, int to) const {
  const int fx = from / m_, fy = from % m_;
  double p = 0.0;
  for (const auto& mv : moves_) {
    const int tx = ((fx + mv[0]) % m_ + m_) % m_;
    const int ty = ((fy + mv[1]) % m_ + m_) % m_;
    if (tx * m_ + ty == to) p += move_prob_;
  }
  return p;
}

namespace {

constexpr int kDenseLimit = 32;  // side length; 32^2 = 1024 states

// Residual tolerance demanded of both solve paths.
constexpr double kResidualTol = 1e-9;

}  // namespace

std::vector<double> TorusChainOracle::hitting_times(int target) const {
  const int N = n_;
  const int rows = N - 1;
  auto restricted = [&](int s) { return s < target ? s : s - 1; };

  // Enumerate (state, move) pairs once; transitions landing on the same
  // state are accumulated, which handles the m=2 wrap collapse.
  std::vector<double> h(N, 0.0);

  if (m_ <= kDenseLimit) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(rows, rows);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(rows);
    for (int s = 0; s < N; ++s) {
      if (s == target) continue;
      const int fx = s / m_, fy = s % m_;
      for (const auto& mv : moves_) {
        const int tx = ((fx + mv[0]) % m_ + m_) % m_;
        const int ty = ((fy + mv[1]) % m_ + m_) % m_;
        const int to = tx * m_ + ty;
        if (to == target) continue;
        A(restricted(s), restricted(to)) -= move_prob_;
      }
    }
    Eigen::VectorXd x = A.partialPivLu().solve(b);
    const double residual = (A * x - b).lpNorm<Eigen::Infinity>();
    if (!(residual < kResidualTol))
      throw std::runtime_error("hitting-time solve residual too large");
    for (int s = 0; s < N; ++s)
      h[s] = s == target ? 0.0 : x(restricted(s));
    return h;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(rows) * (moves_.size() + 1));
  for (int s = 0; s < N; ++s) {
    if (s == target) continue;
    trips.emplace_back(restricted(s), restricted(s), 1.0);
    const int fx = s / m_, fy = s % m_;
    for (const auto& mv : moves_) {
      const int tx = ((fx + mv[0]) % m_ + m_) % m_;
      const int ty = ((fy + mv[1]) % m_ + m_) % m_;
      const int to = tx * m_ + ty;
      if (to == target) continue;
      trips.emplace_back(restricted(s), restricted(to), -move_prob_);
    }
  }
  Eigen::SparseMatrix<double> A(rows, rows);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd b = Eigen::VectorXd::Ones(rows);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper>
      cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(200000);
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  const double residual = (A * x - b).lpNorm<Eigen::Infinity>();
  if (!(residual < kResidualTol))
    throw std::runtime_error("hitting-time CG residual too large");
  for (int s = 0; s < N; ++s)
    h[s] = s == target ? 0.0 : x(restricted(s));
  return h;
}

std::vector<double> TorusChainOracle::hitting_second_moments(int target) const {
  const std::vector<double> h = hitting_times(target);
  const int N = n_;
  const int rows = N - 1;
  auto restricted = [&](int s) { return s < target ? s : s - 1; };

  // g = 1 + P (2h + g) away from the target: same matrix as the first
  // moments, right-hand side 1 + 2 (P h).
  Eigen::VectorXd b(rows);
  for (int s = 0; s < N; ++s) {
    if (s == target) continue;
    const int fx = s / m_, fy = s % m_;
    double ph = 0.0;
    for (const auto& mv : moves_) {
      const int tx = ((fx + mv[0]) % m_ + m_) % m_;
      const int ty = ((fy + mv[1]) % m_ + m_) % m_;
      ph += move_prob_ * h[tx * m_ + ty];
    }
    b(restricted(s)) = 1.0 + 2.0 * ph;
  }

  std::vector<double> g(N, 0.0);
  if (m_ <= kDenseLimit) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(rows, rows);
    for (int s = 0; s < N; ++s) {
      if (s == target) continue;
      const int fx = s / m_, fy = s % m_;
      for (const auto& mv : moves_) {
        const int tx = ((fx + mv[0]) % m_ + m_) % m_;
        const int ty = ((fy + mv[1]) % m_ + m_) % m_;
        const int to = tx * m_ + ty;
        if (to == target) continue;
        A(restricted(s), restricted(to)) -= move_prob_;
      }
    }
    Eigen::VectorXd x = A.partialPivLu().solve(b);
    const double residual = (A * x - b).lpNorm<Eigen::Infinity>();
    if (!(residual < kResidualTol * std::max(1.0, b.maxCoeff())))
      throw std::runtime_error("second-moment solve residual too large");
    for (int s = 0; s < N; ++s)
      g[s] = s == target ? 0.0 : x(restricted(s));
    return g;
  }

  std::vector<Eigen::Triplet<double>> trips;
  for (int s = 0; s < N; ++s) {
    if (s == target) continue;
    trips.emplace_back(restricted(s), restricted(s), 1.0);
    const int fx = s / m_, fy = s % m_;
    for (const auto& mv : moves_) {
      const int tx = ((fx + mv[0]) % m_ + m_) % m_;
      const int ty = ((fy + mv[1]) % m_ + m_) % m_;
      const int to = tx * m_ + ty;
      if (to == target) continue;
      trips.emplace_back(restricted(s), restricted(to), -move_prob_);
    }
  }
  Eigen::SparseMatrix<double> A(rows, rows);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper>
      cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(200000);
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  const double residual = (A * x - b).lpNorm<Eigen::Infinity>();
  if (!(residual < kResidualTol * std::max(1.0, b.maxCoeff())))
    throw std::runtime_error("second-moment CG residual too large");
  for (int s = 0; s < N; ++s)
    g[s] = s == target ? 0.0 : x(restricted(s));
  return g;
}

double TorusChainOracle::mean_return_time_via_solve(int state) const {
  const std::vector<double> h = hitting_times(state);
  const int fx = state / m_, fy = state % m_;
  double sum = 1.0;
  for (const auto& mv : moves_) {
    const int tx = ((fx + mv[0]) % m_ + m_) % m_;
    const int ty = ((fy + mv[1]) % m_ + m_) % m_;
    sum += move_prob_ * h[tx * m_ + ty];
  }
  return sum;
}

double TorusChainOracle::mean_return_time(int state) const {
  const double exact = static_cast<double>(n_);  // 1/pi(state)
  const double solved = mean_return_time_via_solve(state);
  if (std::abs(solved - exact) > 1e-6 * exact)
    throw std::runtime_error("mean return time disagrees with linear solve");
  return exact;
}

double TorusChainOracle::stationary_mean_hitting(int target) const {
  const std::vector<double> h = hitting_times(target);
  double sum = 0.0;
  for (double v : h) sum += v;
  return sum / n_;
}

double TorusChainOracle::return_time_second_moment(int state) const {
  return (2.0 * stationary_mean_hitting(state) + 1.0) * n_;
}

double TorusChainOracle::return_time_second_moment_via_solve(int state) const {
  const std::vector<double> h = hitting_times(state);
  const std::vector<double> g = hitting_second_moments(state);
  const int fx = state / m_, fy = state % m_;
  double sum = 1.0;
  for (const auto& mv : moves_) {
    const int tx = ((fx + mv[0]) % m_ + m_) % m_;
    const int ty = ((fy + mv[1]) % m_ + m_) % m_;
    const int to = tx * m_ + ty;
    sum += move_prob_ * (2.0 * h[to] + g[to]);
  }
  return sum;
}

double kingman_bound(const MomentSummary& interarrival,
                     const MomentSummary& service) {
  if (interarrival.mean <= 0.0 || service.mean <= 0.0)
    throw std::invalid_argument("moment means must be positive");
  const double rho = service.mean / interarrival.mean;
  if (rho >= 1.0) throw std::invalid_argument("unstable queue: rho >= 1");
  const double lambda = 1.0 / interarrival.mean;
  const double wait = lambda * (interarrival.variance() + service.variance()) /
                      (2.0 * (1.0 - rho));
  return wait + service.mean;
}

Q4Analysis q4_analysis(int n, double EZ, double EZ2) {
  if (std::abs(EZ - n) > 1e-6 * n)
    throw std::invalid_argument("EZ must equal n for the meeting process");
  Q4Analysis r;
  const double p = 2.0 / (3.0 * n);
  r.E_A = p * EZ;
  if (r.E_A >= 1.0) throw std::invalid_argument("arrival count mean >= 1");
  r.E_A2 = p * EZ + p * p * (EZ2 - EZ);
  r.P_Q_positive = r.E_A;
  r.E_Q = (r.E_A + r.E_A2 - 2.0 * r.E_A * r.E_A) / (2.0 * (1.0 - r.E_A));
  // E[Qtilde] <= E[Q] + (2/(3n)) E[Z^2] / E[Z]; delay via Little at rate 2/3n.
  const double e_qtilde = r.E_Q + p * EZ2 / EZ;
  r.E_D4_upper = 1.5 * n * e_qtilde;
  return r;
}

EventSpec EventSpec::make_bernoulli(double p) {
  EventSpec s;
  s.type = Type::bernoulli;
  s.bernoulli.p = p;
  return s;
}

EventSpec EventSpec::make_renewal(std::function<std::int64_t(RngStream&)> gap) {
  EventSpec s;
  s.type = Type::renewal;
  s.renewal.next_gap = std::move(gap);
  return s;
}

EventSpec EventSpec::make_thinned(std::function<std::int64_t(RngStream&)> gap,
                                  double keep) {
  EventSpec s;
  s.type = Type::thinned_renewal;
  s.thinned.next_gap = std::move(gap);
  s.thinned.keep = keep;
  return s;
}

double QueueTrace::mean_delay() const {
  if (delays.empty()) return 0.0;
  double sum = 0.0;
  for (auto d : delays) sum += double(d);
  return sum / double(delays.size());
}

namespace {

// Emits at most one event per slot; renewal gaps are cumulative sums.
class EventStream {
 public:
  EventStream(const EventSpec& spec, RngStream& rng) : spec_(spec), rng_(rng) {
    if (spec_.type != EventSpec::Type::bernoulli) advance();
  }

  bool fires(std::int64_t t) {
    switch (spec_.type) {
      case EventSpec::Type::bernoulli:
        return rng_.bernoulli(spec_.bernoulli.p);
      case EventSpec::Type::renewal: {
        if (t != next_) return false;
        advance();
        return true;
      }
      case EventSpec::Type::thinned_renewal: {
        bool kept = false;
        if (t == next_) {
          kept = rng_.bernoulli(spec_.thinned.keep);
          advance();
        }
        return kept;
      }
    }
    return false;
  }

 private:
  void advance() {
    const auto& gap = spec_.type == EventSpec::Type::renewal
                          ? spec_.renewal.next_gap
                          : spec_.thinned.next_gap;
    const std::int64_t g = gap(rng_);
    if (g < 1) throw std::runtime_error("renewal gap must be >= 1 slot");
    next_ += g;
  }

  const EventSpec& spec_;
  RngStream& rng_;
  std::int64_t next_ = 0;
};

}  // namespace

QueueTrace simulate_queue(const EventSpec& arrivals, const EventSpec& service,
                          std::int64_t slots, RngStream arrival_rng,
                          RngStream service_rng, bool record_trace) {
  QueueTrace tr;
  tr.slots = slots;
  EventStream arr(arrivals, arrival_rng);
  EventStream srv(service, service_rng);

  std::deque<std::int64_t> queue;  // arrival slot of each waiting packet
  std::int64_t arrivals_since = 0;
  double sum_q_mid = 0.0;
  double sum_sampled_q = 0.0, sum_a = 0.0, sum_a2 = 0.0;

  for (std::int64_t t = 1; t <= slots; ++t) {
    if (arr.fires(t)) {
      queue.push_back(t);
      ++tr.arrivals;
      ++arrivals_since;
    }
    const auto q_mid = static_cast<std::int64_t>(queue.size());
    sum_q_mid += double(q_mid);
    if (record_trace) tr.slot_lengths.push_back(static_cast<std::int32_t>(q_mid));

    if (srv.fires(t)) {
      ++tr.potential_departures;
      sum_sampled_q += double(q_mid);
      if (q_mid > 0) ++tr.sampled_nonempty;
      sum_a += double(arrivals_since);
      sum_a2 += double(arrivals_since) * double(arrivals_since);
      if (record_trace) {
        tr.sampled_q.push_back(static_cast<std::int32_t>(q_mid));
        tr.sampled_a.push_back(static_cast<std::int32_t>(arrivals_since));
      }
      arrivals_since = 0;
      if (!queue.empty()) {
        tr.delays.push_back(t - queue.front() + 1);
        queue.pop_front();
        ++tr.departures;
      }
    }
  }

  tr.time_mean_q = slots ? sum_q_mid / double(slots) : 0.0;
  if (tr.potential_departures) {
    tr.sampled_mean_q = sum_sampled_q / double(tr.potential_departures);
    tr.mean_arrivals_between = sum_a / double(tr.potential_departures);
    tr.second_moment_arrivals = sum_a2 / double(tr.potential_departures);
  }
  return tr;
}

std::function<std::int64_t(RngStream&)> torus_meeting_gap_sampler(int m) {
  if (m < 2) throw std::invalid_argument("torus side must be at least 2");
  return [m, x = 0, y = 0](RngStream& rng) mutable -> std::int64_t {
    std::int64_t tau = 0;
    do {
      x = mobility::natural_step(x, m, rng);
      y = mobility::natural_step(y, m, rng);
      ++tau;
    } while (x != 0 || y != 0);
    return tau;
  };
}

TandemResult simulate_q2_vs_tandem(int m, std::int64_t slots,
                                   std::uint64_t seed) {
  const int n = m * m;
  RngStream sr_rng(mix_seed(seed, 0, 0, StreamTag::walk));
  RngStream rd_rng(mix_seed(seed, 0, 1, StreamTag::walk));
  RngStream thin_rng(mix_seed(seed, 0, 0, StreamTag::queue_arrivals));
  RngStream q3_rng(mix_seed(seed, 0, 0, StreamTag::queue_service));

  int sx = 0, sy = 0, rx = 0, ry = 0;
  std::deque<std::int64_t> q2, q3;
  struct Q4Item {
    std::int64_t arrival;
    bool real;
  };
  std::deque<Q4Item> q4;
  TandemResult res;
  const double q3_rate = 2.0 / (3.0 * n);

  for (std::int64_t t = 1; t <= slots; ++t) {
    sx = mobility::natural_step(sx, m, sr_rng);
    sy = mobility::natural_step(sy, m, sr_rng);
    rx = mobility::natural_step(rx, m, rd_rng);
    ry = mobility::natural_step(ry, m, rd_rng);
    const bool meet_sr = (sx == 0 && sy == 0);
    const bool meet_rd = (rx == 0 && ry == 0);

    if (meet_sr && thin_rng.bernoulli(0.5)) {
      q2.push_back(t);
      q3.push_back(t);
    }
    if (q3_rng.bernoulli(q3_rate)) {
      if (!q3.empty()) {
        q4.push_back({q3.front(), true});
        q3.pop_front();
      } else {
        q4.push_back({t, false});  // dummy keeps the tandem loaded
      }
    }
    if (meet_rd) {
      if (!q2.empty()) {
        res.q2_delays.push_back(t - q2.front() + 1);
        q2.pop_front();
      }
      if (!q4.empty()) {
        if (q4.front().real)
          res.tandem_delays.push_back(t - q4.front().arrival + 1);
        q4.pop_front();
      }
    }
  }

  res.completed = static_cast<std::int64_t>(
      std::min(res.q2_delays.size(), res.tandem_delays.size()));
  res.q2_delays.resize(res.completed);
  res.tandem_delays.resize(res.completed);
  return res;
}

}  // namespace gcrelay::queueing
