#include "gcrelay/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace gcrelay::engine {

double TrialResult::min_pair_throughput() const {
  double lo = per_pair_throughput.empty() ? 0.0 : per_pair_throughput[0];
  for (double v : per_pair_throughput) lo = std::min(lo, v);
  return lo;
}

double TrialResult::mean_relayed_delay() const {
  double sum = 0.0;
  int pairs = 0;
  for (const auto& ps : pair_stats) {
    if (ps.relayed_count == 0) continue;
    sum += ps.relayed_mean_delay();
    ++pairs;
  }
  return pairs ? sum / pairs : 0.0;
}

double TrialResult::direct_fraction() const {
  std::int64_t direct = 0, total = 0;
  for (const auto& ps : pair_stats) {
    direct += ps.direct_count;
    total += ps.delivered;
  }
  return total ? double(direct) / double(total) : 0.0;
}

std::int64_t default_slots(int n) {
  const double scaled = 50.0 * n * std::log(double(n));
  return std::max<std::int64_t>(200000, std::int64_t(std::ceil(scaled)));
}

std::int64_t default_warmup(std::int64_t slots) { return slots / 5; }

TrialResult run_trial(const protocol::SchemeParams& params, int n,
                      std::uint64_t seed, std::int64_t slots,
                      std::int64_t warmup, const TrialOptions& opts) {
  params.validate();
  geom::validate_node_count(n);
  if (slots <= 0) throw std::invalid_argument("slots must be positive");
  if (warmup < 0 || warmup >= slots)
    throw std::invalid_argument("need slots > warmup >= 0");

  RngStream config_rng(mix_seed(seed, 0, 0, StreamTag::config));
  geom::Configuration config = geom::sample_configuration(
      n, params.delta, config_rng, opts.band_low, opts.band_high);
  config.seed = seed;

  TrialResult res;
  res.n = n;
  res.seed = seed;
  res.typical = config.typical;
  res.warmup = warmup;
  res.typicality = config.report;
  res.sd_pairs = config.sd_pairs;
  res.pair_stats.assign(n / 2, {});

  protocol::NetworkState st = protocol::make_state(config, seed);
  st.sink = opts.sink;

  auto tally = [&](const protocol::Success& s) {
    if (!s.delivered) return;
    const auto& pk = s.packet;
    if (pk.deliver_slot < warmup) return;
    auto& ps = res.pair_stats[pk.pair];
    ++ps.delivered;
    if (pk.relay >= 0) {
      ++ps.relayed_count;
      ps.relayed_delay_sum += double(pk.delay());
      if (opts.record_delays)
        ps.relayed_delays.push_back(static_cast<std::int32_t>(pk.delay()));
    } else {
      ++ps.direct_count;
    }
  };

  if (config.typical) {
    double queue_len_sum = 0.0;
    for (std::int64_t t = 0; t < slots; ++t) {
      if (t > 0) mobility::step(config, st.positions, st.node_rng);
      for (const auto& s : protocol::run_subslot_A(st, config, params)) tally(s);
      for (const auto& s : protocol::run_subslot_B(st, config, params)) tally(s);
      if (st.created != st.delivered + st.queues.total_packets()) {
        res.conservation_ok = false;
        throw std::logic_error("packet conservation violated");
      }
      queue_len_sum += double(st.queues.total_packets());
    }
    res.slots_run = slots;
    const double n_queues = double(n) * (n / 2 - 1);
    res.mean_queue_len = queue_len_sum / double(slots) / n_queues;
    res.max_queue_len = st.queues.max_length_seen();
  } else {
    // Measurement window snapped to whole round-robin cycles so the
    // fallback's 2/n per-pair throughput is exact.
    const int cycle = n / 2;
    warmup = (warmup / cycle) * cycle;
    slots = warmup + ((slots - warmup) / cycle) * cycle;
    if (slots <= warmup) slots = warmup + cycle;
    res.warmup = warmup;
    for (std::int64_t t = 0; t < slots; ++t) {
      const auto s = protocol::run_fallback_slot(st, config, t);
      if (s.packet.deliver_slot >= warmup) {
        auto& ps = res.pair_stats[s.packet.pair];
        ++ps.delivered;
        ++ps.direct_count;
      }
      if (st.created != st.delivered) {
        res.conservation_ok = false;
        throw std::logic_error("packet conservation violated");
      }
    }
    res.slots_run = slots;
  }

  res.per_pair_throughput.resize(n / 2);
  const double window = double(res.slots_run - res.warmup);
  for (int p = 0; p < n / 2; ++p)
    res.per_pair_throughput[p] = double(res.pair_stats[p].delivered) / window;
  return res;
}

namespace {

struct MeanCi {
  double mean = 0.0;
  double ci = 0.0;
};

MeanCi mean_ci(const std::vector<double>& xs) {
  MeanCi r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / double(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    const double sd = std::sqrt(ss / double(xs.size() - 1));
    r.ci = 1.96 * sd / std::sqrt(double(xs.size()));
  }
  return r;
}

}  // namespace

SweepTable sweep(const protocol::SchemeParams& params,
                 const std::vector<int>& n_list, int trials_per_n,
                 std::uint64_t master_seed, std::int64_t slots_override,
                 std::int64_t warmup_override, int max_threads) {
  if (trials_per_n < 1) throw std::invalid_argument("need at least one trial");
  std::vector<int> sizes = n_list;
  std::sort(sizes.begin(), sizes.end());
  for (int n : sizes) geom::validate_node_count(n);

  SweepTable table;
  table.master_seed = master_seed;

  struct Task {
    int n;
    int trial;
    std::int64_t slots, warmup;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (int n : sizes) {
    const std::int64_t slots = slots_override > 0 ? slots_override : default_slots(n);
    const std::int64_t warmup =
        warmup_override >= 0 ? warmup_override : default_warmup(slots);
    for (int t = 0; t < trials_per_n; ++t)
      tasks.push_back({n, t, slots, warmup,
                       mix_seed(master_seed, std::uint64_t(t),
                                std::uint64_t(n), StreamTag::trial)});
  }

  const unsigned hw = std::thread::hardware_concurrency();
  const unsigned workers =
      max_threads > 0 ? unsigned(max_threads) : std::max(1u, hw);
  std::vector<TrialResult> results(tasks.size());
  std::size_t next = 0;
  while (next < tasks.size()) {
    const std::size_t batch = std::min<std::size_t>(workers, tasks.size() - next);
    std::vector<std::future<TrialResult>> futs;
    futs.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const Task& tk = tasks[next + b];
      futs.push_back(std::async(std::launch::async, [&params, tk]() {
        return run_trial(params, tk.n, tk.seed, tk.slots, tk.warmup);
      }));
    }
    for (std::size_t b = 0; b < batch; ++b) results[next + b] = futs[b].get();
    next += batch;
  }

  std::size_t idx = 0;
  for (int n : sizes) {
    SweepRow row;
    row.n = n;
    row.trials = trials_per_n;
    row.slots = results[idx].slots_run;
    std::vector<double> tputs, delays;
    int typical = 0;
    for (int t = 0; t < trials_per_n; ++t, ++idx) {
      const TrialResult& r = results[idx];
      tputs.push_back(r.min_pair_throughput());
      delays.push_back(r.mean_relayed_delay());
      typical += r.typical ? 1 : 0;
    }
    const MeanCi tp = mean_ci(tputs);
    const MeanCi dl = mean_ci(delays);
    row.min_tput = tp.mean;
    row.min_tput_ci = tp.ci;
    row.mean_delay = dl.mean;
    row.mean_delay_ci = dl.ci;
    const double nlogn = double(n) * std::log(double(n));
    row.delay_norm = dl.mean / nlogn;
    row.delay_norm_ci = dl.ci / nlogn;
    row.typical_fraction = double(typical) / double(trials_per_n);
    table.rows.push_back(row);
  }
  return table;
}

double fit_loglog_exponent(const std::vector<double>& n_values,
                           const std::vector<double>& delays) {
  if (n_values.size() != delays.size() || n_values.size() < 2)
    throw std::invalid_argument("need matching samples to fit");
  const std::size_t k = n_values.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = std::log(n_values[i]);
    const double y = std::log(delays[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = double(k) * sxx - sx * sx;
  return (double(k) * sxy - sx * sy) / denom;
}

ScalingEstimate estimate_scaling(const SweepTable& table) {
  if (table.rows.size() < 3)
    throw std::invalid_argument("scaling estimate needs at least 3 sizes");
  ScalingEstimate est;
  double tput_lo = table.rows[0].min_tput, tput_hi = tput_lo;
  double norm_lo = table.rows[0].delay_norm, norm_hi = norm_lo;
  std::vector<double> ns, delays;
  for (const auto& row : table.rows) {
    tput_lo = std::min(tput_lo, row.min_tput);
    tput_hi = std::max(tput_hi, row.min_tput);
    norm_lo = std::min(norm_lo, row.delay_norm);
    norm_hi = std::max(norm_hi, row.delay_norm);
    ns.push_back(double(row.n));
    delays.push_back(row.mean_delay);
  }
  est.throughput_band_ratio = tput_hi / tput_lo;
  est.delay_band_ratio = norm_hi / norm_lo;
  est.fitted_exponent = fit_loglog_exponent(ns, delays);
  return est;
}

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string sweep_csv(const SweepTable& table) {
  std::string out = "n,trials,slots,min_tput_x_n,ci,mean_delay,delay_norm,ci\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.trials) + "," +
           std::to_string(r.slots) + "," + fmt9(r.min_tput_x_n()) + "," +
           fmt9(r.min_tput_ci * r.n) + "," + fmt9(r.mean_delay) + "," +
           fmt9(r.delay_norm) + "," + fmt9(r.delay_norm_ci) + "\n";
  }
  return out;
}

std::string sweep_json(const SweepTable& table) {
  nlohmann::json j;
  j["master_seed"] = table.master_seed;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json row;
    row["n"] = r.n;
    row["trials"] = r.trials;
    row["slots"] = r.slots;
    row["min_tput"] = r.min_tput;
    row["min_tput_ci"] = r.min_tput_ci;
    row["min_tput_x_n"] = r.min_tput_x_n();
    row["mean_delay"] = r.mean_delay;
    row["mean_delay_ci"] = r.mean_delay_ci;
    row["delay_norm"] = r.delay_norm;
    row["delay_norm_ci"] = r.delay_norm_ci;
    row["typical_fraction"] = r.typical_fraction;
    j["rows"].push_back(row);
  }
  if (table.rows.size() >= 3) {
    const ScalingEstimate est = estimate_scaling(table);
    j["scaling"] = {{"throughput_band_ratio", est.throughput_band_ratio},
                    {"delay_band_ratio", est.delay_band_ratio},
                    {"fitted_exponent", est.fitted_exponent}};
  }
  return j.dump(2) + "\n";
}

std::string trial_json(const TrialResult& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["seed"] = r.seed;
  j["typical"] = r.typical;
  j["slots_run"] = r.slots_run;
  j["warmup"] = r.warmup;
  j["min_pair_throughput"] = r.min_pair_throughput();
  j["mean_relayed_delay"] = r.mean_relayed_delay();
  j["direct_fraction"] = r.direct_fraction();
  j["max_queue_len"] = r.max_queue_len;
  j["mean_queue_len"] = r.mean_queue_len;
  j["conservation_ok"] = r.conservation_ok;
  j["typicality"] = {{"min", r.typicality.min_count},
                     {"max", r.typicality.max_count},
                     {"mean", r.typicality.mean_count},
                     {"expected", r.typicality.expected}};
  j["pairs"] = nlohmann::json::array();
  for (std::size_t p = 0; p < r.pair_stats.size(); ++p) {
    const auto& ps = r.pair_stats[p];
    j["pairs"].push_back({{"pair", p},
                          {"src", r.sd_pairs[p][0]},
                          {"dst", r.sd_pairs[p][1]},
                          {"delivered", ps.delivered},
                          {"throughput", r.per_pair_throughput[p]},
                          {"relayed_count", ps.relayed_count},
                          {"relayed_mean_delay", ps.relayed_mean_delay()},
                          {"direct_count", ps.direct_count}});
  }
  return j.dump(2) + "\n";
}

std::string trial_csv(const TrialResult& r) {
  std::string out =
      "pair,src,dst,delivered,throughput,relayed_count,relayed_mean_delay,"
      "direct_count\n";
  for (std::size_t p = 0; p < r.pair_stats.size(); ++p) {
    const auto& ps = r.pair_stats[p];
    out += std::to_string(p) + "," + std::to_string(r.sd_pairs[p][0]) + "," +
           std::to_string(r.sd_pairs[p][1]) + "," +
           std::to_string(ps.delivered) + "," +
           fmt9(r.per_pair_throughput[p]) + "," +
           std::to_string(ps.relayed_count) + "," +
           fmt9(ps.relayed_mean_delay()) + "," +
           std::to_string(ps.direct_count) + "\n";
  }
  return out;
}

}  // namespace gcrelay::engine
