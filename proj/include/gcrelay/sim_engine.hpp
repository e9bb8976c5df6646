#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcrelay/geometry.hpp"
#include "gcrelay/protocol.hpp"

namespace gcrelay::engine {

struct PairStats {
  std::int64_t delivered = 0;  // post-warmup deliveries, all kinds
  std::int64_t relayed_count = 0;
  std::int64_t direct_count = 0;
  double relayed_delay_sum = 0.0;
  std::vector<std::int32_t> relayed_delays;  // kept when record_delays is set

  double relayed_mean_delay() const {
    return relayed_count ? relayed_delay_sum / double(relayed_count) : 0.0;
  }
};

struct TrialOptions {
  double band_low = 0.5;
  double band_high = 2.0;
  bool record_delays = false;
  protocol::EventSink sink;
};

struct TrialResult {
  int n = 0;
  std::uint64_t seed = 0;
  bool typical = false;
  std::int64_t slots_run = 0;
  std::int64_t warmup = 0;

  std::vector<double> per_pair_throughput;  // delivered / (slots - warmup)
  std::vector<PairStats> pair_stats;

  std::int32_t max_queue_len = 0;
  double mean_queue_len = 0.0;  // per-(relay,pair) queue, averaged over slots
  bool conservation_ok = true;

  std::vector<std::array<std::int32_t, 2>> sd_pairs;
  geom::TypicalityReport typicality;

  double min_pair_throughput() const;
  // Mean over pairs of the per-pair mean relayed delay; pairs without
  // relayed deliveries are skipped.
  double mean_relayed_delay() const;
  double direct_fraction() const;
};

// Default slot budget: relay queues need many service cycles (mean
// inter-meeting is n slots) before delay statistics settle.
std::int64_t default_slots(int n);
std::int64_t default_warmup(std::int64_t slots);

TrialResult run_trial(const protocol::SchemeParams& params, int n,
                      std::uint64_t seed, std::int64_t slots,
                      std::int64_t warmup, const TrialOptions& opts = {});

struct SweepRow {
  int n = 0;
  int trials = 0;
  std::int64_t slots = 0;
  double min_tput = 0.0;        // mean over trials of min-pair throughput
  double min_tput_ci = 0.0;     // 95% normal half-width over trials
  double mean_delay = 0.0;      // mean over trials of mean relayed delay
  double mean_delay_ci = 0.0;
  double delay_norm = 0.0;      // mean_delay / (n ln n)
  double delay_norm_ci = 0.0;
  double typical_fraction = 0.0;

  double min_tput_x_n() const { return min_tput * n; }
};

struct SweepTable {
  std::vector<SweepRow> rows;  // sorted by n
  std::uint64_t master_seed = 0;
};

// Runs trials_per_n independent trials per size. slots_override == 0 uses
// default_slots(n); warmup_override < 0 uses default_warmup.
SweepTable sweep(const protocol::SchemeParams& params,
                 const std::vector<int>& n_list, int trials_per_n,
                 std::uint64_t master_seed, std::int64_t slots_override = 0,
                 std::int64_t warmup_override = -1, int max_threads = 0);

struct ScalingEstimate {
  double throughput_band_ratio = 0.0;  // max/min of min-pair throughput
  double delay_band_ratio = 0.0;       // max/min of delay/(n ln n)
  double fitted_exponent = 0.0;        // log-log slope of mean delay vs n
};

ScalingEstimate estimate_scaling(const SweepTable& table);

// Least-squares slope of log(delay) against log(n); exposed for synthetic
// checks of the fitting path.
double fit_loglog_exponent(const std::vector<double>& n_values,
                           const std::vector<double>& delays);

std::string sweep_csv(const SweepTable& table);
std::string sweep_json(const SweepTable& table);
std::string trial_json(const TrialResult& r);
std::string trial_csv(const TrialResult& r);

}  // namespace gcrelay::engine
