#include "gcrelay/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "gcrelay/mobility.hpp"
#include "gcrelay/queueing.hpp"
#include "gcrelay/sim_engine.hpp"

namespace gcrelay::cli {

namespace {

using nlohmann::json;

void write_output(const RunConfig& cfg, std::ostream& out,
                  const std::string& text) {
  if (cfg.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + cfg.out_path);
  f << text;
}

std::int64_t resolve_slots(const RunConfig& cfg, int n) {
  return cfg.slots > 0 ? cfg.slots : engine::default_slots(n);
}

std::int64_t resolve_warmup(const RunConfig& cfg, std::int64_t slots) {
  return cfg.warmup >= 0 ? cfg.warmup : engine::default_warmup(slots);
}

protocol::SchemeParams scheme_params(const RunConfig& cfg) {
  protocol::SchemeParams p;
  p.p_delta = cfg.p_delta;
  p.alpha = cfg.alpha;
  p.delta = cfg.delta;
  return p;
}

const char* kind_name(protocol::AttemptKind k) {
  switch (k) {
    case protocol::AttemptKind::source_to_relay: return "source-to-relay";
    case protocol::AttemptKind::relay_forward: return "relay-forward";
    case protocol::AttemptKind::direct: return "direct";
  }
  return "?";
}

const char* outcome_name(protocol::Outcome o) {
  switch (o) {
    case protocol::Outcome::success: return "success";
    case protocol::Outcome::interference: return "interference";
    case protocol::Outcome::empty: return "empty";
  }
  return "?";
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const std::int64_t slots = resolve_slots(cfg, cfg.n);
  const std::int64_t warmup = resolve_warmup(cfg, slots);

  engine::TrialOptions opts;
  opts.band_low = cfg.band_low;
  opts.band_high = cfg.band_high;

  std::ofstream events;
  if (cfg.log_events) {
    if (cfg.out_path.empty())
      throw UsageError("log_events requires out_path");
    events.open(cfg.out_path + ".events.csv", std::ios::binary);
    if (!events) throw std::runtime_error("cannot write event log");
    events << "slot,subslot,tx,rx,kind,pair,seq,outcome\n";
    opts.sink = [&events](std::int64_t slot, char subslot,
                          const protocol::TransmissionAttempt& at,
                          protocol::Outcome o, std::int64_t seq) {
      events << slot << ',' << subslot << ',' << at.tx << ',' << at.rx << ','
             << kind_name(at.kind) << ',' << at.pair << ',' << seq << ','
             << outcome_name(o) << '\n';
    };
  }

  const engine::TrialResult r =
      engine::run_trial(scheme_params(cfg), cfg.n, cfg.seed, slots, warmup, opts);
  write_output(cfg, out, cfg.format == "csv" ? engine::trial_csv(r)
                                             : engine::trial_json(r));
  return 0;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const engine::SweepTable table =
      engine::sweep(scheme_params(cfg), cfg.n_list, cfg.trials, cfg.seed,
                    cfg.slots, cfg.warmup);
  write_output(cfg, out, cfg.format == "csv" ? engine::sweep_csv(table)
                                             : engine::sweep_json(table));
  return 0;
}

int cmd_moments(const RunConfig& cfg, std::ostream& out) {
  RngStream rng(mix_seed(cfg.seed, 0, 0, StreamTag::walk));
  const auto stats = mobility::sample_intermeeting(cfg.m, cfg.samples, rng);
  const queueing::TorusChainOracle oracle(cfg.m,
                                          queueing::ChainKind::natural_product);
  json j;
  j["m"] = cfg.m;
  j["n"] = cfg.m * cfg.m;
  j["kind"] = "natural-product";
  j["samples"] = stats.samples;
  j["mean"] = stats.mean;
  j["second_moment"] = stats.second_moment;
  j["se_mean"] = stats.se_mean;
  j["se_second_moment"] = stats.se_second_moment;
  j["oracle"] = {{"mean_return", oracle.mean_return_time(0)},
                 {"second_moment", oracle.return_time_second_moment(0)}};
  write_output(cfg, out, j.dump(2) + "\n");
  return 0;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const queueing::TorusChainOracle oracle(
      cfg.m, queueing::chain_kind_from_string(cfg.kind));
  const double n = double(oracle.n());
  const double mean_return = oracle.mean_return_time(0);
  const double e_pi = oracle.stationary_mean_hitting(0);
  const double m2 = oracle.return_time_second_moment(0);
  const double nlogn = n * std::log(n);
  json j;
  j["m"] = oracle.m();
  j["n"] = oracle.n();
  j["kind"] = queueing::to_string(oracle.kind());
  j["mean_return"] = mean_return;
  j["E_pi_T0"] = e_pi;
  j["second_moment"] = m2;
  j["ratios"] = {{"mean_over_n", mean_return / n},
                 {"Epi_over_nlogn", e_pi / nlogn},
                 {"m2_over_n2logn", m2 / (n * nlogn)}};
  write_output(cfg, out, j.dump(2) + "\n");
  return 0;
}

int cmd_typical(const RunConfig& cfg, std::ostream& out) {
  json configs = json::array();
  int typical = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed =
        mix_seed(cfg.seed, std::uint64_t(t), 0, StreamTag::config);
    RngStream rng(seed);
    geom::Configuration c = geom::sample_configuration(
        cfg.n, cfg.delta, rng, cfg.band_low, cfg.band_high);
    c.seed = seed;
    typical += c.typical ? 1 : 0;
    configs.push_back(json::parse(geom::configuration_summary_json(c)));
  }
  json j;
  j["n"] = cfg.n;
  j["delta"] = cfg.delta;
  j["band"] = {cfg.band_low, cfg.band_high};
  j["trials"] = cfg.trials;
  j["typical_fraction"] = double(typical) / double(cfg.trials);
  j["configs"] = configs;
  write_output(cfg, out, j.dump(2) + "\n");
  return 0;
}

int cmd_queues(const RunConfig& cfg, std::ostream& out) {
  const int n = cfg.n;
  const int m = static_cast<int>(std::lround(std::sqrt(double(n))));
  const queueing::TorusChainOracle oracle(m,
                                          queueing::ChainKind::natural_product);
  const double EZ = oracle.mean_return_time(0);
  const double EZ2 = oracle.return_time_second_moment(0);
  const auto analytic = queueing::q4_analysis(n, EZ, EZ2);

  // Q4: Bernoulli(2/3n) arrivals, served at the meetings of two natural walks.
  const std::int64_t q4_slots = cfg.slots > 0 ? cfg.slots : 10000000;
  const auto q4 = queueing::simulate_queue(
      queueing::EventSpec::make_bernoulli(2.0 / (3.0 * n)),
      queueing::EventSpec::make_renewal(queueing::torus_meeting_gap_sampler(m)),
      q4_slots, RngStream(mix_seed(cfg.seed, 0, 0, StreamTag::queue_arrivals)),
      RngStream(mix_seed(cfg.seed, 0, 0, StreamTag::queue_service)));

  // Q3: meeting arrivals thinned by 1/2, Bernoulli(2/3n) potential service.
  queueing::MomentSummary X{2.0 * EZ, 2.0 * EZ2 + 4.0 * EZ * EZ, "oracle"};
  const double q = 2.0 / (3.0 * n);
  queueing::MomentSummary Y{1.0 / q, (2.0 - q) / (q * q), "oracle"};
  const double bound = queueing::kingman_bound(X, Y);

  const std::int64_t q3_slots = 200000;
  int below = 0;
  double delay_sum = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto tr = queueing::simulate_queue(
        queueing::EventSpec::make_thinned(queueing::torus_meeting_gap_sampler(m),
                                          0.5),
        queueing::EventSpec::make_bernoulli(q), q3_slots,
        RngStream(mix_seed(cfg.seed, std::uint64_t(t), 1, StreamTag::queue_arrivals)),
        RngStream(mix_seed(cfg.seed, std::uint64_t(t), 1, StreamTag::queue_service)));
    const double d = tr.mean_delay();
    delay_sum += d;
    if (d <= bound) ++below;
  }

  json j;
  j["n"] = n;
  j["kind"] = "natural-product";
  j["q4"] = {{"slots", q4_slots},
             {"sim",
              {{"potential_departures", q4.potential_departures},
               {"E_A", q4.mean_arrivals_between},
               {"P_Q_positive", q4.p_q_positive()},
               {"E_Q_sampled", q4.sampled_mean_q},
               {"little",
                {{"L", q4.time_mean_q},
                 {"lambda", q4.little_lambda()},
                 {"W", q4.mean_delay()}}}}},
             {"analytic",
              {{"E_A", analytic.E_A},
               {"E_A2", analytic.E_A2},
               {"P_Q_positive", analytic.P_Q_positive},
               {"E_Q", analytic.E_Q},
               {"E_D4_upper", analytic.E_D4_upper},
               {"EZ", EZ},
               {"EZ2", EZ2}}}};
  j["q3"] = {{"trials", cfg.trials},
             {"slots_per_trial", q3_slots},
             {"kingman_bound", bound},
             {"mean_delay", cfg.trials ? delay_sum / cfg.trials : 0.0},
             {"fraction_below_bound",
              cfg.trials ? double(below) / cfg.trials : 0.0},
             {"interarrival", {{"mean", X.mean}, {"second_moment", X.second_moment}}},
             {"service", {{"mean", Y.mean}, {"second_moment", Y.second_moment}}}};
  write_output(cfg, out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

std::string usage_text() {
  return "usage: gcrelay <simulate|sweep|moments|oracle|typical|queues> "
         "[options]\n"
         "Run 'gcrelay <subcommand> --help' for the option list.\n";
}

int dispatch(const std::string& subcommand, const RunConfig& cfg,
             std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    if (subcommand == "simulate") return cmd_simulate(cfg, out);
    if (subcommand == "sweep") return cmd_sweep(cfg, out);
    if (subcommand == "moments") return cmd_moments(cfg, out);
    if (subcommand == "oracle") return cmd_oracle(cfg, out);
    if (subcommand == "typical") return cmd_typical(cfg, out);
    if (subcommand == "queues") return cmd_queues(cfg, out);
    err << "unknown subcommand '" << subcommand << "'\n" << usage_text();
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gcrelay::cli
