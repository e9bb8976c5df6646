#pragma once

#include <iosfwd>
#include <string>

#include "gcrelay/run_config.hpp"

namespace gcrelay::cli {

// Runs one subcommand: simulate, sweep, moments, oracle, typical or queues.
// Results go to cfg.out_path when set, otherwise to `out`. Returns the
// process exit code (0 ok, 1 runtime failure, 2 usage error).
int dispatch(const std::string& subcommand, const RunConfig& cfg,
             std::ostream& out, std::ostream& err);

std::string usage_text();

}  // namespace gcrelay::cli
