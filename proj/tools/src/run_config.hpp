#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "finitekey/channel_sim.hpp"
#include "finitekey/decoy_bb84.hpp"
#include "finitekey/optimizer.hpp"
#include "finitekey/tail_bounds.hpp"

namespace finitekey::cli {

/// Raised on malformed or out-of-range config input; the message names the
/// offending field. Mapped to exit code 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepRange {
    double L_start = 0.0;
    double L_end = 100.0;
    double L_step = 5.0;
};

struct RunConfig {
    ChannelModel channel;
    ProtocolParams protocol{0.5, 0.1, 0.5, 0.3, 0.9, 0.9, 1e10, 1.22, 0.5};
    SecurityBudget budget{1e-10, 1e-15};
    OptimizerConfig optimizer;
    SweepRange sweep;
    std::vector<Method> methods{Method::ours_analytic};
    bool curty_full = false;
    bool round_counts = false;

    void validate() const;  // throws ConfigError
};

/// Parses a JSON config file. Missing fields keep the defaults above; any
/// violation raises ConfigError naming the field.
RunConfig load_config(const std::string& path);

}  // namespace finitekey::cli
