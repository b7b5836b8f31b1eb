#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "csv.hpp"
#include "finitekey/channel_sim.hpp"
#include "finitekey/decoy_bb84.hpp"
#include "finitekey/numerics.hpp"
#include "finitekey/optimizer.hpp"
#include "finitekey/tail_bounds.hpp"
#include "run_config.hpp"

namespace {

using namespace finitekey;
using cli::ConfigError;
using cli::RunConfig;
using cli::sci;

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<Method> parse_method_list(const std::string& csv_names) {
    std::vector<Method> out;
    std::stringstream ss(csv_names);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(method_from_name(item));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    if (out.empty()) throw UsageError("no methods given");
    return out;
}

// Writes to the --output path when set, stdout otherwise.
class OutputSink {
  public:
    explicit OutputSink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> out;
    if (points < 2 || lo == hi) {
        out.push_back(lo);
        return out;
    }
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < points; ++i) {
        out.push_back(std::pow(10.0, llo + (lhi - llo) * i / (points - 1)));
    }
    return out;
}

ObservedCounts rounded(const ObservedCounts& c) {
    ObservedCounts r = c;
    for (int i = 0; i < 3; ++i) {
        for (int b = 0; b < 2; ++b) {
            r.detected[i][b] = std::nearbyint(r.detected[i][b]);
            r.errors[i][b] = std::fmin(std::nearbyint(r.errors[i][b]), r.detected[i][b]);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

struct BoundArgs {
    std::string family;
    std::string mode = "analytic";
    std::string direction = "upper";
    std::string method = "ours-analytic";
    double n = 0, k = 0, lambda = -1;
    double x_star = -1, x = -1;
    double eps = 1e-10;
    bool verbose = false;
};

int cmd_bound(const BoundArgs& a) {
    const BoundMode mode = a.mode == "numeric" ? BoundMode::numeric : BoundMode::analytic;
    const bool upper = a.direction == "upper";
    double width = 0.0, residual = NAN;

    if (a.family == "sampling") {
        if (!(a.n > 0) || !(a.k > 0) || a.lambda < 0) {
            throw UsageError("sampling bounds need --n, --k and --lambda");
        }
        const SampleSplit split{a.n, a.k, a.lambda, a.eps};
        Method m = method_from_name(a.method);
        if (m == Method::ours_analytic && mode == BoundMode::numeric) {
            m = Method::ours_numeric;
        }
        const Deviation dev = sampling_gamma(split, m);
        width = dev.width;
        if ((m == Method::ours_numeric) && !dev.clamped && width > 0.0) {
            residual = sampling_root_lhs(a.n, a.k, std::fmax(a.lambda, 0.5 / a.k),
                                         width) -
                       std::log(a.eps);
        }
    } else if (a.family == "chernoff") {
        if (a.x_star < 0) throw UsageError("chernoff bounds need --xstar");
        const Deviation dev = upper ? chernoff_delta_upper(a.x_star, a.eps, mode)
                                    : chernoff_delta_lower(a.x_star, a.eps, mode);
        width = dev.width;
        if (mode == BoundMode::numeric && a.x_star > 0 && !dev.clamped && width > 0.0) {
            const double delta = width / a.x_star;
            residual = (upper ? chernoff_upper_root_lhs(a.x_star, delta)
                              : chernoff_lower_root_lhs(a.x_star, delta)) -
                       std::log(a.eps);
        }
    } else if (a.family == "variant") {
        if (a.x < 0) throw UsageError("variant bounds need --x");
        const Deviation dev = upper ? variant_delta_upper(a.x, a.eps, mode)
                                    : variant_delta_lower(a.x, a.eps, mode);
        width = dev.width;
        if (mode == BoundMode::numeric && a.x > 0 && !dev.clamped && width > 0.0) {
            residual = (upper ? variant_upper_root_lhs(a.x, width)
                              : variant_lower_root_lhs(a.x, width)) -
                       std::log(a.eps);
        }
    } else {
        throw UsageError("unknown --family (expected sampling, chernoff or variant)");
    }

    std::cout << sci(width) << "\n";
    if (a.verbose && !std::isnan(residual)) {
        std::cout << "plug-back residual: " << sci(residual) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// keyrate
// ---------------------------------------------------------------------------

KeyRateReport evaluate_point(const RunConfig& cfg, double L, Method method) {
    ChannelModel model = cfg.channel;
    model.L = L;
    ObservedCounts counts = simulate_counts(model, cfg.protocol);
    if (cfg.round_counts) counts = rounded(counts);
    PipelineOptions opts;
    opts.curty_full = cfg.curty_full;
    opts.curty_trials = cfg.protocol.pulse_count;
    return key_length(counts, cfg.protocol, cfg.budget, method, opts);
}

void print_report(std::ostream& os, const RunConfig& cfg, const KeyRateReport& r) {
    os << "method: " << method_name(r.method) << "\n";
    os << "L_km: " << sci(cfg.channel.L) << "\n";
    os << "ell: " << sci(r.ell) << "\n";
    os << "key_rate: " << sci(r.key_rate) << "\n";
    os << "aborted: " << (r.aborted ? "true" : "false") << "\n";
    os << "phi1_upper: " << sci(r.phi1_upper) << "\n";
    os << "lambda_ec: " << sci(r.lambda_ec) << "\n";
    os << "observed: s0_z=" << sci(r.observed.s0_z) << " s1_z=" << sci(r.observed.s1_z)
       << " s1_x=" << sci(r.observed.s1_x) << " t1_x=" << sci(r.observed.t1_x) << "\n";
    os << "starred:  s0_z=" << sci(r.starred.s0_z) << " s1_z=" << sci(r.starred.s1_z)
       << " s1_x=" << sci(r.starred.s1_x) << " t1_x=" << sci(r.starred.t1_x) << "\n";
    os << "expected-count bounds:\n";
    os << "  n_vac_z: [" << sci(r.expected.n_vac_z_low) << ", "
       << sci(r.expected.n_vac_z_high) << "]\n";
    os << "  n_nu_z_low=" << sci(r.expected.n_nu_z_low)
       << " n_mu_z_high=" << sci(r.expected.n_mu_z_high) << "\n";
    os << "  n_vac_x: [" << sci(r.expected.n_vac_x_low) << ", "
       << sci(r.expected.n_vac_x_high) << "]\n";
    os << "  n_nu_x_low=" << sci(r.expected.n_nu_x_low)
       << " n_mu_x_high=" << sci(r.expected.n_mu_x_high)
       << " m_nu_x_high=" << sci(r.expected.m_nu_x_high) << "\n";
    os << "epsilon audit (" << r.audit.size() << " spends):\n";
    for (const auto& e : r.audit) {
        os << "  " << e.parameter << "  " << e.bound << "  eps=" << sci(e.epsilon)
           << "  value=" << sci(e.value) << "\n";
    }
}

int cmd_keyrate(const std::string& config_path, const std::string& method_override,
                const std::string& output, bool round_counts) {
    RunConfig cfg = cli::load_config(config_path);
    if (round_counts) cfg.round_counts = true;
    std::vector<Method> methods = cfg.methods;
    if (!method_override.empty()) methods = parse_method_list(method_override);

    OutputSink sink(output);
    const bool csv = !output.empty();
    if (csv) {
        sink.stream() << "method,L_km,key_rate,ell,s0,s1,s1x,t1x,phi1,lambda_ec,aborted\n";
    }
    for (Method m : methods) {
        const KeyRateReport r = evaluate_point(cfg, cfg.channel.L, m);
        if (csv) {
            sink.stream() << method_name(m) << ',' << sci(cfg.channel.L) << ','
                          << sci(r.key_rate) << ',' << sci(r.ell) << ','
                          << sci(r.observed.s0_z) << ',' << sci(r.observed.s1_z) << ','
                          << sci(r.observed.s1_x) << ',' << sci(r.observed.t1_x) << ','
                          << sci(r.phi1_upper) << ',' << sci(r.lambda_ec) << ','
                          << (r.aborted ? 1 : 0) << "\n";
        } else {
            print_report(std::cout, cfg, r);
            std::cout << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

int cmd_scan(const std::string& config_path, const std::string& method_override,
             bool optimize, const std::string& output, std::optional<uint64_t> seed,
             bool round_counts) {
    RunConfig cfg = cli::load_config(config_path);
    if (round_counts) cfg.round_counts = true;
    if (seed) cfg.optimizer.seed = *seed;
    std::vector<Method> methods = cfg.methods;
    if (!method_override.empty()) methods = parse_method_list(method_override);

    std::vector<double> lengths;
    for (double L = cfg.sweep.L_start; L <= cfg.sweep.L_end + 1e-9; L += cfg.sweep.L_step) {
        lengths.push_back(L);
    }

    // rows[m][l]: one CSV line per (L, method); workers fill disjoint slots.
    std::vector<std::vector<std::string>> rows(methods.size(),
                                               std::vector<std::string>(lengths.size()));
    auto run_method = [&](size_t mi) {
        const Method method = methods[mi];
        PipelineOptions opts;
        opts.curty_full = cfg.curty_full;
        opts.curty_trials = cfg.protocol.pulse_count;
        std::optional<ProtocolParams> warm;
        for (size_t li = 0; li < lengths.size(); ++li) {
            ChannelModel model = cfg.channel;
            model.L = lengths[li];
            ProtocolParams params = cfg.protocol;
            KeyRateReport report;
            if (optimize) {
                const OptimizationResult best =
                    optimize_keyrate(model, cfg.budget, method, OptimizationSpace{},
                                     cfg.optimizer, cfg.protocol, opts, warm);
                params = best.params;
                report = best.report;
                warm = best.params;  // seed the next distance with this optimum
            } else {
                ObservedCounts counts = simulate_counts(model, params);
                if (cfg.round_counts) counts = rounded(counts);
                report = key_length(counts, params, cfg.budget, method, opts);
            }
            std::ostringstream line;
            line << sci(lengths[li]) << ',' << method_name(method) << ','
                 << sci(report.key_rate) << ',' << sci(report.ell) << ','
                 << sci(report.observed.s0_z) << ',' << sci(report.observed.s1_z) << ','
                 << sci(report.phi1_upper) << ',' << sci(params.mu) << ','
                 << sci(params.nu) << ',' << sci(params.p_mu) << ',' << sci(params.p_nu)
                 << ',' << sci(params.p_z) << ',' << sci(params.q_z);
            rows[mi][li] = line.str();
        }
    };

    std::vector<std::thread> workers;
    workers.reserve(methods.size());
    for (size_t mi = 0; mi < methods.size(); ++mi) workers.emplace_back(run_method, mi);
    for (auto& w : workers) w.join();

    OutputSink sink(output);
    sink.stream() << "L_km,method,key_rate,ell,s0,s1,phi1,mu,nu,p_mu,p_nu,p_z,q_z\n";
    for (size_t li = 0; li < lengths.size(); ++li) {
        for (size_t mi = 0; mi < methods.size(); ++mi) {
            sink.stream() << rows[mi][li] << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// compare-sampling / compare-expected
// ---------------------------------------------------------------------------

int cmd_compare_sampling(double n, double eps, const std::vector<double>& lambdas,
                         double k_lo, double k_hi, int k_points,
                         const std::string& method_names, const std::string& output) {
    const std::vector<Method> methods = parse_method_list(method_names);
    OutputSink sink(output);
    sink.stream() << "k,lambda,method,gamma\n";
    for (double k : log_grid(k_lo, k_hi, k_points)) {
        for (double lambda : lambdas) {
            for (Method m : methods) {
                const Deviation dev = sampling_gamma({n, k, lambda, eps}, m);
                sink.stream() << sci(k) << ',' << sci(lambda) << ',' << method_name(m)
                              << ',' << sci(dev.width) << "\n";
            }
        }
    }
    return 0;
}

double expected_lower_bound(double x, double eps, Method m) {
    switch (m) {
        case Method::ours_numeric:
            return variant_lower_expected(x, eps, BoundMode::numeric);
        case Method::ours_analytic:
            return variant_lower_expected(x, eps, BoundMode::analytic);
        case Method::zhang_numeric:
            return std::fmax(
                0.0, x - zhang_expected_bounds(x, eps, ExpectedBoundFlavor::numeric)
                             .lower.width);
        case Method::zhang_analytic:
            return std::fmax(
                0.0, x - zhang_expected_bounds(x, eps, ExpectedBoundFlavor::analytic)
                             .lower.width);
        case Method::gaussian:
            return std::fmax(
                0.0, x - zhang_expected_bounds(x, eps, ExpectedBoundFlavor::gaussian)
                             .lower.width);
        case Method::curty:
            return std::fmax(0.0,
                             x - curty_expected_bounds_simplified(x, eps).lower.width);
        case Method::lim:
            return std::fmax(0.0, x - lim_hoeffding(x, eps).width);
        case Method::serfling:
            throw UsageError("serfling has no expected-value bound");
    }
    throw std::logic_error("unreachable");
}

int cmd_compare_expected(double eps, double x_lo, double x_hi, int points,
                         const std::string& method_names, const std::string& output) {
    const std::vector<Method> methods = parse_method_list(method_names);
    std::vector<double> xs;
    if (x_lo <= 0.0) {
        xs.push_back(0.0);
        const auto rest = log_grid(1.0, x_hi, points - 1);
        xs.insert(xs.end(), rest.begin(), rest.end());
    } else {
        xs = log_grid(x_lo, x_hi, points);
    }

    OutputSink sink(output);
    sink.stream() << "x,method,lower_bound\n";
    for (double x : xs) {
        for (Method m : methods) {
            sink.stream() << sci(x) << ',' << method_name(m) << ','
                          << sci(expected_lower_bound(x, eps, m)) << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-key statistical-fluctuation bounds and decoy-state BB84 "
                 "key rates"};
    app.require_subcommand(1);

    // bound
    BoundArgs bound_args;
    CLI::App* bound = app.add_subcommand("bound", "Evaluate a single tail bound");
    bound->add_option("--family", bound_args.family,
                      "Bound family: sampling, chernoff or variant")
        ->required();
    bound->add_option("--mode", bound_args.mode, "numeric or analytic");
    bound->add_option("--direction", bound_args.direction, "upper or lower");
    bound->add_option("--bound-method", bound_args.method,
                      "Sampling method tag (default ours-analytic)");
    bound->add_option("--n", bound_args.n, "Remaining-string size");
    bound->add_option("--k", bound_args.k, "Sample size");
    bound->add_option("--lambda", bound_args.lambda, "Observed error fraction");
    bound->add_option("--xstar", bound_args.x_star, "Known expected value");
    bound->add_option("--x", bound_args.x, "Known observed value");
    bound->add_option("--eps", bound_args.eps, "Failure probability");
    bound->add_flag("-v,--verbose", bound_args.verbose, "Print plug-back residual");

    // keyrate
    std::string config_path, method_override, output_path;
    bool round_counts = false;
    CLI::App* keyrate =
        app.add_subcommand("keyrate", "Full key-rate report for one channel point");
    keyrate->add_option("--config", config_path, "JSON config path")->required();
    keyrate->add_option("--method,--methods", method_override,
                        "Comma-separated method list (overrides config)");
    keyrate->add_option("--output", output_path, "Write CSV to this path");
    keyrate->add_flag("--round-counts", round_counts,
                      "Round simulated counts to integers");

    // scan
    std::string scan_config, scan_methods, scan_output;
    bool scan_optimize = false, scan_round = false;
    std::optional<uint64_t> scan_seed;
    CLI::App* scan = app.add_subcommand("scan", "Key rate vs fiber length sweep (CSV)");
    scan->add_option("--config", scan_config, "JSON config path")->required();
    scan->add_option("--method,--methods", scan_methods,
                     "Comma-separated method list (overrides config)");
    scan->add_flag("--optimize", scan_optimize, "Optimize parameters at every length");
    scan->add_option("--output", scan_output, "Write CSV to this path");
    scan->add_option("--seed", scan_seed, "Optimizer seed (overrides config)");
    scan->add_flag("--round-counts", scan_round, "Round simulated counts to integers");

    // compare-sampling
    double cs_n = 1e5, cs_eps = 1e-10, cs_klo = 1e3, cs_khi = 1e6;
    int cs_kpoints = 31;
    std::vector<double> cs_lambdas{0.01};
    std::string cs_methods = "ours-numeric,ours-analytic,serfling,lim,zhang-numeric";
    std::string cs_output;
    CLI::App* cs = app.add_subcommand("compare-sampling",
                                      "Sampling-bound comparison sweep (CSV)");
    cs->add_option("--n", cs_n, "Remaining-string size");
    cs->add_option("--eps", cs_eps, "Failure probability");
    cs->add_option("--lambda", cs_lambdas, "Error fractions to sweep");
    cs->add_option("--k-start", cs_klo, "Sample-size sweep start");
    cs->add_option("--k-end", cs_khi, "Sample-size sweep end");
    cs->add_option("--k-points", cs_kpoints, "Number of sweep points");
    cs->add_option("--method,--methods", cs_methods, "Comma-separated method list");
    cs->add_option("--output", cs_output, "Write CSV to this path");

    // compare-expected
    double ce_eps = 1e-10, ce_xlo = 1.0, ce_xhi = 1e4;
    int ce_points = 41;
    std::string ce_methods =
        "ours-numeric,ours-analytic,gaussian,zhang-numeric,zhang-analytic";
    std::string ce_output;
    CLI::App* ce = app.add_subcommand(
        "compare-expected", "Expected-value lower-bound comparison sweep (CSV)");
    ce->add_option("--eps", ce_eps, "Failure probability");
    ce->add_option("--x-start", ce_xlo, "Observed-value sweep start");
    ce->add_option("--x-end", ce_xhi, "Observed-value sweep end");
    ce->add_option("--points", ce_points, "Number of sweep points");
    ce->add_option("--method,--methods", ce_methods, "Comma-separated method list");
    ce->add_option("--output", ce_output, "Write CSV to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (bound->parsed()) return cmd_bound(bound_args);
        if (keyrate->parsed()) {
            return cmd_keyrate(config_path, method_override, output_path, round_counts);
        }
        if (scan->parsed()) {
            return cmd_scan(scan_config, scan_methods, scan_optimize, scan_output,
                            scan_seed, scan_round);
        }
        if (cs->parsed()) {
            return cmd_compare_sampling(cs_n, cs_eps, cs_lambdas, cs_klo, cs_khi,
                                        cs_kpoints, cs_methods, cs_output);
        }
        if (ce->parsed()) {
            return cmd_compare_expected(ce_eps, ce_xlo, ce_xhi, ce_points, ce_methods,
                                        ce_output);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
