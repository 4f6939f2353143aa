#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>

#include "bellsim/photon_statistics.hpp"

namespace bellsim {

enum class Subcommand { protocol, stats, mc, optimize, levels };

const char* subcommand_name(Subcommand c);

// Effective run configuration. Defaults are the headline operating point;
// precedence when assembling: CLI flag > config file > default.
struct RunConfig {
    Subcommand subcommand = Subcommand::protocol;

    // Detection model (shared by every subcommand)
    double lambda = 0.2;
    double p_detect = 0.75;
    double p_detect_as = 1.0;
    double dark_rate_hz = 10.0;
    double pulse_ns = 100.0;
    double rep_rate_hz = 1e7;
    double p_read = 0.5;
    std::optional<double> p_dc;  // default: dark_rate_hz * pulse length
    int n_max = 8;

    // Zeeman evolution for the protocol sweep; omega_m is derived per theta.
    double omega_n = 0.0;
    double tau = 1.0;
    std::string heralds = "+-";  // write-window polarizations

    // Sweep grid: theta in units of pi (protocol) or lambda (stats).
    std::optional<double> sweep_start;
    std::optional<double> sweep_stop;
    std::optional<int> sweep_count;

    // Monte Carlo
    std::uint64_t seed = 12345;
    std::uint64_t n_trials = 1000000;
    double theta_pi = 0.5;
    double contaminated_fidelity = 0.25;

    // Optimizer
    double target_ratio = 0.05;

    // Level-scheme dump
    double f_g = 1.0;
    double f_s = 2.0;
    double f_e = 2.0;

    // Output paths; empty means stdout.
    std::string out;
    std::string classes_out;
    std::string trials_csv;

    // Assembles and validates the detection model; p_dc defaults to
    // dark_rate_hz * pulse length and must stay consistent with them.
    DetectionModel detection_model() const;
};

// Flat `key = value` file: '#' starts a comment, blank lines are skipped,
// the last duplicate wins. Returns raw string values keyed by name.
std::map<std::string, std::string> parse_config_file(std::istream& in);

// Applies the documented file keys (lambda, p_detect, p_detect_as,
// dark_rate_hz, pulse_ns, rep_rate_hz, p_read, n_max). Unknown keys and
// malformed numbers are signaled, never ignored.
void apply_config_entries(RunConfig& config,
                          const std::map<std::string, std::string>& entries);

}  // namespace bellsim
