#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bellsim/commands.hpp"
#include "bellsim/run_config.hpp"

int main(int argc, char** argv) {
    CLI::App app{std::string("bellsim ") + bellsim::kToolVersion +
                 ": heralded atomic-ensemble polarization-entanglement simulator"};
    app.require_subcommand(1);

    std::optional<std::string> config_path, out_path, classes_out, trials_csv, heralds;
    std::optional<double> lambda, p_detect, p_detect_as, dark_rate_hz, pulse_ns, rep_rate_hz,
        p_read, p_dc, omega_n, tau, sweep_start, sweep_stop, theta_pi, contaminated_fidelity,
        target_ratio, f_g, f_s, f_e;
    std::optional<int> n_max, sweep_count;
    std::optional<std::uint64_t> seed, n_trials;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat 'key = value' config file");
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--lambda", lambda, "Poisson creation parameter (default 0.2)");
        sub->add_option("--p-detect", p_detect, "Stokes detection efficiency (default 0.75)");
        sub->add_option("--p-detect-as", p_detect_as,
                        "anti-Stokes detection efficiency (default 1)");
        sub->add_option("--dark-rate-hz", dark_rate_hz, "dark-count rate (default 10)");
        sub->add_option("--pulse-ns", pulse_ns, "detection window in ns (default 100)");
        sub->add_option("--rep-rate-hz", rep_rate_hz, "shot repetition rate (default 1e7)");
        sub->add_option("--p-read", p_read,
                        "per-window read conversion probability (default 0.5)");
        sub->add_option("--p-dc", p_dc,
                        "dark probability per window (default dark_rate*pulse; set "
                        "--dark-rate-hz 0 to choose it freely)");
        sub->add_option("--n-max", n_max, "creation-number truncation (default 8)");
    };

    CLI::App* protocol =
        app.add_subcommand("protocol", "sweep the Zeeman phase and tabulate Bell fidelity");
    add_common(protocol);
    protocol->add_option("--omega-n", omega_n, "ground Zeeman splitting in rad/s (default 0)");
    protocol->add_option("--tau", tau, "storage time in s (default 1)");
    protocol->add_option("--heralds", heralds,
                         "write-window polarizations, two of '+'/'-' (default \"+-\")");
    protocol->add_option("--sweep-start", sweep_start, "theta start in pi units (default 0)");
    protocol->add_option("--sweep-stop", sweep_stop, "theta stop in pi units (default 2)");
    protocol->add_option("--sweep-count", sweep_count, "sweep points (default 100)");

    CLI::App* stats =
        app.add_subcommand("stats", "tabulate success/false herald probabilities over lambda");
    add_common(stats);
    stats->add_option("--sweep-start", sweep_start, "lambda start (default 0.01)");
    stats->add_option("--sweep-stop", sweep_stop, "lambda stop (default 0.4)");
    stats->add_option("--sweep-count", sweep_count, "sweep points (default 40)");
    stats->add_option("--classes-out", classes_out, "per-event-class probability CSV");

    CLI::App* mc =
        app.add_subcommand("mc", "Monte Carlo estimate of herald and success statistics");
    add_common(mc);
    mc->add_option("--seed", seed, "RNG seed (default 12345)");
    mc->add_option("--n-trials", n_trials, "number of trials (default 1e6)");
    mc->add_option("--theta-pi", theta_pi,
                   "Zeeman phase in pi units for the success channel (default 0.5)");
    mc->add_option("--contaminated-fidelity", contaminated_fidelity,
                   "Bell-fidelity bound assigned to false heralds (default 0.25)");
    mc->add_option("--trials-csv", trials_csv, "per-trial summary CSV");

    CLI::App* optimize = app.add_subcommand(
        "optimize", "largest lambda meeting a false/success ratio target");
    add_common(optimize);
    optimize->add_option("--target-ratio", target_ratio,
                         "false/success ratio target (default 0.05)");

    CLI::App* levels =
        app.add_subcommand("levels", "dump the read-transition amplitude table");
    add_common(levels);
    levels->add_option("--f-g", f_g, "ground-manifold F (default 1)");
    levels->add_option("--f-s", f_s, "storage-manifold F (default 2)");
    levels->add_option("--f-e", f_e, "excited-manifold F (default 2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        bellsim::RunConfig cfg;
        if (protocol->parsed())
            cfg.subcommand = bellsim::Subcommand::protocol;
        else if (stats->parsed())
            cfg.subcommand = bellsim::Subcommand::stats;
        else if (mc->parsed())
            cfg.subcommand = bellsim::Subcommand::mc;
        else if (optimize->parsed())
            cfg.subcommand = bellsim::Subcommand::optimize;
        else if (levels->parsed())
            cfg.subcommand = bellsim::Subcommand::levels;

        if (config_path) {
            std::ifstream in(*config_path);
            if (!in) throw std::runtime_error("cannot open config file '" + *config_path + "'");
            bellsim::apply_config_entries(cfg, bellsim::parse_config_file(in));
        }
        if (lambda) cfg.lambda = *lambda;
        if (p_detect) cfg.p_detect = *p_detect;
        if (p_detect_as) cfg.p_detect_as = *p_detect_as;
        if (dark_rate_hz) cfg.dark_rate_hz = *dark_rate_hz;
        if (pulse_ns) cfg.pulse_ns = *pulse_ns;
        if (rep_rate_hz) cfg.rep_rate_hz = *rep_rate_hz;
        if (p_read) cfg.p_read = *p_read;
        if (p_dc) cfg.p_dc = *p_dc;
        if (n_max) cfg.n_max = *n_max;
        if (omega_n) cfg.omega_n = *omega_n;
        if (tau) cfg.tau = *tau;
        if (heralds) cfg.heralds = *heralds;
        if (sweep_start) cfg.sweep_start = *sweep_start;
        if (sweep_stop) cfg.sweep_stop = *sweep_stop;
        if (sweep_count) cfg.sweep_count = *sweep_count;
        if (seed) cfg.seed = *seed;
        if (n_trials) cfg.n_trials = *n_trials;
        if (theta_pi) cfg.theta_pi = *theta_pi;
        if (contaminated_fidelity) cfg.contaminated_fidelity = *contaminated_fidelity;
        if (target_ratio) cfg.target_ratio = *target_ratio;
        if (f_g) cfg.f_g = *f_g;
        if (f_s) cfg.f_s = *f_s;
        if (f_e) cfg.f_e = *f_e;
        if (out_path) cfg.out = *out_path;
        if (classes_out) cfg.classes_out = *classes_out;
        if (trials_csv) cfg.trials_csv = *trials_csv;

        return bellsim::run_command(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
