#include "bellsim/commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bellsim/atomic_levels.hpp"
#include "bellsim/collective_state.hpp"
#include "bellsim/event_sampler.hpp"
#include "bellsim/photon_statistics.hpp"

namespace bellsim {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Shortest representation that round-trips, for the human-facing config echo.
std::string num_echo(double v) {
    char buf[40];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, end) : num(v);
}

struct Sweep {
    double start;
    double stop;
    int count;

    double at(int i) const {
        return count == 1 ? start : start + (stop - start) * i / (count - 1);
    }
};

Sweep resolve_sweep(const RunConfig& cfg, double def_start, double def_stop, int def_count) {
    const Sweep s{cfg.sweep_start.value_or(def_start), cfg.sweep_stop.value_or(def_stop),
                  cfg.sweep_count.value_or(def_count)};
    if (s.count < 1) throw std::invalid_argument("sweep count must be >= 1");
    if (!std::isfinite(s.start) || !std::isfinite(s.stop))
        throw std::invalid_argument("sweep range must be finite");
    return s;
}

std::pair<Pol, Pol> parse_heralds(const std::string& heralds) {
    const auto pol_of = [](char c) {
        if (c == '+') return Pol::sigma_plus;
        if (c == '-') return Pol::sigma_minus;
        throw std::invalid_argument("heralds must be two of '+'/'-', e.g. \"+-\"");
    };
    if (heralds.size() != 2)
        throw std::invalid_argument("heralds must be two of '+'/'-', e.g. \"+-\"");
    return {pol_of(heralds[0]), pol_of(heralds[1])};
}

void write_header(std::ostream& out, const RunConfig& cfg, const Sweep* sweep) {
    out << "# bellsim " << kToolVersion << "\n";
    out << "# command = " << subcommand_name(cfg.subcommand) << "\n";
    std::map<std::string, std::string> kv;
    kv["lambda"] = num_echo(cfg.lambda);
    kv["p_detect"] = num_echo(cfg.p_detect);
    kv["p_detect_as"] = num_echo(cfg.p_detect_as);
    kv["dark_rate_hz"] = num_echo(cfg.dark_rate_hz);
    kv["pulse_ns"] = num_echo(cfg.pulse_ns);
    kv["rep_rate_hz"] = num_echo(cfg.rep_rate_hz);
    kv["p_read"] = num_echo(cfg.p_read);
    kv["p_dc"] = num_echo(cfg.p_dc ? *cfg.p_dc : cfg.dark_rate_hz * (cfg.pulse_ns * 1e-9));
    kv["n_max"] = std::to_string(cfg.n_max);
    switch (cfg.subcommand) {
        case Subcommand::protocol:
            kv["omega_n"] = num_echo(cfg.omega_n);
            kv["tau"] = num_echo(cfg.tau);
            kv["heralds"] = cfg.heralds;
            break;
        case Subcommand::mc:
            kv["seed"] = std::to_string(cfg.seed);
            kv["n_trials"] = std::to_string(cfg.n_trials);
            kv["theta_pi"] = num_echo(cfg.theta_pi);
            kv["contaminated_fidelity"] = num_echo(cfg.contaminated_fidelity);
            break;
        case Subcommand::optimize:
            kv["target_ratio"] = num_echo(cfg.target_ratio);
            break;
        case Subcommand::levels:
            kv["f_g"] = num_echo(cfg.f_g);
            kv["f_s"] = num_echo(cfg.f_s);
            kv["f_e"] = num_echo(cfg.f_e);
            break;
        case Subcommand::stats:
            break;
    }
    if (sweep) {
        kv["sweep_start"] = num_echo(sweep->start);
        kv["sweep_stop"] = num_echo(sweep->stop);
        kv["sweep_count"] = std::to_string(sweep->count);
    }
    for (const auto& [k, v] : kv) out << "# " << k << " = " << v << "\n";
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    return f;
}

}  // namespace

void cmd_protocol(const RunConfig& cfg, std::ostream& out) {
    const Sweep sweep = resolve_sweep(cfg, 0.0, 2.0, 100);
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("tau must be > 0 for the protocol sweep");
    const std::pair<Pol, Pol> heralds = parse_heralds(cfg.heralds);
    // Validate the Zeeman extremes up front; in-between points are bounded.
    for (const int i : {0, sweep.count - 1}) {
        const double theta = sweep.at(i) * std::numbers::pi;
        ZeemanParams{cfg.omega_n + theta / cfg.tau, cfg.omega_n, cfg.tau}.validate();
    }

    std::vector<ProtocolResult> rows(static_cast<std::size_t>(sweep.count));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < sweep.count; ++i) {
        const double theta = sweep.at(i) * std::numbers::pi;
        const ZeemanParams zp{cfg.omega_n + theta / cfg.tau, cfg.omega_n, cfg.tau};
        rows[static_cast<std::size_t>(i)] = run_protocol(zp, heralds);
    }

    write_header(out, cfg, &sweep);
    out << "# columns: theta,fidelity,bell_phase,branch_weight_mm\n";
    for (int i = 0; i < sweep.count; ++i) {
        const double theta = sweep.at(i) * std::numbers::pi;
        const ProtocolResult& r = rows[static_cast<std::size_t>(i)];
        out << num(theta) << ',' << num(r.fidelity) << ',' << num(r.bell_phase) << ','
            << num(r.weight_mm) << '\n';
    }
}

namespace {

// Event classes aggregated over the internal emission split (which window
// converted which excitation), keyed by the observable click pattern.
using ClassKey = std::array<int, 7>;  // n, detected, darks, aA, dA, aB, dB

std::string class_name(const ClassKey& k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "S%dk%dd%d_A%dd%d_B%dd%d", k[0], k[1], k[2], k[3], k[4],
                  k[5], k[6]);
    return buf;
}

std::map<ClassKey, double> postselected_classes(double lambda, const DetectionModel& model,
                                                int n_max) {
    std::map<ClassKey, double> agg;
    for (const EventClass& ec : enumerate_event_classes(lambda, model, n_max)) {
        if (!ec.herald_signature() || !ec.one_click_per_read_window()) continue;
        const ClassKey key{ec.n_created,     ec.stokes_detected, ec.stokes_darks,
                           ec.as_detected_a, ec.as_darks_a,      ec.as_detected_b,
                           ec.as_darks_b};
        agg[key] += ec.probability;
    }
    return agg;
}

}  // namespace

void cmd_stats(const RunConfig& cfg, std::ostream& out, std::ostream* classes_out) {
    const Sweep sweep = resolve_sweep(cfg, 0.01, 0.4, 40);
    if (sweep.start < 0.0 || sweep.stop < 0.0)
        throw std::invalid_argument("lambda sweep must be non-negative");
    const DetectionModel model = cfg.detection_model();

    write_header(out, cfg, &sweep);
    out << "# columns: lambda,p_success,p_false,ratio\n";
    for (int i = 0; i < sweep.count; ++i) {
        const double lambda = sweep.at(i);
        const SuccessFalse sf = success_and_false(lambda, model, required_n_max(lambda, cfg.n_max));
        out << num(lambda) << ',' << num(sf.p_success) << ',' << num(sf.p_false) << ','
            << num(sf.ratio) << '\n';
    }

    if (classes_out == nullptr) return;
    std::vector<std::map<ClassKey, double>> per_row(static_cast<std::size_t>(sweep.count));
    std::map<ClassKey, double> peak;
    for (int i = 0; i < sweep.count; ++i) {
        const double lambda = sweep.at(i);
        per_row[static_cast<std::size_t>(i)] =
            postselected_classes(lambda, model, required_n_max(lambda, cfg.n_max));
        for (const auto& [key, p] : per_row[static_cast<std::size_t>(i)])
            peak[key] = std::max(peak[key], p);
    }
    constexpr double kClassFloor = 1e-30;
    std::vector<ClassKey> columns;
    for (const auto& [key, p] : peak)
        if (p > kClassFloor) columns.push_back(key);

    write_header(*classes_out, cfg, &sweep);
    *classes_out << "# postselected on the herald signature and one click per read window\n";
    *classes_out << "# columns: lambda";
    for (const ClassKey& key : columns) *classes_out << ',' << class_name(key);
    *classes_out << '\n';
    for (int i = 0; i < sweep.count; ++i) {
        *classes_out << num(sweep.at(i));
        const auto& row = per_row[static_cast<std::size_t>(i)];
        for (const ClassKey& key : columns) {
            const auto it = row.find(key);
            *classes_out << ',' << num(it == row.end() ? 0.0 : it->second);
        }
        *classes_out << '\n';
    }
}

void cmd_mc(const RunConfig& cfg, std::ostream& out, std::ostream* trials_out) {
    SamplerConfig sc;
    sc.seed = cfg.seed;
    sc.n_trials = cfg.n_trials;
    sc.model = cfg.detection_model();
    sc.lambda = cfg.lambda;
    sc.theta = cfg.theta_pi * std::numbers::pi;
    sc.contaminated_fidelity = cfg.contaminated_fidelity;
    sc.validate();

    const EstimateResult r = estimate(sc);
    write_header(out, cfg, nullptr);
    out << summary_json(r) << '\n';

    if (trials_out == nullptr) return;
    write_header(*trials_out, cfg, nullptr);
    *trials_out
        << "# columns: trial,n_created,stokes_detected,stokes_darks,as_detected,as_darks,"
           "heralded,success\n";
    for (std::uint64_t i = 0; i < cfg.n_trials; ++i) {
        TrialRng rng = trial_stream(cfg.seed, i);
        const TrialOutcome t = sample_trial(rng, sc);
        const EventClass& ec = t.true_class;
        *trials_out << i << ',' << ec.n_created << ',' << ec.stokes_detected << ','
                    << ec.stokes_darks << ',' << ec.as_detected << ',' << ec.as_darks << ','
                    << static_cast<int>(t.heralded) << ','
                    << static_cast<int>(ec.stokes_success()) << '\n';
    }
}

void cmd_optimize(const RunConfig& cfg, std::ostream& out) {
    const DetectionModel model = cfg.detection_model();
    const double lambda_star = lambda_for_fidelity(cfg.target_ratio, model, cfg.n_max);
    const SuccessFalse sf =
        success_and_false(lambda_star, model, required_n_max(lambda_star, cfg.n_max));
    const PairRate rate = pair_rate(lambda_star, model);
    DetectionModel unit = model;
    unit.p_detect_as = 1.0;  // headline convention: AS losses disregarded
    const PairRate rate_unit = pair_rate(lambda_star, unit);

    write_header(out, cfg, nullptr);
    out << "{\"lambda_star\": " << num(lambda_star) << ", \"p_per_shot\": "
        << num(rate.p_per_shot) << ", \"rate_hz\": " << num(rate.rate_hz)
        << ", \"rate_hz_as_unit\": " << num(rate_unit.rate_hz)
        << ", \"ratio\": " << num(sf.ratio)
        << ", \"target_ratio\": " << num(cfg.target_ratio) << "}\n";
}

void cmd_levels(const RunConfig& cfg, std::ostream& out) {
    const LevelScheme scheme{cfg.f_g, cfg.f_s, cfg.f_e};
    scheme.validate();
    const AmplitudeTable table(scheme);
    write_header(out, cfg, nullptr);
    out << "# columns: target_manifold,f_target,m_excited,m_ground,q,amplitude\n";
    for (const AmplitudeTable::Entry& e : table.entries()) {
        out << manifold_name(e.target) << ',' << num(e.f_target) << ',' << num(e.m_excited)
            << ',' << num(e.m_ground) << ',' << e.q << ',' << num(e.amplitude) << '\n';
    }
}

int run_command(const RunConfig& cfg) {
    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!cfg.out.empty()) {
        out_file = open_output(cfg.out);
        out = &out_file;
    }
    switch (cfg.subcommand) {
        case Subcommand::protocol:
            cmd_protocol(cfg, *out);
            break;
        case Subcommand::stats: {
            std::ofstream classes_file;
            std::ostream* classes = nullptr;
            if (!cfg.classes_out.empty()) {
                classes_file = open_output(cfg.classes_out);
                classes = &classes_file;
            }
            cmd_stats(cfg, *out, classes);
            break;
        }
        case Subcommand::mc: {
            std::ofstream trials_file;
            std::ostream* trials = nullptr;
            if (!cfg.trials_csv.empty()) {
                trials_file = open_output(cfg.trials_csv);
                trials = &trials_file;
            }
            cmd_mc(cfg, *out, trials);
            break;
        }
        case Subcommand::optimize:
            cmd_optimize(cfg, *out);
            break;
        case Subcommand::levels:
            cmd_levels(cfg, *out);
            break;
    }
    out->flush();
    if (!cfg.out.empty() && !out_file)
        throw std::runtime_error("write failed for '" + cfg.out + "'");
    return 0;
}

}  // namespace bellsim
