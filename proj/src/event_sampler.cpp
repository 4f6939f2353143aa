#include "bellsim/event_sampler.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace bellsim {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer: full-avalanche 64-bit hash.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t TrialRng::next_u64() { return mix64(key + ++ctr * kGolden); }

double TrialRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

bool TrialRng::bernoulli(double p) { return uniform() < p; }

int TrialRng::poisson(double lambda) {
    // Knuth: multiply uniforms until the product drops below e^{-lambda}.
    const double limit = std::exp(-lambda);
    int k = 0;
    double acc = 1.0;
    do {
        acc *= uniform();
        ++k;
    } while (acc > limit);
    return k - 1;
}

TrialRng trial_stream(std::uint64_t seed, std::uint64_t trial_index) {
    TrialRng rng;
    rng.key = mix64(mix64(seed + kGolden) + trial_index);
    rng.ctr = 0;
    return rng;
}

void SamplerConfig::validate() const {
    model.validate();
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("SamplerConfig: lambda must be >= 0 and finite");
    if (n_trials < 1) throw std::invalid_argument("SamplerConfig: n_trials must be >= 1");
    if (!std::isfinite(theta)) throw std::invalid_argument("SamplerConfig: theta must be finite");
    if (!(contaminated_fidelity >= 0.0 && contaminated_fidelity <= 1.0))
        throw std::invalid_argument("SamplerConfig: contaminated_fidelity must lie in [0, 1]");
}

TrialOutcome sample_trial(TrialRng& rng, const SamplerConfig& config) {
    const DetectionModel& m = config.model;
    TrialOutcome out;

    const int n = rng.poisson(config.lambda);
    out.n_created = n;

    // Write stage: polarization coin, window coin, detection thinning.
    std::vector<Pol> stored;  // Stokes polarization tags the stored spin wave
    stored.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Pol pol = rng.bernoulli(0.5) ? Pol::sigma_plus : Pol::sigma_minus;
        const Slot slot = rng.bernoulli(0.5) ? Slot::w1 : Slot::w2;
        const bool seen = rng.bernoulli(m.p_detect_stokes);
        if (seen) out.stokes_detections.push_back({slot, pol, false});
        stored.push_back(pol);
    }
    for (const Slot slot : {Slot::w1, Slot::w2}) {
        if (rng.bernoulli(m.p_dc)) {
            const Pol pol = rng.bernoulli(0.5) ? Pol::sigma_plus : Pol::sigma_minus;
            out.stokes_detections.push_back({slot, pol, true});
        }
    }

    out.heralded = out.stokes_detections.size() == 2 &&
                   out.stokes_detections[0].polarization !=
                       out.stokes_detections[1].polarization;

    // Read stage. A sigma- Stokes photon stored the m=+1 spin wave, which
    // branches to either AS polarization with equal amplitude; a sigma+
    // Stokes photon stored the m=-1 wave, whose retrieval is the stretched
    // transition emitting sigma- only.
    const auto emit_polarization = [&rng](Pol stokes_pol) {
        if (stokes_pol == Pol::sigma_minus)
            return rng.bernoulli(0.5) ? Pol::sigma_plus : Pol::sigma_minus;
        return Pol::sigma_minus;
    };

    std::vector<bool> consumed(stored.size(), false);
    int emitted_a = 0, detected_a = 0, darks_a = 0;
    for (std::size_t i = 0; i < stored.size(); ++i) {
        if (!rng.bernoulli(m.p_read)) continue;
        consumed[i] = true;
        ++emitted_a;
        const Pol pol = emit_polarization(stored[i]);
        if (rng.bernoulli(m.p_detect_as)) {
            out.as_detections.push_back({Slot::read_a, pol, false});
            ++detected_a;
        }
    }
    if (rng.bernoulli(m.p_dc)) {
        const Pol pol = rng.bernoulli(0.5) ? Pol::sigma_plus : Pol::sigma_minus;
        out.as_detections.push_back({Slot::read_a, pol, true});
        darks_a = 1;
    }

    int emitted_b = 0, detected_b = 0, darks_b = 0;
    for (std::size_t i = 0; i < stored.size(); ++i) {
        if (consumed[i] || !rng.bernoulli(m.p_read)) continue;
        ++emitted_b;
        const Pol pol = emit_polarization(stored[i]);
        if (rng.bernoulli(m.p_detect_as)) {
            out.as_detections.push_back({Slot::read_b, pol, false});
            ++detected_b;
        }
    }
    if (rng.bernoulli(m.p_dc)) {
        const Pol pol = rng.bernoulli(0.5) ? Pol::sigma_plus : Pol::sigma_minus;
        out.as_detections.push_back({Slot::read_b, pol, true});
        darks_b = 1;
    }

    int stokes_seen = 0, stokes_dark = 0;
    for (const DetectionRecord& d : out.stokes_detections) (d.is_dark ? stokes_dark : stokes_seen)++;

    EventClass& ec = out.true_class;
    ec.n_created = n;
    ec.stokes_detected = stokes_seen;
    ec.stokes_darks = stokes_dark;
    ec.as_emitted_a = emitted_a;
    ec.as_detected_a = detected_a;
    ec.as_darks_a = darks_a;
    ec.as_emitted_b = emitted_b;
    ec.as_detected_b = detected_b;
    ec.as_darks_b = darks_b;
    ec.as_emitted = emitted_a + emitted_b;
    ec.as_detected = detected_a + detected_b;
    ec.as_darks = darks_a + darks_b;
    ec.probability = 0.0;  // class identity only, not an enumerated weight
    return out;
}

namespace {

struct TallyCounts {
    std::uint64_t two_click = 0;
    std::uint64_t heralded = 0;
    std::uint64_t success = 0;
    std::uint64_t false_herald = 0;
    std::uint64_t herald_success = 0;
    std::uint64_t herald_false = 0;
};

void tally_trial(const TrialOutcome& t, std::uint64_t& two_click, std::uint64_t& heralded,
                 std::uint64_t& success, std::uint64_t& false_herald,
                 std::uint64_t& herald_success, std::uint64_t& herald_false) {
    const bool succ = t.true_class.stokes_success();
    if (t.stokes_detections.size() == 2) ++two_click;
    if (t.true_class.herald_signature()) (succ ? success : false_herald)++;
    if (t.heralded) {
        ++heralded;
        (succ ? herald_success : herald_false)++;
    }
}

// Refuse estimates whose success count would be too small to interpret.
void require_well_sampled(const SamplerConfig& config) {
    const double p = config.model.p_detect_stokes;
    const double q = 1.0 - config.model.p_dc;
    const double p_success_analytic = poisson_p(config.lambda, 2) * p * p * q * q;
    const double expected = static_cast<double>(config.n_trials) * p_success_analytic;
    if (expected < 100.0) {
        std::ostringstream msg;
        msg << "estimate: expected successes " << expected << " < 100; increase n_trials";
        throw std::invalid_argument(msg.str());
    }
}

EstimateResult finalize(const SamplerConfig& config, const TallyCounts& c) {
    const double n = static_cast<double>(config.n_trials);
    EstimateResult r;
    r.n_trials = config.n_trials;
    r.n_two_click = c.two_click;
    r.n_heralded = c.heralded;
    r.n_success = c.success;
    r.n_false = c.false_herald;
    r.n_herald_success = c.herald_success;
    r.n_herald_false = c.herald_false;
    r.p_herald = static_cast<double>(c.heralded) / n;
    r.p_success = static_cast<double>(c.success) / n;
    r.p_false = static_cast<double>(c.false_herald) / n;
    if (c.success == 0) throw std::runtime_error("estimate: no successes sampled");
    r.ratio = static_cast<double>(c.false_herald) / static_cast<double>(c.success);

    const auto binom_se = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };
    r.standard_errors.p_herald = binom_se(r.p_herald);
    r.standard_errors.p_success = binom_se(r.p_success);
    r.standard_errors.p_false = binom_se(r.p_false);
    // Delta method for the ratio; the +2/n term is the multinomial
    // anticorrelation between the success and false counts.
    r.standard_errors.ratio =
        c.false_herald == 0
            ? 0.0
            : r.ratio * std::sqrt((1.0 - r.p_false) / (n * r.p_false) +
                                  (1.0 - r.p_success) / (n * r.p_success) + 2.0 / n);

    if (c.heralded == 0) throw std::runtime_error("estimate: no heralded trials sampled");
    const ZeemanParams zp{config.theta, 0.0, 1.0};
    const double f_success =
        run_protocol(zp, {Pol::sigma_plus, Pol::sigma_minus}).fidelity;
    r.fidelity_est = (static_cast<double>(c.herald_success) * f_success +
                      static_cast<double>(c.herald_false) * config.contaminated_fidelity) /
                     static_cast<double>(c.heralded);
    return r;
}

}  // namespace

EstimateResult estimate(const SamplerConfig& config) {
    config.validate();
    require_well_sampled(config);
    const std::int64_t n = static_cast<std::int64_t>(config.n_trials);
    std::uint64_t two_click = 0, heralded = 0, success = 0, false_herald = 0,
                  herald_success = 0, herald_false = 0;
#pragma omp parallel for schedule(static) \
    reduction(+ : two_click, heralded, success, false_herald, herald_success, herald_false)
    for (std::int64_t i = 0; i < n; ++i) {
        TrialRng rng = trial_stream(config.seed, static_cast<std::uint64_t>(i));
        const TrialOutcome t = sample_trial(rng, config);
        tally_trial(t, two_click, heralded, success, false_herald, herald_success,
                    herald_false);
    }
    TallyCounts c{two_click, heralded, success, false_herald, herald_success, herald_false};
    return finalize(config, c);
}

EstimateResult estimate_reference(const SamplerConfig& config) {
    config.validate();
    require_well_sampled(config);
    TallyCounts c;
    for (std::uint64_t i = 0; i < config.n_trials; ++i) {
        TrialRng rng = trial_stream(config.seed, i);
        const TrialOutcome t = sample_trial(rng, config);
        tally_trial(t, c.two_click, c.heralded, c.success, c.false_herald, c.herald_success,
                    c.herald_false);
    }
    return finalize(config, c);
}

std::string summary_json(const EstimateResult& r) {
    const auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "{";
    out << "\"fidelity_est\": " << num(r.fidelity_est);
    out << ", \"n_false\": " << r.n_false;
    out << ", \"n_herald_false\": " << r.n_herald_false;
    out << ", \"n_herald_success\": " << r.n_herald_success;
    out << ", \"n_heralded\": " << r.n_heralded;
    out << ", \"n_success\": " << r.n_success;
    out << ", \"n_trials\": " << r.n_trials;
    out << ", \"n_two_click\": " << r.n_two_click;
    out << ", \"p_false\": " << num(r.p_false);
    out << ", \"p_herald\": " << num(r.p_herald);
    out << ", \"p_success\": " << num(r.p_success);
    out << ", \"ratio\": " << num(r.ratio);
    out << ", \"se_p_false\": " << num(r.standard_errors.p_false);
    out << ", \"se_p_herald\": " << num(r.standard_errors.p_herald);
    out << ", \"se_p_success\": " << num(r.standard_errors.p_success);
    out << ", \"se_ratio\": " << num(r.standard_errors.ratio);
    out << "}";
    return out.str();
}

}  // namespace bellsim
