#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "bellsim/collective_state.hpp"
#include "bellsim/photon_statistics.hpp"

namespace bellsim {

// Counter-based splitmix-style generator. The output at (key, ctr) is a pure
// hash of both, so per-trial substreams from trial_stream(seed, i) reproduce
// the same trial regardless of execution order or thread count.
struct TrialRng {
    std::uint64_t key = 0;
    std::uint64_t ctr = 0;

    std::uint64_t next_u64();
    double uniform();            // [0, 1), 53-bit resolution
    bool bernoulli(double p);    // uniform() < p
    int poisson(double lambda);  // Knuth product method, O(lambda) draws
};

// Stream-splitting rule: the per-trial key is an avalanche hash of
// (seed, trial_index), and each draw advances a private counter.
TrialRng trial_stream(std::uint64_t seed, std::uint64_t trial_index);

// One detector click: where, which polarization, and whether it was a dark.
struct DetectionRecord {
    Slot slot;
    Pol polarization;
    bool is_dark = false;
};

// Full record of one simulated shot of the experiment.
struct TrialOutcome {
    int n_created = 0;  // spin waves created across both write windows
    std::vector<DetectionRecord> stokes_detections;
    bool heralded = false;  // exactly two Stokes clicks with opposite polarizations
    std::vector<DetectionRecord> as_detections;
    EventClass true_class;  // counts of what actually happened; probability = 0
};

struct SamplerConfig {
    std::uint64_t seed = 12345;
    std::uint64_t n_trials = 1000000;
    DetectionModel model{};
    double lambda = 0.2;
    // Zeeman phase theta = (omega_m - omega_n) * tau assigned to the success
    // channel when folding in the collective-state Bell fidelity.
    double theta = std::numbers::pi / 2;
    // Bell fidelity assigned to falsely heralded trials: worst-case bound of
    // a maximally mixed two-photon state.
    double contaminated_fidelity = 0.25;

    void validate() const;  // signals invalid_argument
};

// Simulate one shot. Draw order (fixed; part of the determinism contract):
// n ~ Poisson(lambda); per creation: polarization coin, write-window coin,
// Stokes thinning with p_detect_stokes; one dark coin per write window
// (random polarization); read window A converts each stored excitation with
// p_read (sigma+ Stokes stored as the m=+1 wave branches to either AS
// polarization with equal weight; sigma- Stokes gives the stretched wave and
// a fixed sigma- AS photon), thinned with p_detect_as; one dark coin per
// read window; window B repeats over the unconverted remainder.
TrialOutcome sample_trial(TrialRng& rng, const SamplerConfig& config);

struct StandardErrors {
    double p_herald = 0.0;
    double p_success = 0.0;
    double p_false = 0.0;
    double ratio = 0.0;  // delta method; 0 when no false heralds were sampled
};

struct EstimateResult {
    std::uint64_t n_trials = 0;
    std::uint64_t n_two_click = 0;       // exactly two Stokes clicks, any polarizations
    std::uint64_t n_heralded = 0;        // two clicks, opposite polarizations
    std::uint64_t n_success = 0;         // true class (n=2, detected=2, no darks)
    std::uint64_t n_false = 0;           // two-click signature from any other class
    std::uint64_t n_herald_success = 0;  // heralded and truly successful
    std::uint64_t n_herald_false = 0;    // heralded but contaminated
    double p_herald = 0.0;
    double p_success = 0.0;
    double p_false = 0.0;
    double ratio = 0.0;
    // Herald-weighted Bell fidelity: success channel at the configured theta,
    // contaminated channel at the configured worst-case bound.
    double fidelity_est = 0.0;
    StandardErrors standard_errors;
};

// Monte Carlo estimate over n_trials independent per-trial substreams.
// Parallelized with OpenMP when enabled; bit-identical to estimate_reference
// for any thread count. Signals invalid_argument when the expected number of
// successes falls below 100 (under-sampled estimates are refused, not
// returned).
EstimateResult estimate(const SamplerConfig& config);

// Serial reference implementation of the same estimator.
EstimateResult estimate_reference(const SamplerConfig& config);

// Flat JSON record of an estimate; keys sorted, doubles printed with %.17g.
std::string summary_json(const EstimateResult& result);

}  // namespace bellsim
