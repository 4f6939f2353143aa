#pragma once

#include <vector>

namespace bellsim {

// Detector and pulse-train parameters. p_dc is the dark-count probability
// per detection window; when dark_rate and pulse_duration are both nonzero,
// validate() requires p_dc = dark_rate * pulse_duration (the same window
// length is applied to write and read windows).
struct DetectionModel {
    double p_detect_stokes = 0.75;  // Stokes (herald) detection efficiency
    double p_detect_as = 1.0;       // anti-Stokes detection efficiency
    double p_dc = 1e-6;             // dark-count probability per window
    double pulse_duration = 100e-9; // seconds
    double dark_rate = 10.0;        // Hz
    double rep_rate = 1e7;          // protocol repetition rate, Hz
    double p_read = 0.5;            // per-excitation read conversion probability

    void validate() const;
};

// e^{-lambda} lambda^n / n!. Rejects lambda < 0 and n < 0.
double poisson_p(double lambda, int n);

// Binomial thinning: C(n,k) p^k (1-p)^{n-k}. Rejects k outside [0, n].
double detect_exactly(int n, int k, double p);

// Probability of creating exactly two excitations and detecting both
// heralds: poisson_p(lambda, 2) * p_detect_stokes^2.
double p_det_two(double lambda, const DetectionModel& model);

// First-order probability of one dark count faking part of the herald:
// P_lambda(0) p_dc + P_lambda(1) (1 - p_detect_stokes) p_dc.
double dark_count_prob_one(double lambda, const DetectionModel& model);

// One cell of the truncated outcome partition: n excitations created, the
// Stokes-side detection/dark pattern over the two write windows, and the
// anti-Stokes emission/detection/dark pattern per read window.
struct EventClass {
    int n_created = 0;
    int stokes_detected = 0;
    int stokes_darks = 0;
    int as_emitted = 0;   // total over both read windows
    int as_detected = 0;
    int as_darks = 0;
    int as_emitted_a = 0, as_detected_a = 0, as_darks_a = 0;
    int as_emitted_b = 0, as_detected_b = 0, as_darks_b = 0;
    double probability = 0.0;

    // Two Stokes-side clicks (detections + darks): the heralding signature.
    bool herald_signature() const { return stokes_detected + stokes_darks == 2; }
    // A genuine success on the Stokes side: exactly 2 created, both detected.
    bool stokes_success() const {
        return n_created == 2 && stokes_detected == 2 && stokes_darks == 0;
    }
    // Exactly one anti-Stokes click in each read window.
    bool one_click_per_read_window() const {
        return as_detected_a + as_darks_a == 1 && as_detected_b + as_darks_b == 1;
    }
};

// Smallest truncation >= at_least whose Poisson tail beyond it is <= 1e-9.
int required_n_max(double lambda, int at_least);

// Exhaustive partition of outcomes up to n_created <= n_max: Poisson
// creation, binomial Stokes thinning, <=1 dark per write window, binomial
// read conversion into window A then B, binomial anti-Stokes detection,
// <=1 dark per read window. Zero-probability cells are omitted. Throws when
// the Poisson tail beyond n_max exceeds 1e-9 (and requires n_max >= 4).
std::vector<EventClass> enumerate_event_classes(double lambda, const DetectionModel& model,
                                                int n_max = 8);

struct SuccessFalse {
    double p_success;    // herald signature from exactly 2 creations, 0 darks
    double p_false;      // herald signature from any other class
    double ratio;        // p_false / p_success
    double fidelity_est; // p_success / (p_success + p_false)
};

// Stokes-side success/false split of the heralding signature; same
// truncation contract as enumerate_event_classes. Signals (std::domain_error)
// when p_success = 0 so the ratio is undefined.
SuccessFalse success_and_false(double lambda, const DetectionModel& model, int n_max = 8);

struct PairRate {
    double p_per_shot;
    double rate_hz;
};

// Entangled-pair probability per shot:
//   1/2 * p_det_two(lambda) * (2 p_read (1 - p_read))^2 * p_detect_as^2,
// the 1/2 being the opposite-polarization postselection; rate = rep_rate * p.
// p_detect_as defaults to 1, matching the headline convention that
// disregards anti-Stokes detection losses.
PairRate pair_rate(double lambda, const DetectionModel& model);

// Largest lambda with false/success ratio equal to target_ratio (maximizing
// rate at fixed fidelity), found by bisection on the branch above the
// dark-count-dominated minimum of ratio(lambda), to relative tolerance 1e-6.
// Throws std::domain_error when the target sits below the dark-count floor
// or cannot be reached for lambda <= 1.
double lambda_for_fidelity(double target_ratio, const DetectionModel& model, int n_max = 8);

}  // namespace bellsim
