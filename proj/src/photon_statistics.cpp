#include "bellsim/photon_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bellsim {

namespace {

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream msg;
        msg << name << " must lie in [0, 1], got " << p;
        throw std::invalid_argument(msg.str());
    }
}

double binomial_coefficient(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c *= static_cast<double>(n - k + i) / i;
    return c;
}

double binom_pmf(int n, int k, double p) {
    return binomial_coefficient(n, k) * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

double poisson_tail_beyond(double lambda, int n_max) {
    double cum = 0.0;
    for (int n = 0; n <= n_max; ++n) cum += poisson_p(lambda, n);
    return 1.0 - cum;
}

void check_truncation(double lambda, int n_max) {
    if (n_max < 4) throw std::invalid_argument("n_max must be >= 4");
    const double deficit = poisson_tail_beyond(lambda, n_max);
    if (deficit > 1e-9) {
        std::ostringstream msg;
        msg << "truncation deficit " << deficit << " at n_max=" << n_max
            << " exceeds 1e-9; raise n_max";
        throw std::runtime_error(msg.str());
    }
}

}  // namespace

void DetectionModel::validate() const {
    check_probability(p_detect_stokes, "p_detect_stokes");
    check_probability(p_detect_as, "p_detect_as");
    check_probability(p_dc, "p_dc");
    check_probability(p_read, "p_read");
    if (!(pulse_duration >= 0.0) || !std::isfinite(pulse_duration))
        throw std::invalid_argument("pulse_duration must be >= 0");
    if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate))
        throw std::invalid_argument("dark_rate must be >= 0");
    if (!(rep_rate >= 0.0) || !std::isfinite(rep_rate))
        throw std::invalid_argument("rep_rate must be >= 0");
    const double derived = dark_rate * pulse_duration;
    if (derived > 0.0 && std::abs(p_dc - derived) > 1e-12 + 1e-6 * derived) {
        std::ostringstream msg;
        msg << "p_dc=" << p_dc << " inconsistent with dark_rate*pulse_duration=" << derived;
        throw std::invalid_argument(msg.str());
    }
}

double poisson_p(double lambda, int n) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::domain_error("poisson_p: lambda must be >= 0");
    if (n < 0) throw std::invalid_argument("poisson_p: n must be >= 0");
    double t = std::exp(-lambda);
    for (int i = 1; i <= n; ++i) t *= lambda / i;
    return t;
}

double detect_exactly(int n, int k, double p) {
    if (n < 0 || k < 0 || k > n)
        throw std::invalid_argument("detect_exactly: require 0 <= k <= n");
    check_probability(p, "p");
    return binom_pmf(n, k, p);
}

double p_det_two(double lambda, const DetectionModel& model) {
    model.validate();
    return poisson_p(lambda, 2) * model.p_detect_stokes * model.p_detect_stokes;
}

double dark_count_prob_one(double lambda, const DetectionModel& model) {
    model.validate();
    return poisson_p(lambda, 0) * model.p_dc +
           poisson_p(lambda, 1) * (1.0 - model.p_detect_stokes) * model.p_dc;
}

std::vector<EventClass> enumerate_event_classes(double lambda, const DetectionModel& model,
                                                int n_max) {
    model.validate();
    check_truncation(lambda, n_max);

    const double ps = model.p_detect_stokes;
    const double pas = model.p_detect_as;
    const double pdc = model.p_dc;
    const double pr = model.p_read;

    std::vector<EventClass> classes;
    for (int n = 0; n <= n_max; ++n) {
        const double p_n = poisson_p(lambda, n);
        if (p_n == 0.0) continue;
        for (int k = 0; k <= n; ++k) {
            const double p_k = detect_exactly(n, k, ps);
            if (p_k == 0.0) continue;
            for (int ds = 0; ds <= 2; ++ds) {
                const double p_ds = binom_pmf(2, ds, pdc);
                const double p_stokes = p_n * p_k * p_ds;
                if (p_stokes == 0.0) continue;

                // Read window A converts each of the n stored excitations
                // with probability p_read; window B gets another try at the
                // remainder. Each emitted anti-Stokes photon is detected with
                // p_detect_as; each read window may add at most one dark.
                for (int ja = 0; ja <= n; ++ja) {
                    const double p_ja = binom_pmf(n, ja, pr);
                    if (p_ja == 0.0) continue;
                    for (int aa = 0; aa <= ja; ++aa) {
                        const double p_aa = binom_pmf(ja, aa, pas);
                        if (p_aa == 0.0) continue;
                        for (int da = 0; da <= 1; ++da) {
                            const double p_da = da ? pdc : 1.0 - pdc;
                            if (p_da == 0.0) continue;
                            for (int jb = 0; jb <= n - ja; ++jb) {
                                const double p_jb = binom_pmf(n - ja, jb, pr);
                                if (p_jb == 0.0) continue;
                                for (int ab = 0; ab <= jb; ++ab) {
                                    const double p_ab = binom_pmf(jb, ab, pas);
                                    if (p_ab == 0.0) continue;
                                    for (int db = 0; db <= 1; ++db) {
                                        const double p_db = db ? pdc : 1.0 - pdc;
                                        if (p_db == 0.0) continue;
                                        EventClass ec;
                                        ec.n_created = n;
                                        ec.stokes_detected = k;
                                        ec.stokes_darks = ds;
                                        ec.as_emitted_a = ja;
                                        ec.as_detected_a = aa;
                                        ec.as_darks_a = da;
                                        ec.as_emitted_b = jb;
                                        ec.as_detected_b = ab;
                                        ec.as_darks_b = db;
                                        ec.as_emitted = ja + jb;
                                        ec.as_detected = aa + ab;
                                        ec.as_darks = da + db;
                                        ec.probability = p_stokes * p_ja * p_aa * p_da *
                                                         p_jb * p_ab * p_db;
                                        classes.push_back(ec);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return classes;
}

SuccessFalse success_and_false(double lambda, const DetectionModel& model, int n_max) {
    model.validate();
    check_truncation(lambda, n_max);

    const double ps = model.p_detect_stokes;
    const double pdc = model.p_dc;

    // Stokes-side marginal of the class partition: anti-Stokes branching sums
    // to 1 for every class, so the herald split needs no read-side loops.
    double p_success = 0.0, p_false = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const double p_n = poisson_p(lambda, n);
        for (int k = 0; k <= std::min(n, 2); ++k) {
            const int ds = 2 - k;  // herald signature: detections + darks = 2
            const double prob = p_n * detect_exactly(n, k, ps) * binom_pmf(2, ds, pdc);
            if (n == 2 && k == 2)
                p_success += prob;
            else
                p_false += prob;
        }
    }

    SuccessFalse out;
    out.p_success = p_success;
    out.p_false = p_false;
    if (p_success <= 0.0)
        throw std::domain_error("success_and_false: p_success = 0, ratio undefined");
    out.ratio = p_false / p_success;
    out.fidelity_est = p_success / (p_success + p_false);
    return out;
}

PairRate pair_rate(double lambda, const DetectionModel& model) {
    model.validate();
    const double p_b1 = 2.0 * model.p_read * (1.0 - model.p_read);
    PairRate out;
    out.p_per_shot = 0.5 * p_det_two(lambda, model) * p_b1 * p_b1 *
                     model.p_detect_as * model.p_detect_as;
    out.rate_hz = model.rep_rate * out.p_per_shot;
    return out;
}

int required_n_max(double lambda, int at_least) {
    int n_max = std::max(4, at_least);
    while (poisson_tail_beyond(lambda, n_max) > 1e-9) {
        if (++n_max > 2048) throw std::runtime_error("required_n_max: no feasible truncation");
    }
    return n_max;
}

double lambda_for_fidelity(double target_ratio, const DetectionModel& model, int n_max) {
    model.validate();
    if (!(target_ratio > 0.0))
        throw std::domain_error("lambda_for_fidelity: target ratio must exceed the dark-count floor");

    const auto ratio_at = [&](double lambda) {
        return success_and_false(lambda, model, required_n_max(lambda, n_max)).ratio;
    };

    // Locate the dark-count-dominated minimum on a log grid, then verify the
    // branch above it is monotone increasing up to the lambda cap.
    constexpr double kLambdaLo = 1e-4, kLambdaHi = 1.0;
    constexpr int kGrid = 200;
    std::vector<double> grid_lambda(kGrid), grid_ratio(kGrid);
    const double log_lo = std::log(kLambdaLo), log_hi = std::log(kLambdaHi);
    int min_idx = 0;
    for (int i = 0; i < kGrid; ++i) {
        grid_lambda[i] = std::exp(log_lo + (log_hi - log_lo) * i / (kGrid - 1));
        grid_ratio[i] = ratio_at(grid_lambda[i]);
        if (grid_ratio[i] < grid_ratio[min_idx]) min_idx = i;
    }
    for (int i = min_idx + 1; i < kGrid; ++i) {
        if (grid_ratio[i] < grid_ratio[i - 1] - 1e-12)
            throw std::domain_error(
                "lambda_for_fidelity: ratio(lambda) is not monotone above its minimum");
    }
    if (target_ratio < grid_ratio[min_idx]) {
        std::ostringstream msg;
        msg << "lambda_for_fidelity: target ratio " << target_ratio
            << " lies below the dark-count floor " << grid_ratio[min_idx];
        throw std::domain_error(msg.str());
    }
    if (grid_ratio[kGrid - 1] < target_ratio) {
        std::ostringstream msg;
        msg << "lambda_for_fidelity: target ratio " << target_ratio
            << " is not reached for lambda <= " << kLambdaHi;
        throw std::domain_error(msg.str());
    }

    // Bisect the increasing branch for the largest lambda meeting the target.
    double lo = grid_lambda[min_idx], hi = kLambdaHi;
    for (int i = min_idx + 1; i < kGrid; ++i) {
        if (grid_ratio[i] >= target_ratio) {
            hi = grid_lambda[i];
            lo = grid_lambda[i - 1];
            break;
        }
    }
    while ((hi - lo) > 1e-6 * 0.5 * (hi + lo)) {
        const double mid = 0.5 * (lo + hi);
        if (ratio_at(mid) < target_ratio)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace bellsim
