#include "bellsim/event_sampler.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "test_util.hpp"

using namespace bellsim;

namespace {

DetectionModel model_with(double p_detect, double p_dc) {
    DetectionModel m;
    m.p_detect_stokes = p_detect;
    m.p_dc = p_dc;
    m.dark_rate = 0.0;  // p_dc specified directly
    return m;
}

SamplerConfig config_with(double lambda, const DetectionModel& m, std::uint64_t n_trials,
                          std::uint64_t seed = 12345) {
    SamplerConfig cfg;
    cfg.seed = seed;
    cfg.n_trials = n_trials;
    cfg.model = m;
    cfg.lambda = lambda;
    return cfg;
}

bool same_counts(const EventClass& a, const EventClass& b) {
    return a.n_created == b.n_created && a.stokes_detected == b.stokes_detected &&
           a.stokes_darks == b.stokes_darks && a.as_emitted_a == b.as_emitted_a &&
           a.as_detected_a == b.as_detected_a && a.as_darks_a == b.as_darks_a &&
           a.as_emitted_b == b.as_emitted_b && a.as_detected_b == b.as_detected_b &&
           a.as_darks_b == b.as_darks_b;
}

bool same_records(const std::vector<DetectionRecord>& a, const std::vector<DetectionRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].slot != b[i].slot || a[i].polarization != b[i].polarization ||
            a[i].is_dark != b[i].is_dark)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("trial streams are deterministic and decorrelated") {
    TrialRng a = trial_stream(99, 7);
    TrialRng b = trial_stream(99, 7);
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());

    TrialRng c = trial_stream(99, 8);
    TrialRng d = trial_stream(100, 7);
    TrialRng e = trial_stream(99, 7);
    int diff_c = 0, diff_d = 0;
    for (int i = 0; i < 16; ++i) {
        const std::uint64_t base = e.next_u64();
        if (c.next_u64() != base) ++diff_c;
        if (d.next_u64() != base) ++diff_d;
    }
    CHECK(diff_c == 16);
    CHECK(diff_d == 16);
}

TEST_CASE("TrialRng draws have the right distributions") {
    constexpr int kDraws = 200000;
    TrialRng rng = trial_stream(2024, 0);

    SUBCASE("uniform lies in [0,1) with mean 1/2") {
        double sum = 0.0;
        for (int i = 0; i < kDraws; ++i) {
            const double u = rng.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            sum += u;
        }
        const double four_sigma = 4.0 / std::sqrt(12.0 * kDraws);
        CHECK(std::abs(sum / kDraws - 0.5) <= four_sigma);
    }
    SUBCASE("bernoulli frequency matches p") {
        int hits = 0;
        for (int i = 0; i < kDraws; ++i) hits += rng.bernoulli(0.3);
        const double four_sigma = 4.0 * std::sqrt(0.3 * 0.7 / kDraws);
        CHECK(std::abs(static_cast<double>(hits) / kDraws - 0.3) <= four_sigma);
    }
    SUBCASE("poisson matches mean and pmf") {
        const double lambda = 0.25;
        std::int64_t sum = 0;
        int zeros = 0;
        for (int i = 0; i < kDraws; ++i) {
            const int k = rng.poisson(lambda);
            CHECK(k >= 0);
            sum += k;
            zeros += (k == 0);
        }
        CHECK(std::abs(static_cast<double>(sum) / kDraws - lambda) <=
              4.0 * std::sqrt(lambda / kDraws));
        const double p0 = poisson_p(lambda, 0);
        CHECK(std::abs(static_cast<double>(zeros) / kDraws - p0) <=
              4.0 * std::sqrt(p0 * (1.0 - p0) / kDraws));
        CHECK(trial_stream(5, 5).poisson(0.0) == 0);
    }
}

TEST_CASE("sample_trial satisfies its structural invariants") {
    SamplerConfig cfg = config_with(0.2, DetectionModel{}, 1);
    constexpr std::uint64_t kTrials = 200000;
    double created_sum = 0.0;
    for (std::uint64_t i = 0; i < kTrials; ++i) {
        TrialRng rng = trial_stream(1, i);
        const TrialOutcome t = sample_trial(rng, cfg);
        created_sum += t.n_created;

        const EventClass& ec = t.true_class;
        REQUIRE(ec.probability == 0.0);
        REQUIRE(ec.n_created == t.n_created);

        int seen = 0, dark = 0, dark_w1 = 0, dark_w2 = 0;
        for (const DetectionRecord& d : t.stokes_detections) {
            REQUIRE((d.slot == Slot::w1 || d.slot == Slot::w2));
            if (d.is_dark) {
                ++dark;
                (d.slot == Slot::w1 ? dark_w1 : dark_w2)++;
            } else {
                ++seen;
            }
        }
        REQUIRE(seen == ec.stokes_detected);
        REQUIRE(dark == ec.stokes_darks);
        REQUIRE(dark_w1 <= 1);
        REQUIRE(dark_w2 <= 1);
        REQUIRE(ec.stokes_detected <= ec.n_created);

        int as_seen_a = 0, as_seen_b = 0, as_dark_a = 0, as_dark_b = 0;
        for (const DetectionRecord& d : t.as_detections) {
            REQUIRE((d.slot == Slot::read_a || d.slot == Slot::read_b));
            if (d.slot == Slot::read_a)
                (d.is_dark ? as_dark_a : as_seen_a)++;
            else
                (d.is_dark ? as_dark_b : as_seen_b)++;
        }
        REQUIRE(as_seen_a == ec.as_detected_a);
        REQUIRE(as_seen_b == ec.as_detected_b);
        REQUIRE(as_dark_a == ec.as_darks_a);
        REQUIRE(as_dark_b == ec.as_darks_b);
        REQUIRE(as_dark_a <= 1);
        REQUIRE(as_dark_b <= 1);
        REQUIRE(ec.as_detected_a <= ec.as_emitted_a);
        REQUIRE(ec.as_detected_b <= ec.as_emitted_b);
        REQUIRE(ec.as_emitted_a + ec.as_emitted_b <= ec.n_created);
        REQUIRE(ec.as_emitted == ec.as_emitted_a + ec.as_emitted_b);
        REQUIRE(ec.as_detected == ec.as_detected_a + ec.as_detected_b);
        REQUIRE(ec.as_darks == ec.as_darks_a + ec.as_darks_b);

        REQUIRE(ec.herald_signature() == (t.stokes_detections.size() == 2));
        const bool opposite =
            t.stokes_detections.size() == 2 &&
            t.stokes_detections[0].polarization != t.stokes_detections[1].polarization;
        REQUIRE(t.heralded == opposite);
    }
    CHECK(std::abs(created_sum / kTrials - 0.2) <= 4.0 * std::sqrt(0.2 / kTrials));
}

TEST_CASE("sample_trial is a pure function of its stream") {
    const SamplerConfig cfg = config_with(0.3, DetectionModel{}, 1, 77);
    for (std::uint64_t i = 0; i < 500; ++i) {
        TrialRng r1 = trial_stream(cfg.seed, i);
        TrialRng r2 = trial_stream(cfg.seed, i);
        const TrialOutcome a = sample_trial(r1, cfg);
        const TrialOutcome b = sample_trial(r2, cfg);
        REQUIRE(a.n_created == b.n_created);
        REQUIRE(a.heralded == b.heralded);
        REQUIRE(same_records(a.stokes_detections, b.stokes_detections));
        REQUIRE(same_records(a.as_detections, b.as_detections));
        REQUIRE(same_counts(a.true_class, b.true_class));
    }
}

TEST_CASE("no light and no darks means no heralds") {
    const SamplerConfig cfg = config_with(0.0, model_with(0.75, 0.0), 1);
    for (std::uint64_t i = 0; i < 20000; ++i) {
        TrialRng rng = trial_stream(3, i);
        const TrialOutcome t = sample_trial(rng, cfg);
        REQUIRE(t.n_created == 0);
        REQUIRE(!t.heralded);
        REQUIRE(t.stokes_detections.empty());
        REQUIRE(t.as_detections.empty());
    }
}

TEST_CASE("perfect detection heralds exactly the opposite-polarization pairs") {
    const SamplerConfig cfg = config_with(0.2, model_with(1.0, 0.0), 1);
    int heralds = 0;
    for (std::uint64_t i = 0; i < 50000; ++i) {
        TrialRng rng = trial_stream(4, i);
        const TrialOutcome t = sample_trial(rng, cfg);
        REQUIRE(static_cast<int>(t.stokes_detections.size()) == t.n_created);
        REQUIRE(t.true_class.stokes_success() == (t.n_created == 2));
        for (const DetectionRecord& d : t.stokes_detections) REQUIRE(!d.is_dark);
        for (const DetectionRecord& d : t.as_detections) REQUIRE(!d.is_dark);
        const bool expect = t.n_created == 2 && t.stokes_detections[0].polarization !=
                                                    t.stokes_detections[1].polarization;
        REQUIRE(t.heralded == expect);
        heralds += t.heralded;
    }
    CHECK(heralds > 0);
}

TEST_CASE("herald probability matches the analytic half of the signature rate") {
    // Any two clicks carry opposite polarizations with probability exactly
    // 1/2, so p_herald = (p_success + p_false) / 2.
    const DetectionModel m;
    const SamplerConfig cfg = config_with(0.2, m, 10000000, 2718);
    const EstimateResult r = estimate(cfg);
    const SuccessFalse sf = success_and_false(0.2, m, 8);
    const double expected = 0.5 * (sf.p_success + sf.p_false);
    const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(cfg.n_trials));
    CHECK(std::abs(r.p_herald - expected) <= 4.0 * se);
    CHECK(r.n_herald_success + r.n_herald_false == r.n_heralded);
    CHECK(r.n_heralded <= r.n_two_click);
}

TEST_CASE("half of two-click events pass the opposite-polarization postselection") {
    const SamplerConfig cfg = config_with(0.2, model_with(0.75, 0.0), 1000000, 31415);
    const EstimateResult r = estimate(cfg);
    REQUIRE(r.n_two_click > 0);
    const double frac =
        static_cast<double>(r.n_heralded) / static_cast<double>(r.n_two_click);
    const double se = std::sqrt(0.25 / static_cast<double>(r.n_two_click));
    CHECK(std::abs(frac - 0.5) <= 4.0 * se);
}

TEST_CASE("estimate is deterministic and the parallel path matches the reference") {
    const SamplerConfig cfg = config_with(0.2, DetectionModel{}, 100000, 555);
    const EstimateResult a = estimate(cfg);
    const EstimateResult b = estimate(cfg);
    const EstimateResult c = estimate_reference(cfg);
    CHECK(summary_json(a) == summary_json(b));
    CHECK(summary_json(a) == summary_json(c));
    CHECK(a.n_heralded == c.n_heralded);
    CHECK(a.n_success == c.n_success);
    CHECK(a.n_false == c.n_false);
    CHECK(a.p_herald == c.p_herald);
    CHECK(a.ratio == c.ratio);
    CHECK(a.fidelity_est == c.fidelity_est);

    SUBCASE("a different seed gives a different stream") {
        SamplerConfig other = cfg;
        other.seed = 556;
        CHECK(estimate(other).n_heralded != a.n_heralded);
    }
}

TEST_CASE("Monte Carlo agrees with the enumeration on the efficiency grid") {
    constexpr std::uint64_t kTrials = 1000000;
    for (const double lambda : {0.05, 0.2, 0.4}) {
        for (const double p : {0.3, 0.75, 1.0}) {
            CAPTURE(lambda);
            CAPTURE(p);
            const DetectionModel m = model_with(p, 1e-6);
            const SamplerConfig cfg = config_with(lambda, m, kTrials, 90210);
            const EstimateResult r = estimate(cfg);
            const SuccessFalse sf = success_and_false(lambda, m, required_n_max(lambda, 8));
            const double se_s = std::sqrt(sf.p_success * (1.0 - sf.p_success) / kTrials);
            const double se_f = std::sqrt(sf.p_false * (1.0 - sf.p_false) / kTrials);
            CHECK(std::abs(r.p_success - sf.p_success) <= 4.0 * se_s);
            CHECK(std::abs(r.p_false - sf.p_false) <= 4.0 * se_f);
        }
    }
}

TEST_CASE("perfect detection gives ratio exactly zero and unit fidelity at theta = pi/2") {
    const SamplerConfig cfg = config_with(0.2, model_with(1.0, 0.0), 100000, 11);
    const EstimateResult r = estimate(cfg);
    CHECK(r.n_false == 0);
    CHECK(r.ratio == 0.0);
    CHECK(r.standard_errors.ratio == 0.0);
    CHECK(r.n_herald_false == 0);
    CHECK(std::abs(r.fidelity_est - 1.0) <= 1e-9);
}

TEST_CASE("fidelity_est mixes the success channel with the contamination bound") {
    const DetectionModel m;
    SamplerConfig cfg = config_with(0.2, m, 1000000, 8086);
    SUBCASE("at theta = pi/2 the success channel contributes fidelity 1") {
        const EstimateResult r = estimate(cfg);
        const SuccessFalse sf = success_and_false(0.2, m, 8);
        const double expected =
            (sf.p_success * 1.0 + sf.p_false * 0.25) / (sf.p_success + sf.p_false);
        CHECK(std::abs(r.fidelity_est - expected) <= 0.01);
        CHECK(r.fidelity_est < 1.0);
        CHECK(r.fidelity_est > 0.9);
    }
    SUBCASE("at theta = 0 the success channel drops to 1/3") {
        cfg.theta = 0.0;
        const EstimateResult r = estimate(cfg);
        CHECK(r.fidelity_est >= 0.25);
        CHECK(r.fidelity_est <= 1.0 / 3.0 + 1e-12);
        const SuccessFalse sf = success_and_false(0.2, m, 8);
        const double expected =
            (sf.p_success / 3.0 + sf.p_false * 0.25) / (sf.p_success + sf.p_false);
        CHECK(std::abs(r.fidelity_est - expected) <= 0.01);
    }
    SUBCASE("the contamination knob feeds through") {
        cfg.contaminated_fidelity = 0.0;
        const EstimateResult r = estimate(cfg);
        CHECK(r.fidelity_est < 1.0);
        const double reconstructed =
            static_cast<double>(r.n_herald_success) / static_cast<double>(r.n_heralded);
        check_close_abs(r.fidelity_est, reconstructed, 1e-15);
    }
}

TEST_CASE("under-sampled estimates are refused") {
    const SamplerConfig cfg = config_with(0.2, DetectionModel{}, 1000);
    CHECK_THROWS_AS(estimate(cfg), std::invalid_argument);
    CHECK_THROWS_AS(estimate_reference(cfg), std::invalid_argument);
}

TEST_CASE("SamplerConfig validation") {
    SamplerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("n_trials") {
        cfg.n_trials = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("lambda") {
        cfg.lambda = -0.1;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("contaminated_fidelity") {
        cfg.contaminated_fidelity = 1.5;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("model is validated too") {
        cfg.model.p_detect_stokes = 2.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("summary_json carries every documented key deterministically") {
    const SamplerConfig cfg = config_with(0.2, DetectionModel{}, 100000, 314);
    const std::string s = summary_json(estimate(cfg));
    CHECK(s.front() == '{');
    CHECK(s.back() == '}');
    for (const char* key :
         {"\"fidelity_est\"", "\"n_false\"", "\"n_herald_false\"", "\"n_herald_success\"",
          "\"n_heralded\"", "\"n_success\"", "\"n_trials\"", "\"n_two_click\"", "\"p_false\"",
          "\"p_herald\"", "\"p_success\"", "\"ratio\"", "\"se_p_false\"", "\"se_p_herald\"",
          "\"se_p_success\"", "\"se_ratio\""}) {
        CAPTURE(key);
        CHECK(s.find(key) != std::string::npos);
    }
    CHECK(s == summary_json(estimate(cfg)));
}
