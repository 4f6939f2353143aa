// Benchmark: OpenMP-parallel Monte Carlo estimate vs the serial reference.
// Usage: bellsim_bench [n_trials]
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "bellsim/event_sampler.hpp"

namespace {

double run_ms(bellsim::EstimateResult (*fn)(const bellsim::SamplerConfig&),
              const bellsim::SamplerConfig& cfg, bellsim::EstimateResult& out) {
    const auto t0 = std::chrono::steady_clock::now();
    out = fn(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    bellsim::SamplerConfig cfg;  // headline operating point
    cfg.n_trials = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4000000;

    bellsim::EstimateResult serial, parallel;
    const double ms_serial = run_ms(bellsim::estimate_reference, cfg, serial);
    const double ms_parallel = run_ms(bellsim::estimate, cfg, parallel);
    const bool identical = bellsim::summary_json(serial) == bellsim::summary_json(parallel);

    const double mt = static_cast<double>(cfg.n_trials) / 1e6;
    std::printf("trials:    %llu\n", static_cast<unsigned long long>(cfg.n_trials));
    std::printf("serial:    %8.1f ms  (%.1f Mtrials/s)\n", ms_serial, mt / (ms_serial / 1e3));
    std::printf("parallel:  %8.1f ms  (%.1f Mtrials/s)\n", ms_parallel,
                mt / (ms_parallel / 1e3));
    std::printf("speedup:   %.2fx\n", ms_serial / ms_parallel);
    std::printf("identical results: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
