#pragma once

#include <map>
#include <tuple>
#include <utility>
#include <vector>

namespace bellsim {

// Atomic manifolds: g = ground storage level, s = metastable storage level,
// e = excited level reached by the read pulse.
enum class Manifold { g, s, e };

const char* manifold_name(Manifold m);

// Total angular momentum F assigned to each manifold. Defaults follow the
// protocol level scheme (F_g = 1, F_s = 2, F_e' = 2); all routines accept
// other (half-)integer assignments.
struct LevelScheme {
    double f_g = 1.0;
    double f_s = 2.0;
    double f_e = 2.0;

    double f_of(Manifold m) const;
    void validate() const;
};

// A single Zeeman sublevel |manifold, F, mF>.
struct SublevelState {
    Manifold manifold;
    double f;
    double mf;

    SublevelState(Manifold manifold_, double f_, double mf_);
};

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon-Shortley
// convention, evaluated with the Racah factorial sum. Half-integer arguments
// are supported. Returns exactly 0 for M != m1+m2, for J outside the triangle
// range, and for the parity-forbidden case m1 = m2 = M = 0 with j1+j2+J odd.
double cg_coefficient(double j1, double m1, double j2, double m2, double J, double M);

// Emission amplitude P^(F_ground)_{mE,mG} for a dipole photon of polarization
// q in {-1, 0, +1} connecting |e, mE> -> |ground manifold, mG>. Defined as the
// absorption Clebsch-Gordan coefficient <F_g mG; 1 q | F_e mE> with the
// reduced matrix element of every F_e -> F_g line set to 1: the protocol
// conditions on the manifold the photon lands in, so only intra-line ratios
// reach any observable. Forbidden transitions return exactly 0.
double transition_amplitude(const SublevelState& excited, const SublevelState& ground, int q);

// Normalized decay probabilities from one excited sublevel into the target
// manifold, summed over photon polarizations. Entries are listed for every
// Zeeman sublevel reachable by |Delta m| <= 1 (including zero-probability
// ones), ordered by increasing mG. Throws std::domain_error when no channel
// is open.
std::vector<std::pair<double, double>>
branching_probabilities(const SublevelState& excited, Manifold target,
                        const LevelScheme& scheme = LevelScheme{});

// Precomputed emission amplitudes for every excited sublevel of a level
// scheme. Immutable after construction; safe for shared concurrent reads.
class AmplitudeTable {
  public:
    struct Entry {
        Manifold target;
        double f_target;
        double m_excited;
        double m_ground;
        int q;
        double amplitude;
    };

    explicit AmplitudeTable(const LevelScheme& scheme = LevelScheme{});

    // Amplitude for |e, mE> -> |target, mG> emitting polarization q;
    // 0 when the transition is forbidden or outside the scheme.
    double amplitude(double m_excited, Manifold target, double m_ground, int q) const;

    const LevelScheme& scheme() const { return scheme_; }

    // All table rows (including exact zeros inside the allowed |Delta m| <= 1
    // window), ordered by (target, mE, q); used by the CSV dump.
    const std::vector<Entry>& entries() const { return entries_; }

  private:
    LevelScheme scheme_;
    std::vector<Entry> entries_;
    std::map<std::tuple<int, int, int>, double> lookup_;  // (target, 2*mE, q)
};

}  // namespace bellsim
