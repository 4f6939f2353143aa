#include "bellsim/atomic_levels.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace bellsim {

namespace {

// Largest factorial argument used by the Racah sum at the j-range we accept.
constexpr int kMaxFactorialArg = 256;

// Factorials in extended precision; n <= 256 stays far below the long double
// overflow threshold.
const std::array<long double, kMaxFactorialArg + 1>& factorial_table() {
    static const auto table = [] {
        std::array<long double, kMaxFactorialArg + 1> t{};
        t[0] = 1.0L;
        for (int i = 1; i <= kMaxFactorialArg; ++i) t[i] = t[i - 1] * i;
        return t;
    }();
    return table;
}

long double fact(int n) { return factorial_table()[n]; }

// Convert a (half-)integer angular momentum quantum number to twice its
// value, rejecting anything that is not a multiple of 1/2.
int twice(double x, const char* what) {
    double t = 2.0 * x;
    double r = std::round(t);
    if (!std::isfinite(t) || std::abs(t - r) > 1e-9) {
        std::ostringstream msg;
        msg << what << " must be integer or half-integer, got " << x;
        throw std::invalid_argument(msg.str());
    }
    return static_cast<int>(r);
}

void check_jm(int tj, int tm, const char* what) {
    if (tj < 0) {
        std::ostringstream msg;
        msg << what << ": angular momentum must be non-negative";
        throw std::invalid_argument(msg.str());
    }
    if (std::abs(tm) > tj) {
        std::ostringstream msg;
        msg << what << ": |m| exceeds j";
        throw std::invalid_argument(msg.str());
    }
    if ((tj - tm) % 2 != 0) {
        std::ostringstream msg;
        msg << what << ": j and m must differ by an integer";
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

const char* manifold_name(Manifold m) {
    switch (m) {
        case Manifold::g: return "g";
        case Manifold::s: return "s";
        case Manifold::e: return "e";
    }
    return "?";
}

double LevelScheme::f_of(Manifold m) const {
    switch (m) {
        case Manifold::g: return f_g;
        case Manifold::s: return f_s;
        case Manifold::e: return f_e;
    }
    throw std::invalid_argument("unknown manifold");
}

void LevelScheme::validate() const {
    twice(f_g, "F_g");
    twice(f_s, "F_s");
    twice(f_e, "F_e");
    if (f_g < 0 || f_s < 0 || f_e < 0)
        throw std::invalid_argument("level scheme F values must be non-negative");
}

SublevelState::SublevelState(Manifold manifold_, double f_, double mf_)
    : manifold(manifold_), f(f_), mf(mf_) {
    check_jm(twice(f, "F"), twice(mf, "mF"), "SublevelState");
}

double cg_coefficient(double j1, double m1, double j2, double m2, double J, double M) {
    const int tj1 = twice(j1, "j1"), tm1 = twice(m1, "m1");
    const int tj2 = twice(j2, "j2"), tm2 = twice(m2, "m2");
    const int tJ = twice(J, "J"), tM = twice(M, "M");
    check_jm(tj1, tm1, "(j1,m1)");
    check_jm(tj2, tm2, "(j2,m2)");
    check_jm(tJ, tM, "(J,M)");
    if (tj1 + tj2 + tJ > 2 * (kMaxFactorialArg / 4))
        throw std::invalid_argument("angular momenta too large");

    if (tm1 + tm2 != tM) return 0.0;
    if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2) return 0.0;
    // j1 + j2 + J must be an integer for the coupling to exist.
    if ((tj1 + tj2 + tJ) % 2 != 0) return 0.0;
    // Parity selection rule: <j1 0; j2 0 | J 0> vanishes identically when
    // j1 + j2 + J is odd. The Racah sum cancels only approximately in
    // floating point, so short-circuit to an exact zero.
    if (tm1 == 0 && tm2 == 0 && tM == 0 && ((tj1 + tj2 + tJ) / 2) % 2 != 0) return 0.0;

    // Racah's closed form. All factorial arguments below are guaranteed
    // integral by the parity checks above; they are stored as twice-values
    // and halved on use.
    const auto half = [](int t) { return t / 2; };

    const long double prefactor =
        (tJ + 1) *
        (fact(half(tj1 + tj2 - tJ)) * fact(half(tj1 - tj2 + tJ)) *
         fact(half(-tj1 + tj2 + tJ)) / fact(half(tj1 + tj2 + tJ) + 1)) *
        (fact(half(tJ + tM)) * fact(half(tJ - tM)) * fact(half(tj1 - tm1)) *
         fact(half(tj1 + tm1)) * fact(half(tj2 - tm2)) * fact(half(tj2 + tm2)));

    // k ranges over all integers keeping every factorial argument >= 0.
    const int k_min = std::max({0, half(tj2 - tJ - tm1), half(tj1 + tm2 - tJ)});
    const int k_max = std::min({half(tj1 + tj2 - tJ), half(tj1 - tm1), half(tj2 + tm2)});

    long double sum = 0.0L;
    for (int k = k_min; k <= k_max; ++k) {
        const long double denom = fact(k) * fact(half(tj1 + tj2 - tJ) - k) *
                                  fact(half(tj1 - tm1) - k) * fact(half(tj2 + tm2) - k) *
                                  fact(half(tJ - tj2 + tm1) + k) * fact(half(tJ - tj1 - tm2) + k);
        const long double term = 1.0L / denom;
        sum += (k % 2 == 0) ? term : -term;
    }
    if (sum == 0.0L) return 0.0;

    return static_cast<double>(std::sqrt(prefactor) * sum);
}

double transition_amplitude(const SublevelState& excited, const SublevelState& ground, int q) {
    if (excited.manifold != Manifold::e)
        throw std::invalid_argument("transition_amplitude: first argument must be an excited sublevel");
    if (ground.manifold == Manifold::e)
        throw std::invalid_argument("transition_amplitude: second argument must be a ground/storage sublevel");
    if (q < -1 || q > 1)
        throw std::invalid_argument("transition_amplitude: polarization q must be -1, 0 or +1");
    if (twice(excited.mf - ground.mf - q, "Delta m") != 0) return 0.0;
    return cg_coefficient(ground.f, ground.mf, 1.0, q, excited.f, excited.mf);
}

std::vector<std::pair<double, double>>
branching_probabilities(const SublevelState& excited, Manifold target, const LevelScheme& scheme) {
    if (excited.manifold != Manifold::e)
        throw std::invalid_argument("branching_probabilities: need an excited sublevel");
    if (target == Manifold::e)
        throw std::invalid_argument("branching_probabilities: target must be g or s");
    scheme.validate();

    const double f_target = scheme.f_of(target);
    std::vector<std::pair<double, double>> out;
    double total = 0.0;
    for (int q = 1; q >= -1; --q) {  // mG = mE - q, ascending in mG
        const double mg = excited.mf - q;
        if (std::abs(mg) > f_target + 0.25) continue;
        const double amp = transition_amplitude(excited, SublevelState(target, f_target, mg), q);
        out.emplace_back(mg, amp * amp);
        total += amp * amp;
    }
    if (total <= 0.0)
        throw std::domain_error("branching_probabilities: no open channel");
    for (auto& [mg, p] : out) p /= total;
    return out;
}

AmplitudeTable::AmplitudeTable(const LevelScheme& scheme) : scheme_(scheme) {
    scheme_.validate();
    const int tfe = static_cast<int>(std::round(2.0 * scheme_.f_e));
    for (Manifold target : {Manifold::g, Manifold::s}) {
        const double ft = scheme_.f_of(target);
        for (int tme = -tfe; tme <= tfe; tme += 2) {
            const double me = tme / 2.0;
            const SublevelState exc(Manifold::e, scheme_.f_e, me);
            for (int q = -1; q <= 1; ++q) {
                const double mg = me - q;
                if (std::abs(mg) > ft + 0.25) continue;
                const double amp = transition_amplitude(exc, SublevelState(target, ft, mg), q);
                entries_.push_back({target, ft, me, mg, q, amp});
                lookup_[{static_cast<int>(target), tme, q}] = amp;
            }
        }
    }
}

double AmplitudeTable::amplitude(double m_excited, Manifold target, double m_ground, int q) const {
    if (target == Manifold::e) return 0.0;
    const int tme = twice(m_excited, "m_excited");
    if (twice(m_excited - m_ground - q, "Delta m") != 0) return 0.0;
    const auto it = lookup_.find({static_cast<int>(target), tme, q});
    return it == lookup_.end() ? 0.0 : it->second;
}

}  // namespace bellsim
