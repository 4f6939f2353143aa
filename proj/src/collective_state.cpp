#include "bellsim/collective_state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace bellsim {

namespace {

// The read pulse drives s -> e with fixed sigma- polarization.
constexpr int kReadPolarization = -1;

void append_photon(BasisLabel& label, Slot slot, Pol pol) {
    label.photons.push_back({slot, pol});
    std::sort(label.photons.begin(), label.photons.end());
}

void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

Channel channel_of(Slot slot) {
    return (slot == Slot::w1 || slot == Slot::w2) ? Channel::stokes : Channel::anti_stokes;
}

const char* slot_name(Slot slot) {
    switch (slot) {
        case Slot::w1: return "W1";
        case Slot::w2: return "W2";
        case Slot::read_a: return "A";
        case Slot::read_b: return "B";
    }
    return "?";
}

char pol_char(Pol pol) { return pol == Pol::sigma_plus ? '+' : '-'; }

bool BasisLabel::has_slot(Slot slot) const {
    return std::any_of(photons.begin(), photons.end(),
                       [slot](const PhotonRecord& r) { return r.slot == slot; });
}

void CollectiveKet::add_term(const BasisLabel& label, std::complex<double> amplitude) {
    terms_[label] += amplitude;
}

double CollectiveKet::norm_sq() const {
    double s = 0.0;
    for (const auto& [label, amp] : terms_) s += std::norm(amp);
    return s;
}

double CollectiveKet::norm() const { return std::sqrt(norm_sq()); }

CollectiveKet CollectiveKet::normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::runtime_error("cannot normalize a zero-norm collective state");
    CollectiveKet out;
    for (const auto& [label, amp] : terms_) out.terms_[label] = amp / n;
    return out;
}

void ZeemanParams::validate() const {
    if (!std::isfinite(omega_m) || !std::isfinite(omega_n) || !std::isfinite(tau))
        throw std::invalid_argument("Zeeman parameters must be finite");
    if (tau < 0.0) throw std::invalid_argument("storage time tau must be >= 0");
}

const AmplitudeTable& default_table() {
    static const AmplitudeTable table{};
    return table;
}

CollectiveKet initial_state() {
    CollectiveKet ket;
    ket.add_term(BasisLabel{}, 1.0);
    return ket;
}

CollectiveKet apply_write_herald(const CollectiveKet& state, Slot slot, Pol detected) {
    if (channel_of(slot) != Channel::stokes)
        throw std::invalid_argument("apply_write_herald: slot must be a write window (W1/W2)");
    if (state.empty()) throw std::runtime_error("apply_write_herald: empty state");

    CollectiveKet out;
    for (const auto& [label, amp] : state.terms()) {
        if (label.has_slot(slot))
            throw std::invalid_argument("apply_write_herald: slot already used");
        BasisLabel next = label;
        // Detecting sigma+ leaves the ensemble with one more s- excitation
        // and vice versa; bosonic creation contributes sqrt(n+1).
        double create;
        if (detected == Pol::sigma_plus) {
            create = std::sqrt(static_cast<double>(next.n_s_minus + 1));
            ++next.n_s_minus;
        } else {
            create = std::sqrt(static_cast<double>(next.n_s_plus + 1));
            ++next.n_s_plus;
        }
        append_photon(next, slot, detected);
        out.add_term(next, amp * create);
    }
    return out.normalized();  // projective conditioning on the detection
}

CollectiveKet apply_read(const CollectiveKet& state, Slot slot, const AmplitudeTable& table) {
    if (channel_of(slot) != Channel::anti_stokes)
        throw std::invalid_argument("apply_read: slot must be a read window (A/B)");

    const double f_e = table.scheme().f_e;
    CollectiveKet out;
    for (const auto& [label, amp] : state.terms()) {
        if (label.has_slot(slot)) throw std::invalid_argument("apply_read: slot already used");

        // Branch over which stored spin wave is annihilated.
        for (int spin_m = -1; spin_m <= 1; spin_m += 2) {
            const int occupation = (spin_m < 0) ? label.n_s_minus : label.n_s_plus;
            if (occupation == 0) continue;
            const double m_e = spin_m + kReadPolarization;
            if (std::abs(m_e) > f_e + 0.25) continue;
            const double excite = table.amplitude(m_e, Manifold::s, spin_m, kReadPolarization);
            if (excite == 0.0) continue;

            // Branch over the collected emission polarizations (sigma+/-);
            // pi-polarized decays leave the collection mode and are dropped.
            for (int q_emit = -1; q_emit <= 1; q_emit += 2) {
                const double m_g = m_e - q_emit;
                const double emit = table.amplitude(m_e, Manifold::g, m_g, q_emit);
                if (emit == 0.0) continue;

                BasisLabel next = label;
                if (spin_m < 0)
                    --next.n_s_minus;
                else
                    --next.n_s_plus;
                if (m_g > 0.5)
                    ++next.n_g_plus;
                else if (m_g < -0.5)
                    ++next.n_g_minus_ret;
                else
                    throw std::logic_error("apply_read: return counters track m=+-1 only");
                append_photon(next, slot, q_emit > 0 ? Pol::sigma_plus : Pol::sigma_minus);

                const double annihilate = std::sqrt(static_cast<double>(occupation));
                out.add_term(next, amp * annihilate * excite * emit);
            }
        }
    }
    if (out.empty())
        throw std::runtime_error("apply_read: no excitation to read");
    return out;  // deliberately not normalized
}

CollectiveKet zeeman_evolve(const CollectiveKet& state, const ZeemanParams& zp) {
    zp.validate();
    CollectiveKet out;
    for (const auto& [label, amp] : state.terms()) {
        const double phase = zp.tau * (zp.omega_m * (label.n_s_plus - label.n_s_minus) +
                                       zp.omega_n * (label.n_g_plus - label.n_g_minus_ret));
        out.add_term(label, amp * std::polar(1.0, phase));
    }
    return out;
}

Eigen::Matrix4cd photonic_density_matrix(const CollectiveKet& state, Slot a, Slot b) {
    if (a == b) throw std::invalid_argument("photonic_density_matrix: slots must differ");

    // Group terms by their residual (atomic + remaining photon) content; each
    // group contributes a pure two-photon state, summed incoherently.
    std::map<BasisLabel, Eigen::Vector4cd> groups;
    for (const auto& [label, amp] : state.terms()) {
        BasisLabel residual = label;
        residual.photons.clear();
        int idx_a = -1, idx_b = -1;
        for (const auto& rec : label.photons) {
            if (rec.slot == a) {
                if (idx_a >= 0)
                    throw std::runtime_error("photonic_density_matrix: duplicate photon slot");
                idx_a = (rec.pol == Pol::sigma_minus);
            } else if (rec.slot == b) {
                if (idx_b >= 0)
                    throw std::runtime_error("photonic_density_matrix: duplicate photon slot");
                idx_b = (rec.pol == Pol::sigma_minus);
            } else {
                residual.photons.push_back(rec);
            }
        }
        if (idx_a < 0 || idx_b < 0)
            throw std::runtime_error("photonic_density_matrix: photon slots incomplete");
        auto [it, inserted] = groups.try_emplace(residual, Eigen::Vector4cd::Zero());
        it->second(2 * idx_a + idx_b) += amp;
    }

    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (const auto& [residual, v] : groups) rho += v * v.adjoint();
    return rho;
}

BellResult bell_fidelity(const Eigen::Matrix4cd& rho) {
    const std::complex<double> tr = rho.trace();
    if (std::abs(tr - std::complex<double>(1.0, 0.0)) > 1e-8)
        throw std::invalid_argument("bell_fidelity: density matrix trace must be 1");
    // Basis {++, +-, -+, --}: the Bell family lives on indices 1 (+-), 2 (-+).
    const std::complex<double> coherence = rho(2, 1);
    BellResult result;
    result.fidelity = 0.5 * (rho(1, 1).real() + rho(2, 2).real()) + std::abs(coherence);
    result.phi_star = (coherence == std::complex<double>(0.0, 0.0)) ? 0.0 : -std::arg(coherence);
    return result;
}

ProtocolResult run_protocol(const ZeemanParams& zp, std::pair<Pol, Pol> herald_pattern,
                            const AmplitudeTable& table) {
    zp.validate();
    CollectiveKet state = initial_state();
    state = apply_write_herald(state, Slot::w1, herald_pattern.first);
    state = apply_write_herald(state, Slot::w2, herald_pattern.second);
    state = apply_read(state, Slot::read_a, table);
    state = zeeman_evolve(state, zp);
    state = apply_read(state, Slot::read_b, table);

    ProtocolResult result;
    result.final_state = state.normalized();
    result.rho = photonic_density_matrix(result.final_state);
    const BellResult bell = bell_fidelity(result.rho);
    result.fidelity = bell.fidelity;
    result.bell_phase = bell.phi_star;
    result.weight_mm = result.rho(3, 3).real();
    return result;
}

std::string to_text(const CollectiveKet& state) {
    std::string out;
    out += "# collective-ket v1\n";
    out += "# n_s_minus n_s_plus n_g_plus n_g_minus_ret photons amp_re amp_im\n";
    for (const auto& [label, amp] : state.terms()) {
        std::ostringstream line;
        line << label.n_s_minus << ' ' << label.n_s_plus << ' ' << label.n_g_plus << ' '
             << label.n_g_minus_ret << ' ';
        if (label.photons.empty()) {
            line << "none";
        } else {
            bool first = true;
            for (const auto& rec : label.photons) {
                if (!first) line << ',';
                line << slot_name(rec.slot) << ':' << pol_char(rec.pol);
                first = false;
            }
        }
        out += line.str();
        out += ' ';
        format_double(out, amp.real());
        out += ' ';
        format_double(out, amp.imag());
        out += '\n';
    }
    return out;
}

}  // namespace bellsim
