#pragma once

#include <compare>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bellsim/atomic_levels.hpp"

namespace bellsim {

// Photon polarization in the circular basis.
enum class Pol { sigma_plus, sigma_minus };

// Emission channel: Stokes photons herald the write steps, anti-Stokes
// photons are retrieved by the read pulses.
enum class Channel { stokes, anti_stokes };

// The four pulse slots of one protocol run: two write windows, two reads.
enum class Slot { w1, w2, read_a, read_b };

Channel channel_of(Slot slot);
const char* slot_name(Slot slot);
char pol_char(Pol pol);

struct PhotonRecord {
    Slot slot;
    Pol pol;

    Channel channel() const { return channel_of(slot); }
    auto operator<=>(const PhotonRecord&) const = default;
};

// One collective basis state: bosonic spin-wave occupation of the two
// storage sublevels |s, m=-1> and |s, m=+1>, counters for atoms returned to
// the ground sublevels (tracked for Zeeman phase bookkeeping only), and the
// photons emitted so far. Photons are kept ordered by slot.
struct BasisLabel {
    int n_s_minus = 0;
    int n_s_plus = 0;
    int n_g_plus = 0;
    int n_g_minus_ret = 0;
    std::vector<PhotonRecord> photons;

    auto operator<=>(const BasisLabel&) const = default;
    bool has_slot(Slot slot) const;
};

// Superposition over BasisLabels. Immutable-style: every protocol operation
// consumes a ket by const reference and returns a new one, so protocol runs
// can execute concurrently with no shared mutable state.
class CollectiveKet {
  public:
    using Terms = std::map<BasisLabel, std::complex<double>>;

    CollectiveKet() = default;

    // Coherently accumulates amplitude into the term with this label.
    void add_term(const BasisLabel& label, std::complex<double> amplitude);

    double norm_sq() const;
    double norm() const;
    // Returns the unit-norm version; throws std::runtime_error on a zero ket.
    CollectiveKet normalized() const;

    const Terms& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

  private:
    Terms terms_;
};

// Zeeman splittings of the storage (omega_m) and ground (omega_n) manifolds
// and the storage duration tau between the two read pulses.
struct ZeemanParams {
    double omega_m = 0.0;
    double omega_n = 0.0;
    double tau = 0.0;

    void validate() const;  // tau >= 0, all finite
};

// Shared immutable amplitude table for the default level scheme.
const AmplitudeTable& default_table();

// The vacuum collective state: all counts zero, no photons, amplitude 1.
CollectiveKet initial_state();

// Projective update upon detecting one Stokes photon of the given
// polarization in a write window: sigma+ adds one s- spin-wave excitation,
// sigma- adds one s+ excitation (bosonic sqrt(n+1) factor), appends the
// Stokes record, and renormalizes (the undetected branch is discarded).
CollectiveKet apply_write_herald(const CollectiveKet& state, Slot slot, Pol detected);

// One read pulse (sigma- polarized): for each term, branches over
// annihilating one s+ excitation (via |e, m=0>, emitting sigma+ towards
// g,m=-1 or sigma- towards g,m=+1) or one s- excitation (via |e, m=-2>,
// emitting sigma- towards g,m=-1). Amplitudes come from the table; spin-wave
// annihilation carries the bosonic sqrt(n) factor; returned-atom counters
// accrue Zeeman phases only. Coherently merges identical labels and does NOT
// renormalize (normalization is a separate explicit step).
CollectiveKet apply_read(const CollectiveKet& state, Slot slot,
                         const AmplitudeTable& table = default_table());

// Free phase evolution over tau: each term picks up
// exp(-i w_m tau)^(n_s_minus) * exp(+i w_m tau)^(n_s_plus)
// * exp(+i w_n tau)^(n_g_plus) * exp(-i w_n tau)^(n_g_minus_ret).
CollectiveKet zeeman_evolve(const CollectiveKet& state, const ZeemanParams& zp);

// Two-photon polarization density matrix over basis {++, +-, -+, --} for the
// photons in slots (a, b), tracing out all atomic labels (terms with
// different atomic content add incoherently). Requires every term to carry
// exactly one photon in each requested slot.
Eigen::Matrix4cd photonic_density_matrix(const CollectiveKet& state, Slot a = Slot::read_a,
                                         Slot b = Slot::read_b);

struct BellResult {
    double fidelity;  // max over phi of <Psi'(phi)| rho |Psi'(phi)>
    double phi_star;  // maximizing phi
};

// Best overlap with the rotated Bell family (|-+> + e^{i phi} |+->)/sqrt(2),
// in closed form: 1/2 (rho_{-+,-+} + rho_{+-,+-}) + |rho_{-+,+-}|.
// Rejects inputs whose trace deviates from 1 by more than 1e-8.
BellResult bell_fidelity(const Eigen::Matrix4cd& rho);

struct ProtocolResult {
    CollectiveKet final_state;  // normalized
    Eigen::Matrix4cd rho;
    double fidelity;
    double bell_phase;
    double weight_mm;  // population of |-- ><-- |
};

// Full protocol: vacuum -> two heralded writes -> read A -> Zeeman evolution
// over tau -> read B -> normalize -> density matrix -> Bell fidelity.
ProtocolResult run_protocol(const ZeemanParams& zp, std::pair<Pol, Pol> herald_pattern,
                            const AmplitudeTable& table = default_table());

// Deterministic text serialization, one line per term (counts, photon
// records, amplitude re/im), preceded by a schema header. Used for
// golden-file tests.
std::string to_text(const CollectiveKet& state);

}  // namespace bellsim
