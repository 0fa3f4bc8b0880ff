#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <utility>

#include "ctele/statevec.hpp"

namespace ctele {

/// g = 2 pi x 24 kHz, the Rydberg-atom coupling used throughout.
inline constexpr double kReferenceCoupling = 2.0 * std::numbers::pi * 24.0e3;
inline constexpr double kReferenceRadiativeTime = 3.0e-2;
inline constexpr double kReferenceCavityTime = 1.0e-3;

/// Hamiltonian constants in rad/s, optional lifetimes in s.
struct PhysicalParams {
    double g = kReferenceCoupling;
    double delta = 10.0 * kReferenceCoupling; // omega_0 - omega_a
    double omega_rabi = 100.0 * kReferenceCoupling;
    std::optional<double> t_radiative;
    std::optional<double> t_cavity;

    /// Effective flip rate g^2 / (2 delta).
    double lambda() const { return g * g / (2.0 * delta); }

    /// Throws ConfigError unless g >= 0, delta != 0 and omega_rabi >= 0.
    void validate() const;

    /// delta = delta_ratio * g, omega_rabi = omega_ratio * delta.
    static PhysicalParams from_ratios(double g, double delta_ratio, double omega_ratio);
};

/// Dimensionless pulse areas of one cavity interaction.
struct InteractionSchedule {
    double lambda_t = std::numbers::pi / 4.0;
    double omega_t = std::numbers::pi;

    void validate() const;
};

/// Truncation of the cavity mode at fock_cutoff photons.
struct FockConfig {
    std::size_t fock_cutoff = 8;
    std::size_t initial_fock = 0;

    void validate() const;
};

/// Sign of the photon-number term in the frame rotating at the drive
/// frequency. kCalibratedFrameSign is the one that reproduces the
/// effective model at large detuning (see validation::calibrate_frame_sign).
enum class FrameSign { minus_delta, plus_delta };
inline constexpr FrameSign kCalibratedFrameSign = FrameSign::minus_delta;

namespace ops {
Matrix sigma_plus();  // |e><g|
Matrix sigma_minus(); // |g><e|
Matrix sigma_z_half(); // (|e><e| - |g><g|) / 2
Matrix annihilation(std::size_t fock_cutoff);
} // namespace ops

/// Closed-form two-atom evolution under the driven effective model,
/// written as the four explicit basis-state maps
///
///   |xy> -> e^{-i lt} [ cos(lt) R|x> R|y>  -  i sin(lt) R|x'> R|y'> ]
///
/// with R|g> = cos(wt)|g> - i sin(wt)|e>, R|e> = cos(wt)|e> - i sin(wt)|g>,
/// and x' the flipped level of x.
LocalOperator effective_pair_operator(const Label& j, const Label& k, const InteractionSchedule& sched);

/// Applies effective_pair_operator to a state of exactly two atoms.
StateVector effective_pair_map_closed_form(const StateVector& state2, const InteractionSchedule& sched);

/// Effective atom-only Hamiltonian on atoms (j, k), in rad/s.
///
/// lambda * I + (lambda/2) [sum_{j!=k} (S_j^+ S_k^+ + S_j^+ S_k^-) + H.c.]
///
/// The constant term is not doubled by the Hermitian conjugate; with that
/// choice exp(-i H0 t) exp(-i He t) reproduces the closed-form maps
/// including their e^{-i lambda t} prefactor.
LocalOperator effective_hamiltonian(const Label& j, const Label& k, double lambda);

/// Omega * sum_j (S_j^+ + S_j^-) on atoms (j, k).
LocalOperator drive_hamiltonian(const Label& j, const Label& k, double omega);

/// exp(-i H t) by Hermitian eigendecomposition. Throws HermiticityError.
LocalOperator propagator(const LocalOperator& hamiltonian, double t);

/// exp(-i H0 t) exp(-i He t) for the given rates and time.
LocalOperator factorized_pair_propagator(const Label& j, const Label& k, double lambda, double omega,
                                         double t);
/// Same with unit time and the pulse areas as rates.
LocalOperator factorized_pair_propagator(const Label& j, const Label& k, const InteractionSchedule& sched);

/// Time-independent rotating-frame Hamiltonian of two driven atoms in one
/// cavity, ordered (j, k, cavity):
///
///   -/+ delta a^dag a + g sum_j (a^dag S_j^- + a S_j^+) + Omega sum_j (S_j^+ + S_j^-)
LocalOperator full_model_hamiltonian(const Label& j, const Label& k, const Label& cavity,
                                     std::size_t fock_cutoff, const PhysicalParams& params,
                                     FrameSign sign = kCalibratedFrameSign);

struct FullModelResult {
    StateVector state;
    double top_fock_population = 0.0;
    bool truncation_warning = false; // top_fock_population > 1e-6
};

/// Evolves `initial` for time t (s) under full_model_hamiltonian. The
/// cavity subsystem's dimension sets the cutoff.
FullModelResult full_model_map(const Label& j, const Label& k, const Label& cavity,
                               const PhysicalParams& params, double t, const StateVector& initial,
                               FrameSign sign = kCalibratedFrameSign);

/// Cavity mode in Fock state fock.initial_fock, truncated at fock.fock_cutoff.
StateVector fock_state(const Label& cavity, const FockConfig& fock);

using AtomPair = std::pair<Label, Label>;
inline const std::array<AtomPair, 2> kDefaultCavityPairs{AtomPair{"1", "3"}, AtomPair{"2", "6"}};

/// Both cavity interactions applied with the closed-form map; other atoms
/// untouched.
StateVector two_cavity_step(const StateVector& state, const InteractionSchedule& sched,
                            const std::array<AtomPair, 2>& pairs = kDefaultCavityPairs);

} // namespace ctele
