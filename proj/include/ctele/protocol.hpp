#pragma once

/**
 * @file
 * Controlled teleportation of a two-atom state through a GHZ channel and an
 * EPR channel, with separate (product-basis) measurements replacing the
 * Bell measurement.
 *
 * Atom roles for n controllers:
 *   1, 2          the unknown input state (Alice)
 *   3, 4, 5..4+n  GHZ channel: Alice's atom 3, Bob's atom 4, controllers
 *   5+n, 6+n      EPR channel: Alice's atom, Bob's atom
 * With one controller this is atoms 1..7 and the EPR pair is (6, 7).
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctele/corrections.hpp"
#include "ctele/dynamics.hpp"
#include "ctele/statevec.hpp"

namespace ctele {

/// Coefficients of a|gg> + b|ge> + c|eg> + d|ee>.
struct InputState {
    Complex a{1.0, 0.0};
    Complex b{};
    Complex c{};
    Complex d{};

    /// Throws NormError unless |a|^2 + ... + |d|^2 = 1 within 1e-12.
    void validate() const;
    Vector amplitudes() const;
    /// Haar-random (normalized complex Gaussian) coefficients.
    static InputState haar(Rng& rng);
};

struct ProtocolLayout {
    std::size_t controllers = 1;
    InteractionSchedule schedule{};

    void validate() const;

    Label alice_ghz_atom() const { return atom_label(3); }
    Label bob_ghz_atom() const { return atom_label(4); }
    Label controller_atom(std::size_t i) const { return atom_label(5 + static_cast<int>(i)); }
    Label alice_epr_atom() const { return atom_label(5 + static_cast<int>(controllers)); }
    Label bob_epr_atom() const { return atom_label(6 + static_cast<int>(controllers)); }

    std::vector<Label> ghz_atoms() const;
    std::vector<Label> controller_atoms() const;
    /// Measurement order of Alice's atoms: (1, 3, 2, alice_epr).
    std::vector<Label> alice_atoms() const;
    std::vector<Label> bob_atoms() const { return {bob_ghz_atom(), bob_epr_atom()}; }
    std::array<AtomPair, 2> cavity_pairs() const;
};

enum class Role { alice, controller, bob };

struct ClassicalMessage {
    Role sender = Role::alice;
    std::size_t sender_index = 0; // controller number for Role::controller
    std::string payload;          // g/e outcome string
    std::size_t order = 0;
};

/// Test hook pinning measurement outcomes; empty fields are sampled.
struct ForcedOutcome {
    std::string alice;
    std::string controllers;
};

struct BranchRecord {
    std::string alice_outcome;
    std::string controller_outcomes;
    double probability = 0.0;
    StateVector alice_conditional;  // atoms (4, controllers..., bob EPR) after Alice's measurement
    StateVector conditional_state;  // Bob's atoms before correction
    CorrectionRule correction;
    StateVector corrected_state;
    double fidelity = 0.0;

    CorrectionKey key() const { return {alice_outcome, controller_outcomes}; }
};

struct TeleportationRun {
    BranchRecord record;
    std::vector<ClassicalMessage> messages;
};

StateVector prepare_input(const InputState& input, const Label& first = "1", const Label& second = "2");
/// (|g...g> + i|e...e>) / sqrt(2). Throws LayoutError for fewer than 3 atoms.
StateVector prepare_ghz_channel(const std::vector<Label>& atoms);
/// (|ge> - i|eg>) / sqrt(2).
StateVector prepare_epr_channel(const Label& first = "6", const Label& second = "7");

/// Input state tensored with both channels, atoms in label order.
StateVector prepare_initial_state(const InputState& input, const ProtocolLayout& layout);
/// The input coefficients placed on Bob's atoms (4 <- 1, bob_epr <- 2).
StateVector teleportation_target(const InputState& input, const ProtocolLayout& layout);

LocalOperator hadamard(const Label& atom);

/// Hadamard on the controller, then both measurement sub-branches. Branch
/// states are conditioned: the controller is removed from the layout.
std::array<Branch, 2> charlie_step(const StateVector& state, const Label& controller);

/// Bob's correction as a function of the classical log alone.
StateVector correct_from_messages(const std::vector<ClassicalMessage>& messages, const StateVector& bob_state,
                                  const CorrectionTable& table);

/// Published table for one controller, derived table otherwise. Cached.
const CorrectionTable& default_table(const ProtocolLayout& layout);

TeleportationRun run_teleportation(const InputState& input, const ProtocolLayout& layout, Rng& rng,
                                   const ForcedOutcome& forced, const CorrectionTable& table);
TeleportationRun run_teleportation(const InputState& input, const ProtocolLayout& layout, Rng& rng,
                                   const ForcedOutcome& forced = {});

/// Branch before Bob acts.
struct PreCorrectionBranch {
    std::string alice_outcome;
    std::string controller_outcomes;
    double probability = 0.0;
    StateVector alice_conditional;
    StateVector bob_state;

    CorrectionKey key() const { return {alice_outcome, controller_outcomes}; }
};

/// Every (Alice, controllers) branch, sorted by key. Deterministic.
std::vector<PreCorrectionBranch> enumerate_precorrection(const InputState& input, const ProtocolLayout& layout);

std::vector<BranchRecord> enumerate_all_branches(const InputState& input, const ProtocolLayout& layout,
                                                 const CorrectionTable& table);
std::vector<BranchRecord> enumerate_all_branches(const InputState& input, const ProtocolLayout& layout);

} // namespace ctele
