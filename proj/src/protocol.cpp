#include "ctele/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>

#include <fmt/format.h>

namespace ctele {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

const Complex kI{0.0, 1.0};

// Alice's g/e measurement, sampled or forced.
Branch alice_measurement(const StateVector& state, const ProtocolLayout& layout, Rng& rng,
                         const std::string& forced) {
    const auto targets = layout.alice_atoms();
    if (forced.empty()) return measure(state, targets, rng);
    for (auto& b : branch_enumerate(state, targets, 0.0)) {
        if (b.outcome == forced) return std::move(b);
    }
    throw NormError(fmt::format("forced Alice outcome \"{}\" has zero probability", forced));
}

} // namespace

void InputState::validate() const {
    const double n = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-12) {
        throw NormError(fmt::format("input coefficients have squared norm {:.15g}", n));
    }
}

Vector InputState::amplitudes() const {
    Vector v(4);
    v << a, b, c, d;
    return v;
}

InputState InputState::haar(Rng& rng) {
    std::array<Complex, 4> z;
    double norm2 = 0.0;
    for (auto& x : z) {
        const double re = rng.normal();
        const double im = rng.normal();
        x = {re, im};
        norm2 += re * re + im * im;
    }
    const double s = 1.0 / std::sqrt(norm2);
    return {z[0] * s, z[1] * s, z[2] * s, z[3] * s};
}

void ProtocolLayout::validate() const {
    if (controllers < 1) throw ConfigError("at least one controller is required");
    schedule.validate();
}

std::vector<Label> ProtocolLayout::ghz_atoms() const {
    std::vector<Label> out{alice_ghz_atom(), bob_ghz_atom()};
    for (std::size_t i = 0; i < controllers; ++i) out.push_back(controller_atom(i));
    return out;
}

std::vector<Label> ProtocolLayout::controller_atoms() const {
    std::vector<Label> out;
    for (std::size_t i = 0; i < controllers; ++i) out.push_back(controller_atom(i));
    return out;
}

std::vector<Label> ProtocolLayout::alice_atoms() const {
    return {atom_label(1), alice_ghz_atom(), atom_label(2), alice_epr_atom()};
}

std::array<AtomPair, 2> ProtocolLayout::cavity_pairs() const {
    return {AtomPair{atom_label(1), alice_ghz_atom()}, AtomPair{atom_label(2), alice_epr_atom()}};
}

StateVector prepare_input(const InputState& input, const Label& first, const Label& second) {
    input.validate();
    return StateVector(SubsystemLayout::atoms({first, second}), input.amplitudes());
}

StateVector prepare_ghz_channel(const std::vector<Label>& atoms) {
    if (atoms.size() < 3) throw LayoutError("GHZ channel needs at least three atoms");
    auto layout = SubsystemLayout::atoms(atoms);
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    amps(0) = kInvSqrt2;
    amps(amps.size() - 1) = kI * kInvSqrt2;
    return StateVector(std::move(layout), std::move(amps));
}

StateVector prepare_epr_channel(const Label& first, const Label& second) {
    auto layout = SubsystemLayout::atoms({first, second});
    Vector amps = Vector::Zero(4);
    amps(1) = kInvSqrt2;        // |ge>
    amps(2) = -kI * kInvSqrt2;  // |eg>
    return StateVector(std::move(layout), std::move(amps));
}

StateVector prepare_initial_state(const InputState& input, const ProtocolLayout& layout) {
    layout.validate();
    return tensor({prepare_input(input), prepare_ghz_channel(layout.ghz_atoms()),
                   prepare_epr_channel(layout.alice_epr_atom(), layout.bob_epr_atom())});
}

StateVector teleportation_target(const InputState& input, const ProtocolLayout& layout) {
    return prepare_input(input, layout.bob_ghz_atom(), layout.bob_epr_atom());
}

LocalOperator hadamard(const Label& atom) {
    Matrix h(2, 2);
    h << 1.0, 1.0, 1.0, -1.0;
    return LocalOperator::unitary({atom}, h * kInvSqrt2);
}

std::array<Branch, 2> charlie_step(const StateVector& state, const Label& controller) {
    const StateVector rotated = apply(state, hadamard(controller));
    const std::array<Label, 1> target{controller};
    std::array<Branch, 2> out{Branch{"g", 0.0, rotated}, Branch{"e", 0.0, rotated}};
    for (auto& b : branch_enumerate(rotated, target, 0.0)) {
        auto& slot = b.outcome == "g" ? out[0] : out[1];
        slot.probability = b.probability;
        slot.state = condition(rotated, target, b.outcome);
    }
    return out;
}

StateVector correct_from_messages(const std::vector<ClassicalMessage>& messages, const StateVector& bob_state,
                                  const CorrectionTable& table) {
    auto ordered = messages;
    std::sort(ordered.begin(), ordered.end(),
              [](const ClassicalMessage& x, const ClassicalMessage& y) { return x.order < y.order; });
    CorrectionKey key;
    for (const auto& m : ordered) {
        if (m.sender == Role::alice) {
            key.alice = m.payload;
        } else if (m.sender == Role::controller) {
            key.controllers += m.payload;
        }
    }
    return apply_correction(bob_state, table.lookup(key));
}

const CorrectionTable& default_table(const ProtocolLayout& layout) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<CorrectionTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[layout.controllers];
    if (!slot) {
        ProtocolLayout canonical;
        canonical.controllers = layout.controllers;
        slot = std::make_unique<CorrectionTable>(layout.controllers == 1 ? load_paper_table()
                                                                         : derive_table(canonical));
    }
    return *slot;
}

TeleportationRun run_teleportation(const InputState& input, const ProtocolLayout& layout, Rng& rng,
                                   const ForcedOutcome& forced, const CorrectionTable& table) {
    layout.validate();
    const auto is_ge = [](const std::string& s) { return s.find_first_not_of("ge") == std::string::npos; };
    if (!forced.alice.empty() && (forced.alice.size() != 4 || !is_ge(forced.alice))) {
        throw ConfigError(fmt::format("forced Alice outcome \"{}\" must be four g/e characters", forced.alice));
    }
    if (!forced.controllers.empty() && (forced.controllers.size() != layout.controllers || !is_ge(forced.controllers))) {
        throw ConfigError("forced controller outcomes must list every controller");
    }
    const StateVector interacted =
        two_cavity_step(prepare_initial_state(input, layout), layout.schedule, layout.cavity_pairs());

    std::vector<ClassicalMessage> log;
    const Branch alice = alice_measurement(interacted, layout, rng, forced.alice);
    const auto alice_targets = layout.alice_atoms();
    StateVector remaining = condition(interacted, alice_targets, alice.outcome);
    const StateVector alice_conditional = remaining;
    log.push_back({Role::alice, 0, alice.outcome, log.size()});
    double probability = alice.probability;

    std::string controller_outcomes;
    for (std::size_t i = 0; i < layout.controllers; ++i) {
        auto sub = charlie_step(remaining, layout.controller_atom(i));
        std::size_t pick;
        if (!forced.controllers.empty()) {
            pick = forced.controllers[i] == 'g' ? 0 : 1;
        } else {
            pick = rng.uniform() < sub[0].probability ? 0 : 1;
        }
        if (sub[pick].probability <= 0.0) throw NormError("forced controller outcome has zero probability");
        probability *= sub[pick].probability;
        controller_outcomes += sub[pick].outcome;
        log.push_back({Role::controller, i, sub[pick].outcome, log.size()});
        remaining = std::move(sub[pick].state);
    }

    const CorrectionKey key{alice.outcome, controller_outcomes};
    const CorrectionRule& rule = table.lookup(key);
    StateVector corrected = correct_from_messages(log, remaining, table);
    const double f = fidelity(corrected, teleportation_target(input, layout));
    BranchRecord record{alice.outcome, controller_outcomes, probability, alice_conditional,
                        remaining,     rule,                std::move(corrected), f};
    return {std::move(record), std::move(log)};
}

TeleportationRun run_teleportation(const InputState& input, const ProtocolLayout& layout, Rng& rng,
                                   const ForcedOutcome& forced) {
    return run_teleportation(input, layout, rng, forced, default_table(layout));
}

std::vector<PreCorrectionBranch> enumerate_precorrection(const InputState& input, const ProtocolLayout& layout) {
    layout.validate();
    const StateVector interacted =
        two_cavity_step(prepare_initial_state(input, layout), layout.schedule, layout.cavity_pairs());
    const auto alice_targets = layout.alice_atoms();

    std::vector<PreCorrectionBranch> out;
    for (const auto& alice : branch_enumerate(interacted, alice_targets)) {
        const StateVector alice_conditional = condition(interacted, alice_targets, alice.outcome);

        // Depth-first over the controllers, g before e.
        std::function<void(std::size_t, const StateVector&, std::string, double)> descend =
            [&](std::size_t i, const StateVector& state, std::string outcomes, double p) {
                if (i == layout.controllers) {
                    out.push_back({alice.outcome, std::move(outcomes), p, alice_conditional, state});
                    return;
                }
                for (const auto& sub : charlie_step(state, layout.controller_atom(i))) {
                    if (sub.probability <= kDefaultProbFloor) continue;
                    descend(i + 1, sub.state, outcomes + sub.outcome, p * sub.probability);
                }
            };
        descend(0, alice_conditional, "", alice.probability);
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.key() < y.key(); });
    return out;
}

std::vector<BranchRecord> enumerate_all_branches(const InputState& input, const ProtocolLayout& layout,
                                                 const CorrectionTable& table) {
    const StateVector target = teleportation_target(input, layout);
    std::vector<BranchRecord> out;
    for (auto& b : enumerate_precorrection(input, layout)) {
        const CorrectionRule& rule = table.lookup(b.key());
        StateVector corrected = apply_correction(b.bob_state, rule);
        const double f = fidelity(corrected, target);
        out.push_back({std::move(b.alice_outcome), std::move(b.controller_outcomes), b.probability,
                       std::move(b.alice_conditional), std::move(b.bob_state), rule, std::move(corrected), f});
    }
    return out;
}

std::vector<BranchRecord> enumerate_all_branches(const InputState& input, const ProtocolLayout& layout) {
    return enumerate_all_branches(input, layout, default_table(layout));
}

} // namespace ctele
