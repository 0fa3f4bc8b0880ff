// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "ctele/cli.hpp"
#include "ctele/corrections.hpp"
#include "ctele/protocol.hpp"
#include "ctele/validation.hpp"
#include "support.hpp"

using namespace ctele;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome perfect_teleportation() {
    Rng rng(1001);
    double worst = 1.0, worst_sum = 0.0;
    std::size_t bad_count = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto branches = enumerate_all_branches(InputState::haar(rng), ProtocolLayout{});
        if (branches.size() != 32) ++bad_count;
        double total = 0.0;
        for (const auto& b : branches) {
            total += b.probability;
            worst = std::min(worst, b.fidelity);
        }
        worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
    return {bad_count == 0 && worst >= 1.0 - 1e-10 && worst_sum <= 1e-12,
            fmt::format("1000 inputs, min fidelity {:.15f}, max |sum p - 1| {:.1e}", worst, worst_sum)};
}

Outcome branch_uniformity() {
    Rng rng(1002);
    double worst = 0.0;
    std::size_t outcomes = 16;
    for (int i = 0; i < 100; ++i) {
        const auto evolved = two_cavity_step(prepare_initial_state(InputState::haar(rng), {}), {});
        const auto branches = branch_enumerate(evolved, ProtocolLayout{}.alice_atoms());
        outcomes = std::min(outcomes, branches.size());
        for (const auto& b : branches) worst = std::max(worst, std::abs(b.probability - 1.0 / 16));
    }
    return {outcomes == 16 && worst <= 1e-12, fmt::format("100 inputs, max |p - 1/16| {:.1e}", worst)};
}

Outcome alice_eeee_state() {
    Rng rng(1003);
    double worst = 1.0;
    for (int i = 0; i < 100; ++i) {
        const auto in = InputState::haar(rng);
        const auto run = run_teleportation(in, ProtocolLayout{}, rng, {"eeee", ""});
        Vector v = Vector::Zero(8); // atoms (4, 5, 7)
        v(0b001) = -in.a;
        v(0b000) = -in.b;
        v(0b111) = in.c;
        v(0b110) = in.d;
        worst = std::min(worst, fidelity(run.record.alice_conditional,
                                         StateVector(SubsystemLayout::atoms({"4", "5", "7"}), v)));
    }
    return {worst >= 1.0 - 1e-10, fmt::format("100 inputs, min fidelity {:.15f}", worst)};
}

Outcome controller_corrections() {
    Rng rng(1004);
    double worst = 1.0;
    bool rules_ok = true;
    for (int i = 0; i < 100; ++i) {
        const auto in = InputState::haar(rng);
        const auto target = testing::two_atom(in, "4", "7");
        const auto e = run_teleportation(in, ProtocolLayout{}, rng, {"eeee", "e"}).record;
        const auto g = run_teleportation(in, ProtocolLayout{}, rng, {"eeee", "g"}).record;
        rules_ok = rules_ok && e.correction.names() == "I,sx" && g.correction.names() == "sz,sx";
        worst = std::min({worst, fidelity(e.corrected_state, target), fidelity(g.corrected_state, target)});
    }
    return {rules_ok && worst >= 1.0 - 1e-10,
            fmt::format("(I,sx) and (sz,sx) applied, min fidelity {:.15f}", worst)};
}

Outcome table_verification() {
    const ProtocolLayout layout;
    try {
        const auto derived = derive_table(layout);
        const auto report = compare_tables(load_paper_table(), derived, layout);
        const std::size_t invalid = report.count(Classification::paper_rule_invalid);
        bool derived_perfect = true;
        if (invalid > 0) {
            Rng rng(1005);
            for (int i = 0; i < 1000 && derived_perfect; ++i) {
                for (const auto& b : enumerate_all_branches(InputState::haar(rng), layout, derived)) {
                    derived_perfect = derived_perfect && b.fidelity >= 1.0 - 1e-10;
                }
            }
        }
        return {derived.complete() && (invalid == 0 || derived_perfect),
                fmt::format("{} keys derived; identical {}, different-but-valid {}, paper-rule-invalid {}",
                            derived.size(), report.count(Classification::identical),
                            report.count(Classification::different_but_valid), invalid)};
    } catch (const DerivationError& e) {
        return {false, fmt::format("derivation failed: {}", e.what())};
    }
}

Outcome closed_form_equivalence() {
    Rng rng(1006);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const InteractionSchedule s{2 * std::numbers::pi * rng.uniform(), 2 * std::numbers::pi * rng.uniform()};
        const auto psi = testing::random_state({"1", "3"}, rng);
        const auto a = apply(psi, factorized_pair_propagator("1", "3", s));
        worst = std::max(worst, 1.0 - fidelity(a, effective_pair_map_closed_form(psi, s)));
    }
    return {worst < 1e-9, fmt::format("100 triples, max deficit {:.1e}", worst)};
}

Outcome effective_validity() {
    const std::vector<std::pair<double, double>> in_regime{{5, 5}, {10, 10}, {20, 20}};
    const auto sweep = effective_vs_full_sweep(in_regime);
    const auto control = full_model_deficit(kReferenceCoupling, 1, 1, 0);
    const auto& p = sweep.points;
    const bool monotone = p[1].deficit <= p[0].deficit + 1e-10 && p[2].deficit <= p[1].deficit + 1e-10;
    const bool control_ok = control.deficit >= 10 * p[1].deficit;
    return {monotone && control_ok,
            fmt::format("deficits (5,5) {:.3e}, (10,10) {:.3e}, (20,20) {:.3e}; (1,1) {:.3e}", p[0].deficit,
                        p[1].deficit, p[2].deficit, control.deficit)};
}

Outcome thermal_insensitivity() {
    const std::vector<std::size_t> levels{0, 1, 2};
    const auto t10 = thermal_insensitivity_sweep(levels, 10, 10);
    const auto t20 = thermal_insensitivity_sweep(levels, 20, 20);
    return {t20.spread < t10.spread && t10.effective_spread == 0.0 && t20.effective_spread == 0.0,
            fmt::format("spread (10,10) {:.3e} -> (20,20) {:.3e}; effective spread {} / {}", t10.spread, t20.spread,
                        t10.effective_spread, t20.effective_spread)};
}

Outcome feasibility() {
    auto params = PhysicalParams::from_ratios(kReferenceCoupling, 10, 10);
    params.t_radiative = kReferenceRadiativeTime;
    params.t_cavity = kReferenceCavityTime;
    const auto r = feasibility_check(params, {});
    const double t = r.interaction_time;
    const double tc5 = kReferenceCavityTime / kFeasibilityMargin, tr5 = kReferenceRadiativeTime / kFeasibilityMargin;
    return {t >= 0.5e-4 && t <= 2e-4 && t < tc5 && tc5 < tr5 && r.verdict,
            fmt::format("t = {:.4e} s, T_c/5 = {:.1e} s, T_r/5 = {:.1e} s", t, tc5, tr5)};
}

Outcome many_controllers() {
    std::string detail;
    bool pass = true;
    Rng rng(1010);
    for (std::size_t n : {2U, 3U}) {
        const ProtocolLayout layout{n};
        try {
            const auto table = derive_table(layout);
            double worst = 1.0;
            std::size_t count = 0;
            for (int i = 0; i < 5; ++i) {
                const auto branches = enumerate_all_branches(InputState::haar(rng), layout, table);
                count = branches.size();
                for (const auto& b : branches) worst = std::min(worst, b.fidelity);
            }
            const std::size_t keys = std::size_t{16} << n;
            pass = pass && table.complete() && count == keys && worst >= 1.0 - 1e-10;
            detail += fmt::format("{}n={}: {} keys, min fidelity {:.12f}", detail.empty() ? "" : "; ", n,
                                  table.size(), worst);
        } catch (const DerivationError& e) {
            pass = false;
            detail += fmt::format(" n={}: {}", n, e.what());
        }
    }
    return {pass, detail};
}

Outcome reproducibility() {
    const std::vector<std::string> args{"run", "--trials", "200", "--seed", "20260101", "--format", "json"};
    std::ostringstream a, b, err;
    const int ca = cli::run(args, a, err);
    const int cb = cli::run(args, b, err);
    const bool same = a.str() == b.str();
    return {ca == 0 && cb == 0 && same && !a.str().empty(),
            fmt::format("{} bytes, {}", a.str().size(), same ? "identical" : "different")};
}

} // namespace

int main() {
    const std::array<std::pair<const char*, std::function<Outcome()>>, 11> criteria{{
        {"perfect teleportation over all branches", perfect_teleportation},
        {"Alice outcomes equiprobable at 1/16", branch_uniformity},
        {"post-measurement state for Alice outcome eeee", alice_eeee_state},
        {"controller-conditioned corrections recover the input", controller_corrections},
        {"published correction table adjudicated", table_verification},
        {"closed form matches exponentiated propagator", closed_form_equivalence},
        {"effective model valid at large detuning", effective_validity},
        {"insensitivity to thermal photons", thermal_insensitivity},
        {"interaction time well inside lifetimes", feasibility},
        {"two and three controllers", many_controllers},
        {"run output byte-identical for a fixed seed", reproducibility},
    }};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        if (!o.pass) ++failures;
        std::printf("%s  %2zu  %s  (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
