#include "ctele/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

namespace ctele {

namespace {

struct Term {
    Complex factor;
    int coefficient; // 0..3 -> a..d
    const char* ket; // atoms (4, 5, 7)
};

const Complex kI{0.0, 1.0};
const Complex kOne{1.0, 0.0};

// Published conditional kets of atoms (4, 5, 7), keyed by Alice's outcome
// over (1, 3, 2, 6). Transcribed term by term.
const std::map<std::string, std::vector<Term>>& printed_kets() {
    static const std::map<std::string, std::vector<Term>> kets{
        {"eeee", {{-kOne, 0, "gge"}, {-kOne, 1, "ggg"}, {kOne, 2, "eee"}, {kOne, 3, "eeg"}}},
        {"eegg", {{-kI, 0, "gge"}, {kI, 1, "ggg"}, {kI, 2, "eee"}, {-kI, 3, "eeg"}}},
        {"ggee", {{-kI, 0, "gge"}, {-kI, 1, "ggg"}, {-kI, 2, "eee"}, {-kI, 3, "eeg"}}},
        {"gggg", {{kOne, 0, "gge"}, {-kOne, 1, "ggg"}, {kOne, 2, "eee"}, {-kOne, 3, "eeg"}}},
        {"egeg", {{-kOne, 0, "eeg"}, {kOne, 1, "eee"}, {-kOne, 2, "ggg"}, {kOne, 3, "gge"}}},
        {"egge", {{-kI, 0, "eeg"}, {-kI, 1, "eee"}, {-kI, 2, "ggg"}, {-kI, 3, "gge"}}},
        {"geeg", {{-kI, 0, "eeg"}, {kI, 1, "eee"}, {-kI, 2, "ggg"}, {kI, 3, "gge"}}},
        {"gege", {{kOne, 0, "eeg"}, {kOne, 1, "eee"}, {-kOne, 2, "ggg"}, {-kOne, 3, "gge"}}},
        {"eeeg", {{kI, 0, "ggg"}, {-kI, 1, "gge"}, {-kI, 2, "eeg"}, {kI, 3, "eee"}}},
        {"eege", {{-kOne, 0, "ggg"}, {-kOne, 1, "gge"}, {kOne, 2, "eeg"}, {kOne, 3, "eee"}}},
        {"ggeg", {{-kOne, 0, "ggg"}, {kOne, 1, "gge"}, {-kOne, 2, "eeg"}, {kOne, 3, "eee"}}},
        {"ggge", {{-kI, 0, "ggg"}, {-kI, 1, "gge"}, {-kI, 2, "eeg"}, {-kI, 3, "eee"}}},
        {"egee", {{-kI, 0, "eee"}, {-kI, 1, "eeg"}, {-kI, 2, "gge"}, {-kI, 3, "ggg"}}},
        {"eggg", {{kOne, 0, "eee"}, {-kOne, 1, "eeg"}, {kOne, 2, "gge"}, {-kOne, 3, "ggg"}}},
        {"geee", {{kOne, 0, "eee"}, {kOne, 1, "eeg"}, {-kOne, 2, "gge"}, {-kOne, 3, "ggg"}}},
        {"gegg", {{kI, 0, "eee"}, {-kI, 1, "eeg"}, {-kI, 2, "gge"}, {kI, 3, "ggg"}}},
    };
    return kets;
}

std::vector<Label> atoms_457() { return {atom_label(4), atom_label(5), atom_label(7)}; }

void check_ratios(double delta_ratio, double omega_ratio) {
    if (!(delta_ratio > 0.0) || !(omega_ratio > 0.0)) throw ConfigError("sweep ratios must be positive");
}

// Runs the two-cavity full model once at a fixed cutoff.
struct FullRun {
    double deficit;
    bool truncation_warning;
};

FullRun full_model_run(const PhysicalParams& params, std::size_t fock_level, std::size_t cutoff,
                       const SweepOptions& opts) {
    const ProtocolLayout layout;
    const double t = opts.lambda_t / params.lambda();
    const StateVector atoms = prepare_initial_state(opts.input, layout);
    const InteractionSchedule sched{opts.lambda_t, params.omega_rabi * t};
    const StateVector reference = two_cavity_step(atoms, sched, layout.cavity_pairs());

    const FockConfig fock{cutoff, fock_level};
    StateVector state = tensor({atoms, fock_state("cavity_a", fock), fock_state("cavity_b", fock)});
    const auto pairs = layout.cavity_pairs();
    bool warn = false;
    const std::array<Label, 2> cavities{"cavity_a", "cavity_b"};
    for (std::size_t i = 0; i < 2; ++i) {
        auto r = full_model_map(pairs[i].first, pairs[i].second, cavities[i], params, t, state, opts.sign);
        warn = warn || r.truncation_warning;
        state = std::move(r.state);
    }
    const auto keep = atoms.layout().labels();
    const double f = reduced_fidelity(partial_trace(state, keep), reference);
    return {1.0 - f, warn};
}

} // namespace

// --- printed branch states -------------------------------------------------

StateVector printed_branch_state(const std::string& alice_outcome, const InputState& input) {
    const auto& kets = printed_kets();
    auto it = kets.find(alice_outcome);
    if (it == kets.end()) throw LayoutError(fmt::format("no printed branch for outcome '{}'", alice_outcome));
    const std::array<Complex, 4> coeff{input.a, input.b, input.c, input.d};
    const auto labels = atoms_457();
    Vector amps = Vector::Zero(8);
    for (const auto& term : it->second) {
        amps += term.factor * coeff[static_cast<std::size_t>(term.coefficient)] *
                StateVector::atoms(labels, term.ket).amplitudes();
    }
    return StateVector(SubsystemLayout::atoms(labels), amps).normalized();
}

std::vector<std::string> PrintedBranchReport::disagreeing() const {
    std::vector<std::string> out;
    for (const auto& b : branches) {
        if (!b.agrees) out.push_back(b.alice_outcome);
    }
    return out;
}

PrintedBranchReport check_printed_branches(const InputState& input) {
    const ProtocolLayout layout;
    const StateVector interacted =
        two_cavity_step(prepare_initial_state(input, layout), layout.schedule, layout.cavity_pairs());
    const auto targets = layout.alice_atoms();
    PrintedBranchReport report;
    for (const auto& b : branch_enumerate(interacted, targets, 0.0)) {
        StateVector numeric = condition(interacted, targets, b.outcome);
        StateVector printed = printed_branch_state(b.outcome, input);
        const double f = fidelity(numeric, printed);
        report.branches.push_back({b.outcome, b.probability, f, f >= 1.0 - 1e-10, std::move(numeric),
                                   std::move(printed)});
    }
    std::sort(report.branches.begin(), report.branches.end(),
              [](const auto& x, const auto& y) { return x.alice_outcome < y.alice_outcome; });
    return report;
}

// --- Monte Carlo -----------------------------------------------------------

SuccessSummary success_statistics(std::size_t trials, std::uint64_t seed, const ProtocolLayout& layout) {
    if (trials < 1) throw ConfigError("at least one trial is required");
    const CorrectionTable& table = default_table(layout);
    SuccessSummary s;
    s.trials = trials;
    for (const char* o : {"gggg", "ggge", "ggeg", "ggee", "gegg", "gege", "geeg", "geee", "eggg", "egge",
                          "egeg", "egee", "eegg", "eege", "eeeg", "eeee"}) {
        s.alice_histogram[o] = 0;
    }
    Rng rng(seed);
    double total = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        const InputState input = InputState::haar(rng);
        const auto run = run_teleportation(input, layout, rng, {}, table);
        total += run.record.fidelity;
        s.min_fidelity = std::min(s.min_fidelity, run.record.fidelity);
        ++s.alice_histogram[run.record.alice_outcome];
    }
    s.mean_fidelity = total / static_cast<double>(trials);

    const double expected = static_cast<double>(trials) / 16.0;
    for (const auto& [outcome, count] : s.alice_histogram) {
        const double diff = static_cast<double>(count) - expected;
        s.chi_square += diff * diff / expected;
    }
    const boost::math::chi_squared dist(15.0);
    s.p_value = boost::math::cdf(boost::math::complement(dist, s.chi_square));
    return s;
}

// --- full vs effective -----------------------------------------------------

InputState SweepOptions::reference_sweep_input() {
    const std::array<Complex, 4> raw{Complex{0.6, 0.1}, Complex{-0.3, 0.5}, Complex{0.2, -0.4}, Complex{0.35, 0.25}};
    double n = 0.0;
    for (const auto& z : raw) n += std::norm(z);
    const double s = 1.0 / std::sqrt(n);
    return {raw[0] * s, raw[1] * s, raw[2] * s, raw[3] * s};
}

SweepPoint full_model_deficit(double g, double delta_ratio, double omega_ratio, std::size_t fock_level,
                              const SweepOptions& opts) {
    check_ratios(delta_ratio, omega_ratio);
    const auto params = PhysicalParams::from_ratios(g, delta_ratio, omega_ratio);
    const auto start = std::chrono::steady_clock::now();

    std::size_t cutoff = std::max(opts.fock.fock_cutoff, fock_level);
    FullRun current = full_model_run(params, fock_level, cutoff, opts);
    bool converged = false;
    while (cutoff + 2 <= opts.max_fock_cutoff) {
        const FullRun raised = full_model_run(params, fock_level, cutoff + 2, opts);
        if (std::abs(raised.deficit - current.deficit) < opts.convergence_tolerance) {
            converged = true;
            break;
        }
        cutoff += 2;
        current = raised;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return {delta_ratio, omega_ratio,         current.deficit, cutoff, converged, current.truncation_warning,
            elapsed.count()};
}

SweepResult effective_vs_full_sweep(std::span<const std::pair<double, double>> ratios, double g,
                                    const SweepOptions& opts) {
    if (ratios.empty()) throw ConfigError("sweep needs at least one ratio point");
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        check_ratios(ratios[i].first, ratios[i].second);
        if (i > 0 && !(ratios[i].first > ratios[i - 1].first)) {
            throw ConfigError("detuning ratios must be strictly increasing");
        }
    }
    SweepResult result;
    for (const auto& [dr, wr] : ratios) result.points.push_back(full_model_deficit(g, dr, wr, opts.fock.initial_fock, opts));
    return result;
}

ThermalResult thermal_insensitivity_sweep(std::span<const std::size_t> fock_levels, double delta_ratio,
                                          double omega_ratio, double g, const SweepOptions& opts) {
    if (fock_levels.empty()) throw ConfigError("thermal sweep needs at least one Fock level");
    check_ratios(delta_ratio, omega_ratio);
    for (std::size_t n : fock_levels) {
        if (n + 2 > opts.fock.fock_cutoff) {
            throw ConfigError(fmt::format("Fock level {} needs a cutoff of at least {}", n, n + 2));
        }
    }

    ThermalResult result;
    result.delta_ratio = delta_ratio;
    result.omega_ratio = omega_ratio;

    // Effective path with each cavity parked in |n>: the atomic output must
    // not depend on n at all.
    const ProtocolLayout layout;
    const auto params = PhysicalParams::from_ratios(g, delta_ratio, omega_ratio);
    const double t = opts.lambda_t / params.lambda();
    const InteractionSchedule sched{opts.lambda_t, params.omega_rabi * t};
    const StateVector atoms = prepare_initial_state(opts.input, layout);
    const std::array<Label, 2> cavities{"cavity_a", "cavity_b"};
    std::optional<Vector> first_effective;

    double lo = 1.0;
    double hi = 0.0;
    for (std::size_t n : fock_levels) {
        const SweepPoint p = full_model_deficit(g, delta_ratio, omega_ratio, n, opts);
        result.points.push_back({n, p.deficit, p.fock_cutoff, p.converged, p.truncation_warning});
        lo = std::min(lo, p.deficit);
        hi = std::max(hi, p.deficit);

        const FockConfig fock{opts.fock.fock_cutoff, n};
        const StateVector with_cavities = tensor({atoms, fock_state(cavities[0], fock), fock_state(cavities[1], fock)});
        const StateVector evolved = two_cavity_step(with_cavities, sched, layout.cavity_pairs());
        // Cavities stay in |n>, so the atomic factor is read off directly.
        Vector atomic(static_cast<Eigen::Index>(atoms.layout().total_dim()));
        const std::size_t stride = (opts.fock.fock_cutoff + 1) * (opts.fock.fock_cutoff + 1);
        const std::size_t offset = n * (opts.fock.fock_cutoff + 1) + n;
        for (Eigen::Index i = 0; i < atomic.size(); ++i) {
            atomic(i) = evolved.amplitudes()(static_cast<Eigen::Index>(static_cast<std::size_t>(i) * stride + offset));
        }
        if (!first_effective) {
            first_effective = atomic;
        } else {
            result.effective_spread = std::max(result.effective_spread, (atomic - *first_effective).cwiseAbs().maxCoeff());
        }
    }
    result.spread = hi - lo;
    return result;
}

FrameCalibration calibrate_frame_sign(double delta_ratio, double omega_ratio) {
    check_ratios(delta_ratio, omega_ratio);
    const auto params = PhysicalParams::from_ratios(kReferenceCoupling, delta_ratio, omega_ratio);
    const double t = (std::numbers::pi / 4.0) / params.lambda();
    const InteractionSchedule sched{std::numbers::pi / 4.0, params.omega_rabi * t};
    const FockConfig fock{};
    const StateVector atoms = StateVector::atoms({"j", "k"}, "gg");
    const StateVector reference = effective_pair_map_closed_form(atoms, sched);
    const StateVector initial = tensor({atoms, fock_state("c", fock)});
    const std::array<Label, 2> keep{"j", "k"};

    FrameCalibration cal;
    for (FrameSign sign : {FrameSign::minus_delta, FrameSign::plus_delta}) {
        const auto r = full_model_map("j", "k", "c", params, t, initial, sign);
        const double deficit = 1.0 - reduced_fidelity(partial_trace(r.state, keep), reference);
        (sign == FrameSign::minus_delta ? cal.deficit_minus : cal.deficit_plus) = deficit;
    }
    cal.best = cal.deficit_minus <= cal.deficit_plus ? FrameSign::minus_delta : FrameSign::plus_delta;
    return cal;
}

// --- timing ----------------------------------------------------------------

FeasibilityReport feasibility_check(const PhysicalParams& params, const InteractionSchedule& sched) {
    params.validate();
    sched.validate();
    if (!params.t_radiative || !params.t_cavity) {
        throw ConfigError("feasibility check needs both the radiative and the cavity lifetime");
    }
    if (!(params.lambda() > 0.0)) throw ConfigError("feasibility check needs g > 0 and delta > 0");
    FeasibilityReport r;
    r.interaction_time = sched.lambda_t / params.lambda();
    r.ratio_radiative = r.interaction_time / *params.t_radiative;
    r.ratio_cavity = r.interaction_time / *params.t_cavity;
    r.verdict = r.interaction_time < *params.t_cavity / kFeasibilityMargin &&
                r.interaction_time < *params.t_radiative / kFeasibilityMargin;
    return r;
}

} // namespace ctele
