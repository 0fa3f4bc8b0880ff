#include <numbers>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctele/cli.hpp"
#include "ctele/corrections.hpp"
#include "ctele/protocol.hpp"
#include "ctele/validation.hpp"

namespace py = pybind11;
using namespace ctele;

namespace {

InputState make_input(const std::vector<Complex>& c) {
    if (c.size() != 4) throw ConfigError("input needs exactly four coefficients (a, b, c, d)");
    InputState in{c[0], c[1], c[2], c[3]};
    in.validate();
    return in;
}

ProtocolLayout make_layout(std::size_t controllers, double lambda_t, double omega_t) {
    ProtocolLayout layout{controllers, {lambda_t, omega_t}};
    layout.validate();
    return layout;
}

py::dict record_dict(const BranchRecord& r) {
    py::dict d;
    d["alice"] = r.alice_outcome;
    d["controllers"] = r.controller_outcomes;
    d["probability"] = r.probability;
    d["correction"] = r.correction.names();
    d["fidelity"] = r.fidelity;
    d["corrected_state"] = r.corrected_state.amplitudes();
    return d;
}

py::dict table_dict(const CorrectionTable& t) {
    py::dict d;
    for (const auto& r : t.rules()) d[py::str(r.key.str())] = r.names();
    return d;
}

} // namespace

PYBIND11_MODULE(_ctele, m) {
    m.doc() = "Controlled teleportation of a two-atom state in driven cavity QED";

    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    m.attr("DEFAULT_SEED") = kDefaultSeed;
    m.attr("REFERENCE_COUPLING") = kReferenceCoupling;

    m.def(
        "haar_input",
        [](std::uint64_t seed) {
            Rng rng(seed);
            auto in = InputState::haar(rng);
            return std::vector<Complex>{in.a, in.b, in.c, in.d};
        },
        py::arg("seed") = kDefaultSeed, "Haar-random (a, b, c, d) from a seed.");

    m.def(
        "run",
        [](const std::vector<Complex>& input, std::uint64_t seed, std::size_t controllers, std::string force_alice,
           std::string force_controllers) {
            Rng rng(seed);
            auto run = run_teleportation(make_input(input), make_layout(controllers, std::numbers::pi / 4, std::numbers::pi),
                                         rng, {force_alice, force_controllers});
            return record_dict(run.record);
        },
        py::arg("input"), py::arg("seed") = kDefaultSeed, py::arg("controllers") = 1, py::arg("force_alice") = "",
        py::arg("force_controllers") = "", "One sampled protocol run.");

    m.def(
        "enumerate_branches",
        [](const std::vector<Complex>& input, std::size_t controllers) {
            py::list out;
            for (const auto& r : enumerate_all_branches(make_input(input), make_layout(controllers, std::numbers::pi / 4,
                                                                                       std::numbers::pi))) {
                out.append(record_dict(r));
            }
            return out;
        },
        py::arg("input"), py::arg("controllers") = 1, "Every measurement branch, sorted by key.");

    m.def(
        "paper_table", [] { return table_dict(load_paper_table()); }, "Published correction table.");
    m.def(
        "derived_table",
        [](std::size_t controllers) { return table_dict(derive_table(make_layout(controllers, std::numbers::pi / 4,
                                                                                  std::numbers::pi))); },
        py::arg("controllers") = 1, "Correction table found by search.");
    m.def(
        "compare_tables",
        [] {
            const ProtocolLayout layout;
            const auto report = compare_tables(load_paper_table(), derive_table(layout), layout);
            py::dict d;
            for (const auto& e : report.entries) d[py::str(e.key.str())] = std::string(classification_name(e.classification));
            return d;
        },
        "Per-key classification of the published table against the derived one.");

    m.def(
        "check_printed_branches",
        [](const std::vector<Complex>& input) {
            py::dict d;
            for (const auto& b : check_printed_branches(make_input(input)).branches) d[py::str(b.alice_outcome)] = b.fidelity;
            return d;
        },
        py::arg("input"), "Fidelity of each printed post-measurement ket against the numerics.");

    m.def(
        "pair_map",
        [](const Vector& state, double lambda_t, double omega_t) {
            if (state.size() != 4) throw ShapeError("pair state needs 4 amplitudes");
            StateVector s(SubsystemLayout::atoms({"j", "k"}), state);
            return effective_pair_map_closed_form(s, {lambda_t, omega_t}).amplitudes();
        },
        py::arg("state"), py::arg("lambda_t") = std::numbers::pi / 4, py::arg("omega_t") = std::numbers::pi,
        "Closed-form effective evolution of a two-atom state.");

    m.def(
        "detuning_sweep",
        [](const std::vector<std::pair<double, double>>& ratios, double g) {
            py::list out;
            for (const auto& p : effective_vs_full_sweep(ratios, g).points) {
                py::dict d;
                d["delta_ratio"] = p.delta_ratio;
                d["omega_ratio"] = p.omega_ratio;
                d["deficit"] = p.deficit;
                d["fock_cutoff"] = p.fock_cutoff;
                out.append(d);
            }
            return out;
        },
        py::arg("ratios"), py::arg("g") = kReferenceCoupling, "Full-model deficit against the effective model.");

    m.def(
        "thermal_spread",
        [](const std::vector<std::size_t>& levels, double delta_ratio, double omega_ratio) {
            const auto r = thermal_insensitivity_sweep(levels, delta_ratio, omega_ratio);
            return std::make_pair(r.spread, r.effective_spread);
        },
        py::arg("levels"), py::arg("delta_ratio") = 10.0, py::arg("omega_ratio") = 10.0,
        "(full-model spread, effective spread) across cavity Fock levels.");

    m.def(
        "feasibility",
        [](double g, double delta_ratio, double t_radiative, double t_cavity) {
            auto params = PhysicalParams::from_ratios(g, delta_ratio, 10.0);
            params.t_radiative = t_radiative;
            params.t_cavity = t_cavity;
            const auto r = feasibility_check(params, {});
            py::dict d;
            d["interaction_time"] = r.interaction_time;
            d["ratio_radiative"] = r.ratio_radiative;
            d["ratio_cavity"] = r.ratio_cavity;
            d["verdict"] = r.verdict;
            return d;
        },
        py::arg("g") = kReferenceCoupling, py::arg("delta_ratio") = 10.0,
        py::arg("t_radiative") = kReferenceRadiativeTime, py::arg("t_cavity") = kReferenceCavityTime);

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a command line in-process; returns (exit code, stdout, stderr).");
}
