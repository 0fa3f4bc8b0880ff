#include "ctele/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ctele/corrections.hpp"
#include "ctele/protocol.hpp"
#include "ctele/validation.hpp"

namespace ctele::cli {

namespace {

using json = nlohmann::ordered_json;

struct Options {
    std::string input;
    std::uint64_t seed = kDefaultSeed;
    std::size_t trials = 1;
    std::size_t controllers = 1;
    double lambda_t = std::numbers::pi / 4.0;
    double omega_t = std::numbers::pi;
    std::optional<double> g;
    std::optional<double> g_khz;
    double delta_ratio = 10.0;
    double omega_ratio = 10.0;
    std::size_t fock_cutoff = 8;
    std::string format = "text";
    std::string out;
    std::string force_outcome;

    std::string sweep_kind;
    std::string ratios = "5,10,20";
    std::string fock = "0,1,2";
    bool timing = false;

    bool self = false;
    std::string table_path;
    std::string emit_derived;

    std::string preset = "paper";
    std::optional<double> t_radiative;
    std::optional<double> t_cavity;
};

std::string num(double x) { return fmt::format("{:.12g}", x); }

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find(sep, start);
        const auto end = pos == std::string_view::npos ? text.size() : pos;
        out.emplace_back(text.substr(start, end - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_real(std::string_view token) {
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || token.empty()) {
        throw ConfigError(fmt::format("'{}' is not a number", token));
    }
    return value;
}

std::size_t parse_count(std::string_view token) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw ConfigError(fmt::format("'{}' is not a non-negative integer", token));
    }
    return value;
}

// Eight interleaved real,imag values. Within 1e-6 of unit norm the
// coefficients are normalized with a warning; otherwise rejected.
InputState parse_input(const std::string& text, std::ostream& err) {
    const auto tokens = split(text, ',');
    if (tokens.size() != 8) throw ConfigError("--input needs 8 comma-separated reals (re,im for a,b,c,d)");
    std::array<Complex, 4> z;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        z[i] = {parse_real(tokens[2 * i]), parse_real(tokens[2 * i + 1])};
        norm2 += std::norm(z[i]);
    }
    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) >= 1e-6) {
        throw ConfigError(fmt::format("input coefficients have norm {:.12g}; expected 1", norm));
    }
    if (std::abs(norm2 - 1.0) > 1e-12) err << fmt::format("warning: input norm {:.15g} renormalized to 1\n", norm);
    for (auto& c : z) c /= norm;
    return {z[0], z[1], z[2], z[3]};
}

ForcedOutcome parse_forced(const std::string& text, std::size_t controllers) {
    ForcedOutcome f;
    const auto colon = text.find(':');
    f.alice = text.substr(0, colon);
    if (colon != std::string::npos) f.controllers = text.substr(colon + 1);
    const auto ge = [](const std::string& s) { return s.find_first_not_of("ge") == std::string::npos; };
    if (f.alice.size() != 4 || !ge(f.alice) || !ge(f.controllers) ||
        (!f.controllers.empty() && f.controllers.size() != controllers)) {
        throw ConfigError(fmt::format("--force-outcome '{}' must look like eeee or eeee:e", text));
    }
    return f;
}

double coupling(const Options& o) {
    if (o.g && o.g_khz) throw ConfigError("give --g or --g-khz, not both");
    if (o.g_khz) return 2.0 * std::numbers::pi * *o.g_khz * 1e3;
    return o.g.value_or(kReferenceCoupling);
}

ProtocolLayout protocol_layout(const Options& o) {
    ProtocolLayout layout;
    layout.controllers = o.controllers;
    layout.schedule = {o.lambda_t, o.omega_t};
    layout.validate();
    return layout;
}

SweepOptions sweep_options(const Options& o) {
    SweepOptions s;
    s.fock.fock_cutoff = o.fock_cutoff;
    s.lambda_t = o.lambda_t;
    return s;
}

std::string quote_csv(const std::string& s) {
    return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
}

struct Report {
    std::string body;
    int code = kSuccess;
};

// --- commands --------------------------------------------------------------

Report cmd_run(const Options& o, std::ostream& err) {
    const ProtocolLayout layout = protocol_layout(o);
    if (o.trials < 1) throw ConfigError("--trials must be at least 1");
    const std::optional<InputState> fixed = o.input.empty() ? std::nullopt
                                                            : std::optional<InputState>(parse_input(o.input, err));
    const ForcedOutcome forced = o.force_outcome.empty() ? ForcedOutcome{} : parse_forced(o.force_outcome, o.controllers);
    const CorrectionTable& table = default_table(layout);

    Rng rng(o.seed);
    json records = json::array();
    std::string csv = "trial,alice,controllers,probability,correction,fidelity\n";
    std::string text;
    double min_f = 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < o.trials; ++i) {
        const InputState input = fixed ? *fixed : InputState::haar(rng);
        const auto run = run_teleportation(input, layout, rng, forced, table);
        const auto& r = run.record;
        min_f = std::min(min_f, r.fidelity);
        total += r.fidelity;
        records.push_back({{"trial", i},
                           {"alice", r.alice_outcome},
                           {"controllers", r.controller_outcomes},
                           {"probability", r.probability},
                           {"correction", r.correction.names()},
                           {"fidelity", r.fidelity}});
        csv += fmt::format("{},{},{},{},{},{}\n", i, r.alice_outcome, r.controller_outcomes, num(r.probability),
                           quote_csv(r.correction.names()), num(r.fidelity));
        text += fmt::format("trial {:>5}  alice {}  controllers {}  p {:<14}  correction {:<6}  fidelity {}\n", i,
                            r.alice_outcome, r.controller_outcomes, num(r.probability), r.correction.names(),
                            num(r.fidelity));
    }
    const double mean = total / static_cast<double>(o.trials);
    const bool pass = min_f >= 1.0 - 1e-8;

    Report rep;
    rep.code = pass ? kSuccess : kCheckFailed;
    if (o.format == "json") {
        json doc{{"schema", "ctele.run/1"},
                 {"config",
                  {{"seed", o.seed},
                   {"trials", o.trials},
                   {"controllers", o.controllers},
                   {"lambda_t", o.lambda_t},
                   {"omega_t", o.omega_t}}},
                 {"records", std::move(records)},
                 {"summary", {{"trials", o.trials}, {"min_fidelity", min_f}, {"mean_fidelity", mean}, {"pass", pass}}}};
        rep.body = doc.dump(2) + "\n";
    } else if (o.format == "csv") {
        rep.body = csv;
        err << fmt::format("trials {} min_fidelity {} mean_fidelity {}\n", o.trials, num(min_f), num(mean));
    } else {
        rep.body = text + fmt::format("summary: trials {}  min fidelity {}  mean fidelity {}  {}\n", o.trials,
                                      num(min_f), num(mean), pass ? "PASS" : "FAIL");
    }
    return rep;
}

Report cmd_enumerate(const Options& o, std::ostream& err) {
    const ProtocolLayout layout = protocol_layout(o);
    Rng rng(o.seed);
    const InputState input = o.input.empty() ? InputState::haar(rng) : parse_input(o.input, err);
    const auto branches = enumerate_all_branches(input, layout);

    json rows = json::array();
    std::string csv = "alice,controllers,probability,correction,fidelity\n";
    std::string text;
    double total = 0.0;
    double min_f = 1.0;
    for (const auto& b : branches) {
        total += b.probability;
        min_f = std::min(min_f, b.fidelity);
        rows.push_back({{"alice", b.alice_outcome},
                        {"controllers", b.controller_outcomes},
                        {"probability", b.probability},
                        {"correction", b.correction.names()},
                        {"fidelity", b.fidelity}});
        csv += fmt::format("{},{},{},{},{}\n", b.alice_outcome, b.controller_outcomes, num(b.probability),
                           quote_csv(b.correction.names()), num(b.fidelity));
        text += fmt::format("{} {}  p {:<14}  {:<6}  fidelity {}\n", b.alice_outcome, b.controller_outcomes,
                            num(b.probability), b.correction.names(), num(b.fidelity));
    }
    Report rep;
    rep.code = min_f >= 1.0 - 1e-8 ? kSuccess : kCheckFailed;
    if (o.format == "json") {
        json doc{{"schema", "ctele.enumerate/1"},
                 {"controllers", o.controllers},
                 {"branches", std::move(rows)},
                 {"summary", {{"count", branches.size()}, {"total_probability", total}, {"min_fidelity", min_f}}}};
        rep.body = doc.dump(2) + "\n";
    } else if (o.format == "csv") {
        rep.body = csv;
    } else {
        rep.body = text + fmt::format("{} branches  total probability {}  min fidelity {}\n", branches.size(),
                                      num(total), num(min_f));
    }
    return rep;
}

Report cmd_verify_table(const Options& o, std::ostream&) {
    const ProtocolLayout layout = protocol_layout(o);
    std::optional<CorrectionTable> reference;
    if (!o.table_path.empty()) {
        std::ifstream in(o.table_path);
        if (!in) throw ConfigError(fmt::format("cannot read table '{}'", o.table_path));
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            reference = parse_table(buf.str());
        } catch (const CorrectionTableError& e) {
            throw ConfigError(e.what());
        }
        if (reference->controllers() != o.controllers) {
            throw ConfigError("table controller count differs from --controllers");
        }
    } else if (o.controllers == 1) {
        reference = load_paper_table();
    } else if (!o.self) {
        throw ConfigError("no published table beyond one controller; use --self or --table");
    }

    const CorrectionTable derived = derive_table(layout);
    if (!o.emit_derived.empty()) {
        std::ofstream f(o.emit_derived);
        if (!f) throw ConfigError(fmt::format("cannot write '{}'", o.emit_derived));
        f << serialize_table(derived);
    }
    const CorrectionTable& ref = reference ? *reference : derived;
    const CorrectionTable& other = o.self ? ref : derived;
    const auto report = compare_tables(ref, other, layout);

    const auto counts = fmt::format("identical {}  different-but-valid {}  paper-rule-invalid {}",
                                    report.count(Classification::identical),
                                    report.count(Classification::different_but_valid),
                                    report.count(Classification::paper_rule_invalid));
    Report rep;
    rep.code = report.has_invalid() ? kTableDiscrepancy : kSuccess;
    if (o.format == "json") {
        json entries = json::array();
        for (const auto& e : report.entries) {
            entries.push_back({{"alice", e.key.alice},
                               {"controllers", e.key.controllers},
                               {"classification", classification_name(e.classification)},
                               {"reference", e.reference ? json(e.reference->names()) : json(nullptr)},
                               {"derived", e.derived ? json(e.derived->names()) : json(nullptr)}});
        }
        json doc{{"schema", "ctele.verify-table/1"},
                 {"controllers", o.controllers},
                 {"mode", o.self ? "self" : "derived"},
                 {"entries", std::move(entries)},
                 {"summary",
                  {{"identical", report.count(Classification::identical)},
                   {"different_but_valid", report.count(Classification::different_but_valid)},
                   {"paper_rule_invalid", report.count(Classification::paper_rule_invalid)}}}};
        rep.body = doc.dump(2) + "\n";
    } else if (o.format == "csv") {
        rep.body = "alice,controllers,classification,reference,derived\n";
        for (const auto& e : report.entries) {
            rep.body += fmt::format("{},{},{},{},{}\n", e.key.alice, e.key.controllers,
                                    classification_name(e.classification),
                                    quote_csv(e.reference ? e.reference->names() : "-"),
                                    quote_csv(e.derived ? e.derived->names() : "-"));
        }
    } else {
        rep.body = format_report(report) + counts + "\n";
    }
    return rep;
}

std::vector<std::pair<double, double>> parse_ratios(const std::string& text) {
    if (text.empty()) throw ConfigError("--ratios is empty");
    std::vector<std::pair<double, double>> out;
    for (const auto& tok : split(text, ',')) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) {
            const double r = parse_real(tok);
            out.emplace_back(r, r);
        } else {
            out.emplace_back(parse_real(std::string_view(tok).substr(0, colon)),
                             parse_real(std::string_view(tok).substr(colon + 1)));
        }
    }
    return out;
}

Report cmd_sweep(const Options& o, std::ostream&) {
    const double g = coupling(o);
    const SweepOptions opts = sweep_options(o);
    Report rep;
    if (o.sweep_kind == "detuning") {
        const auto ratios = parse_ratios(o.ratios);
        const auto result = effective_vs_full_sweep(ratios, g, opts);
        json points = json::array();
        std::string csv = std::string("delta_ratio,omega_ratio,deficit,fock_cutoff,converged,truncation_warning") +
                          (o.timing ? ",wall_seconds" : "") + "\n";
        std::string text;
        for (const auto& p : result.points) {
            json row{{"delta_ratio", p.delta_ratio}, {"omega_ratio", p.omega_ratio},       {"deficit", p.deficit},
                     {"fock_cutoff", p.fock_cutoff}, {"converged", p.converged}, {"truncation_warning", p.truncation_warning}};
            if (o.timing) row["wall_seconds"] = p.wall_seconds;
            points.push_back(std::move(row));
            csv += fmt::format("{},{},{},{},{},{}", num(p.delta_ratio), num(p.omega_ratio), num(p.deficit), p.fock_cutoff,
                               p.converged ? 1 : 0, p.truncation_warning ? 1 : 0);
            csv += o.timing ? fmt::format(",{:.3f}\n", p.wall_seconds) : "\n";
            text += fmt::format("delta/g {:<6} Omega/delta {:<6} deficit {:<20} cutoff {}{}{}\n", num(p.delta_ratio),
                                num(p.omega_ratio), num(p.deficit), p.fock_cutoff, p.converged ? "" : " (not converged)",
                                p.truncation_warning ? " (truncation warning)" : "");
        }
        if (o.format == "json") {
            rep.body = json{{"schema", "ctele.sweep-detuning/1"}, {"g", g}, {"points", std::move(points)}}.dump(2) + "\n";
        } else {
            rep.body = o.format == "csv" ? csv : text;
        }
    } else if (o.sweep_kind == "thermal") {
        std::vector<std::size_t> levels;
        if (o.fock.empty()) throw ConfigError("--fock is empty");
        for (const auto& tok : split(o.fock, ',')) levels.push_back(parse_count(tok));
        const auto result = thermal_insensitivity_sweep(levels, o.delta_ratio, o.omega_ratio, g, opts);
        json points = json::array();
        std::string csv = "fock,deficit,fock_cutoff,converged,truncation_warning,spread,effective_spread\n";
        std::string text = fmt::format("delta/g {}  Omega/delta {}\n", num(result.delta_ratio), num(result.omega_ratio));
        for (const auto& p : result.points) {
            points.push_back({{"fock", p.fock},
                              {"deficit", p.deficit},
                              {"fock_cutoff", p.fock_cutoff},
                              {"converged", p.converged},
                              {"truncation_warning", p.truncation_warning}});
            csv += fmt::format("{},{},{},{},{},{},{}\n", p.fock, num(p.deficit), p.fock_cutoff, p.converged ? 1 : 0,
                               p.truncation_warning ? 1 : 0, num(result.spread), num(result.effective_spread));
            text += fmt::format("n {}  deficit {}  cutoff {}\n", p.fock, num(p.deficit), p.fock_cutoff);
        }
        text += fmt::format("spread {}  effective spread {}\n", num(result.spread), num(result.effective_spread));
        if (o.format == "json") {
            rep.body = json{{"schema", "ctele.sweep-thermal/1"},
                            {"g", g},
                            {"delta_ratio", result.delta_ratio},
                            {"omega_ratio", result.omega_ratio},
                            {"points", std::move(points)},
                            {"spread", result.spread},
                            {"effective_spread", result.effective_spread}}
                           .dump(2) +
                       "\n";
        } else {
            rep.body = o.format == "csv" ? csv : text;
        }
    } else {
        throw ConfigError(fmt::format("unknown sweep kind '{}'", o.sweep_kind));
    }
    return rep;
}

Report cmd_feasibility(const Options& o, std::ostream&) {
    const double g = coupling(o);
    PhysicalParams params = PhysicalParams::from_ratios(g, o.delta_ratio, o.omega_ratio);
    if (o.preset == "paper") {
        params.t_radiative = kReferenceRadiativeTime;
        params.t_cavity = kReferenceCavityTime;
    }
    if (o.t_radiative) params.t_radiative = *o.t_radiative;
    if (o.t_cavity) params.t_cavity = *o.t_cavity;
    const InteractionSchedule sched{o.lambda_t, o.omega_t};
    const auto r = feasibility_check(params, sched);

    Report rep;
    rep.code = r.verdict ? kSuccess : kCheckFailed;
    if (o.format == "json") {
        rep.body = json{{"schema", "ctele.feasibility/1"},
                        {"g", g},
                        {"delta", params.delta},
                        {"lambda", params.lambda()},
                        {"interaction_time", r.interaction_time},
                        {"t_radiative", *params.t_radiative},
                        {"t_cavity", *params.t_cavity},
                        {"ratio_radiative", r.ratio_radiative},
                        {"ratio_cavity", r.ratio_cavity},
                        {"margin", kFeasibilityMargin},
                        {"verdict", r.verdict}}
                       .dump(2) +
                   "\n";
    } else if (o.format == "csv") {
        rep.body = "interaction_time,t_radiative,t_cavity,ratio_radiative,ratio_cavity,verdict\n" +
                   fmt::format("{},{},{},{},{},{}\n", num(r.interaction_time), num(*params.t_radiative),
                               num(*params.t_cavity), num(r.ratio_radiative), num(r.ratio_cavity), r.verdict ? 1 : 0);
    } else {
        rep.body = fmt::format("interaction time {:.4e} s\nt/T_r {:.4e}\nt/T_c {:.4e}\nverdict {}\n", r.interaction_time,
                               r.ratio_radiative, r.ratio_cavity, r.verdict ? "feasible" : "not feasible");
    }
    return rep;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    sub->add_option("--controllers", o.controllers, "number of controlling agents")->capture_default_str();
    sub->add_option("--lambda-t", o.lambda_t, "pulse area lambda*t")->capture_default_str();
    sub->add_option("--omega-t", o.omega_t, "pulse area Omega*t")->capture_default_str();
    sub->add_option("--g", o.g, "atom-cavity coupling in rad/s");
    sub->add_option("--g-khz", o.g_khz, "coupling as g = 2 pi x value kHz");
    sub->add_option("--delta-ratio", o.delta_ratio, "detuning delta/g")->capture_default_str();
    sub->add_option("--omega-ratio", o.omega_ratio, "drive Omega/delta")->capture_default_str();
    sub->add_option("--fock-cutoff", o.fock_cutoff, "cavity Fock truncation")->capture_default_str();
    sub->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    sub->add_option("--out", o.out, "write the report to PATH");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Controlled teleportation of a two-atom state in driven cavity QED"};
    app.name("ctele");
    app.require_subcommand(1);
    Options o;

    auto* run_cmd = app.add_subcommand("run", "sample protocol runs");
    add_common(run_cmd, o);
    run_cmd->add_option("--input", o.input, "re,im pairs for a,b,c,d (random per trial if absent)");
    run_cmd->add_option("--trials", o.trials, "number of runs")->capture_default_str();
    run_cmd->add_option("--force-outcome", o.force_outcome, "pin outcomes, e.g. eeee:e");

    auto* enum_cmd = app.add_subcommand("enumerate", "list every measurement branch");
    add_common(enum_cmd, o);
    enum_cmd->add_option("--input", o.input, "re,im pairs for a,b,c,d (random from --seed if absent)");

    auto* verify_cmd = app.add_subcommand("verify-table", "check the correction table against a derived one");
    add_common(verify_cmd, o);
    verify_cmd->add_flag("--self", o.self, "compare the reference table with itself");
    verify_cmd->add_option("--table", o.table_path, "reference table file instead of the published one");
    verify_cmd->add_option("--emit-derived", o.emit_derived, "write the derived table to PATH");

    auto* sweep_cmd = app.add_subcommand("sweep", "full-model validation sweeps");
    add_common(sweep_cmd, o);
    sweep_cmd->add_option("kind", o.sweep_kind, "detuning | thermal")
        ->required()
        ->check(CLI::IsMember({"detuning", "thermal"}));
    sweep_cmd->add_option("--ratios", o.ratios, "delta/g points, each 'r' or 'delta_ratio:omega_ratio'")
        ->capture_default_str();
    sweep_cmd->add_option("--fock", o.fock, "initial cavity Fock levels")->capture_default_str();
    sweep_cmd->add_flag("--timing", o.timing, "include wall-clock seconds per point");

    auto* feas_cmd = app.add_subcommand("feasibility", "interaction time against atomic and cavity lifetimes");
    add_common(feas_cmd, o);
    feas_cmd->add_option("--preset", o.preset, "paper: T_r = 3e-2 s, T_c = 1e-3 s; none: give both")
        ->check(CLI::IsMember({"paper", "none"}))
        ->capture_default_str();
    feas_cmd->add_option("--t-radiative", o.t_radiative, "atomic radiative lifetime (s)");
    feas_cmd->add_option("--t-cavity", o.t_cavity, "cavity decay time (s)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kConfigError;
    }

    Report rep;
    try {
        if (run_cmd->parsed()) rep = cmd_run(o, err);
        else if (enum_cmd->parsed()) rep = cmd_enumerate(o, err);
        else if (verify_cmd->parsed()) rep = cmd_verify_table(o, err);
        else if (sweep_cmd->parsed()) rep = cmd_sweep(o, err);
        else rep = cmd_feasibility(o, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NormError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const CorrectionTableError& e) {
        err << "error: " << e.what() << "\n";
        return kCheckFailed;
    } catch (const DerivationError& e) {
        err << "error: " << e.what() << "\n";
        return kCheckFailed;
    }

    if (o.out.empty()) {
        out << rep.body;
    } else {
        std::ofstream f(o.out, std::ios::binary);
        if (!f) {
            err << "error: cannot write '" << o.out << "'\n";
            return kConfigError;
        }
        f << rep.body;
    }
    return rep.code;
}

} // namespace ctele::cli
