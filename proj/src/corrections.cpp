#include "ctele/corrections.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "ctele/protocol.hpp"

namespace ctele {

namespace {

bool valid_ge(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c == 'g' || c == 'e'; });
}

// Bob's pre-correction state per branch key, for a fixed set of inputs.
struct SampleBranches {
    std::vector<StateVector> targets;
    std::vector<std::map<CorrectionKey, StateVector>> bob_states;
    std::set<CorrectionKey> keys;
};

SampleBranches sample_branches(const ProtocolLayout& layout, const ValidationOptions& opts) {
    SampleBranches out;
    Rng rng(opts.seed);
    for (std::size_t s = 0; s < opts.samples; ++s) {
        const InputState input = InputState::haar(rng);
        out.targets.push_back(teleportation_target(input, layout));
        std::map<CorrectionKey, StateVector> by_key;
        for (auto& b : enumerate_precorrection(input, layout)) {
            out.keys.insert(b.key());
            by_key.emplace(b.key(), std::move(b.bob_state));
        }
        out.bob_states.push_back(std::move(by_key));
    }
    return out;
}

bool rule_recovers(const SampleBranches& samples, const CorrectionRule& rule, double tol) {
    for (std::size_t s = 0; s < samples.targets.size(); ++s) {
        auto it = samples.bob_states[s].find(rule.key);
        if (it == samples.bob_states[s].end()) continue;
        if (fidelity(apply_correction(it->second, rule), samples.targets[s]) < 1.0 - tol) return false;
    }
    return true;
}

} // namespace

std::string_view op_name(SingleAtomOp op) {
    switch (op) {
    case SingleAtomOp::I: return "I";
    case SingleAtomOp::sx: return "sx";
    case SingleAtomOp::sy: return "sy";
    case SingleAtomOp::sz: return "sz";
    case SingleAtomOp::U: return "U";
    }
    return "?";
}

SingleAtomOp parse_op(std::string_view name) {
    for (SingleAtomOp op : kCandidateOrder) {
        if (op_name(op) == name) return op;
    }
    throw CorrectionTableError(fmt::format("unknown correction operator '{}'", name));
}

Matrix op_matrix(SingleAtomOp op) {
    const Complex i{0.0, 1.0};
    Matrix m(2, 2);
    // Rows/columns indexed g = 0, e = 1.
    switch (op) {
    case SingleAtomOp::I: m << 1.0, 0.0, 0.0, 1.0; break;
    case SingleAtomOp::sx: m << 0.0, 1.0, 1.0, 0.0; break;
    case SingleAtomOp::sy: m << 0.0, -i, i, 0.0; break;
    case SingleAtomOp::sz: m << 1.0, 0.0, 0.0, -1.0; break;
    case SingleAtomOp::U: m << 0.0, 1.0, -1.0, 0.0; break; // |g><e| - |e><g|
    }
    return m;
}

CorrectionKey CorrectionKey::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw CorrectionTableError(fmt::format("key '{}' lacks ':'", text));
    CorrectionKey key{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
    if (key.alice.size() != 4 || !valid_ge(key.alice) || key.controllers.empty() || !valid_ge(key.controllers)) {
        throw CorrectionTableError(fmt::format("malformed key '{}'", text));
    }
    return key;
}

std::string CorrectionRule::names() const { return fmt::format("{},{}", op_name(op4), op_name(op7)); }

std::string_view provenance_name(Provenance p) {
    switch (p) {
    case Provenance::paper_encoded: return "paper-encoded";
    case Provenance::search_derived: return "search-derived";
    case Provenance::file: return "file";
    }
    return "?";
}

CorrectionTable::CorrectionTable(std::size_t controllers, Provenance provenance, std::vector<CorrectionRule> rules)
    : controllers_(controllers), provenance_(provenance) {
    if (controllers_ < 1) throw CorrectionTableError("a correction table needs at least one controller");
    for (auto& r : rules) {
        if (r.key.alice.size() != 4 || !valid_ge(r.key.alice) || r.key.controllers.size() != controllers_ ||
            !valid_ge(r.key.controllers)) {
            throw CorrectionTableError(fmt::format("malformed key '{}'", r.key.str()));
        }
        const CorrectionKey key = r.key;
        if (!rules_.try_emplace(key, std::move(r)).second) {
            throw CorrectionTableError(fmt::format("duplicate key '{}'", key.str()));
        }
    }
}

const CorrectionRule& CorrectionTable::lookup(const CorrectionKey& key) const {
    auto it = rules_.find(key);
    if (it == rules_.end()) throw CorrectionTableError(fmt::format("no correction rule for '{}'", key.str()));
    return it->second;
}

std::vector<CorrectionRule> CorrectionTable::rules() const {
    std::vector<CorrectionRule> out;
    out.reserve(rules_.size());
    for (const auto& [k, r] : rules_) out.push_back(r);
    return out;
}

CorrectionTable load_paper_table(const ValidationOptions& opts) {
    using enum SingleAtomOp;
    // Transcribed row by row, left half of the table then right half.
    static const std::vector<std::tuple<const char*, const char*, SingleAtomOp, SingleAtomOp>> rows{
        {"eeee", "e", I, sx},   {"eeee", "g", sz, sx}, {"egee", "e", U, sx},   {"egee", "g", sx, sx},
        {"eegg", "e", I, U},    {"eegg", "g", sz, U},  {"geee", "e", sx, sx},  {"geee", "g", U, sx},
        {"gggg", "e", sz, U},   {"gggg", "g", I, U},   {"eggg", "e", U, U},    {"eggg", "g", sx, U},
        {"ggee", "e", sz, sx},  {"ggee", "g", I, sx},  {"gegg", "e", sx, U},   {"gegg", "g", U, U},
        {"eeeg", "e", I, sz},   {"eeeg", "g", sz, sz}, {"egeg", "e", U, sz},   {"egeg", "g", sx, sz},
        {"eege", "e", I, I},    {"eege", "g", sz, I},  {"egge", "e", U, I},    {"egge", "g", sx, I},
        {"ggeg", "e", sz, sz},  {"ggeg", "g", I, sz},  {"geeg", "e", sx, sz},  {"geeg", "g", U, sz},
        {"ggge", "e", sz, I},   {"ggge", "g", I, I},   {"gege", "e", sx, I},   {"gege", "g", U, I},
    };
    std::vector<CorrectionRule> rules;
    rules.reserve(rows.size());
    for (const auto& [alice, charlie, op4, op7] : rows) rules.push_back({{alice, charlie}, op4, op7});
    CorrectionTable table(1, Provenance::paper_encoded, std::move(rules));
    table.set_failing_rows(validate_table(table, ProtocolLayout{}, opts));
    return table;
}

StateVector apply_correction(const StateVector& bob_state, const CorrectionRule& rule) {
    const auto& layout = bob_state.layout();
    if (layout.size() != 2 || layout[0].dim != 2 || layout[1].dim != 2) {
        throw LayoutError("corrections act on a state of exactly two atoms");
    }
    const Matrix& a = op_matrix(rule.op4);
    const Matrix& b = op_matrix(rule.op7);
    Matrix m(4, 4);
    for (Eigen::Index r = 0; r < 2; ++r) {
        for (Eigen::Index c = 0; c < 2; ++c) m.block(2 * r, 2 * c, 2, 2) = a(r, c) * b;
    }
    return apply(bob_state, LocalOperator::unitary(layout.labels(), std::move(m)));
}

std::vector<CorrectionKey> validate_table(const CorrectionTable& table, const ProtocolLayout& layout,
                                          const ValidationOptions& opts) {
    ProtocolLayout l = layout;
    l.controllers = table.controllers();
    const auto samples = sample_branches(l, opts);
    std::vector<CorrectionKey> failing;
    for (const auto& rule : table.rules()) {
        if (!rule_recovers(samples, rule, opts.tolerance)) failing.push_back(rule.key);
    }
    return failing;
}

CorrectionTable derive_table(const ProtocolLayout& layout, std::span<const SingleAtomOp> candidates,
                             const ValidationOptions& opts) {
    layout.validate();
    const auto samples = sample_branches(layout, opts);
    std::vector<CorrectionRule> rules;
    for (const auto& key : samples.keys) {
        std::optional<CorrectionRule> hit;
        for (SingleAtomOp op4 : candidates) {
            for (SingleAtomOp op7 : candidates) {
                CorrectionRule candidate{key, op4, op7};
                if (rule_recovers(samples, candidate, opts.tolerance)) {
                    hit = candidate;
                    break;
                }
            }
            if (hit) break;
        }
        if (!hit) throw DerivationError(fmt::format("no candidate correction recovers branch '{}'", key.str()));
        rules.push_back(*hit);
    }
    return CorrectionTable(layout.controllers, Provenance::search_derived, std::move(rules));
}

std::string_view classification_name(Classification c) {
    switch (c) {
    case Classification::identical: return "identical";
    case Classification::different_but_valid: return "different-but-valid";
    case Classification::paper_rule_invalid: return "paper-rule-invalid";
    }
    return "?";
}

std::size_t DiscrepancyReport::count(Classification c) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [c](const auto& e) { return e.classification == c; }));
}

DiscrepancyReport compare_tables(const CorrectionTable& reference, const CorrectionTable& derived,
                                 const ProtocolLayout& layout, const ValidationOptions& opts) {
    if (reference.controllers() != derived.controllers()) {
        throw CorrectionTableError("tables cover different controller counts");
    }
    ProtocolLayout l = layout;
    l.controllers = reference.controllers();
    const auto samples = sample_branches(l, opts);

    std::set<CorrectionKey> keys;
    for (const auto& r : reference.rules()) keys.insert(r.key);
    for (const auto& r : derived.rules()) keys.insert(r.key);

    DiscrepancyReport report;
    for (const auto& key : keys) {
        DiscrepancyEntry e{key, std::nullopt, std::nullopt, Classification::identical};
        if (reference.contains(key)) e.reference = reference.lookup(key);
        if (derived.contains(key)) e.derived = derived.lookup(key);
        if (!e.reference || !rule_recovers(samples, *e.reference, opts.tolerance)) {
            e.classification = Classification::paper_rule_invalid;
        } else if (e.derived && e.derived->op4 == e.reference->op4 && e.derived->op7 == e.reference->op7) {
            e.classification = Classification::identical;
        } else {
            e.classification = Classification::different_but_valid;
        }
        report.entries.push_back(std::move(e));
    }
    return report;
}

std::string format_report(const DiscrepancyReport& report) {
    std::string out;
    for (const auto& e : report.entries) {
        out += fmt::format("{} {} {} {} {}\n", e.key.alice, e.key.controllers, classification_name(e.classification),
                           e.reference ? e.reference->names() : "-", e.derived ? e.derived->names() : "-");
    }
    return out;
}

std::string serialize_table(const CorrectionTable& table) {
    std::string out = fmt::format("# provenance: {}\n# controllers: {}\n", provenance_name(table.provenance()),
                                  table.controllers());
    for (const auto& r : table.rules()) {
        out += fmt::format("{} {} {} {}\n", r.key.alice, r.key.controllers, op_name(r.op4), op_name(r.op7));
    }
    return out;
}

CorrectionTable parse_table(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<CorrectionRule> rules;
    std::optional<std::size_t> controllers;
    Provenance provenance = Provenance::file;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string field, value;
            meta >> field >> value;
            if (field == "controllers:") {
                try {
                    controllers = std::stoul(value);
                } catch (const std::exception&) {
                    throw CorrectionTableError(fmt::format("line {}: bad controller count", lineno));
                }
            } else if (field == "provenance:") {
                if (value == "paper-encoded") provenance = Provenance::paper_encoded;
                else if (value == "search-derived") provenance = Provenance::search_derived;
            }
            continue;
        }
        std::istringstream fields(line);
        std::string alice, ctrl, op4, op7, extra;
        if (!(fields >> alice >> ctrl >> op4 >> op7) || (fields >> extra)) {
            throw CorrectionTableError(fmt::format("line {}: expected 4 fields", lineno));
        }
        rules.push_back({{alice, ctrl}, parse_op(op4), parse_op(op7)});
    }
    if (!controllers) {
        if (rules.empty()) throw CorrectionTableError("empty table without a controller count");
        controllers = rules.front().key.controllers.size();
    }
    return CorrectionTable(*controllers, provenance, std::move(rules));
}

} // namespace ctele
