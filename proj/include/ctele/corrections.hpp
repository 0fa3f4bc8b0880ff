#pragma once

/**
 * @file
 * Bob's correction rules: the published table as data, application of a
 * rule, and an independent re-derivation of the whole table by search.
 *
 * Table text format (one rule per line, whitespace separated; lines
 * starting with '#' are comments):
 *
 *     # provenance: paper-encoded
 *     # controllers: 1
 *     eeee e I sx
 *     eeee g sz sx
 *
 * Columns are Alice's outcome over (1, 3, 2, 6), the controllers' outcomes
 * in controller order, the operator on Bob's GHZ atom (4) and the operator
 * on Bob's EPR atom (7). Operator names: I sx sy sz U.
 */

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctele/statevec.hpp"

namespace ctele {

struct ProtocolLayout;

/// Candidate single-atom corrections. U = |g><e| - |e><g|.
enum class SingleAtomOp { I, sx, sy, sz, U };

/// Tie-break order for derive_table.
inline constexpr std::array<SingleAtomOp, 5> kCandidateOrder{SingleAtomOp::I, SingleAtomOp::sx,
                                                             SingleAtomOp::sy, SingleAtomOp::sz,
                                                             SingleAtomOp::U};

std::string_view op_name(SingleAtomOp op);
/// Throws CorrectionTableError on an unknown name.
SingleAtomOp parse_op(std::string_view name);
Matrix op_matrix(SingleAtomOp op);

struct CorrectionKey {
    std::string alice;       // 4 g/e characters over atoms (1, 3, 2, 6)
    std::string controllers; // one g/e character per controller

    std::string str() const { return alice + ":" + controllers; }
    /// Parses "eeee:e". Throws CorrectionTableError.
    static CorrectionKey parse(std::string_view text);

    friend auto operator<=>(const CorrectionKey&, const CorrectionKey&) = default;
};

struct CorrectionRule {
    CorrectionKey key;
    SingleAtomOp op4 = SingleAtomOp::I;
    SingleAtomOp op7 = SingleAtomOp::I;

    /// "I,sx" style name pair.
    std::string names() const;
};

enum class Provenance { paper_encoded, search_derived, file };
std::string_view provenance_name(Provenance p);

class CorrectionTable {
  public:
    /// Throws CorrectionTableError on duplicate or malformed keys.
    CorrectionTable(std::size_t controllers, Provenance provenance, std::vector<CorrectionRule> rules);

    std::size_t controllers() const { return controllers_; }
    Provenance provenance() const { return provenance_; }
    std::size_t size() const { return rules_.size(); }
    /// Every one of the 16 * 2^n keys present.
    bool complete() const { return rules_.size() == (std::size_t{16} << controllers_); }
    bool contains(const CorrectionKey& key) const { return rules_.contains(key); }
    /// Throws CorrectionTableError if absent.
    const CorrectionRule& lookup(const CorrectionKey& key) const;
    std::vector<CorrectionRule> rules() const;

    /// Keys that failed validation when the table was loaded or derived.
    const std::vector<CorrectionKey>& failing_rows() const { return failing_rows_; }
    void set_failing_rows(std::vector<CorrectionKey> rows) { failing_rows_ = std::move(rows); }

  private:
    std::size_t controllers_;
    Provenance provenance_;
    std::map<CorrectionKey, CorrectionRule> rules_;
    std::vector<CorrectionKey> failing_rows_;
};

struct ValidationOptions {
    std::size_t samples = 20;
    std::uint64_t seed = 7;
    double tolerance = 1e-10;
};

/// The published 32-row table for one controller, validated on load; any
/// failing rows end up in failing_rows().
CorrectionTable load_paper_table(const ValidationOptions& opts = {});

/// op4 on the first subsystem, op7 on the second, of a two-atom state.
StateVector apply_correction(const StateVector& bob_state, const CorrectionRule& rule);

/// Keys whose rule misses fidelity 1 on any of the sample inputs.
std::vector<CorrectionKey> validate_table(const CorrectionTable& table, const ProtocolLayout& layout,
                                          const ValidationOptions& opts = {});

/// Searches candidates x candidates (op4-major, in the given order) per
/// branch and keeps the first pair that recovers every sample input.
/// Throws DerivationError when some branch has no valid pair.
CorrectionTable derive_table(const ProtocolLayout& layout,
                             std::span<const SingleAtomOp> candidates = kCandidateOrder,
                             const ValidationOptions& opts = {});

enum class Classification { identical, different_but_valid, paper_rule_invalid };
std::string_view classification_name(Classification c);

struct DiscrepancyEntry {
    CorrectionKey key;
    std::optional<CorrectionRule> reference; // table under test
    std::optional<CorrectionRule> derived;
    Classification classification = Classification::identical;
};

struct DiscrepancyReport {
    std::vector<DiscrepancyEntry> entries;

    std::size_t count(Classification c) const;
    bool has_invalid() const { return count(Classification::paper_rule_invalid) > 0; }
};

/// Per-key comparison. A rule missing from `reference` or failing
/// validation is paper_rule_invalid.
DiscrepancyReport compare_tables(const CorrectionTable& reference, const CorrectionTable& derived,
                                 const ProtocolLayout& layout, const ValidationOptions& opts = {});

/// Report lines: "<alice> <controllers> <classification> <ref op4,op7> <derived op4,op7>",
/// with "-" for a missing rule.
std::string format_report(const DiscrepancyReport& report);

std::string serialize_table(const CorrectionTable& table);
/// Inverse of serialize_table. Throws CorrectionTableError.
CorrectionTable parse_table(std::string_view text);

} // namespace ctele
