#include "ctele/statevec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace ctele {

namespace {

// Flat offsets of every digit combination over `positions`, enumerated with
// the first position as the most significant digit. Digits outside
// `positions` are zero.
std::vector<std::size_t> offsets(const SubsystemLayout& layout,
                                 const std::vector<std::size_t>& positions) {
    std::vector<std::size_t> out{0};
    for (std::size_t p : positions) {
        const std::size_t dim = layout[p].dim;
        const std::size_t stride = layout.stride(p);
        std::vector<std::size_t> next;
        next.reserve(out.size() * dim);
        for (std::size_t base : out) {
            for (std::size_t d = 0; d < dim; ++d) next.push_back(base + d * stride);
        }
        out = std::move(next);
    }
    return out;
}

std::vector<std::size_t> positions_of(const SubsystemLayout& layout,
                                      std::span<const Label> labels) {
    std::vector<std::size_t> pos;
    std::set<std::size_t> seen;
    pos.reserve(labels.size());
    for (const auto& l : labels) {
        std::size_t p = layout.position(l);
        if (!seen.insert(p).second) throw LayoutError(fmt::format("label '{}' listed twice", l));
        pos.push_back(p);
    }
    return pos;
}

std::vector<std::size_t> complement(const SubsystemLayout& layout,
                                    const std::vector<std::size_t>& positions) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (std::find(positions.begin(), positions.end(), i) == positions.end()) rest.push_back(i);
    }
    return rest;
}

void require_qubits(const SubsystemLayout& layout, const std::vector<std::size_t>& positions) {
    for (std::size_t p : positions) {
        if (layout[p].dim != 2) {
            throw ShapeError(fmt::format("subsystem '{}' has dimension {}; g/e measurement needs 2",
                                         layout[p].label, layout[p].dim));
        }
    }
}

std::vector<std::size_t> parse_ge(std::string_view ge) {
    std::vector<std::size_t> digits;
    digits.reserve(ge.size());
    for (char c : ge) {
        if (c == 'g') {
            digits.push_back(kGround);
        } else if (c == 'e') {
            digits.push_back(kExcited);
        } else {
            throw LayoutError(fmt::format("invalid basis character '{}' in \"{}\"", c, ge));
        }
    }
    return digits;
}

std::size_t outcome_offset(const SubsystemLayout& layout, const std::vector<std::size_t>& positions,
                           std::string_view outcome) {
    if (outcome.size() != positions.size()) {
        throw LayoutError(fmt::format("outcome \"{}\" does not match {} targets", outcome,
                                      positions.size()));
    }
    const auto digits = parse_ge(outcome);
    std::size_t off = 0;
    for (std::size_t j = 0; j < positions.size(); ++j) off += digits[j] * layout.stride(positions[j]);
    return off;
}

} // namespace

// ---------------------------------------------------------------------------
// SubsystemLayout

SubsystemLayout::SubsystemLayout(std::vector<Subsystem> subsystems)
    : subsystems_(std::move(subsystems)) {
    std::set<Label> seen;
    for (const auto& s : subsystems_) {
        if (s.dim == 0) throw ShapeError(fmt::format("subsystem '{}' has dimension 0", s.label));
        if (!seen.insert(s.label).second) throw LayoutError(fmt::format("duplicate label '{}'", s.label));
    }
    strides_.assign(subsystems_.size(), 1);
    total_dim_ = 1;
    for (std::size_t i = subsystems_.size(); i-- > 0;) {
        strides_[i] = total_dim_;
        total_dim_ *= subsystems_[i].dim;
    }
}

SubsystemLayout SubsystemLayout::atoms(const std::vector<Label>& labels) {
    std::vector<Subsystem> subs;
    subs.reserve(labels.size());
    for (const auto& l : labels) subs.push_back({l, 2});
    return SubsystemLayout(std::move(subs));
}

bool SubsystemLayout::contains(std::string_view label) const {
    return std::any_of(subsystems_.begin(), subsystems_.end(),
                       [&](const Subsystem& s) { return s.label == label; });
}

std::size_t SubsystemLayout::position(std::string_view label) const {
    for (std::size_t i = 0; i < subsystems_.size(); ++i) {
        if (subsystems_[i].label == label) return i;
    }
    throw LayoutError(fmt::format("unknown label '{}'", label));
}

std::vector<Label> SubsystemLayout::labels() const {
    std::vector<Label> out;
    out.reserve(subsystems_.size());
    for (const auto& s : subsystems_) out.push_back(s.label);
    return out;
}

SubsystemLayout SubsystemLayout::concat(const SubsystemLayout& other) const {
    auto subs = subsystems_;
    subs.insert(subs.end(), other.subsystems_.begin(), other.subsystems_.end());
    return SubsystemLayout(std::move(subs));
}

SubsystemLayout SubsystemLayout::without(std::span<const Label> labels) const {
    std::vector<Subsystem> subs;
    for (const auto& s : subsystems_) {
        if (std::find(labels.begin(), labels.end(), s.label) == labels.end()) subs.push_back(s);
    }
    return SubsystemLayout(std::move(subs));
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(SubsystemLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != layout_.total_dim()) {
        throw ShapeError(fmt::format("{} amplitudes for a layout of dimension {}", amplitudes_.size(),
                                     layout_.total_dim()));
    }
}

StateVector StateVector::basis(SubsystemLayout layout, const std::vector<std::size_t>& digits) {
    if (digits.size() != layout.size()) throw ShapeError("one basis digit per subsystem required");
    std::size_t index = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (digits[i] >= layout[i].dim) {
            throw ShapeError(fmt::format("basis index {} out of range for '{}'", digits[i], layout[i].label));
        }
        index += digits[i] * layout.stride(i);
    }
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(layout), std::move(amps));
}

StateVector StateVector::atoms(const std::vector<Label>& labels, std::string_view ge) {
    if (ge.size() != labels.size()) throw ShapeError("one g/e character per atom required");
    return basis(SubsystemLayout::atoms(labels), parse_ge(ge));
}

Complex StateVector::amplitude(const std::vector<std::size_t>& digits) const {
    if (digits.size() != layout_.size()) throw ShapeError("one basis digit per subsystem required");
    std::size_t index = 0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (digits[i] >= layout_[i].dim) throw ShapeError("basis index out of range");
        index += digits[i] * layout_.stride(i);
    }
    return amplitudes_(static_cast<Eigen::Index>(index));
}

Complex StateVector::amplitude(std::string_view ge) const { return amplitude(parse_ge(ge)); }

bool StateVector::is_normalized(double tol) const { return std::abs(norm_squared() - 1.0) <= tol; }

StateVector StateVector::normalized() const {
    const double n = amplitudes_.norm();
    if (n == 0.0) throw NormError("cannot normalize a zero vector");
    return StateVector(layout_, amplitudes_ / n);
}

// ---------------------------------------------------------------------------
// LocalOperator

LocalOperator::LocalOperator(std::vector<Label> targets, Matrix matrix)
    : targets_(std::move(targets)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) throw ShapeError("operator matrix must be square");
    std::set<Label> seen(targets_.begin(), targets_.end());
    if (seen.size() != targets_.size()) throw LayoutError("operator targets must be distinct");
}

LocalOperator LocalOperator::unitary(std::vector<Label> targets, Matrix matrix, double tol) {
    LocalOperator op(std::move(targets), std::move(matrix));
    if (!op.is_unitary(tol)) throw ShapeError("matrix tagged unitary fails U^dagger U = I");
    op.unitary_ = true;
    return op;
}

bool LocalOperator::is_hermitian(double tol) const {
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool LocalOperator::is_unitary(double tol) const {
    const Matrix id = Matrix::Identity(matrix_.rows(), matrix_.cols());
    return (matrix_.adjoint() * matrix_ - id).cwiseAbs().maxCoeff() <= tol;
}

LocalOperator LocalOperator::operator*(const LocalOperator& rhs) const {
    if (targets_ != rhs.targets_) throw LayoutError("operator product needs identical targets");
    if (matrix_.rows() != rhs.matrix_.rows()) throw ShapeError("operator dimensions differ");
    LocalOperator out(targets_, matrix_ * rhs.matrix_);
    out.unitary_ = unitary_ && rhs.unitary_;
    return out;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(SubsystemLayout layout, Matrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const auto dim = static_cast<Eigen::Index>(layout_.total_dim());
    if (matrix_.rows() != dim || matrix_.cols() != dim) throw ShapeError("density matrix shape mismatch");
    if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance) {
        throw HermiticityError("density matrix is not Hermitian");
    }
    if (std::abs(matrix_.trace() - Complex(1.0)) > kNormTolerance) throw NormError("density matrix trace != 1");
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

// ---------------------------------------------------------------------------
// Operations

StateVector tensor(std::span<const StateVector> states) {
    if (states.empty()) throw LayoutError("tensor product of zero states");
    SubsystemLayout layout = states[0].layout();
    Vector amps = states[0].amplitudes();
    for (std::size_t i = 1; i < states.size(); ++i) {
        layout = layout.concat(states[i].layout());
        const Vector& rhs = states[i].amplitudes();
        Vector next(amps.size() * rhs.size());
        for (Eigen::Index a = 0; a < amps.size(); ++a) next.segment(a * rhs.size(), rhs.size()) = amps(a) * rhs;
        amps = std::move(next);
    }
    return StateVector(std::move(layout), std::move(amps));
}

StateVector tensor(std::initializer_list<StateVector> states) {
    return tensor(std::span<const StateVector>(states.begin(), states.size()));
}

StateVector apply(const StateVector& state, const LocalOperator& op) {
    const auto& layout = state.layout();
    const auto pos = positions_of(layout, op.targets());
    const auto target_off = offsets(layout, pos);
    if (static_cast<Eigen::Index>(target_off.size()) != op.matrix().rows()) {
        throw ShapeError(fmt::format("operator of dimension {} on targets of dimension {}",
                                     op.matrix().rows(), target_off.size()));
    }
    const auto rest_off = offsets(layout, complement(layout, pos));
    const auto& in = state.amplitudes();
    const auto& m = op.matrix();
    const auto dim = static_cast<Eigen::Index>(target_off.size());

    Vector out(in.size());
    Vector local(dim);
    for (std::size_t base : rest_off) {
        for (Eigen::Index t = 0; t < dim; ++t) local(t) = in(static_cast<Eigen::Index>(base + target_off[t]));
        Vector mapped = m * local;
        for (Eigen::Index t = 0; t < dim; ++t) out(static_cast<Eigen::Index>(base + target_off[t])) = mapped(t);
    }
    return StateVector(layout, std::move(out));
}

std::vector<Branch> branch_enumerate(const StateVector& state, std::span<const Label> targets,
                                     double prob_floor) {
    if (!state.is_normalized()) throw NormError("branch enumeration needs a normalized state");
    const auto& layout = state.layout();
    const auto pos = positions_of(layout, targets);
    require_qubits(layout, pos);
    const auto target_off = offsets(layout, pos);
    const auto rest_off = offsets(layout, complement(layout, pos));
    const auto& amps = state.amplitudes();

    std::vector<Branch> out;
    for (std::size_t t = 0; t < target_off.size(); ++t) {
        double p = 0.0;
        for (std::size_t r : rest_off) p += std::norm(amps(static_cast<Eigen::Index>(r + target_off[t])));
        if (p <= prob_floor) continue;
        Vector collapsed = Vector::Zero(amps.size());
        const double scale = 1.0 / std::sqrt(p);
        for (std::size_t r : rest_off) {
            const auto i = static_cast<Eigen::Index>(r + target_off[t]);
            collapsed(i) = amps(i) * scale;
        }
        std::string outcome(pos.size(), 'g');
        for (std::size_t j = 0; j < pos.size(); ++j) {
            if ((t >> j) & 1U) outcome[pos.size() - 1 - j] = 'e';
        }
        out.push_back({std::move(outcome), p, StateVector(layout, std::move(collapsed))});
    }
    return out;
}

Branch measure(const StateVector& state, std::span<const Label> targets, Rng& rng) {
    auto branches = branch_enumerate(state, targets, 0.0);
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (auto& b : branches) {
        cumulative += b.probability;
        if (u < cumulative) return std::move(b);
    }
    // u landed in the rounding gap above the last cumulative sum.
    return std::move(branches.back());
}

StateVector condition(const StateVector& state, std::span<const Label> targets, std::string_view outcome) {
    const auto& layout = state.layout();
    const auto pos = positions_of(layout, targets);
    require_qubits(layout, pos);
    const std::size_t off = outcome_offset(layout, pos, outcome);
    const auto rest_off = offsets(layout, complement(layout, pos));

    Vector amps(static_cast<Eigen::Index>(rest_off.size()));
    for (std::size_t r = 0; r < rest_off.size(); ++r) {
        amps(static_cast<Eigen::Index>(r)) = state.amplitudes()(static_cast<Eigen::Index>(rest_off[r] + off));
    }
    if (amps.norm() < 1e-300) throw NormError(fmt::format("outcome \"{}\" has zero probability", outcome));
    return StateVector(layout.without(targets), amps.normalized());
}

double fidelity(const StateVector& a, const StateVector& b) {
    if (!(a.layout() == b.layout())) throw LayoutError("fidelity needs identical layouts");
    if (!a.is_normalized() || !b.is_normalized()) throw NormError("fidelity needs normalized states");
    return std::clamp(std::norm(a.amplitudes().dot(b.amplitudes())), 0.0, 1.0);
}

DensityMatrix partial_trace(const StateVector& state, std::span<const Label> keep) {
    const auto& layout = state.layout();
    const auto pos = positions_of(layout, keep);
    const auto keep_off = offsets(layout, pos);
    const auto rest_off = offsets(layout, complement(layout, pos));

    Matrix m(static_cast<Eigen::Index>(keep_off.size()), static_cast<Eigen::Index>(rest_off.size()));
    for (std::size_t k = 0; k < keep_off.size(); ++k) {
        for (std::size_t r = 0; r < rest_off.size(); ++r) {
            m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r)) =
                state.amplitudes()(static_cast<Eigen::Index>(keep_off[k] + rest_off[r]));
        }
    }
    Matrix rho = m * m.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    std::vector<Subsystem> subs;
    for (std::size_t p : pos) subs.push_back(layout[p]);
    return DensityMatrix(SubsystemLayout(std::move(subs)), std::move(rho));
}

double reduced_fidelity(const DensityMatrix& rho, const StateVector& ref) {
    if (!(rho.layout() == ref.layout())) throw LayoutError("reduced fidelity needs identical layouts");
    const Complex f = ref.amplitudes().dot(rho.matrix() * ref.amplitudes());
    return std::clamp(f.real(), 0.0, 1.0);
}

StateVector relabel(const StateVector& state, const std::map<Label, Label>& mapping) {
    for (const auto& [from, to] : mapping) state.layout().position(from);
    std::vector<Subsystem> subs = state.layout().subsystems();
    for (auto& s : subs) {
        if (auto it = mapping.find(s.label); it != mapping.end()) s.label = it->second;
    }
    return StateVector(SubsystemLayout(std::move(subs)), state.amplitudes());
}

StateVector reorder(const StateVector& state, std::span<const Label> order) {
    const auto& layout = state.layout();
    if (order.size() != layout.size()) throw LayoutError("reorder must list every subsystem once");
    const auto pos = positions_of(layout, order);
    const auto off = offsets(layout, pos);
    Vector amps(static_cast<Eigen::Index>(off.size()));
    for (std::size_t i = 0; i < off.size(); ++i) {
        amps(static_cast<Eigen::Index>(i)) = state.amplitudes()(static_cast<Eigen::Index>(off[i]));
    }
    std::vector<Subsystem> subs;
    for (std::size_t p : pos) subs.push_back(layout[p]);
    return StateVector(SubsystemLayout(std::move(subs)), std::move(amps));
}

} // namespace ctele
