#pragma once

/**
 * @file
 * Dense state vectors over labeled composites of two-level atoms and
 * truncated bosonic modes.
 *
 * Basis convention, used everywhere in the library: for an atom, index 0 is
 * the ground state |g> and index 1 is the excited state |e>. A bosonic mode
 * of dimension n_max + 1 uses index n for the Fock state |n>. Amplitudes are
 * stored with the first-listed subsystem as the most significant digit.
 */

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ctele/errors.hpp"
#include "ctele/random.hpp"

namespace ctele {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Label = std::string;

inline constexpr std::size_t kGround = 0;
inline constexpr std::size_t kExcited = 1;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kDefaultProbFloor = 1e-14;

/// Label of the n-th protocol atom ("1", "2", ...).
inline Label atom_label(int n) { return std::to_string(n); }

struct Subsystem {
    Label label;
    std::size_t dim = 2;

    friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

class SubsystemLayout {
  public:
    SubsystemLayout() = default;
    explicit SubsystemLayout(std::vector<Subsystem> subsystems);

    /// Layout of two-level atoms with the given labels.
    static SubsystemLayout atoms(const std::vector<Label>& labels);

    std::size_t size() const { return subsystems_.size(); }
    const Subsystem& operator[](std::size_t i) const { return subsystems_[i]; }
    const std::vector<Subsystem>& subsystems() const { return subsystems_; }

    std::size_t total_dim() const { return total_dim_; }
    bool contains(std::string_view label) const;
    /// Position of a label in the ordering; throws LayoutError if absent.
    std::size_t position(std::string_view label) const;
    /// Stride of subsystem i in the flat amplitude index.
    std::size_t stride(std::size_t i) const { return strides_[i]; }
    std::vector<Label> labels() const;

    /// Concatenation; throws LayoutError on a shared label.
    SubsystemLayout concat(const SubsystemLayout& other) const;
    /// Layout without the given labels, original order kept.
    SubsystemLayout without(std::span<const Label> labels) const;

    friend bool operator==(const SubsystemLayout& a, const SubsystemLayout& b) {
        return a.subsystems_ == b.subsystems_;
    }

  private:
    std::vector<Subsystem> subsystems_;
    std::vector<std::size_t> strides_;
    std::size_t total_dim_ = 1;
};

/// Immutable pure state. Every operation returns a new value.
class StateVector {
  public:
    StateVector(SubsystemLayout layout, Vector amplitudes);

    /// Product basis state. `digits[i]` is the basis index of subsystem i.
    static StateVector basis(SubsystemLayout layout, const std::vector<std::size_t>& digits);
    /// Atom basis state from a g/e string, e.g. "gge".
    static StateVector atoms(const std::vector<Label>& labels, std::string_view ge);

    const SubsystemLayout& layout() const { return layout_; }
    const Vector& amplitudes() const { return amplitudes_; }
    Complex amplitude(const std::vector<std::size_t>& digits) const;
    /// Amplitude of an all-atom basis state, e.g. amplitude("gggggge").
    Complex amplitude(std::string_view ge) const;

    double norm_squared() const { return amplitudes_.squaredNorm(); }
    bool is_normalized(double tol = kNormTolerance) const;
    /// Throws NormError on a zero vector.
    StateVector normalized() const;

  private:
    SubsystemLayout layout_;
    Vector amplitudes_;
};

/// Square matrix acting on an ordered subset of subsystems.
class LocalOperator {
  public:
    LocalOperator(std::vector<Label> targets, Matrix matrix);

    /// Same as the constructor but additionally requires U^dagger U = I.
    static LocalOperator unitary(std::vector<Label> targets, Matrix matrix,
                                 double tol = kNormTolerance);

    const std::vector<Label>& targets() const { return targets_; }
    const Matrix& matrix() const { return matrix_; }
    bool tagged_unitary() const { return unitary_; }

    bool is_hermitian(double tol = kNormTolerance) const;
    bool is_unitary(double tol = kNormTolerance) const;

    /// Operator product (this after rhs) on identical targets.
    LocalOperator operator*(const LocalOperator& rhs) const;

  private:
    std::vector<Label> targets_;
    Matrix matrix_;
    bool unitary_ = false;
};

class DensityMatrix {
  public:
    /// Validates Hermiticity and unit trace within kNormTolerance.
    DensityMatrix(SubsystemLayout layout, Matrix matrix);

    const SubsystemLayout& layout() const { return layout_; }
    const Matrix& matrix() const { return matrix_; }
    double purity() const;

  private:
    SubsystemLayout layout_;
    Matrix matrix_;
};

/// One outcome of a projective measurement in the g/e basis.
struct Branch {
    std::string outcome; // one g/e character per measured target, in target order
    double probability = 0.0;
    StateVector state;   // renormalized, measured subsystems pinned
};

StateVector tensor(std::span<const StateVector> states);
StateVector tensor(std::initializer_list<StateVector> states);

/// Applies op on its targets and identity elsewhere. No renormalization.
StateVector apply(const StateVector& state, const LocalOperator& op);

/// Samples a g/e-basis measurement of `targets` with Born probabilities.
Branch measure(const StateVector& state, std::span<const Label> targets, Rng& rng);

/// Every outcome with probability above `prob_floor`, ordered g < e
/// lexicographically over `targets`.
std::vector<Branch> branch_enumerate(const StateVector& state, std::span<const Label> targets,
                                     double prob_floor = kDefaultProbFloor);

/// Projects `targets` onto `outcome` and returns the renormalized state of
/// the remaining subsystems. Throws NormError when the projection vanishes.
StateVector condition(const StateVector& state, std::span<const Label> targets,
                      std::string_view outcome);

/// |<a|b>|^2. Layouts must be identical and both states normalized.
double fidelity(const StateVector& a, const StateVector& b);

/// Reduced density matrix of `keep`, ordered as given.
DensityMatrix partial_trace(const StateVector& state, std::span<const Label> keep);

/// <ref|rho|ref>.
double reduced_fidelity(const DensityMatrix& rho, const StateVector& ref);

/// Renames subsystems; labels absent from `mapping` are kept.
StateVector relabel(const StateVector& state, const std::map<Label, Label>& mapping);

/// Same subsystems in a new order.
StateVector reorder(const StateVector& state, std::span<const Label> order);

} // namespace ctele
