#include "ctele/dynamics.hpp"

#include <cmath>

#include <fmt/format.h>

namespace ctele {

namespace {

const Complex kI{0.0, 1.0};

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        }
    }
    return out;
}

Matrix id(Eigen::Index n) { return Matrix::Identity(n, n); }

void require_pair(const Label& j, const Label& k) {
    if (j == k) throw LayoutError(fmt::format("atom pair needs distinct labels, got '{}' twice", j));
}

// R|x> in the drive-rotated basis.
Vector rotated(std::size_t level, double omega_t) {
    Vector v(2);
    const double c = std::cos(omega_t);
    const double s = std::sin(omega_t);
    v(static_cast<Eigen::Index>(level)) = c;
    v(static_cast<Eigen::Index>(1 - level)) = -kI * s;
    return v;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

} // namespace

void PhysicalParams::validate() const {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("coupling g must be >= 0");
    if (delta == 0.0 || !std::isfinite(delta)) throw ConfigError("detuning must be nonzero");
    if (!(omega_rabi >= 0.0) || !std::isfinite(omega_rabi)) throw ConfigError("Rabi frequency must be >= 0");
    if (t_radiative && !(*t_radiative > 0.0)) throw ConfigError("radiative lifetime must be positive");
    if (t_cavity && !(*t_cavity > 0.0)) throw ConfigError("cavity lifetime must be positive");
}

PhysicalParams PhysicalParams::from_ratios(double g, double delta_ratio, double omega_ratio) {
    PhysicalParams p;
    p.g = g;
    p.delta = delta_ratio * g;
    p.omega_rabi = omega_ratio * p.delta;
    p.validate();
    return p;
}

void InteractionSchedule::validate() const {
    if (!std::isfinite(lambda_t) || lambda_t < 0.0) throw ConfigError("lambda*t must be finite and >= 0");
    if (!std::isfinite(omega_t) || omega_t < 0.0) throw ConfigError("Omega*t must be finite and >= 0");
}

void FockConfig::validate() const {
    if (initial_fock > fock_cutoff) {
        throw ConfigError(fmt::format("initial Fock state {} above cutoff {}", initial_fock, fock_cutoff));
    }
}

namespace ops {

Matrix sigma_plus() {
    Matrix m = Matrix::Zero(2, 2);
    m(kExcited, kGround) = 1.0;
    return m;
}

Matrix sigma_minus() { return sigma_plus().adjoint(); }

Matrix sigma_z_half() {
    Matrix m = Matrix::Zero(2, 2);
    m(kExcited, kExcited) = 0.5;
    m(kGround, kGround) = -0.5;
    return m;
}

Matrix annihilation(std::size_t fock_cutoff) {
    const auto n = static_cast<Eigen::Index>(fock_cutoff + 1);
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

} // namespace ops

LocalOperator effective_pair_operator(const Label& j, const Label& k, const InteractionSchedule& sched) {
    require_pair(j, k);
    sched.validate();
    const double lt = sched.lambda_t;
    const double wt = sched.omega_t;
    const Complex prefactor = std::exp(-kI * lt);

    Matrix m(4, 4);
    for (std::size_t xj : {kGround, kExcited}) {
        for (std::size_t xk : {kGround, kExcited}) {
            const Vector kept = kron(rotated(xj, wt), rotated(xk, wt));
            const Vector flipped = kron(rotated(1 - xj, wt), rotated(1 - xk, wt));
            m.col(static_cast<Eigen::Index>(2 * xj + xk)) =
                prefactor * (std::cos(lt) * kept - kI * std::sin(lt) * flipped);
        }
    }
    return LocalOperator::unitary({j, k}, std::move(m));
}

StateVector effective_pair_map_closed_form(const StateVector& state2, const InteractionSchedule& sched) {
    const auto& layout = state2.layout();
    if (layout.size() != 2 || layout[0].dim != 2 || layout[1].dim != 2) {
        throw LayoutError("closed-form pair map needs a state of exactly two atoms");
    }
    return apply(state2, effective_pair_operator(layout[0].label, layout[1].label, sched));
}

LocalOperator effective_hamiltonian(const Label& j, const Label& k, double lambda) {
    require_pair(j, k);
    const Matrix sp = ops::sigma_plus();
    const Matrix sm = ops::sigma_minus();
    const Matrix sp_j = kron(sp, id(2));
    const Matrix sp_k = kron(id(2), sp);
    const Matrix sm_j = kron(sm, id(2));
    const Matrix sm_k = kron(id(2), sm);

    // Ordered pairs (j,k) and (k,j).
    const Matrix pair_terms = (sp_j * sp_k + sp_j * sm_k) + (sp_k * sp_j + sp_k * sm_j);
    // |e><e| + |g><g| summed over both atoms.
    const Matrix populations = 2.0 * id(4);

    Matrix h = 0.5 * lambda * (populations + pair_terms + pair_terms.adjoint());
    return LocalOperator({j, k}, std::move(h));
}

LocalOperator drive_hamiltonian(const Label& j, const Label& k, double omega) {
    require_pair(j, k);
    const Matrix x = ops::sigma_plus() + ops::sigma_minus();
    Matrix h = omega * (kron(x, id(2)) + kron(id(2), x));
    return LocalOperator({j, k}, std::move(h));
}

LocalOperator propagator(const LocalOperator& hamiltonian, double t) {
    const Matrix& h = hamiltonian.matrix();
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (!hamiltonian.is_hermitian(kNormTolerance * scale)) {
        throw HermiticityError("propagator needs a Hermitian generator");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    if (eig.info() != Eigen::Success) throw HermiticityError("eigendecomposition failed");
    const Eigen::VectorXd& energies = eig.eigenvalues();
    Vector phases(energies.size());
    for (Eigen::Index i = 0; i < energies.size(); ++i) phases(i) = std::exp(-kI * (energies(i) * t));
    Matrix u = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
    return LocalOperator::unitary(hamiltonian.targets(), std::move(u));
}

LocalOperator factorized_pair_propagator(const Label& j, const Label& k, double lambda, double omega,
                                         double t) {
    return propagator(drive_hamiltonian(j, k, omega), t) * propagator(effective_hamiltonian(j, k, lambda), t);
}

LocalOperator factorized_pair_propagator(const Label& j, const Label& k, const InteractionSchedule& sched) {
    sched.validate();
    return factorized_pair_propagator(j, k, sched.lambda_t, sched.omega_t, 1.0);
}

LocalOperator full_model_hamiltonian(const Label& j, const Label& k, const Label& cavity,
                                     std::size_t fock_cutoff, const PhysicalParams& params, FrameSign sign) {
    require_pair(j, k);
    if (cavity == j || cavity == k) throw LayoutError("cavity label collides with an atom label");
    params.validate();
    const Matrix a = ops::annihilation(fock_cutoff);
    const Matrix ad = a.adjoint();
    const auto nc = a.rows();
    const Matrix sp = ops::sigma_plus();
    const Matrix sm = ops::sigma_minus();
    const Matrix x = sp + sm;
    const auto on_j = [&](const Matrix& atom, const Matrix& field) { return kron(kron(atom, id(2)), field); };
    const auto on_k = [&](const Matrix& atom, const Matrix& field) { return kron(kron(id(2), atom), field); };

    const double photon_coeff = sign == FrameSign::minus_delta ? -params.delta : params.delta;
    Matrix h = photon_coeff * kron(id(4), ad * a);
    h += params.g * (on_j(sm, ad) + on_j(sp, a) + on_k(sm, ad) + on_k(sp, a));
    h += params.omega_rabi * (on_j(x, id(nc)) + on_k(x, id(nc)));
    return LocalOperator({j, k, cavity}, std::move(h));
}

FullModelResult full_model_map(const Label& j, const Label& k, const Label& cavity,
                               const PhysicalParams& params, double t, const StateVector& initial,
                               FrameSign sign) {
    const auto& layout = initial.layout();
    const std::size_t cav_pos = layout.position(cavity);
    const std::size_t cav_dim = layout[cav_pos].dim;
    for (const auto& atom : {j, k}) {
        if (layout[layout.position(atom)].dim != 2) throw ShapeError(fmt::format("'{}' is not a two-level atom", atom));
    }

    const auto u = propagator(full_model_hamiltonian(j, k, cavity, cav_dim - 1, params, sign), t);
    StateVector out = apply(initial, u);

    const std::array<Label, 1> keep{cavity};
    const auto photons = partial_trace(out, keep);
    const double top = photons.matrix()(static_cast<Eigen::Index>(cav_dim - 1),
                                        static_cast<Eigen::Index>(cav_dim - 1)).real();
    return {std::move(out), top, top > 1e-6};
}

StateVector fock_state(const Label& cavity, const FockConfig& fock) {
    fock.validate();
    return StateVector::basis(SubsystemLayout({{cavity, fock.fock_cutoff + 1}}), {fock.initial_fock});
}

StateVector two_cavity_step(const StateVector& state, const InteractionSchedule& sched,
                            const std::array<AtomPair, 2>& pairs) {
    StateVector out = state;
    for (const auto& [j, k] : pairs) out = apply(out, effective_pair_operator(j, k, sched));
    return out;
}

} // namespace ctele
