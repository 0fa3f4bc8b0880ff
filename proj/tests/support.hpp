#pragma once

#include <cmath>
#include <vector>

#include "ctele/protocol.hpp"
#include "ctele/statevec.hpp"

namespace ctele::testing {

inline Vector random_vector(std::size_t dim, Rng& rng) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = {rng.normal(), rng.normal()};
    return v / v.norm();
}

inline StateVector random_state(const std::vector<Label>& labels, Rng& rng) {
    auto layout = SubsystemLayout::atoms(labels);
    return {layout, random_vector(layout.total_dim(), rng)};
}

// a|gg> + b|ge> + c|eg> + d|ee> on the given atoms.
inline StateVector two_atom(const InputState& in, const Label& first, const Label& second) {
    Vector v(4);
    v << in.a, in.b, in.c, in.d;
    return {SubsystemLayout::atoms({first, second}), v};
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

} // namespace ctele::testing
