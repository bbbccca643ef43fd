#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dwell/entanglement.hpp"
#include "dwell/fock.hpp"
#include "dwell/lindblad.hpp"

namespace dwell {

// The two wells couple to the cavity only through the symmetric ("bright")
// combination s = (c + d)/√2; the antisymmetric ("dark") combination
// r = (c - d)/√2 drops out entirely. Fock states of r with the cavity in
// vacuum are therefore stationary under both the Hamiltonian and the photon
// loss channel, and the steady state is a mixture over the conserved
// dark-quantum number.

namespace detail {

inline void check_weak_labels(const ModeLayout& layout, const char* where) {
    if (layout.n_modes() != 3 || !layout.has("a") || !layout.has("c") || !layout.has("d"))
        throw DomainError(std::string(where) + ": layout must carry modes a, c, d");
}

}  // namespace detail

inline SparseOperator bright_mode_annihilation(const ModeLayout& layout) {
    detail::check_weak_labels(layout, "bright_mode_annihilation");
    return std::sqrt(0.5) * (annihilation(layout, "c") + annihilation(layout, "d"));
}

inline SparseOperator dark_mode_annihilation(const ModeLayout& layout) {
    detail::check_weak_labels(layout, "dark_mode_annihilation");
    return std::sqrt(0.5) * (annihilation(layout, "c") - annihilation(layout, "d"));
}

// r†r = (n_c + n_d)/2 - (c†d + d†c)/2, exact on every full total-occupation
// sector of the truncated space.
inline SparseOperator dark_mode_number(const ModeLayout& layout) {
    detail::check_weak_labels(layout, "dark_mode_number");
    auto r = dark_mode_annihilation(layout);
    return r.adjoint() * r;
}

// n-quantum dark state: |0>_a ⊗ (r†)^n/√(n!) |vac>, expanded over the well
// basis as 2^{-n/2} Σ_j (-1)^j √C(n,j) |n-j>_c |j>_d.
inline StateVector dark_state_weak(const ModeLayout& layout, int n) {
    detail::check_weak_labels(layout, "dark_state_weak");
    if (n < 0) throw DomainError("dark_state_weak: n must be >= 0");
    const int dc = layout.mode_dim(layout.position("c"));
    const int dd = layout.mode_dim(layout.position("d"));
    if (n >= dc || n >= dd)
        throw DomainError("dark_state_weak: n = " + std::to_string(n) +
                          " does not fit in well dimensions " + std::to_string(dc) + "x" +
                          std::to_string(dd));
    DenseVector v = DenseVector::Zero(layout.dim());
    const double scale = std::pow(2.0, -0.5 * n);
    for (int j = 0; j <= n; ++j) {
        const double amp = scale * std::sqrt(detail::binomial_coefficient(n, j));
        v(layout.basis_index({0, n - j, j})) = Complex(j % 2 == 0 ? amp : -amp, 0.0);
    }
    return StateVector(std::move(v));
}

// ‖Hψ‖ for a normalized ψ: zero-energy (dark) states of the coupled system.
inline double hamiltonian_residual(const SparseOperator& hamiltonian, const StateVector& psi) {
    if (hamiltonian.dim() != psi.dim())
        throw DomainError("hamiltonian_residual: dimension mismatch");
    return hamiltonian.apply(psi.amplitudes()).norm();
}

// Frobenius norm of the full master-equation derivative of |ψ><ψ|; the
// decisive stationarity test (also zero for nonzero-energy eigenstates).
inline double lindblad_residual(const SparseOperator& hamiltonian,
                                const std::vector<CollapseChannel>& collapse,
                                const StateVector& psi) {
    return lindblad_rhs(hamiltonian, collapse, DensityMatrix::pure(psi)).norm();
}

struct DarkComponent {
    int n = 0;           // dark-mode quantum number
    double weight = 0.0; // steady-state population of |D_n>
};

// Predicted steady-state decomposition for a cavity-vacuum initial state:
// the dark-quantum number is conserved, every bright or photonic excitation
// decays, and cross-sector coherences die out because their two sides carry
// different bright content. Valid when the initial state has no coherence
// between equal-bright-content components of different dark sectors (Fock
// inputs in particular).
inline std::vector<DarkComponent> predict_steady_mixture(const ModeLayout& layout,
                                                         const StateVector& psi0,
                                                         double weight_floor = 1e-12) {
    detail::check_weak_labels(layout, "predict_steady_mixture");
    if (psi0.dim() != layout.dim()) throw DomainError("predict_steady_mixture: dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > kStateTol)
        throw DomainError("predict_steady_mixture: initial state must be normalized");

    const int pa = layout.position("a"), pc = layout.position("c"), pd = layout.position("d");
    const int da = layout.mode_dim(pa), dc = layout.mode_dim(pc), dd = layout.mode_dim(pd);
    const int sa = layout.stride(pa), sc = layout.stride(pc), sd = layout.stride(pd);

    // Restrict to the cavity-vacuum block, indexed as ic * dd + id.
    DenseVector psi_cd = DenseVector::Zero(dc * dd);
    for (int ic = 0; ic < dc; ++ic)
        for (int id = 0; id < dd; ++id) psi_cd(ic * dd + id) = psi0.amplitude(ic * sc + id * sd);
    if (std::abs(psi_cd.norm() - 1.0) > kStateTol)
        throw DomainError(
            "predict_steady_mixture: defined for cavity-vacuum initial states only");

    // Well sectors that are cut by the truncation cannot be decomposed
    // faithfully; reject initial states that populate them.
    const int t_cap = std::min(dc, dd) - 1;
    for (int ic = 0; ic < dc; ++ic)
        for (int id = 0; id < dd; ++id)
            if (ic + id > t_cap && std::abs(psi_cd(ic * dd + id)) > kSparseDropTol)
                throw DomainError("predict_steady_mixture: initial state reaches well sector " +
                                  std::to_string(ic + id) + ", beyond the truncated basis");

    // Dense cavity-vacuum block of r†r (photon-number conserving, so its
    // nonzeros never leave the block).
    DenseMatrix block = DenseMatrix::Zero(dc * dd, dc * dd);
    const SparseOperator num = dark_mode_number(layout);
    const SparseMatrix& m = num.matrix();
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            if (da > 1 && ((it.row() / sa) % da != 0 || (it.col() / sa) % da != 0)) continue;
            const int ri = ((it.row() / sc) % dc) * dd + (it.row() / sd) % dd;
            const int ci = ((it.col() / sc) % dc) * dd + (it.col() / sd) % dd;
            block(ri, ci) = it.value();
        }

    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(block);
    std::map<int, double> weights;
    for (int k = 0; k < es.eigenvalues().size(); ++k) {
        const double w = std::norm(es.eigenvectors().col(k).dot(psi_cd));
        if (w < weight_floor) continue;
        const double lambda = es.eigenvalues()(k);
        const int n = static_cast<int>(std::lround(lambda));
        if (std::abs(lambda - n) > 1e-9)
            throw NumericError("predict_steady_mixture: non-integer dark eigenvalue " +
                               std::to_string(lambda));
        weights[n] += w;
    }

    std::vector<DarkComponent> out;
    for (const auto& [n, w] : weights)
        if (w >= weight_floor) out.push_back({n, w});
    return out;
}

// Σ w_n |D_n><D_n| over the full layout (cavity in vacuum).
inline DensityMatrix predicted_steady_density(const ModeLayout& layout, const StateVector& psi0) {
    auto mixture = predict_steady_mixture(layout, psi0);
    DenseMatrix rho = DenseMatrix::Zero(layout.dim(), layout.dim());
    double total = 0.0;
    for (const auto& [n, w] : mixture) {
        const StateVector dn = dark_state_weak(layout, n);
        rho.noalias() += w * (dn.amplitudes() * dn.amplitudes().adjoint());
        total += w;
    }
    // Weights sum to 1 up to the floor cutoff; renormalize the tail away.
    rho /= total;
    return DensityMatrix::from_matrix(std::move(rho));
}

}  // namespace dwell
