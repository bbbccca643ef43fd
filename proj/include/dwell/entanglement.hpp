#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dwell/fock.hpp"

namespace dwell {

namespace detail {

inline double binomial_coefficient(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c *= double(n - k + i) / double(i);
    return c;
}

// Offsets of every occupation combination of a mode subset, enumerated in
// row-major order (layout order, last mode fastest). A full basis index
// decomposes uniquely as subset_offset + complement_offset.
inline std::vector<int> subset_offsets(const ModeLayout& layout, const std::vector<int>& modes) {
    std::vector<int> offs{0};
    for (int m : modes) {
        std::vector<int> next;
        next.reserve(offs.size() * layout.mode_dim(m));
        for (int base : offs)
            for (int n = 0; n < layout.mode_dim(m); ++n) next.push_back(base + n * layout.stride(m));
        offs.swap(next);
    }
    return offs;
}

// Resolves labels to mode positions in layout order; validates existence and
// uniqueness.
inline std::vector<int> resolve_modes(const ModeLayout& layout,
                                      const std::vector<std::string>& labels,
                                      const char* where) {
    if (labels.empty()) throw DomainError(std::string(where) + ": empty mode list");
    std::vector<int> positions;
    for (const auto& label : labels) positions.push_back(layout.position(label));
    std::sort(positions.begin(), positions.end());
    if (std::adjacent_find(positions.begin(), positions.end()) != positions.end())
        throw DomainError(std::string(where) + ": duplicate mode label");
    return positions;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Partial trace and partial transpose
// ---------------------------------------------------------------------------

struct ReducedDensity {
    DenseMatrix matrix;
    ModeLayout layout;
};

// Traces out every mode not listed in `keep`. Kept modes stay in layout order
// regardless of the order given.
inline ReducedDensity partial_trace(const DenseMatrix& rho, const ModeLayout& layout,
                                    const std::vector<std::string>& keep) {
    if (rho.rows() != rho.cols() || rho.rows() != layout.dim())
        throw DomainError("partial_trace: matrix does not match layout dimension");
    auto keep_pos = detail::resolve_modes(layout, keep, "partial_trace");

    std::vector<Mode> kept_modes;
    std::vector<int> traced_pos;
    for (int m = 0; m < layout.n_modes(); ++m) {
        if (std::binary_search(keep_pos.begin(), keep_pos.end(), m))
            kept_modes.push_back(layout.mode(m));
        else
            traced_pos.push_back(m);
    }

    const auto keep_offs = detail::subset_offsets(layout, keep_pos);
    const auto trace_offs = detail::subset_offsets(layout, traced_pos);
    const int d = static_cast<int>(keep_offs.size());

    DenseMatrix out = DenseMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Complex sum(0.0, 0.0);
            for (int t : trace_offs) sum += rho(keep_offs[i] + t, keep_offs[j] + t);
            out(i, j) = sum;
        }
    return ReducedDensity{std::move(out), ModeLayout(std::move(kept_modes))};
}

inline ReducedDensity partial_trace(const DensityMatrix& rho, const ModeLayout& layout,
                                    const std::vector<std::string>& keep) {
    return partial_trace(rho.matrix(), layout, keep);
}

// Transposes the listed modes' indices, leaving the rest untouched.
inline DenseMatrix partial_transpose(const DenseMatrix& rho, const ModeLayout& layout,
                                     const std::vector<std::string>& transposed) {
    if (rho.rows() != rho.cols() || rho.rows() != layout.dim())
        throw DomainError("partial_transpose: matrix does not match layout dimension");
    auto t_pos = detail::resolve_modes(layout, transposed, "partial_transpose");
    std::vector<int> rest;
    for (int m = 0; m < layout.n_modes(); ++m)
        if (!std::binary_search(t_pos.begin(), t_pos.end(), m)) rest.push_back(m);

    const auto a_offs = detail::subset_offsets(layout, rest);   // untouched part
    const auto b_offs = detail::subset_offsets(layout, t_pos);  // transposed part

    DenseMatrix out(layout.dim(), layout.dim());
    for (int ia : a_offs)
        for (int ja : a_offs)
            for (int ib : b_offs)
                for (int jb : b_offs) out(ia + jb, ja + ib) = rho(ia + ib, ja + jb);
    return out;
}

// ---------------------------------------------------------------------------
// Entanglement measures
// ---------------------------------------------------------------------------

inline constexpr double kEigenvalueFloor = 1e-12;

// Von Neumann entropy in nats. Eigenvalues below the floor are treated as
// exact zeros; genuinely negative ones indicate an invalid state.
inline double von_neumann_entropy(const DenseMatrix& rho, double eig_floor = kEigenvalueFloor) {
    if (rho.rows() != rho.cols()) throw DomainError("von_neumann_entropy: matrix not square");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (rho + rho.adjoint()),
                                                  Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double lambda = es.eigenvalues()(i);
        if (lambda < -kStateTol)
            throw DomainError("von_neumann_entropy: negative eigenvalue " +
                              std::to_string(lambda));
        if (lambda > eig_floor) s -= lambda * std::log(lambda);
    }
    return s;
}

inline double von_neumann_entropy(const DensityMatrix& rho,
                                  double eig_floor = kEigenvalueFloor) {
    return von_neumann_entropy(rho.matrix(), eig_floor);
}

// Logarithmic negativity in bits: log2 of the trace norm of the partial
// transpose, clamped at zero (PPT states give exactly ‖·‖₁ = 1 up to
// roundoff, which would otherwise produce tiny negative values).
inline double logarithmic_negativity(const DenseMatrix& rho, const ModeLayout& layout,
                                     const std::vector<std::string>& transposed) {
    DenseMatrix pt = partial_transpose(rho, layout, transposed);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (pt + pt.adjoint()),
                                                  Eigen::EigenvaluesOnly);
    const double trace_norm = es.eigenvalues().cwiseAbs().sum();
    return std::max(0.0, std::log2(trace_norm));
}

inline double logarithmic_negativity(const DensityMatrix& rho, const ModeLayout& layout,
                                     const std::vector<std::string>& transposed) {
    return logarithmic_negativity(rho.matrix(), layout, transposed);
}

// Closed form for the entanglement of formation of the n-quantum
// antisymmetric dark state under the left/right well split: the reduced state
// is binomially distributed, so E_F = -Σ_j p_j ln p_j with p_j = C(n,j)/2^n
// (nats).
inline double dark_state_entanglement_of_formation(int n) {
    if (n < 0) throw DomainError("dark_state_entanglement_of_formation: n must be >= 0");
    double s = 0.0;
    const double scale = std::pow(2.0, -n);
    for (int j = 0; j <= n; ++j) {
        const double p = detail::binomial_coefficient(n, j) * scale;
        s -= p * std::log(p);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Two-mode entanglement witness  W = <n_c n_d> - |<c d†>|²
// Negative values certify entanglement between the wells; product states
// satisfy W >= 0 by Cauchy-Schwarz.
// ---------------------------------------------------------------------------

struct WitnessOperators {
    SparseOperator nc_nd;   // n_c n_d
    SparseOperator c_ddag;  // c d†
};

inline WitnessOperators make_witness_operators(const ModeLayout& layout,
                                               const std::string& left = "c",
                                               const std::string& right = "d") {
    return WitnessOperators{
        number_operator(layout, left) * number_operator(layout, right),
        annihilation(layout, left) * creation(layout, right),
    };
}

inline double entanglement_witness(const DenseMatrix& rho, const WitnessOperators& ops) {
    const double corr = std::real(expectation(ops.nc_nd, rho));
    const Complex exch = expectation(ops.c_ddag, rho);
    return corr - std::norm(exch);
}

inline double entanglement_witness(const DensityMatrix& rho, const WitnessOperators& ops) {
    return entanglement_witness(rho.matrix(), ops);
}

inline double entanglement_witness(const DenseMatrix& rho, const ModeLayout& layout) {
    return entanglement_witness(rho, make_witness_operators(layout));
}

inline double entanglement_witness(const DensityMatrix& rho, const ModeLayout& layout) {
    return entanglement_witness(rho.matrix(), make_witness_operators(layout));
}

}  // namespace dwell
