#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "dwell/errors.hpp"

namespace dwell {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;

// Entries below this magnitude are dropped when operators are built or combined,
// so products do not accumulate numerical dust.
inline constexpr double kSparseDropTol = 1e-14;
// Tolerance for "this vector/matrix is a physical state" checks.
inline constexpr double kStateTol = 1e-8;

// ---------------------------------------------------------------------------
// ModeLayout: ordered bosonic modes with per-mode truncation dims.
// Basis ordering is row-major with the last mode varying fastest; this
// ordering is frozen so emitted data files are stable.
// ---------------------------------------------------------------------------

struct Mode {
    std::string label;
    int dim;  // number of levels, i.e. n_max + 1
};

class ModeLayout {
public:
    ModeLayout(std::initializer_list<Mode> modes) : ModeLayout(std::vector<Mode>(modes)) {}

    explicit ModeLayout(std::vector<Mode> modes) : modes_(std::move(modes)) {
        if (modes_.empty()) throw DomainError("ModeLayout: need at least one mode");
        for (const auto& m : modes_) {
            if (m.dim < 1) throw DomainError("ModeLayout: mode '" + m.label + "' has dim < 1");
            if (m.label.empty()) throw DomainError("ModeLayout: empty mode label");
        }
        for (std::size_t i = 0; i < modes_.size(); ++i)
            for (std::size_t j = i + 1; j < modes_.size(); ++j)
                if (modes_[i].label == modes_[j].label)
                    throw DomainError("ModeLayout: duplicate mode label '" + modes_[i].label + "'");
        strides_.resize(modes_.size());
        long long d = 1;
        for (int i = static_cast<int>(modes_.size()) - 1; i >= 0; --i) {
            strides_[i] = static_cast<int>(d);
            d *= modes_[i].dim;
            if (d > (1LL << 30)) throw ResourceError("ModeLayout: total dimension too large");
        }
        dim_ = static_cast<int>(d);
    }

    int n_modes() const { return static_cast<int>(modes_.size()); }
    int dim() const { return dim_; }
    const Mode& mode(int i) const { return modes_[i]; }
    int mode_dim(int i) const { return modes_[i].dim; }
    int stride(int i) const { return strides_[i]; }

    bool has(const std::string& label) const {
        return std::any_of(modes_.begin(), modes_.end(),
                           [&](const Mode& m) { return m.label == label; });
    }

    int position(const std::string& label) const {
        for (std::size_t i = 0; i < modes_.size(); ++i)
            if (modes_[i].label == label) return static_cast<int>(i);
        throw DomainError("ModeLayout: unknown mode label '" + label + "'");
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        out.reserve(modes_.size());
        for (const auto& m : modes_) out.push_back(m.label);
        return out;
    }

    int basis_index(const std::vector<int>& occupations) const {
        if (static_cast<int>(occupations.size()) != n_modes())
            throw DomainError("basis_index: occupation tuple has wrong length");
        int idx = 0;
        for (int i = 0; i < n_modes(); ++i) {
            if (occupations[i] < 0 || occupations[i] >= modes_[i].dim)
                throw DomainError("basis_index: occupation out of range for mode '" +
                                  modes_[i].label + "'");
            idx += occupations[i] * strides_[i];
        }
        return idx;
    }

    std::vector<int> occupations_of(int index) const {
        if (index < 0 || index >= dim_) throw DomainError("occupations_of: index out of range");
        std::vector<int> occ(modes_.size());
        for (int i = 0; i < n_modes(); ++i) {
            occ[i] = (index / strides_[i]) % modes_[i].dim;
        }
        return occ;
    }

    int total_occupation(int index) const {
        int total = 0;
        for (int i = 0; i < n_modes(); ++i) total += (index / strides_[i]) % modes_[i].dim;
        return total;
    }

    bool operator==(const ModeLayout& other) const {
        if (n_modes() != other.n_modes()) return false;
        for (int i = 0; i < n_modes(); ++i)
            if (modes_[i].label != other.modes_[i].label || modes_[i].dim != other.modes_[i].dim)
                return false;
        return true;
    }

private:
    std::vector<Mode> modes_;
    std::vector<int> strides_;
    int dim_ = 0;
};

// ---------------------------------------------------------------------------
// SparseOperator: immutable complex sparse matrix on a layout's Hilbert space.
// ---------------------------------------------------------------------------

class SparseOperator {
public:
    SparseOperator() = default;  // empty placeholder (dim 0)

    explicit SparseOperator(SparseMatrix m) : mat_(std::move(m)) {
        if (mat_.rows() != mat_.cols()) throw DomainError("SparseOperator: matrix not square");
        prune_(mat_);
    }

    static SparseOperator zero(int dim) {
        check_dim_(dim);
        return SparseOperator(SparseMatrix(dim, dim));
    }

    static SparseOperator identity(int dim) {
        check_dim_(dim);
        SparseMatrix m(dim, dim);
        m.setIdentity();
        return SparseOperator(std::move(m));
    }

    static SparseOperator from_triplets(int dim, const std::vector<Triplet>& entries) {
        check_dim_(dim);
        for (const auto& t : entries)
            if (t.row() < 0 || t.row() >= dim || t.col() < 0 || t.col() >= dim)
                throw DomainError("SparseOperator: entry index out of range");
        SparseMatrix m(dim, dim);
        m.setFromTriplets(entries.begin(), entries.end());
        return SparseOperator(std::move(m));
    }

    int dim() const { return static_cast<int>(mat_.rows()); }
    int nnz() const { return static_cast<int>(mat_.nonZeros()); }
    const SparseMatrix& matrix() const { return mat_; }

    Complex entry(int row, int col) const { return mat_.coeff(row, col); }

    SparseOperator adjoint() const { return SparseOperator(SparseMatrix(mat_.adjoint())); }

    SparseOperator operator+(const SparseOperator& other) const {
        check_same_dim_(other);
        return SparseOperator(SparseMatrix(mat_ + other.mat_));
    }

    SparseOperator operator-(const SparseOperator& other) const {
        check_same_dim_(other);
        return SparseOperator(SparseMatrix(mat_ - other.mat_));
    }

    SparseOperator operator*(const SparseOperator& other) const {
        check_same_dim_(other);
        return SparseOperator(SparseMatrix(mat_ * other.mat_));
    }

    SparseOperator scaled(Complex factor) const { return SparseOperator(SparseMatrix(factor * mat_)); }

    DenseVector apply(const DenseVector& v) const {
        if (v.size() != mat_.cols()) throw DomainError("SparseOperator: vector dimension mismatch");
        return mat_ * v;
    }

    // A * M and M * A for dense M (density-matrix plumbing).
    DenseMatrix apply_left(const DenseMatrix& m) const {
        if (m.rows() != mat_.cols()) throw DomainError("SparseOperator: matrix dimension mismatch");
        return mat_ * m;
    }
    DenseMatrix apply_right(const DenseMatrix& m) const {
        if (m.cols() != mat_.rows()) throw DomainError("SparseOperator: matrix dimension mismatch");
        return m * mat_;
    }

    DenseMatrix dense() const { return DenseMatrix(mat_); }

    double max_abs_entry() const {
        double mx = 0.0;
        for (int k = 0; k < mat_.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(mat_, k); it; ++it)
                mx = std::max(mx, std::abs(it.value()));
        return mx;
    }

private:
    static void check_dim_(int dim) {
        if (dim < 1) throw DomainError("SparseOperator: dimension must be positive");
    }
    void check_same_dim_(const SparseOperator& other) const {
        if (dim() != other.dim()) throw DomainError("SparseOperator: dimension mismatch");
    }
    static void prune_(SparseMatrix& m) {
        m.prune([](const SparseMatrix::StorageIndex&, const SparseMatrix::StorageIndex&,
                   const Complex& v) { return std::abs(v) >= kSparseDropTol; });
        m.makeCompressed();
    }

    SparseMatrix mat_;
};

inline SparseOperator operator*(Complex factor, const SparseOperator& op) { return op.scaled(factor); }
inline SparseOperator operator*(double factor, const SparseOperator& op) { return op.scaled(Complex(factor, 0.0)); }

// Max-norm of A - A†; zero for Hermitian operators.
inline double hermiticity_defect(const SparseOperator& op) {
    return (op - op.adjoint()).max_abs_entry();
}

// Max-norm of AB - BA.
inline double commutator_norm(const SparseOperator& a, const SparseOperator& b) {
    return (a * b - b * a).max_abs_entry();
}

// ---------------------------------------------------------------------------
// Ladder-operator builders (identity on all modes except the named one).
// ---------------------------------------------------------------------------

// â|n⟩ = √n |n−1⟩ on the named mode; the top level is hard-truncated (â† of it
// vanishes), so truncation validity is the caller's concern.
inline SparseOperator annihilation(const ModeLayout& layout, const std::string& label) {
    const int pos = layout.position(label);
    const int stride = layout.stride(pos);
    const int mode_dim = layout.mode_dim(pos);
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(layout.dim()));
    for (int i = 0; i < layout.dim(); ++i) {
        const int n = (i / stride) % mode_dim;
        if (n > 0) trips.emplace_back(i - stride, i, Complex(std::sqrt(double(n)), 0.0));
    }
    return SparseOperator::from_triplets(layout.dim(), trips);
}

inline SparseOperator creation(const ModeLayout& layout, const std::string& label) {
    return annihilation(layout, label).adjoint();
}

// Exact diagonal n̂ for the named mode (no √n·√n rounding).
inline SparseOperator number_operator(const ModeLayout& layout, const std::string& label) {
    const int pos = layout.position(label);
    const int stride = layout.stride(pos);
    const int mode_dim = layout.mode_dim(pos);
    std::vector<Triplet> trips;
    for (int i = 0; i < layout.dim(); ++i) {
        const int n = (i / stride) % mode_dim;
        if (n > 0) trips.emplace_back(i, i, Complex(double(n), 0.0));
    }
    return SparseOperator::from_triplets(layout.dim(), trips);
}

inline SparseOperator total_number_operator(const ModeLayout& layout) {
    std::vector<Triplet> trips;
    for (int i = 0; i < layout.dim(); ++i) {
        const int n = layout.total_occupation(i);
        if (n > 0) trips.emplace_back(i, i, Complex(double(n), 0.0));
    }
    return SparseOperator::from_triplets(layout.dim(), trips);
}

// Projector onto basis states where the named mode sits at its top level;
// used by the truncation-leakage diagnostic.
inline SparseOperator top_level_projector(const ModeLayout& layout, const std::string& label) {
    const int pos = layout.position(label);
    const int stride = layout.stride(pos);
    const int mode_dim = layout.mode_dim(pos);
    std::vector<Triplet> trips;
    for (int i = 0; i < layout.dim(); ++i)
        if ((i / stride) % mode_dim == mode_dim - 1) trips.emplace_back(i, i, Complex(1.0, 0.0));
    return SparseOperator::from_triplets(layout.dim(), trips);
}

// ---------------------------------------------------------------------------
// Excitation-sector restriction: total occupation is conserved by the model
// Hamiltonians and non-increasing under photon decay, so dynamics started in
// a bounded sector stays there. Restriction loses no matrix elements between
// retained states.
// ---------------------------------------------------------------------------

struct SectorBasis {
    std::vector<int> to_full;    // sector index -> full-space index (increasing)
    std::vector<int> to_sector;  // full-space index -> sector index, or -1
    int full_dim = 0;
    int n_total_max = 0;

    int dim() const { return static_cast<int>(to_full.size()); }
};

inline SectorBasis excitation_sector(const ModeLayout& layout, int n_total_max) {
    if (n_total_max < 0) throw DomainError("excitation_sector: n_total_max must be >= 0");
    SectorBasis sector;
    sector.full_dim = layout.dim();
    sector.n_total_max = n_total_max;
    sector.to_sector.assign(layout.dim(), -1);
    for (int i = 0; i < layout.dim(); ++i) {
        if (layout.total_occupation(i) <= n_total_max) {
            sector.to_sector[i] = static_cast<int>(sector.to_full.size());
            sector.to_full.push_back(i);
        }
    }
    return sector;
}

inline SparseOperator restrict_operator(const SparseOperator& op, const SectorBasis& sector) {
    if (op.dim() != sector.full_dim)
        throw DomainError("restrict_operator: operator dimension does not match sector basis");
    std::vector<Triplet> trips;
    const SparseMatrix& m = op.matrix();
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            const int r = sector.to_sector[static_cast<int>(it.row())];
            const int c = sector.to_sector[static_cast<int>(it.col())];
            if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
        }
    }
    return SparseOperator::from_triplets(sector.dim(), trips);
}

inline std::pair<SparseOperator, SectorBasis> restrict_to_excitation_sector(
    const ModeLayout& layout, const SparseOperator& op, int n_total_max) {
    if (op.dim() != layout.dim())
        throw DomainError("restrict_to_excitation_sector: operator does not match layout");
    SectorBasis sector = excitation_sector(layout, n_total_max);
    return {restrict_operator(op, sector), std::move(sector)};
}

inline SparseOperator embed_operator(const SparseOperator& op, const SectorBasis& sector) {
    if (op.dim() != sector.dim())
        throw DomainError("embed_operator: operator dimension does not match sector basis");
    std::vector<Triplet> trips;
    const SparseMatrix& m = op.matrix();
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            trips.emplace_back(sector.to_full[static_cast<int>(it.row())],
                               sector.to_full[static_cast<int>(it.col())], it.value());
    return SparseOperator::from_triplets(sector.full_dim, trips);
}

inline DenseVector restrict_vector(const DenseVector& v, const SectorBasis& sector) {
    if (v.size() != sector.full_dim) throw DomainError("restrict_vector: dimension mismatch");
    DenseVector out(sector.dim());
    for (int i = 0; i < sector.dim(); ++i) out(i) = v(sector.to_full[i]);
    return out;
}

inline DenseVector embed_vector(const DenseVector& v, const SectorBasis& sector) {
    if (v.size() != sector.dim()) throw DomainError("embed_vector: dimension mismatch");
    DenseVector out = DenseVector::Zero(sector.full_dim);
    for (int i = 0; i < sector.dim(); ++i) out(sector.to_full[i]) = v(i);
    return out;
}

inline DenseMatrix restrict_matrix(const DenseMatrix& m, const SectorBasis& sector) {
    if (m.rows() != sector.full_dim || m.cols() != sector.full_dim)
        throw DomainError("restrict_matrix: dimension mismatch");
    DenseMatrix out(sector.dim(), sector.dim());
    for (int i = 0; i < sector.dim(); ++i)
        for (int j = 0; j < sector.dim(); ++j) out(i, j) = m(sector.to_full[i], sector.to_full[j]);
    return out;
}

inline DenseMatrix embed_matrix(const DenseMatrix& m, const SectorBasis& sector) {
    if (m.rows() != sector.dim() || m.cols() != sector.dim())
        throw DomainError("embed_matrix: dimension mismatch");
    DenseMatrix out = DenseMatrix::Zero(sector.full_dim, sector.full_dim);
    for (int i = 0; i < sector.dim(); ++i)
        for (int j = 0; j < sector.dim(); ++j) out(sector.to_full[i], sector.to_full[j]) = m(i, j);
    return out;
}

// ---------------------------------------------------------------------------
// StateVector / DensityMatrix
// ---------------------------------------------------------------------------

class StateVector {
public:
    // Enforce: reject non-unit norm. Normalize: rescale. Allow: keep as-is,
    // flagging whether the result happens to be unit norm (arithmetic results
    // may legitimately be unnormalized).
    enum class Norm { Enforce, Normalize, Allow };

    StateVector() : amps_(0) {}  // empty placeholder (dim 0)

    explicit StateVector(DenseVector amplitudes, Norm policy = Norm::Enforce)
        : amps_(std::move(amplitudes)) {
        const double n = amps_.norm();
        switch (policy) {
            case Norm::Enforce:
                if (std::abs(n - 1.0) > kStateTol)
                    throw DomainError("StateVector: norm " + std::to_string(n) +
                                      " is not 1 within tolerance");
                unit_ = true;
                break;
            case Norm::Normalize:
                if (n < kSparseDropTol) throw DomainError("StateVector: cannot normalize zero vector");
                amps_ /= n;
                unit_ = true;
                break;
            case Norm::Allow:
                unit_ = std::abs(n - 1.0) <= kStateTol;
                break;
        }
    }

    static StateVector basis_state(const ModeLayout& layout, const std::vector<int>& occupations) {
        DenseVector v = DenseVector::Zero(layout.dim());
        v(layout.basis_index(occupations)) = Complex(1.0, 0.0);
        return StateVector(std::move(v));
    }

    int dim() const { return static_cast<int>(amps_.size()); }
    const DenseVector& amplitudes() const { return amps_; }
    Complex amplitude(int i) const { return amps_(i); }
    double norm() const { return amps_.norm(); }
    bool is_unit() const { return unit_; }

    StateVector normalized() const { return StateVector(amps_, Norm::Normalize); }

private:
    DenseVector amps_;
    bool unit_ = false;
};

class DensityMatrix {
public:
    DensityMatrix() = default;  // empty placeholder (dim 0)

    static DensityMatrix pure(const StateVector& psi) {
        const DenseVector& v = psi.amplitudes();
        DensityMatrix rho;
        rho.mat_ = v * v.adjoint();
        if (!psi.is_unit()) {
            const double n2 = v.squaredNorm();
            if (n2 < kSparseDropTol) throw DomainError("DensityMatrix: zero state");
            rho.mat_ /= n2;
        }
        return rho;
    }

    // Validating constructor: Hermitian, unit trace, positive semidefinite
    // within tolerance.
    static DensityMatrix from_matrix(DenseMatrix m) {
        if (m.rows() != m.cols()) throw DomainError("DensityMatrix: matrix not square");
        const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kStateTol)
            throw DomainError("DensityMatrix: not Hermitian within tolerance (defect " +
                              std::to_string(herm) + ")");
        const double tr_err = std::abs(m.trace() - Complex(1.0, 0.0));
        if (tr_err > kStateTol)
            throw DomainError("DensityMatrix: trace differs from 1 by " + std::to_string(tr_err));
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()),
                                                      Eigen::EigenvaluesOnly);
        const double min_eig = es.eigenvalues().minCoeff();
        if (min_eig < -kStateTol)
            throw DomainError("DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
        DensityMatrix rho;
        rho.mat_ = std::move(m);
        return rho;
    }

    // Trusted path for integrator output; diagnostics track the drift instead.
    static DensityMatrix unchecked(DenseMatrix m) {
        if (m.rows() != m.cols()) throw DomainError("DensityMatrix: matrix not square");
        DensityMatrix rho;
        rho.mat_ = std::move(m);
        return rho;
    }

    int dim() const { return static_cast<int>(mat_.rows()); }
    const DenseMatrix& matrix() const { return mat_; }
    Complex trace() const { return mat_.trace(); }

    double hermiticity_defect() const { return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (mat_ + mat_.adjoint()),
                                                      Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

private:
    DenseMatrix mat_;
};

// ---------------------------------------------------------------------------
// Expectation values and state metrics
// ---------------------------------------------------------------------------

inline Complex expectation(const SparseOperator& op, const StateVector& psi) {
    if (op.dim() != psi.dim()) throw DomainError("expectation: dimension mismatch");
    return psi.amplitudes().dot(op.apply(psi.amplitudes()));
}

// tr(Aρ), computed over A's nonzeros.
inline Complex expectation(const SparseOperator& op, const DenseMatrix& rho) {
    if (op.dim() != rho.rows()) throw DomainError("expectation: dimension mismatch");
    Complex sum(0.0, 0.0);
    const SparseMatrix& m = op.matrix();
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            sum += it.value() * rho(it.col(), it.row());
    return sum;
}

inline Complex expectation(const SparseOperator& op, const DensityMatrix& rho) {
    return expectation(op, rho.matrix());
}

inline double frobenius_norm(const DenseMatrix& m) { return m.norm(); }

// (1/2)‖ρ−σ‖₁ via eigenvalues of the Hermitian difference.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw DomainError("trace_distance: dimension mismatch");
    DenseMatrix d = rho.matrix() - sigma.matrix();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ⟨ψ|ρ|ψ⟩ for a pure target state.
inline double fidelity(const DensityMatrix& rho, const StateVector& psi) {
    if (rho.dim() != psi.dim()) throw DomainError("fidelity: dimension mismatch");
    return std::real(psi.amplitudes().dot(rho.matrix() * psi.amplitudes()));
}

}  // namespace dwell
