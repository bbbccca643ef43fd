#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dwell/fock.hpp"
#include "dwell/integrator.hpp"

namespace dwell {

// Zero-temperature master equation with a set of collapse channels:
//   dρ/dt = −i[H, ρ] + Σ (rate/2)(2 A ρ A† − A†A ρ − ρ A†A).
// The models here use a single channel, photon annihilation at rate κ.

struct CollapseChannel {
    SparseOperator op;
    double rate = 0.0;
};

struct EvolutionSpec {
    SparseOperator hamiltonian;
    std::vector<CollapseChannel> collapse;
    double t_final = 1.0;
    int n_samples = 400;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
};

inline constexpr double kLeakageThreshold = 1e-6;
inline constexpr double kPositivityTol = 1e-8;

struct TrajectoryDiagnostics {
    double max_trace_drift = 0.0;
    double max_hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;
    double max_top_level_population = 0.0;
    bool leakage_warning = false;
    bool positivity_warning = false;
    long long n_accepted = 0;
    long long n_rejected = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> series;
    DensityMatrix final_state;
    TrajectoryDiagnostics diagnostics;
};

// Precomputed applier for the master-equation right-hand side.
class Liouvillian {
public:
    Liouvillian(SparseOperator hamiltonian, std::vector<CollapseChannel> collapse)
        : h_(std::move(hamiltonian)) {
        for (auto& ch : collapse) {
            if (ch.rate < 0.0) throw DomainError("Liouvillian: collapse rate must be >= 0");
            if (ch.op.dim() != h_.dim())
                throw DomainError("Liouvillian: collapse operator dimension mismatch");
            channels_.push_back(
                Channel{ch.op, ch.op.adjoint(), ch.op.adjoint() * ch.op, ch.rate});
        }
        if (hermiticity_defect(h_) > 1e-10)
            throw DomainError("Liouvillian: Hamiltonian is not Hermitian");
    }

    int dim() const { return h_.dim(); }

    void apply(const DenseMatrix& rho, DenseMatrix& out) const {
        const Complex minus_i(0.0, -1.0);
        out.noalias() = minus_i * (h_.matrix() * rho);
        out.noalias() -= minus_i * (rho * h_.matrix());
        for (const auto& ch : channels_) {
            if (ch.rate == 0.0) continue;
            buf_.noalias() = ch.op.matrix() * rho;          // Aρ
            out.noalias() += ch.rate * (buf_ * ch.adj.matrix());  // rate·AρA†
            buf_.noalias() = ch.num.matrix() * rho;          // A†Aρ
            out.noalias() -= (0.5 * ch.rate) * buf_;
            buf_.noalias() = rho * ch.num.matrix();          // ρA†A
            out.noalias() -= (0.5 * ch.rate) * buf_;
        }
    }

    DenseMatrix apply(const DenseMatrix& rho) const {
        DenseMatrix out(rho.rows(), rho.cols());
        apply(rho, out);
        return out;
    }

private:
    struct Channel {
        SparseOperator op, adj, num;  // A, A†, A†A
        double rate;
    };
    SparseOperator h_;
    std::vector<Channel> channels_;
    mutable DenseMatrix buf_;
};

// One-shot right-hand side; returns the (traceless) time derivative of ρ.
inline DenseMatrix lindblad_rhs(const SparseOperator& hamiltonian,
                                const std::vector<CollapseChannel>& collapse,
                                const DensityMatrix& rho) {
    if (rho.dim() != hamiltonian.dim()) throw DomainError("lindblad_rhs: dimension mismatch");
    return Liouvillian(hamiltonian, collapse).apply(rho.matrix());
}

using DerivedObservable = std::function<double(double, const DenseMatrix&)>;

namespace detail {

inline std::vector<double> uniform_grid(double t_final, int n_samples) {
    if (t_final <= 0.0) throw DomainError("evolve: t_final must be positive");
    if (n_samples < 2) throw DomainError("evolve: n_samples must be >= 2");
    std::vector<double> ts(n_samples);
    const double dt = t_final / (n_samples - 1);
    for (int i = 0; i < n_samples; ++i) ts[i] = i * dt;
    ts.back() = t_final;
    return ts;
}

}  // namespace detail

// Integrates the master equation and samples observables on a uniform grid.
// `observables` are linear expectation values tr(Oρ); `derived` get the full
// sampled state (entanglement metrics, etc.); `leakage_projectors` feed the
// truncation diagnostic (population of any mode's top level beyond
// kLeakageThreshold raises the leakage warning).
inline Trajectory evolve(
    const DensityMatrix& rho0, const EvolutionSpec& spec,
    const std::vector<std::pair<std::string, SparseOperator>>& observables,
    const std::vector<std::pair<std::string, DerivedObservable>>& derived = {},
    const std::vector<std::pair<std::string, SparseOperator>>& leakage_projectors = {}) {
    if (rho0.dim() != spec.hamiltonian.dim())
        throw DomainError("evolve: initial state dimension does not match Hamiltonian");
    for (const auto& [label, op] : observables)
        if (op.dim() != rho0.dim())
            throw DomainError("evolve: observable '" + label + "' dimension mismatch");

    Liouvillian liouville(spec.hamiltonian, spec.collapse);
    Trajectory traj;
    traj.times = detail::uniform_grid(spec.t_final, spec.n_samples);
    for (const auto& [label, op] : observables) traj.series[label] = {};
    for (const auto& [label, fn] : derived) traj.series[label] = {};

    TrajectoryDiagnostics diag;
    diag.min_eigenvalue = 1.0;

    DenseMatrix rho = rho0.matrix();
    auto rhs = [&](double, const DenseMatrix& y, DenseMatrix& dydt) { liouville.apply(y, dydt); };
    auto observer = [&](double t, const DenseMatrix& y) {
        for (const auto& [label, op] : observables)
            traj.series[label].push_back(std::real(expectation(op, y)));
        for (const auto& [label, fn] : derived) traj.series[label].push_back(fn(t, y));
        diag.max_trace_drift =
            std::max(diag.max_trace_drift, std::abs(y.trace() - Complex(1.0, 0.0)));
        diag.max_hermiticity_defect =
            std::max(diag.max_hermiticity_defect, (y - y.adjoint()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (y + y.adjoint()),
                                                      Eigen::EigenvaluesOnly);
        diag.min_eigenvalue = std::min(diag.min_eigenvalue, es.eigenvalues().minCoeff());
        for (const auto& [label, proj] : leakage_projectors)
            diag.max_top_level_population = std::max(
                diag.max_top_level_population, std::abs(std::real(expectation(proj, y))));
    };

    IntegratorOptions opt;
    opt.rel_tol = spec.rel_tol;
    opt.abs_tol = spec.abs_tol;
    IntegrationStats stats = integrate_dopri5(rhs, rho, 0.0, traj.times, observer, opt);

    diag.n_accepted = stats.n_accepted;
    diag.n_rejected = stats.n_rejected;
    diag.leakage_warning = diag.max_top_level_population > kLeakageThreshold;
    diag.positivity_warning = diag.min_eigenvalue < -kPositivityTol;
    traj.diagnostics = diag;
    traj.final_state = DensityMatrix::unchecked(std::move(rho));
    return traj;
}

// ---------------------------------------------------------------------------
// Unitary (κ = 0) state-vector evolution: dψ/dt = −iHψ. Shares the integrator;
// used for closed-system oracles where a density matrix would be wasteful.
// ---------------------------------------------------------------------------

struct UnitaryEvolutionSpec {
    SparseOperator hamiltonian;
    double t_final = 1.0;
    int n_samples = 400;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
};

struct UnitaryTrajectory {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> series;
    StateVector final_state;
    double max_norm_drift = 0.0;
    IntegrationStats stats;
};

inline UnitaryTrajectory evolve_unitary(
    const StateVector& psi0, const UnitaryEvolutionSpec& spec,
    const std::vector<std::pair<std::string, SparseOperator>>& observables) {
    if (psi0.dim() != spec.hamiltonian.dim())
        throw DomainError("evolve_unitary: state dimension does not match Hamiltonian");
    if (hermiticity_defect(spec.hamiltonian) > 1e-10)
        throw DomainError("evolve_unitary: Hamiltonian is not Hermitian");

    UnitaryTrajectory traj;
    traj.times = detail::uniform_grid(spec.t_final, spec.n_samples);
    for (const auto& [label, op] : observables) traj.series[label] = {};

    DenseVector psi = psi0.amplitudes();
    const SparseMatrix& h = spec.hamiltonian.matrix();
    const Complex minus_i(0.0, -1.0);
    auto rhs = [&](double, const DenseVector& y, DenseVector& dydt) {
        dydt.noalias() = minus_i * (h * y);
    };
    auto observer = [&](double, const DenseVector& y) {
        for (const auto& [label, op] : observables)
            traj.series[label].push_back(std::real(y.dot(op.matrix() * y)));
        traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(y.norm() - 1.0));
    };

    IntegratorOptions opt;
    opt.rel_tol = spec.rel_tol;
    opt.abs_tol = spec.abs_tol;
    traj.stats = integrate_dopri5(rhs, psi, 0.0, traj.times, observer, opt);
    traj.final_state = StateVector(std::move(psi), StateVector::Norm::Allow);
    return traj;
}

// ---------------------------------------------------------------------------
// Steady states
// ---------------------------------------------------------------------------

enum class SteadyStateMethod { EvolveToConvergence, NullSpace };

struct SteadyStateOptions {
    double tol_ss = 1e-9;        // Frobenius norm of dρ/dt at convergence
    double t_max = 50.0;         // give up beyond this time
    double check_interval = 0.25;
    // The reachable residual floor is roughly ‖L‖ × (local step error), so the
    // integrator must run well below tol_ss for the check to ever fire.
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int null_space_cap = 64;     // max Hilbert dimension for the dense kernel
};

// Dense-Liouvillian kernel basis (column-major vectorization); the weak model
// has a degenerate steady manifold spanned by dark-state mixtures, so the
// kernel dimension exceeds 1 there.
inline std::vector<DenseMatrix> liouvillian_kernel_basis(
    const SparseOperator& hamiltonian, const std::vector<CollapseChannel>& collapse,
    int dim_cap = 64, double kernel_tol = 1e-10) {
    const int d = hamiltonian.dim();
    if (d > dim_cap)
        throw ResourceError("liouvillian_kernel_basis: dimension " + std::to_string(d) +
                            " exceeds cap " + std::to_string(dim_cap));
    Liouvillian liouville(hamiltonian, collapse);

    // Build the superoperator column by column: L applied to each basis matrix.
    const int d2 = d * d;
    DenseMatrix super(d2, d2);
    DenseMatrix unit = DenseMatrix::Zero(d, d), image(d, d);
    for (int col = 0; col < d2; ++col) {
        unit(col % d, col / d) = Complex(1.0, 0.0);  // column-major vec index
        liouville.apply(unit, image);
        super.col(col) = Eigen::Map<const DenseVector>(image.data(), d2);
        unit(col % d, col / d) = Complex(0.0, 0.0);
    }

    Eigen::JacobiSVD<DenseMatrix> svd(super, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double cutoff = kernel_tol * std::max(sigma(0), 1.0);
    std::vector<DenseMatrix> basis;
    for (int i = 0; i < sigma.size(); ++i) {
        if (sigma(i) < cutoff) {
            DenseVector v = svd.matrixV().col(i);
            basis.push_back(Eigen::Map<const DenseMatrix>(v.data(), d, d));
        }
    }
    return basis;
}

// Steady state of the master equation. EvolveToConvergence integrates from
// rho0 until ‖dρ/dt‖_F < tol_ss (the appropriate method when the steady
// manifold is degenerate and the limit depends on the initial state);
// NullSpace solves the kernel directly and requires it to be one-dimensional.
inline DensityMatrix steady_state(const DensityMatrix& rho0, const SparseOperator& hamiltonian,
                                  const std::vector<CollapseChannel>& collapse,
                                  SteadyStateMethod method, const SteadyStateOptions& opt = {}) {
    if (rho0.dim() != hamiltonian.dim()) throw DomainError("steady_state: dimension mismatch");

    if (method == SteadyStateMethod::NullSpace) {
        auto basis = liouvillian_kernel_basis(hamiltonian, collapse, opt.null_space_cap);
        if (basis.empty())
            throw NumericError("steady_state: no Liouvillian kernel found within tolerance");
        if (basis.size() > 1)
            throw NumericError(
                "steady_state: steady-state manifold is degenerate (kernel dimension " +
                std::to_string(basis.size()) +
                "); use evolve-to-convergence or liouvillian_kernel_basis");
        DenseMatrix k = basis.front();
        k = 0.5 * (k + k.adjoint().eval());
        const Complex tr = k.trace();
        if (std::abs(tr) < 1e-12)
            throw NumericError("steady_state: kernel element is traceless, cannot normalize");
        return DensityMatrix::from_matrix(k / tr);
    }

    Liouvillian liouville(hamiltonian, collapse);
    DenseMatrix rho = rho0.matrix();
    auto rhs = [&](double, const DenseMatrix& y, DenseMatrix& dydt) { liouville.apply(y, dydt); };
    IntegratorOptions iopt;
    iopt.rel_tol = opt.rel_tol;
    iopt.abs_tol = opt.abs_tol;

    double t = 0.0;
    double residual = liouville.apply(rho).norm();
    if (residual < opt.tol_ss) return DensityMatrix::unchecked(std::move(rho));
    while (t < opt.t_max) {
        const double t_next = std::min(t + opt.check_interval, opt.t_max);
        std::vector<double> target{t_next};
        integrate_dopri5(rhs, rho, t, target, [](double, const DenseMatrix&) {}, iopt);
        t = t_next;
        residual = liouville.apply(rho).norm();
        if (residual < opt.tol_ss) return DensityMatrix::unchecked(std::move(rho));
    }
    char msg[240];
    std::snprintf(msg, sizeof msg,
                  "steady_state: no convergence by t = %g (residual %.3e vs tol %.3e); "
                  "check that the model is damped (kappa > 0) or raise t_max",
                  opt.t_max, residual, opt.tol_ss);
    throw ConvergenceError(msg);
}

}  // namespace dwell
