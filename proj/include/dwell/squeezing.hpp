#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "dwell/fock.hpp"

namespace dwell {

// Quadratic model for the asymmetric (dark) well mode when the condensate is
// initialized in the symmetric ground mode:
//   H = λ₁ f†f + λ₂ (f†f† + ff),   λ₁ = J_g + U_gg N,   λ₂ = U_gg N / 2.
// The evolution from vacuum is an exactly factorizable squeeze, parametrized
// by two complex coefficients Λ₁(t), Λ₂(t); the mean occupation oscillates
// between 0 and 4λ₂²/ω² with ω = sqrt(λ₁² - 4λ₂²).

struct SqueezingParams {
    double J_g = 1.0;     // bare tunneling of the asymmetric mode
    double U_ggN = 1.0;   // interaction energy scale U_gg * N

    double lambda1() const { return J_g + U_ggN; }
    double lambda2() const { return 0.5 * U_ggN; }
    double omega() const {
        const double l1 = lambda1(), l2 = lambda2();
        return std::sqrt(l1 * l1 - 4.0 * l2 * l2);
    }
    double peak_time() const { return 0.5 * std::numbers::pi / omega(); }
    double peak_mean_excitation() const {
        const double l1 = lambda1(), l2 = lambda2();
        return 4.0 * l2 * l2 / (l1 * l1 - 4.0 * l2 * l2);
    }
};

namespace detail {

inline void check_squeezing(const SqueezingParams& p) {
    if (!(p.J_g > 0.0)) throw DomainError("SqueezingParams: J_g must be > 0");
    if (!(p.U_ggN >= 0.0)) throw DomainError("SqueezingParams: U_ggN must be >= 0");
}

// cosh(β) and sinh(β)/β as even functions of β, stable near β = 0.
inline Complex cosh_even(Complex beta) { return std::cosh(beta); }

inline Complex sinhc_even(Complex beta) {
    if (std::abs(beta) < 1e-4) {
        const Complex z = beta * beta;
        return 1.0 + z / 6.0 + z * z / 120.0;
    }
    return std::sinh(beta) / beta;
}

}  // namespace detail

// Time-dependent factorization coefficients of the squeeze propagator:
//   λ₁' = -2iλ₁t,  λ₂' = -2iλ₂t,  β² = λ₁'²/4 - λ₂'²,
//   Λ₁ = (cosh β - (λ₁'/2β) sinh β)^{-2},
//   Λ₂ = 2λ₂' sinh β / (2β cosh β - λ₁' sinh β).
// Both are even in β, so the branch of the square root is immaterial.
struct SqueezeFactors {
    Complex Lambda1{1.0, 0.0};
    Complex Lambda2{0.0, 0.0};
};

inline SqueezeFactors factorization_coefficients(const SqueezingParams& p, double t) {
    detail::check_squeezing(p);
    const Complex l1p(0.0, -2.0 * p.lambda1() * t);
    const Complex l2p(0.0, -2.0 * p.lambda2() * t);
    const Complex beta = std::sqrt(0.25 * l1p * l1p - l2p * l2p);
    const Complex ch = detail::cosh_even(beta);
    const Complex shc = detail::sinhc_even(beta);
    const Complex den = ch - 0.5 * l1p * shc;
    if (std::abs(den) < 1e-300)
        throw NumericError("factorization_coefficients: degenerate denominator");
    SqueezeFactors f;
    f.Lambda1 = 1.0 / (den * den);
    f.Lambda2 = l2p * shc / den;
    return f;
}

inline constexpr double kSeriesRelCutoff = 1e-12;
inline constexpr int kSeriesMaxTerms = 500;
inline constexpr double kStateTailTol = 1e-10;

// Mean occupation of the squeezed vacuum by direct series summation:
//   <f†f> = |Λ₁|^{1/2} Σ_{n≥1} n (2n)! |Λ₂|^{2n} / (2^{2n-1} (n!)²),
// evaluated with the stable term recursion t₁ = x, t_{n+1}/t_n = x(2n+1)/(2n)
// where x = |Λ₂|².
inline double mean_asymmetric_excitation(const SqueezeFactors& f) {
    const double x = std::norm(f.Lambda2);
    if (x >= 1.0)
        throw NumericError("mean_asymmetric_excitation: |Lambda2| >= 1, series diverges");
    if (x == 0.0) return 0.0;
    double term = x, sum = x;
    for (int n = 1; n < kSeriesMaxTerms; ++n) {
        term *= x * (2.0 * n + 1.0) / (2.0 * n);
        sum += term;
        if (term < kSeriesRelCutoff * sum) return std::sqrt(std::abs(f.Lambda1)) * sum;
    }
    throw ConvergenceError("mean_asymmetric_excitation: series not converged after " +
                           std::to_string(kSeriesMaxTerms) + " terms");
}

inline double mean_asymmetric_excitation(const SqueezingParams& p, double t) {
    return mean_asymmetric_excitation(factorization_coefficients(p, t));
}

// Squeezed vacuum in the Fock basis: amplitudes Λ₁^{1/4} √((2n)!)/n! (Λ₂/2)ⁿ
// on the even levels |2n>. The complex quartic root fixes the global phase up
// to a convention; only moduli are physical. Throws when the truncation would
// drop more than kStateTailTol of the norm.
inline StateVector squeezed_vacuum_state(const SqueezeFactors& f, const ModeLayout& layout) {
    if (layout.n_modes() != 1 || !layout.has("f"))
        throw DomainError("squeezed_vacuum_state: layout must be the single mode f");
    const int dim = layout.dim();
    if (dim < 4) throw DomainError("squeezed_vacuum_state: need dim >= 4");
    const double x = std::norm(f.Lambda2);
    if (x >= 1.0) throw NumericError("squeezed_vacuum_state: |Lambda2| >= 1");

    DenseVector v = DenseVector::Zero(dim);
    Complex amp = std::pow(f.Lambda1, 0.25);
    int n = 0;
    for (; 2 * n < dim; ++n) {
        v(2 * n) = amp;
        amp *= 0.5 * f.Lambda2 * std::sqrt((2.0 * n + 1.0) * (2.0 * n + 2.0)) / (n + 1.0);
    }
    // `amp` now holds the first dropped amplitude; the squared terms shrink
    // at least geometrically with ratio x.
    const double tail_bound = std::norm(amp) / (1.0 - x);
    if (tail_bound > kStateTailTol)
        throw NumericError(
            "squeezed_vacuum_state: truncated tail " + std::to_string(tail_bound) +
            " exceeds tolerance; increase the mode dimension");
    return StateVector(std::move(v), StateVector::Norm::Allow);
}

inline StateVector squeezed_vacuum_state(const SqueezingParams& p, double t,
                                         const ModeLayout& layout) {
    return squeezed_vacuum_state(factorization_coefficients(p, t), layout);
}

// Number-conserving part plus pair creation/annihilation on a single mode.
inline SparseOperator build_squeezing_hamiltonian(const SqueezingParams& p,
                                                  const ModeLayout& layout) {
    detail::check_squeezing(p);
    if (layout.n_modes() != 1 || !layout.has("f"))
        throw DomainError("build_squeezing_hamiltonian: layout must be the single mode f");
    if (layout.dim() < 4) throw DomainError("build_squeezing_hamiltonian: need dim >= 4");
    auto fdag = creation(layout, "f");
    auto fop = annihilation(layout, "f");
    return p.lambda1() * number_operator(layout, "f") +
           p.lambda2() * (fdag * fdag + fop * fop);
}

}  // namespace dwell
