#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dwell/fock.hpp"

namespace dwell {

// All rates are expressed in units of the atom-photon coupling g, with ħ = 1;
// times are in units of 1/g, matching the gt axes of the figure presets.

struct ModelParams {
    double g = 1.0;         // coupling rate; the frequency unit
    long long N = 0;        // atom number
    double detuning = 0.0;  // Δ (strong regime) or Δ_w (weak regime)
    double chi = 0.0;       // χ nonlinearity (weak regime); 0 in all presets
    double kappa = 0.0;     // photon decay rate κ
    int photon_dim = 2;     // truncation levels for the photon mode
    int atomic_dim = 2;     // truncation levels per atomic mode
};

struct SpinModelParams {
    double g = 1.0;
    long long N = 0;
    double detuning = 0.0;
    double J_e = 0.0, J_g = 0.0;           // tunneling rates (equal-tunneling regime)
    double U_ee = 0.0, U_gg = 0.0, U_eg = 0.0;  // collision strengths
    int photon_dim = 2;
    long long dim_cap = 1 << 14;  // guard on the exact-representation size
};

// A Hamiltonian together with the layout it was built on (the exact-spin
// builders own their layouts, since the spin dimensions follow from N).
struct SpinModel {
    ModeLayout layout;
    SparseOperator hamiltonian;
};

namespace detail {

inline void check_common(const ModelParams& p) {
    if (p.g <= 0.0) throw DomainError("ModelParams: g must be positive");
    if (p.N < 1) throw DomainError("ModelParams: N must be a positive integer");
    if (p.kappa < 0.0) throw DomainError("ModelParams: kappa must be >= 0");
    if (p.photon_dim < 2 || p.atomic_dim < 2)
        throw DomainError("ModelParams: truncation dims must be >= 2");
}

inline void check_weak(const ModelParams& p) {
    check_common(p);
    if (p.N < 2 || p.N % 2 != 0)
        throw DomainError("ModelParams: N must be even (and >= 2) in the weak-tunneling split");
}

inline void check_layout(const ModeLayout& layout, const std::vector<std::string>& want) {
    bool ok = layout.n_modes() == static_cast<int>(want.size());
    if (ok)
        for (std::size_t i = 0; i < want.size(); ++i)
            if (layout.mode(static_cast<int>(i)).label != want[i]) ok = false;
    if (!ok) {
        std::string s;
        for (const auto& w : want) s += (s.empty() ? "" : ", ") + w;
        throw DomainError("model builder: layout must have exactly modes {" + s + "} in order");
    }
}

// |n+shift⟩⟨n| band on one mode, amplitude element(n); identity on the others.
template <typename F>
SparseOperator mode_band(const ModeLayout& layout, const std::string& label, int shift,
                         F&& element) {
    const int pos = layout.position(label);
    const int stride = layout.stride(pos);
    const int mode_dim = layout.mode_dim(pos);
    std::vector<Triplet> trips;
    for (int i = 0; i < layout.dim(); ++i) {
        const int n = (i / stride) % mode_dim;
        const int n2 = n + shift;
        if (n2 < 0 || n2 >= mode_dim) continue;
        const double v = element(n);
        if (v != 0.0) trips.emplace_back(i + shift * stride, i, Complex(v, 0.0));
    }
    return SparseOperator::from_triplets(layout.dim(), trips);
}

template <typename F>
SparseOperator mode_diagonal(const ModeLayout& layout, const std::string& label, F&& value) {
    return mode_band(layout, label, 0, std::forward<F>(value));
}

}  // namespace detail

inline ModeLayout strong_layout(const ModelParams& p) {
    detail::check_common(p);
    return ModeLayout{{"a", p.photon_dim}, {"b", p.atomic_dim}};
}

inline ModeLayout weak_layout(const ModelParams& p) {
    detail::check_weak(p);
    return ModeLayout{{"a", p.photon_dim}, {"c", p.atomic_dim}, {"d", p.atomic_dim}};
}

// Strong-tunneling effective Hamiltonian: Δ b†b + g√N (a b† + a† b).
// The collective coupling is enhanced by √N over the single-atom rate.
inline SparseOperator build_strong_tunneling(const ModelParams& p, const ModeLayout& layout) {
    detail::check_common(p);
    detail::check_layout(layout, {"a", "b"});
    const double coupling = p.g * std::sqrt(static_cast<double>(p.N));
    auto a = annihilation(layout, "a");
    auto b = annihilation(layout, "b");
    auto exchange = a * b.adjoint() + a.adjoint() * b;
    return p.detuning * number_operator(layout, "b") + coupling * exchange;
}

// Weak-tunneling effective Hamiltonian:
//   Δ_w (c†c + d†d) + g√(N/2) [a (c† + d†) + a† (c + d)] + χ [(c†c)² + (d†d)²].
// Each well holds N/2 atoms, so the per-well enhancement is √(N/2).
inline SparseOperator build_weak_tunneling(const ModelParams& p, const ModeLayout& layout) {
    detail::check_weak(p);
    detail::check_layout(layout, {"a", "c", "d"});
    const double coupling = p.g * std::sqrt(static_cast<double>(p.N) / 2.0);
    auto a = annihilation(layout, "a");
    auto c = annihilation(layout, "c");
    auto d = annihilation(layout, "d");
    auto exchange = a * (c.adjoint() + d.adjoint()) + a.adjoint() * (c + d);
    auto n_c = number_operator(layout, "c");
    auto n_d = number_operator(layout, "d");
    SparseOperator h = p.detuning * (n_c + n_d) + coupling * exchange;
    if (p.chi != 0.0) h = h + p.chi * (n_c * n_c + n_d * n_d);
    return h;
}

// Exact collective-spin counterpart of the strong-tunneling model:
//   Δ S_z + g (a S₊ + a† S₋)  on (photon) ⊗ (spin j = N/2).
// The Dicke basis |j, m⟩ is indexed by the excitation count n = j + m, so the
// spin-mode "occupation" equals the number of excited atoms and sector
// restriction by total occupation applies unchanged.
inline SpinModel build_exact_spin_strong(const SpinModelParams& p) {
    if (p.g <= 0.0) throw DomainError("SpinModelParams: g must be positive");
    if (p.N < 1) throw DomainError("SpinModelParams: N must be a positive integer");
    if (p.photon_dim < 2) throw DomainError("SpinModelParams: photon_dim must be >= 2");
    const long long spin_dim = p.N + 1;
    if (spin_dim * p.photon_dim > p.dim_cap)
        throw ResourceError("build_exact_spin_strong: (N+1)*photon_dim exceeds the cap");

    ModeLayout layout{{"a", p.photon_dim}, {"S", static_cast<int>(spin_dim)}};
    const double j = static_cast<double>(p.N) / 2.0;
    auto s_plus = detail::mode_band(layout, "S", +1, [j](int n) {
        const double m = n - j;
        return std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    });
    auto s_z = detail::mode_diagonal(layout, "S", [j](int n) { return n - j; });
    auto a = annihilation(layout, "a");
    auto h = p.detuning * s_z + p.g * (a * s_plus + a.adjoint() * s_plus.adjoint());
    return SpinModel{layout, std::move(h)};
}

// Exact two-well collective-spin counterpart of the weak-tunneling model:
//   Σ_{w=L,R} (Δ+δ) S_wz + g (a S_w₊ + a† S_w₋) + χ S_wz²,
// with δ = (U_ee − U_gg) N/2 and χ = U_ee + U_gg − 2U_eg. Each well holds N/2
// atoms, i.e. per-well spin j = N/4 of dimension N/2 + 1.
inline SpinModel build_exact_spin_weak(const SpinModelParams& p) {
    if (p.g <= 0.0) throw DomainError("SpinModelParams: g must be positive");
    if (p.N < 2 || p.N % 2 != 0)
        throw DomainError("SpinModelParams: N must be even (and >= 2) for the two-well split");
    if (p.photon_dim < 2) throw DomainError("SpinModelParams: photon_dim must be >= 2");
    const long long well_dim = p.N / 2 + 1;
    if (well_dim * well_dim * p.photon_dim > p.dim_cap)
        throw ResourceError("build_exact_spin_weak: photon_dim*(N/2+1)^2 exceeds the cap");

    ModeLayout layout{{"a", p.photon_dim},
                      {"SL", static_cast<int>(well_dim)},
                      {"SR", static_cast<int>(well_dim)}};
    const double j = static_cast<double>(p.N) / 4.0;
    const double delta = (p.U_ee - p.U_gg) * static_cast<double>(p.N) / 2.0;
    const double chi = p.U_ee + p.U_gg - 2.0 * p.U_eg;

    auto a = annihilation(layout, "a");
    SparseOperator h = SparseOperator::zero(layout.dim());
    for (const std::string label : {"SL", "SR"}) {
        auto s_plus = detail::mode_band(layout, label, +1, [j](int n) {
            const double m = n - j;
            return std::sqrt(j * (j + 1.0) - m * (m + 1.0));
        });
        auto s_z = detail::mode_diagonal(layout, label, [j](int n) { return n - j; });
        auto s_z2 = detail::mode_diagonal(layout, label, [j](int n) {
            const double m = n - j;
            return m * m;
        });
        h = h + (p.detuning + delta) * s_z + p.g * (a * s_plus + a.adjoint() * s_plus.adjoint());
        if (chi != 0.0) h = h + chi * s_z2;
    }
    return SpinModel{layout, std::move(h)};
}

}  // namespace dwell
