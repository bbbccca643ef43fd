#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "dwell/lindblad.hpp"
#include "dwell/models.hpp"

using namespace dwell;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("strong-tunneling Hamiltonian", "[models]") {
    SECTION("N=1, zero detuning couples |1,0> and |0,1> with element g") {
        ModelParams p{.N = 1};
        auto layout = strong_layout(p);
        auto h = build_strong_tunneling(p, layout);
        DenseMatrix m = h.dense();
        const int i10 = layout.basis_index({1, 0});
        const int i01 = layout.basis_index({0, 1});
        CHECK_THAT(std::abs(m(i10, i01) - Complex(1.0, 0.0)), WithinAbs(0.0, 1e-15));
        CHECK_THAT(std::abs(m(i01, i10) - Complex(1.0, 0.0)), WithinAbs(0.0, 1e-15));
        m(i10, i01) = m(i01, i10) = Complex(0.0, 0.0);
        CHECK(m.cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("N=5000 coupling is sqrt(5000) g") {
        ModelParams p{.N = 5000};
        auto layout = strong_layout(p);
        auto h = build_strong_tunneling(p, layout);
        CHECK_THAT(std::abs(h.entry(layout.basis_index({1, 0}), layout.basis_index({0, 1}))),
                   WithinAbs(70.71067811865476, 1e-9));
    }
    SECTION("detuning enters as Delta b†b") {
        ModelParams p{.N = 1, .detuning = 0.7, .photon_dim = 2, .atomic_dim = 4};
        auto layout = strong_layout(p);
        auto h = build_strong_tunneling(p, layout);
        for (int n = 0; n < 4; ++n) {
            const int i = layout.basis_index({0, n});
            CHECK_THAT(std::real(h.entry(i, i)), WithinAbs(0.7 * n, 1e-14));
        }
    }
    SECTION("Hermitian and excitation conserving") {
        ModelParams p{.N = 17, .detuning = 0.3, .photon_dim = 4, .atomic_dim = 4};
        auto layout = strong_layout(p);
        auto h = build_strong_tunneling(p, layout);
        CHECK(hermiticity_defect(h) < 1e-14);
        CHECK(commutator_norm(h, total_number_operator(layout)) < 1e-12);
    }
    SECTION("layout must be {a, b}") {
        ModelParams p{.N = 2};
        CHECK_THROWS_AS(build_strong_tunneling(p, ModeLayout{{"a", 2}, {"c", 2}}), DomainError);
    }
    SECTION("parameter validation") {
        CHECK_THROWS_AS(strong_layout(ModelParams{.N = 0}), DomainError);
        CHECK_THROWS_AS(strong_layout(ModelParams{.N = 2, .kappa = -1.0}), DomainError);
        CHECK_THROWS_AS(strong_layout(ModelParams{.N = 2, .photon_dim = 1}), DomainError);
    }
}

TEST_CASE("weak-tunneling Hamiltonian", "[models]") {
    SECTION("N=2: single-excitation couplings a<->c and a<->d both equal g") {
        ModelParams p{.N = 2};
        auto layout = weak_layout(p);
        auto h = build_weak_tunneling(p, layout);
        const int ia = layout.basis_index({1, 0, 0});
        const int ic = layout.basis_index({0, 1, 0});
        const int id = layout.basis_index({0, 0, 1});
        CHECK_THAT(std::abs(h.entry(ia, ic) - Complex(1.0, 0.0)), WithinAbs(0.0, 1e-15));
        CHECK_THAT(std::abs(h.entry(ia, id) - Complex(1.0, 0.0)), WithinAbs(0.0, 1e-15));
        CHECK(std::abs(h.entry(ic, id)) < 1e-15);  // no direct c-d coupling
    }
    SECTION("N=5000: per-mode coupling 50 g") {
        ModelParams p{.N = 5000};
        auto layout = weak_layout(p);
        auto h = build_weak_tunneling(p, layout);
        CHECK_THAT(std::abs(h.entry(layout.basis_index({1, 0, 0}), layout.basis_index({0, 1, 0}))),
                   WithinAbs(50.0, 1e-12));
    }
    SECTION("chi term is diagonal n_c^2 + n_d^2") {
        ModelParams p{.N = 2, .chi = 0.3, .photon_dim = 2, .atomic_dim = 4};
        auto layout = weak_layout(p);
        auto h = build_weak_tunneling(p, layout);
        const int i = layout.basis_index({0, 3, 2});
        CHECK_THAT(std::real(h.entry(i, i)), WithinAbs(0.3 * (9.0 + 4.0), 1e-12));
    }
    SECTION("detuning acts as Delta_w (n_c + n_d)") {
        ModelParams p{.N = 2, .detuning = 1.3, .photon_dim = 2, .atomic_dim = 3};
        auto layout = weak_layout(p);
        auto h = build_weak_tunneling(p, layout);
        const int i = layout.basis_index({0, 2, 1});
        CHECK_THAT(std::real(h.entry(i, i)), WithinAbs(1.3 * 3.0, 1e-12));
    }
    SECTION("Hermitian; excitation conserving even with chi") {
        ModelParams p{.N = 8, .chi = 0.2, .photon_dim = 3, .atomic_dim = 3};
        auto layout = weak_layout(p);
        auto h = build_weak_tunneling(p, layout);
        CHECK(hermiticity_defect(h) < 1e-14);
        CHECK(commutator_norm(h, total_number_operator(layout)) < 1e-12);
    }
    SECTION("odd N is rejected with a clear message") {
        ModelParams p{.N = 5001};
        CHECK_THROWS_WITH(weak_layout(p), ContainsSubstring("even"));
        CHECK_THROWS_AS(build_weak_tunneling(p, ModeLayout{{"a", 2}, {"c", 2}, {"d", 2}}),
                        DomainError);
    }
}

TEST_CASE("exact collective-spin model, strong regime", "[models]") {
    SECTION("N=2: S_z eigenvalues are {-1, 0, 1}") {
        // The coupling is strictly off-diagonal, so the photon-vacuum diagonal
        // exposes Delta * m directly.
        SpinModelParams p{.N = 2, .detuning = 1.0, .photon_dim = 2};
        auto model = build_exact_spin_strong(p);
        std::set<long> eigs;
        for (int n = 0; n <= 2; ++n) {
            const int i = model.layout.basis_index({0, n});
            eigs.insert(std::lround(std::real(model.hamiltonian.entry(i, i))));
        }
        CHECK(eigs == std::set<long>{-1, 0, 1});
    }
    SECTION("S+ matrix elements follow the angular-momentum formula") {
        SpinModelParams p{.N = 6, .photon_dim = 2};
        auto model = build_exact_spin_strong(p);
        const double j = 3.0;
        for (int n = 0; n < 6; ++n) {
            const double m = n - j;
            // a S+ maps |1, n> to |0, n+1>.
            const Complex elem = model.hamiltonian.entry(model.layout.basis_index({0, n + 1}),
                                                         model.layout.basis_index({1, n}));
            CHECK_THAT(std::abs(elem), WithinAbs(std::sqrt(j * (j + 1) - m * (m + 1)), 1e-13));
        }
    }
    SECTION("single-excitation sector coincides with the bosonized model") {
        // The collective enhancement sqrt(2j) = sqrt(N) is exact with one
        // excitation, so the low-excitation Rabi splitting matches g*sqrt(N).
        const long long N = 20;
        auto spin = build_exact_spin_strong({.N = N, .photon_dim = 2});
        auto [spin_sector, ssec] =
            restrict_to_excitation_sector(spin.layout, spin.hamiltonian, 1);

        ModelParams bp{.N = N};
        auto blayout = strong_layout(bp);
        auto [boson_sector, bsec] =
            restrict_to_excitation_sector(blayout, build_strong_tunneling(bp, blayout), 1);

        CHECK((spin_sector - boson_sector).max_abs_entry() < 1e-12);
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(spin_sector.dense());
        const double splitting = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
        CHECK_THAT(splitting, WithinAbs(2.0 * std::sqrt(double(N)), 1e-10));
    }
    SECTION("representation cap") {
        CHECK_THROWS_AS(build_exact_spin_strong({.N = 100000, .photon_dim = 4}), ResourceError);
    }
}

TEST_CASE("exact collective-spin model, weak regime", "[models]") {
    SECTION("N=4, couplings g only: two Jaynes-Cummings wells sharing the photon") {
        SpinModelParams p{.N = 4, .photon_dim = 2};
        auto model = build_exact_spin_weak(p);
        auto [h1, sec] = restrict_to_excitation_sector(model.layout, model.hamiltonian, 1);
        // Sector basis: (0,0,0), (0,0,1), (0,1,0), (1,0,0) in increasing index
        // order; the photon couples to each well with sqrt(2 j_w) = sqrt(N/2).
        REQUIRE(sec.dim() == 4);
        DenseMatrix m = h1.dense();
        const double want = std::sqrt(2.0);
        CHECK_THAT(std::abs(m(3, 1)), WithinAbs(want, 1e-13));  // a <-> SR
        CHECK_THAT(std::abs(m(3, 2)), WithinAbs(want, 1e-13));  // a <-> SL
        CHECK(std::abs(m(1, 2)) < 1e-15);                       // no SL <-> SR coupling
        CHECK(m.row(0).cwiseAbs().maxCoeff() < 1e-15);          // vacuum decoupled
    }
    SECTION("single-excitation sector matches the bosonized weak model") {
        SpinModelParams p{.N = 40, .photon_dim = 2};
        auto model = build_exact_spin_weak(p);
        auto [hs, ssec] = restrict_to_excitation_sector(model.layout, model.hamiltonian, 1);

        ModelParams bp{.N = 40};
        auto blayout = weak_layout(bp);
        auto [hb, bsec] =
            restrict_to_excitation_sector(blayout, build_weak_tunneling(bp, blayout), 1);
        // Both sector bases order as vacuum, d/SR, c/SL, photon.
        CHECK((hs - hb).max_abs_entry() < 1e-12);
    }
    SECTION("chi term is diagonal with chi m^2 and delta shifts the detuning") {
        SpinModelParams p{.N = 4, .detuning = 0.5, .U_ee = 0.2, .U_gg = 0.1, .photon_dim = 2};
        auto model = build_exact_spin_weak(p);
        const double delta = (0.2 - 0.1) * 4 / 2.0;  // (U_ee - U_gg) N/2
        const double chi = 0.2 + 0.1;                // U_ee + U_gg - 2 U_eg
        const double j = 1.0;                        // per-well spin N/4
        for (int nl = 0; nl <= 2; ++nl)
            for (int nr = 0; nr <= 2; ++nr) {
                const int i = model.layout.basis_index({0, nl, nr});
                const double ml = nl - j, mr = nr - j;
                const double want =
                    (0.5 + delta) * (ml + mr) + chi * (ml * ml + mr * mr);
                CHECK_THAT(std::real(model.hamiltonian.entry(i, i)), WithinAbs(want, 1e-12));
            }
    }
    SECTION("odd N rejected; cap enforced") {
        CHECK_THROWS_AS(build_exact_spin_weak({.N = 5, .photon_dim = 2}), DomainError);
        CHECK_THROWS_AS(build_exact_spin_weak({.N = 4000, .photon_dim = 4}), ResourceError);
    }
}

TEST_CASE("bosonization error shrinks with N (two-quanta probe)", "[models][slow]") {
    // With a single excitation the spin and boson models coincide exactly, so
    // the first nontrivial truncation effect appears with two quanta, where
    // the spin coupling picks up a sqrt(1 - 1/N)-type correction. The maximum
    // trajectory deviation of <a†a> over t in [0, 10/(g sqrt(N))] must fall
    // monotonically as N grows.
    std::vector<double> deviations;
    for (long long N : {8, 20, 40, 80}) {
        auto spin = build_exact_spin_strong({.N = N, .photon_dim = 4});
        auto [hs, ssec] = restrict_to_excitation_sector(spin.layout, spin.hamiltonian, 2);

        ModelParams bp{.N = N, .photon_dim = 4, .atomic_dim = 4};
        auto blayout = strong_layout(bp);
        auto [hb, bsec] =
            restrict_to_excitation_sector(blayout, build_strong_tunneling(bp, blayout), 2);
        REQUIRE(ssec.dim() == bsec.dim());

        auto spin_idx = ssec.to_sector[spin.layout.basis_index({0, 2})];
        auto boson_idx = bsec.to_sector[blayout.basis_index({0, 2})];
        REQUIRE(spin_idx == boson_idx);

        DenseVector v0 = DenseVector::Zero(ssec.dim());
        v0(spin_idx) = Complex(1.0, 0.0);
        StateVector psi0(v0);

        auto na_spin = restrict_operator(number_operator(spin.layout, "a"), ssec);
        auto na_boson = restrict_operator(number_operator(blayout, "a"), bsec);

        UnitaryEvolutionSpec us{hs, 10.0 / std::sqrt(double(N)), 400, 1e-10, 1e-12};
        UnitaryEvolutionSpec ub{hb, 10.0 / std::sqrt(double(N)), 400, 1e-10, 1e-12};
        auto ts = evolve_unitary(psi0, us, {{"na", na_spin}});
        auto tb = evolve_unitary(psi0, ub, {{"na", na_boson}});

        double dev = 0.0;
        for (std::size_t i = 0; i < ts.times.size(); ++i)
            dev = std::max(dev, std::abs(ts.series["na"][i] - tb.series["na"][i]));
        deviations.push_back(dev);
    }
    for (std::size_t i = 1; i < deviations.size(); ++i) CHECK(deviations[i] < deviations[i - 1]);
    CHECK(deviations.front() > 0.3);   // N=8 is visibly off
    CHECK(deviations.back() < 0.08);   // N=80 is close
}
