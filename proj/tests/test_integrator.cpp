#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "dwell/fock.hpp"
#include "dwell/integrator.hpp"

using namespace dwell;
using Catch::Matchers::WithinAbs;

namespace {

// Complex scalar exponential decay, y' = -y, packed in a 1-vector.
void decay_rhs(double, const DenseVector& y, DenseVector& dydt) { dydt = -y; }

}  // namespace

TEST_CASE("adaptive RK respects the requested tolerance", "[integrator]") {
    SECTION("exponential decay") {
        DenseVector y = DenseVector::Constant(1, Complex(1.0, 0.0));
        std::vector<double> samples{0.0, 0.5, 1.0, 2.0, 5.0};
        std::vector<double> got;
        IntegratorOptions opt;
        opt.rel_tol = 1e-10;
        opt.abs_tol = 1e-12;
        integrate_dopri5(
            decay_rhs, y, 0.0, samples,
            [&](double, const DenseVector& s) { got.push_back(std::real(s(0))); }, opt);
        REQUIRE(got.size() == samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            CHECK_THAT(got[i], WithinAbs(std::exp(-samples[i]), 1e-9));
    }
    SECTION("oscillator phase accuracy over many periods") {
        // y' = i*w*y keeps |y| = 1; the phase after 20 periods probes
        // accumulated truncation error.
        const double w = 3.0;
        auto rhs = [&](double, const DenseVector& y, DenseVector& dydt) {
            dydt = Complex(0.0, w) * y;
        };
        DenseVector y = DenseVector::Constant(1, Complex(1.0, 0.0));
        const double t_end = 20.0 * 2.0 * std::numbers::pi / w;
        IntegratorOptions opt;
        opt.rel_tol = 1e-10;
        opt.abs_tol = 1e-12;
        auto stats = integrate_dopri5(
            rhs, y, 0.0, std::vector<double>{t_end}, [](double, const DenseVector&) {}, opt);
        CHECK_THAT(std::abs(y(0)), WithinAbs(1.0, 1e-9));
        CHECK_THAT(std::arg(y(0)), WithinAbs(0.0, 1e-6));
        CHECK(stats.n_accepted > 0);
        // The controller should not thrash: most attempted steps succeed.
        CHECK(stats.n_rejected < stats.n_accepted / 2 + 10);
    }
}

TEST_CASE("sample grid is hit exactly", "[integrator]") {
    DenseVector y = DenseVector::Constant(1, Complex(1.0, 0.0));
    std::vector<double> samples;
    for (int i = 0; i <= 40; ++i) samples.push_back(0.025 * i);
    std::vector<double> seen;
    integrate_dopri5(
        decay_rhs, y, 0.0, samples,
        [&](double t, const DenseVector&) { seen.push_back(t); }, IntegratorOptions{});
    REQUIRE(seen.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) CHECK(seen[i] == samples[i]);
}

TEST_CASE("integrator failure modes raise errors", "[integrator]") {
    SECTION("non-increasing sample times") {
        DenseVector y = DenseVector::Constant(1, Complex(1.0, 0.0));
        CHECK_THROWS_AS(integrate_dopri5(decay_rhs, y, 0.0, std::vector<double>{1.0, 0.5},
                                         [](double, const DenseVector&) {}, IntegratorOptions{}),
                        DomainError);
        CHECK_THROWS_AS(integrate_dopri5(decay_rhs, y, 1.0, std::vector<double>{0.5},
                                         [](double, const DenseVector&) {}, IntegratorOptions{}),
                        DomainError);
    }
    SECTION("step budget exhaustion") {
        auto rhs = [](double, const DenseVector& y, DenseVector& dydt) {
            dydt = Complex(0.0, 1000.0) * y;
        };
        DenseVector y = DenseVector::Constant(1, Complex(1.0, 0.0));
        IntegratorOptions opt;
        opt.max_steps = 50;
        CHECK_THROWS_AS(integrate_dopri5(rhs, y, 0.0, std::vector<double>{100.0},
                                         [](double, const DenseVector&) {}, opt),
                        IntegrationError);
    }
    SECTION("step underflow near a singularity") {
        // y' = y / (1 - t) blows up at t = 1; asking for a sample beyond the
        // singularity must fail loudly instead of silently stepping over it.
        auto rhs = [](double t, const DenseVector& y, DenseVector& dydt) {
            dydt = y / (1.0 - t);
        };
        DenseVector y = DenseVector::Constant(1, Complex(1.0, 0.0));
        CHECK_THROWS_AS(integrate_dopri5(rhs, y, 0.0, std::vector<double>{2.0},
                                         [](double, const DenseVector&) {}, IntegratorOptions{}),
                        IntegrationError);
    }
}
