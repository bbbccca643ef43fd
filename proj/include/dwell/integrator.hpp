#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dwell/errors.hpp"

namespace dwell {

// Adaptive embedded Runge-Kutta: the Dormand-Prince 5(4) pair with PI
// (proportional-integral) step-size control. Deterministic: identical inputs
// produce bit-identical step sequences. The state type only needs Eigen-style
// array arithmetic (VectorXcd and MatrixXcd both qualify).

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double safety = 0.9;
    double min_factor = 0.2;
    double max_factor = 5.0;
    // PI exponents (Hairer's beta = 0.04-style controller for order 5).
    double alpha = 0.7 / 5.0;
    double beta = 0.4 / 5.0;
    long long max_steps = 50'000'000;
    double initial_step = 0.0;  // <= 0 selects automatically
};

struct IntegrationStats {
    long long n_accepted = 0;
    long long n_rejected = 0;
    double last_step = 0.0;
};

namespace detail {

// Dormand-Prince tableau.
inline constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// 5th-order weights equal the last tableau row (FSAL); error weights are the
// difference to the embedded 4th-order solution.
inline constexpr double kE[7] = {71.0 / 57600,     0.0,        -71.0 / 16695, 71.0 / 1920,
                                 -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

template <typename State>
double scaled_error_norm(const State& err, const State& y0, const State& y1, double abs_tol,
                         double rel_tol) {
    const auto scale =
        abs_tol + rel_tol * y0.cwiseAbs().array().max(y1.cwiseAbs().array());
    return (err.cwiseAbs().array() / scale).maxCoeff();
}

}  // namespace detail

// Integrates dy/dt = rhs(t, y) from sample_times.front() context: the state is
// advanced from t0 = 0 reference of the caller; more precisely, integration
// starts at `t_start` and the observer fires at every entry of sample_times
// (which must be non-decreasing and start at or after t_start). rhs has
// signature rhs(double t, const State& y, State& dydt).
template <typename State, typename Rhs, typename Observer>
IntegrationStats integrate_dopri5(Rhs&& rhs, State& y, double t_start,
                                  const std::vector<double>& sample_times, Observer&& observe,
                                  const IntegratorOptions& opt = {}) {
    if (sample_times.empty()) throw DomainError("integrate_dopri5: no sample times");
    for (std::size_t i = 0; i + 1 < sample_times.size(); ++i)
        if (sample_times[i + 1] <= sample_times[i])
            throw DomainError("integrate_dopri5: sample times must be strictly increasing");
    if (sample_times.front() < t_start - 1e-15)
        throw DomainError("integrate_dopri5: first sample precedes start time");
    if (opt.rel_tol <= 0 || opt.abs_tol <= 0)
        throw DomainError("integrate_dopri5: tolerances must be positive");

    IntegrationStats stats;
    double t = t_start;
    std::size_t next = 0;
    if (std::abs(sample_times.front() - t_start) < 1e-15) {
        observe(t_start, y);
        ++next;
    }
    if (next >= sample_times.size()) return stats;

    std::array<State, 7> k;
    State y_new, err, y_stage;
    rhs(t, y, k[0]);

    // Automatic initial step: balance the solution and derivative scales.
    double h;
    if (opt.initial_step > 0.0) {
        h = opt.initial_step;
    } else {
        const double span = sample_times.back() - t_start;
        const double d0 = detail::scaled_error_norm(y, y, y, opt.abs_tol, opt.rel_tol);
        const double d1 = detail::scaled_error_norm(k[0], y, y, opt.abs_tol, opt.rel_tol);
        h = (d1 > 1e-30) ? 0.01 * d0 / d1 : 1e-6 * span;
        h = std::min(std::max(h, 1e-12 * span), span);
    }

    double err_old = 1e-4;  // PI memory
    while (next < sample_times.size()) {
        if (stats.n_accepted + stats.n_rejected >= opt.max_steps)
            throw IntegrationError("integrate_dopri5: step budget exhausted at t = " +
                                   std::to_string(t));
        const double target = sample_times[next];
        bool hits_sample = false;
        double h_used = h;
        if (h_used >= 0.95 * (target - t)) {
            h_used = target - t;
            hits_sample = true;
        }
        if (h_used < 1e-14 * std::max(1.0, std::abs(t)))
            throw IntegrationError("integrate_dopri5: step size underflow at t = " +
                                   std::to_string(t));

        // Stages (k[0] is fresh from FSAL or initialization).
        for (int s = 1; s < 7; ++s) {
            y_stage = y;
            for (int p = 0; p < s; ++p)
                if (detail::kA[s][p] != 0.0) y_stage += (h_used * detail::kA[s][p]) * k[p];
            rhs(t + detail::kC[s] * h_used, y_stage, k[s]);
        }
        // kA[6] row equals the 5th-order weights, so stage 6's input is y_new.
        y_new = y;
        for (int p = 0; p < 6; ++p)
            if (detail::kA[6][p] != 0.0) y_new += (h_used * detail::kA[6][p]) * k[p];

        err = detail::kE[0] * k[0];
        for (int p = 1; p < 7; ++p)
            if (detail::kE[p] != 0.0) err += detail::kE[p] * k[p];
        err *= h_used;
        const double err_norm =
            detail::scaled_error_norm(err, y, y_new, opt.abs_tol, opt.rel_tol);

        if (err_norm <= 1.0) {
            stats.n_accepted++;
            stats.last_step = h_used;
            t = hits_sample ? target : t + h_used;
            y.swap(y_new);
            k[0].swap(k[6]);  // FSAL
            if (hits_sample) {
                observe(target, y);
                ++next;
            }
            const double e = std::max(err_norm, 1e-12);
            double factor = opt.safety * std::pow(e, -opt.alpha) * std::pow(err_old, opt.beta);
            factor = std::clamp(factor, opt.min_factor, opt.max_factor);
            h = h_used * factor;
            err_old = e;
        } else {
            stats.n_rejected++;
            const double factor =
                std::clamp(opt.safety * std::pow(err_norm, -0.2), opt.min_factor, 1.0);
            h = h_used * factor;
            // The rejected stage derivative at the old point is still valid.
        }
    }
    return stats;
}

}  // namespace dwell
