/// @file timeint.hpp
/// @brief Time integrators for the network ODE systems: an adaptive
///        two-stage implicit scheme (trapezoidal step followed by a
///        second-order backward-difference step, sharing one iteration
///        matrix) for stiff transients, and fixed-step classical RK4.
///        Both emit interpolated samples at caller-supplied times while
///        integrating, so full trajectories never need to be stored.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pipeflow/common.hpp"

namespace pipeflow {

using rhs_fn = std::function<vec(double, const vec&)>;
/// Receives (sample index, time, state) for each requested sample time.
using sample_fn = std::function<void(std::size_t, double, const vec&)>;
/// Invoked after each accepted step with (time, state); may throw to abort.
using step_fn = std::function<void(double, const vec&)>;

struct integ_options {
    double rel_tol = 1e-6;
    double abs_tol = 1e-7;
    double h_init = 1.0;                                     ///< seconds
    double h_min = 1e-10;
    double h_max = std::numeric_limits<double>::infinity();
    long long max_steps = 50'000'000;
    int newton_max = 8;
    double newton_tol = 0.05;   ///< weighted-RMS displacement target
    int jacobian_age = 50;      ///< accepted steps before a refresh
};

struct integ_stats {
    long long steps = 0;
    long long rejected = 0;
    long long rhs_evals = 0;
    long long jacobians = 0;
};

/// Forward-difference Jacobian of f at (t, y); f0 = f(t, y).
inline mat numeric_jacobian(const rhs_fn& f, double t, const vec& y, const vec& f0,
                            double step_scale = 1e-7) {
    const int n = static_cast<int>(y.size());
    mat J(n, n);
    vec yp = y;
    for (int c = 0; c < n; ++c) {
        const double h = step_scale * (1.0 + std::abs(y[c]));
        yp[c] = y[c] + h;
        J.col(c) = (f(t, yp) - f0) / h;
        yp[c] = y[c];
    }
    return J;
}

/// Central-difference Jacobian of f at (t, y).
inline mat central_jacobian(const rhs_fn& f, double t, const vec& y,
                            double step_scale = 1e-6) {
    const int n = static_cast<int>(y.size());
    mat J(n, n);
    vec yp = y;
    for (int c = 0; c < n; ++c) {
        const double h = step_scale * (1.0 + std::abs(y[c]));
        yp[c] = y[c] + h;
        const vec fp = f(t, yp);
        yp[c] = y[c] - h;
        J.col(c) = (fp - f(t, yp)) / (2.0 * h);
        yp[c] = y[c];
    }
    return J;
}

namespace detail {

inline double wrms(const vec& v, const vec& weight) {
    if (v.size() == 0) return 0.0;
    return std::sqrt(v.cwiseProduct(weight).squaredNorm() / static_cast<double>(v.size()));
}

/// Cubic Hermite interpolation on [t0, t1] from endpoint states and slopes.
inline vec hermite(double t0, double t1, const vec& y0, const vec& f0, const vec& y1,
                   const vec& f1, double t) {
    const double h = t1 - t0;
    if (h == 0.0) return y1;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * f0 +
           (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * f1;
}

/// Emits every pending sample time <= t_hi using the current step's Hermite
/// interpolant; `next` is advanced past the emitted entries.
inline void emit_through(const std::vector<double>& times, std::size_t& next, double t_lo,
                         double t_hi, const vec& y_lo, const vec& f_lo, const vec& y_hi,
                         const vec& f_hi, const sample_fn& emit) {
    const double slack = 1e-9 * (1.0 + std::abs(t_hi));
    while (next < times.size() && times[next] <= t_hi + slack) {
        if (emit) emit(next, times[next], hermite(t_lo, t_hi, y_lo, f_lo, y_hi, f_hi,
                                                  std::clamp(times[next], t_lo, t_hi)));
        ++next;
    }
}

}  // namespace detail

/// Integrates y' = f(t, y) from t0 to t1 with the adaptive implicit scheme.
/// `y` holds the initial state on entry and the final state on return.
/// `sample_times` must be sorted ascending; each entry inside [t0, t1] is
/// reported exactly once through `emit`.  `post_step` (optional) runs after
/// every accepted step.
inline integ_stats integrate_trbdf2(const rhs_fn& f, double t0, double t1, vec& y,
                                    const integ_options& opt = {},
                                    const std::vector<double>& sample_times = {},
                                    const sample_fn& emit = {},
                                    const step_fn& post_step = {}) {
    static const double kGamma = 2.0 - std::sqrt(2.0);
    static const double kW1 = 1.0 / (kGamma * (2.0 - kGamma));
    static const double kW0 = (1.0 - kGamma) * (1.0 - kGamma) / (kGamma * (2.0 - kGamma));
    static const double kD = kGamma / 2.0;
    static const double kE0 = (1.0 - std::sqrt(2.0)) / 3.0;
    static const double kE1 = 1.0 / 3.0;
    static const double kE2 = (std::sqrt(2.0) - 2.0) / 3.0;

    if (!(t1 > t0)) throw input_error("integration interval must have t1 > t0");
    const int n = static_cast<int>(y.size());
    integ_stats stats;
    auto eval = [&](double t, const vec& state) {
        ++stats.rhs_evals;
        return f(t, state);
    };

    double t = t0;
    vec f_n = eval(t, y);
    if (!f_n.allFinite()) throw numeric_error("right-hand side not finite at initial state");

    std::size_t next_sample = 0;
    detail::emit_through(sample_times, next_sample, t0, t0, y, f_n, y, f_n, emit);

    double h = std::clamp(opt.h_init, opt.h_min, std::min(opt.h_max, t1 - t0));
    mat J;
    Eigen::PartialPivLU<mat> lu;
    bool jac_fresh = false;
    int jac_age = 0;
    double h_factored = -1.0;

    auto refresh_jacobian = [&]() {
        J = numeric_jacobian(f, t, y, f_n);
        stats.rhs_evals += n;
        ++stats.jacobians;
        jac_fresh = true;
        jac_age = 0;
        h_factored = -1.0;
    };
    auto ensure_factorization = [&]() {
        if (h_factored == h) return;
        lu.compute(mat::Identity(n, n) - (kD * h) * J);
        h_factored = h;
    };
    refresh_jacobian();

    // Newton solve of Y - d*h*f(ts, Y) = rhs_const; returns convergence flag
    // and leaves f(ts, Y) in f_out.
    auto solve_stage = [&](double ts, const vec& rhs_const, vec& Y, vec& f_out,
                           const vec& weight) {
        double prev_norm = std::numeric_limits<double>::infinity();
        for (int it = 0; it < opt.newton_max; ++it) {
            f_out = eval(ts, Y);
            if (!f_out.allFinite()) return false;
            const vec residual = Y - kD * h * f_out - rhs_const;
            const vec delta = lu.solve(-residual);
            if (!delta.allFinite()) return false;
            Y += delta;
            const double dnorm = detail::wrms(delta, weight);
            if (dnorm <= opt.newton_tol) {
                f_out = eval(ts, Y);
                return f_out.allFinite();
            }
            if (it > 0 && dnorm > 0.9 * prev_norm && dnorm > opt.newton_tol) return false;
            prev_norm = dnorm;
        }
        return false;
    };

    while (t < t1 - 1e-12 * (1.0 + std::abs(t1))) {
        if (stats.steps + stats.rejected > opt.max_steps)
            throw numeric_error("integrator exceeded the step budget");
        h = std::min({h, opt.h_max, t1 - t});
        if (h < opt.h_min) h = std::min(opt.h_min, t1 - t);
        ensure_factorization();

        const vec weight =
            (opt.abs_tol + opt.rel_tol * y.cwiseAbs().array()).cwiseInverse().matrix();

        bool stage_ok = false;
        vec y_mid = y + (kGamma * h) * f_n;           // trapezoidal-stage predictor
        vec f_mid(n), y_end(n), f_end(n);
        if (solve_stage(t + kGamma * h, y + (kD * h) * f_n, y_mid, f_mid, weight)) {
            y_end = y + (y_mid - y) / kGamma;          // extrapolation predictor
            stage_ok = solve_stage(t + h, kW1 * y_mid - kW0 * y, y_end, f_end, weight);
        }

        if (!stage_ok) {
            if (!jac_fresh) {
                refresh_jacobian();
            } else {
                ++stats.rejected;
                h *= 0.5;
                if (h < opt.h_min)
                    throw numeric_error("implicit stage failed at the minimum step size");
            }
            continue;
        }

        vec err_raw = h * (kE0 * f_n + kE1 * f_mid + kE2 * f_end);
        const double err = detail::wrms(lu.solve(err_raw), weight);
        if (!std::isfinite(err) || err > 1.0) {
            ++stats.rejected;
            const double shrink =
                std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 0.9)
                                   : 0.2;
            h *= shrink;
            if (h < opt.h_min)
                throw numeric_error("error control failed at the minimum step size");
            jac_fresh = false;
            continue;
        }

        detail::emit_through(sample_times, next_sample, t, t + h, y, f_n, y_end, f_end,
                             emit);
        t += h;
        y = std::move(y_end);
        f_n = std::move(f_end);
        ++stats.steps;
        ++jac_age;
        jac_fresh = false;
        if (post_step) post_step(t, y);
        if (jac_age >= opt.jacobian_age) refresh_jacobian();

        const double grow = std::clamp(
            0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0), 0.2, 5.0);
        if (grow < 0.9 || grow > 1.15) h = std::min(h * grow, opt.h_max);
    }

    // Flush any trailing samples that sit within rounding of t1.
    detail::emit_through(sample_times, next_sample, t, t + 1.0, y, f_n, y, f_n, emit);
    return stats;
}

/// Integrates y' = f(t, y) from t0 to t1 with classical fixed-step RK4 using
/// uniform steps no longer than dt.  Sampling matches integrate_trbdf2.
inline integ_stats integrate_rk4(const rhs_fn& f, double t0, double t1, vec& y, double dt,
                                 const std::vector<double>& sample_times = {},
                                 const sample_fn& emit = {},
                                 const step_fn& post_step = {}) {
    if (!(t1 > t0)) throw input_error("integration interval must have t1 > t0");
    if (!(dt > 0.0)) throw input_error("fixed step size must be positive");
    const long long n_steps =
        std::max<long long>(1, static_cast<long long>(std::ceil((t1 - t0) / dt - 1e-12)));
    const double h = (t1 - t0) / static_cast<double>(n_steps);

    integ_stats stats;
    vec f_n = f(t0, y);
    ++stats.rhs_evals;
    if (!f_n.allFinite()) throw numeric_error("right-hand side not finite at initial state");
    std::size_t next_sample = 0;
    detail::emit_through(sample_times, next_sample, t0, t0, y, f_n, y, f_n, emit);

    double t = t0;
    for (long long s = 0; s < n_steps; ++s) {
        const double t_next = (s + 1 == n_steps) ? t1 : t0 + h * static_cast<double>(s + 1);
        const vec k1 = f_n;
        const vec k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
        const vec k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
        const vec k4 = f(t_next, y + h * k3);
        vec y_next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        vec f_next = f(t_next, y_next);
        stats.rhs_evals += 4;
        if (!y_next.allFinite() || !f_next.allFinite())
            throw numeric_error("state not finite at t = " + std::to_string(t_next) + " s");
        detail::emit_through(sample_times, next_sample, t, t_next, y, f_n, y_next, f_next,
                             emit);
        t = t_next;
        y = std::move(y_next);
        f_n = std::move(f_next);
        ++stats.steps;
        if (post_step) post_step(t, y);
    }
    detail::emit_through(sample_times, next_sample, t, t + 1.0, y, f_n, y, f_n, emit);
    return stats;
}

}  // namespace pipeflow
