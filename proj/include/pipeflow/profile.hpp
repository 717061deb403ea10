/// @file profile.hpp
/// @brief Time-dependent boundary/control profiles: constant, sinusoid, and
///        piecewise-linear.  Time is in hours; frequencies in cycles/hour.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "pipeflow/common.hpp"

namespace pipeflow {

struct profile {
    enum class kind_t { constant, sinusoid, piecewise_linear };

    kind_t kind = kind_t::constant;
    double value = 0.0;      ///< constant value
    double mean = 0.0;       ///< sinusoid mean
    double kappa = 0.0;      ///< sinusoid amplitude factor
    double omega = 0.0;      ///< sinusoid frequency, cycles per hour
    double phase = 0.0;      ///< sinusoid phase, radians
    std::vector<std::pair<double, double>> knots;  ///< (t_hr, value), ascending

    static profile constant(double v) {
        profile p;
        p.kind = kind_t::constant;
        p.value = v;
        return p;
    }

    /// mean * (1 + kappa * sin(2*pi*omega*t + phase))
    static profile sinusoid(double mean, double kappa, double omega_cyc_hr, double phase = 0.0) {
        profile p;
        p.kind = kind_t::sinusoid;
        p.mean = mean;
        p.kappa = kappa;
        p.omega = omega_cyc_hr;
        p.phase = phase;
        return p;
    }

    static profile piecewise(std::vector<std::pair<double, double>> knots) {
        profile p;
        p.kind = kind_t::piecewise_linear;
        p.knots = std::move(knots);
        if (p.knots.empty()) throw input_error("piecewise profile needs at least one knot");
        for (size_t i = 1; i < p.knots.size(); ++i)
            if (!(p.knots[i].first > p.knots[i - 1].first))
                throw input_error("piecewise profile knots must be strictly ascending in time");
        return p;
    }

    double sample(double t_hr) const {
        switch (kind) {
            case kind_t::constant:
                return value;
            case kind_t::sinusoid:
                return mean * (1.0 + kappa * std::sin(2.0 * kPi * omega * t_hr + phase));
            case kind_t::piecewise_linear: {
                if (t_hr <= knots.front().first) return knots.front().second;
                if (t_hr >= knots.back().first) return knots.back().second;
                auto it = std::upper_bound(
                    knots.begin(), knots.end(), t_hr,
                    [](double t, const std::pair<double, double>& k) { return t < k.first; });
                const auto& hi = *it;
                const auto& lo = *(it - 1);
                const double s = (t_hr - lo.first) / (hi.first - lo.first);
                return lo.second + s * (hi.second - lo.second);
            }
        }
        return 0.0;  // unreachable
    }

    /// Exact bounds of the profile over all t (piecewise: over its knots).
    std::pair<double, double> range() const {
        switch (kind) {
            case kind_t::constant:
                return {value, value};
            case kind_t::sinusoid: {
                const double lo = mean * (1.0 - std::abs(kappa));
                const double hi = mean * (1.0 + std::abs(kappa));
                return {std::min(lo, hi), std::max(lo, hi)};
            }
            case kind_t::piecewise_linear: {
                double lo = knots.front().second, hi = lo;
                for (const auto& k : knots) {
                    lo = std::min(lo, k.second);
                    hi = std::max(hi, k.second);
                }
                return {lo, hi};
            }
        }
        return {0.0, 0.0};  // unreachable
    }

    bool is_constant() const { return kind == kind_t::constant; }

    /// The same profile with every sampled value multiplied by `factor`.
    profile scaled(double factor) const {
        profile p = *this;
        switch (kind) {
            case kind_t::constant:
                p.value *= factor;
                break;
            case kind_t::sinusoid:
                p.mean *= factor;
                break;
            case kind_t::piecewise_linear:
                for (auto& k : p.knots) k.second *= factor;
                break;
        }
        return p;
    }
};

}  // namespace pipeflow
