/// @file spectral.hpp
/// @brief Chebyshev collocation solver for transient two-gas flow in a single
///        pipe with a pressure-controlled inlet and a flow-controlled outlet.
///        Space is discretized on Chebyshev extreme points; the momentum
///        balance is solved in closed form for the mass flux at each node, so
///        only the two partial densities at the non-inlet nodes are evolved.
///
/// State convention: y = [rho1_1 .. rho1_N, rho2_1 .. rho2_N] (kg/m^3) at
/// grid nodes 1..N (node 0 is the inlet, pinned to boundary data).  Time in
/// seconds inside the right-hand side.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pipeflow/common.hpp"
#include "pipeflow/gas.hpp"
#include "pipeflow/scenario.hpp"

namespace pipeflow {

/// Chebyshev extreme-point grid on [0, length] with its differentiation
/// matrix.  x is ascending: x_0 = 0, x_N = length.
struct cheb_grid {
    vec x;  ///< N+1 nodes, meters
    mat D;  ///< (N+1)x(N+1) differentiation matrix, d/dx
};

/// Builds the grid with N+1 points (polynomial degree N).  Differentiation of
/// any polynomial of degree <= N is exact up to rounding.
inline cheb_grid make_cheb(int N, double length) {
    if (N < 1) throw input_error("spectral grid needs at least 2 points");
    if (!(length > 0.0)) throw input_error("spectral grid length must be positive");
    cheb_grid g;
    g.x.resize(N + 1);
    for (int i = 0; i <= N; ++i)
        g.x[i] = 0.5 * length * (1.0 - std::cos(kPi * static_cast<double>(i) /
                                                 static_cast<double>(N)));
    g.D = mat::Zero(N + 1, N + 1);
    auto c = [N](int i) { return (i == 0 || i == N) ? 2.0 : 1.0; };
    for (int i = 0; i <= N; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j <= N; ++j) {
            if (j == i) continue;
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            g.D(i, j) = (c(i) / c(j)) * sign / (g.x[i] - g.x[j]);
            row_sum += g.D(i, j);
        }
        g.D(i, i) = -row_sum;
    }
    return g;
}

/// Regularization of the friction inversion, in squared-flux units: the
/// inverted flux deviates from sqrt(|drive|) only within a band of about
/// 1e-3 kg/m^2/s around zero flow, far below any reported operating flux.
inline constexpr double kFluxRegularization = 1e-6;

/// Collocation system for one pipe: slack inlet at x = 0, withdrawal outlet
/// at x = length.
class spectral_system {
public:
    spectral_system(const prepared_scenario& ps, int nodes)
        : ps_(&ps), gas_(ps.gas), N_(nodes) {
        if (ps.fine.edge_count() != 1 || ps.fine.node_count() != 2 ||
            ps.fine.n_slack != 1)
            throw input_error("the collocation solver handles a single slack-fed pipe");
        const pipe& e = ps.fine.pipes[0];
        if (e.compressor_ratio != 1.0 || e.regulator_ratio != 1.0)
            throw input_error("the collocation solver does not support pressure controls");
        area_ = e.area();
        diameter_ = e.diameter_m;
        friction_ = e.friction;
        grid_ = make_cheb(N_, e.length_m());
        flux_scale_ = 2.0 * diameter_ / friction_;
    }

    int nodes() const { return N_; }
    int state_size() const { return 2 * N_; }
    const cheb_grid& grid() const { return grid_; }
    const gas_pair& gas() const { return gas_; }
    double area() const { return area_; }

    boundary_values boundary_at(double t_s) const {
        return sample_boundary(*ps_, t_s / kSecondsPerHour);
    }

    /// Inlet partial densities for a boundary sample.
    void inlet_density(const boundary_values& b, double& rho1, double& rho2) const {
        const double rho_s = b.slack_pressure_pa[0] / gas_.c2(b.slack_h2[0]);
        rho1 = (1.0 - b.slack_h2[0]) * rho_s;
        rho2 = b.slack_h2[0] * rho_s;
    }

    /// Nodal fields reconstructed from a state: partial densities, pressure,
    /// and mass flux at every grid node (length N+1 each).
    struct fields {
        vec rho1, rho2, p, flux;
    };

    fields reconstruct(const boundary_values& b, const vec& y) const {
        if (y.size() != 2 * N_)
            throw input_error("collocation state: expected length " +
                              std::to_string(2 * N_) + ", got " +
                              std::to_string(y.size()));
        fields f;
        f.rho1.resize(N_ + 1);
        f.rho2.resize(N_ + 1);
        inlet_density(b, f.rho1[0], f.rho2[0]);
        f.rho1.tail(N_) = y.head(N_);
        f.rho2.tail(N_) = y.tail(N_);
        const double s1 = gas_.sigma1 * gas_.sigma1, s2 = gas_.sigma2 * gas_.sigma2;
        f.p = s1 * f.rho1 + s2 * f.rho2;
        const vec grad = grid_.D * f.p;
        f.flux.resize(N_ + 1);
        for (int i = 0; i < N_; ++i) {
            const double drive = flux_scale_ * (f.rho1[i] + f.rho2[i]) * grad[i];
            // Smooth inversion of phi*|phi| = -drive: equals
            // -sign(drive)*sqrt(|drive|) up to a relative error of
            // eps/(2*|drive|) (~1e-10 at typical operating flux), but keeps a
            // bounded slope through zero so the implicit stages remain
            // solvable while a local backflow pocket crosses zero flux.
            f.flux[i] = -drive / std::sqrt(std::abs(drive) + kFluxRegularization);
        }
        f.flux[N_] = b.demand[0] / area_;
        return f;
    }

    /// Time derivative of the partial densities at nodes 1..N.
    vec rhs(const boundary_values& b, const vec& y) const {
        const fields f = reconstruct(b, y);
        vec frac1(N_ + 1), frac2(N_ + 1);
        for (int i = 0; i <= N_; ++i) {
            const double rho = f.rho1[i] + f.rho2[i];
            const double eta2 = rho != 0.0 ? f.rho2[i] / rho : 0.0;
            frac1[i] = (1.0 - eta2) * f.flux[i];
            frac2[i] = eta2 * f.flux[i];
        }
        const vec d1 = grid_.D * frac1;
        const vec d2 = grid_.D * frac2;
        vec dy(2 * N_);
        dy.head(N_) = -d1.tail(N_);
        dy.tail(N_) = -d2.tail(N_);
        return dy;
    }

    vec rhs(double t_s, const vec& y) const { return rhs(boundary_at(t_s), y); }

    /// Steady state for the boundary values at time t_hr, used as the initial
    /// condition: uniform composition advected from the inlet and the
    /// closed-form pressure drop of steady isothermal pipe flow.
    vec steady_init(double t_hr = 0.0) const {
        const boundary_values b = sample_boundary(*ps_, t_hr);
        const double eta2 = b.slack_h2[0];
        const double c2 = gas_.c2(eta2);
        const double p_in = b.slack_pressure_pa[0];
        const double flux = b.demand[0] / area_;
        const double drop = friction_ * c2 * flux * std::abs(flux) / diameter_;
        vec y(2 * N_);
        for (int i = 1; i <= N_; ++i) {
            const double p2 = p_in * p_in - drop * grid_.x[i];
            if (p2 <= 0.0)
                throw numeric_error("steady pipe flow: pressure reaches zero inside the pipe");
            const double rho = std::sqrt(p2) / c2;
            y[i - 1] = (1.0 - eta2) * rho;
            y[N_ - 1 + i] = eta2 * rho;
        }
        return y;
    }

private:
    const prepared_scenario* ps_;
    gas_pair gas_;
    int N_;
    double area_ = 0.0, diameter_ = 0.0, friction_ = 0.0, flux_scale_ = 0.0;
    cheb_grid grid_;
};

}  // namespace pipeflow
