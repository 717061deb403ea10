/// @file fv.hpp
/// @brief Lumped-element flow models on refined networks: the per-edge flux
///        closure, the partial-density ODE right-hand side, its equivalent
///        total-density/pressure and isolated-pressure forms, diagnostic
///        monitors, and the steady-state solver used for initial conditions.
///
/// State conventions (all at non-slack nodes, canonical node order):
///   - partial-density system: y = [rho1(0..Vd-1), rho2(0..Vd-1)], kg/m^3
///   - density/pressure system: y = [rho_total, pressure_Pa]
///   - isolated pressure system: y = [pressure_Pa]
/// Time is in seconds inside all right-hand sides; boundary profiles are
/// sampled in hours.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pipeflow/common.hpp"
#include "pipeflow/gas.hpp"
#include "pipeflow/network.hpp"
#include "pipeflow/scenario.hpp"

namespace pipeflow {

/// Mass flux through an edge (kg m^-2 s^-1): -sign(z) * coeff * sqrt(|y z|),
/// where y is the outlet-weighted total density, z the weighted outlet-inlet
/// pressure difference, and coeff = sqrt(2 D / (friction * length)).  Flow in
/// the edge direction corresponds to z < 0.
inline double flux_closure(double y, double z, double coeff) {
    if (z == 0.0) return 0.0;
    const double magnitude = coeff * std::sqrt(std::abs(y * z));
    return z < 0.0 ? magnitude : -magnitude;
}

/// Flow ODE systems assembled from a prepared scenario.
///
/// The object caches per-edge geometry and samples boundary profiles on
/// demand.  All right-hand sides are evaluated with per-edge loops in O(E);
/// the dense incidence matrices are available separately (incidence_matrices)
/// for verification.
class fv_system {
public:
    explicit fv_system(const prepared_scenario& ps)
        : ps_(&ps), g_(&ps.fine), gas_(ps.gas) {
        const int E = g_->edge_count();
        chi_.resize(E);
        coeff_.resize(E);
        ell_m_.resize(E);
        for (int k = 0; k < E; ++k) {
            const pipe& e = g_->pipes[k];
            chi_[k] = e.area();
            ell_m_[k] = e.length_m();
            coeff_[k] = std::sqrt(2.0 * e.diameter_m / (e.friction * e.length_m()));
        }
        bounds0_ = sample_boundary(ps, 0.0);
        r0_ = storage_coeff(bounds0_);
    }

    const network_graph& graph() const { return *g_; }
    const gas_pair& gas() const { return gas_; }
    const prepared_scenario& scenario() const { return *ps_; }

    int demand_count() const { return g_->non_slack_count(); }
    int state_size() const { return 2 * demand_count(); }

    /// Boundary data at time t (seconds).
    boundary_values boundary_at(double t_s) const {
        return sample_boundary(*ps_, t_s / kSecondsPerHour);
    }

    /// Nodal storage coefficients r_j = sum over incoming edges of
    /// chi * length_m * mu_upper for the given boundary sample.
    vec storage_coeff(const boundary_values& b) const {
        vec r = vec::Zero(demand_count());
        for (int k = 0; k < g_->edge_count(); ++k)
            r[g_->demand_index(g_->head[k])] += chi_[k] * ell_m_[k] * b.mu_upper[k];
        return r;
    }

    // -- partial-density system --------------------------------------------

    /// Time derivative of [rho1; rho2] at the non-slack nodes.
    vec rhs_partial_density(const boundary_values& b, const vec& y) const {
        const int Vd = demand_count();
        require_size(y, 2 * Vd, "partial-density state");
        const double s1 = gas_.sigma1 * gas_.sigma1, s2 = gas_.sigma2 * gas_.sigma2;
        vec acc1 = vec::Zero(Vd), acc2 = vec::Zero(Vd);
        for (int k = 0; k < g_->edge_count(); ++k) {
            const int i = g_->tail[k];
            const int jd = g_->demand_index(g_->head[k]);
            double p_in, eta_in;
            if (i < g_->n_slack) {
                p_in = b.slack_pressure_pa[i];
                eta_in = b.slack_h2[i];
            } else {
                const int id = g_->demand_index(i);
                const double r1 = y[id], r2 = y[Vd + id];
                p_in = s1 * r1 + s2 * r2;
                const double rho = r1 + r2;
                eta_in = rho != 0.0 ? r2 / rho : 0.0;
            }
            const double r1j = y[jd], r2j = y[Vd + jd];
            const double chi_flux =
                chi_[k] * flux_closure(b.mu_upper[k] * (r1j + r2j),
                                       b.mu_upper[k] * (s1 * r1j + s2 * r2j) -
                                           b.mu_lower[k] * p_in,
                                       coeff_[k]);
            acc1[jd] += chi_flux * (1.0 - eta_in);
            acc2[jd] += chi_flux * eta_in;
            if (i >= g_->n_slack) {
                const int id = g_->demand_index(i);
                acc1[id] -= chi_flux * (1.0 - eta_in);
                acc2[id] -= chi_flux * eta_in;
            }
        }
        const vec r = ps_->controls_constant ? r0_ : storage_coeff(b);
        vec dy(2 * Vd);
        for (int j = 0; j < Vd; ++j) {
            double gamma2;
            if (g_->nodes[g_->n_slack + j].role == node_role::injection) {
                gamma2 = b.injection_h2[j];
            } else {
                const double rho = y[j] + y[Vd + j];
                gamma2 = rho != 0.0 ? y[Vd + j] / rho : 0.0;
            }
            dy[j] = (acc1[j] - (1.0 - gamma2) * b.demand[j]) / r[j];
            dy[Vd + j] = (acc2[j] - gamma2 * b.demand[j]) / r[j];
        }
        return dy;
    }

    vec rhs_partial_density(double t_s, const vec& y) const {
        return rhs_partial_density(boundary_at(t_s), y);
    }

    // -- total density and pressure system -----------------------------------

    /// Time derivative of [rho_total; pressure] at the non-slack nodes.
    vec rhs_pressure_density(const boundary_values& b, const vec& y) const {
        const int Vd = demand_count();
        require_size(y, 2 * Vd, "density/pressure state");
        vec accR = vec::Zero(Vd), accP = vec::Zero(Vd);
        for (int k = 0; k < g_->edge_count(); ++k) {
            const int i = g_->tail[k];
            const int jd = g_->demand_index(g_->head[k]);
            double p_in, w_in;
            if (i < g_->n_slack) {
                p_in = b.slack_pressure_pa[i];
                w_in = gas_.c2(b.slack_h2[i]);
            } else {
                const int id = g_->demand_index(i);
                p_in = y[Vd + id];
                w_in = y[id] != 0.0 ? y[Vd + id] / y[id] : 0.0;
            }
            const double chi_flux =
                chi_[k] * flux_closure(b.mu_upper[k] * y[jd],
                                       b.mu_upper[k] * y[Vd + jd] - b.mu_lower[k] * p_in,
                                       coeff_[k]);
            accR[jd] += chi_flux;
            accP[jd] += chi_flux * w_in;
            if (i >= g_->n_slack) {
                const int id = g_->demand_index(i);
                accR[id] -= chi_flux;
                accP[id] -= chi_flux * w_in;
            }
        }
        const vec r = ps_->controls_constant ? r0_ : storage_coeff(b);
        vec dy(2 * Vd);
        for (int j = 0; j < Vd; ++j) {
            double b2;
            if (g_->nodes[g_->n_slack + j].role == node_role::injection)
                b2 = gas_.c2(b.injection_h2[j]);
            else
                b2 = y[j] != 0.0 ? y[Vd + j] / y[j] : 0.0;
            dy[j] = (accR[j] - b.demand[j]) / r[j];
            dy[Vd + j] = (accP[j] - b2 * b.demand[j]) / r[j];
        }
        return dy;
    }

    vec rhs_pressure_density(double t_s, const vec& y) const {
        return rhs_pressure_density(boundary_at(t_s), y);
    }

    // -- isolated pressure system ---------------------------------------------

    /// Time derivative of the nodal pressures under a constant concentration
    /// described by per-node squared wave speeds c2 (length Vd).
    vec rhs_isolated_pressure(const boundary_values& b, const vec& p, const vec& c2) const {
        const int Vd = demand_count();
        require_size(p, Vd, "isolated pressure state");
        require_size(c2, Vd, "squared wave speed vector");
        vec accP = vec::Zero(Vd);
        for (int k = 0; k < g_->edge_count(); ++k) {
            const int i = g_->tail[k];
            const int jd = g_->demand_index(g_->head[k]);
            double p_in, w_in;
            if (i < g_->n_slack) {
                p_in = b.slack_pressure_pa[i];
                w_in = gas_.c2(b.slack_h2[i]);
            } else {
                const int id = g_->demand_index(i);
                p_in = p[id];
                w_in = c2[id];
            }
            const double chi_flux =
                chi_[k] * flux_closure(b.mu_upper[k] * p[jd] / c2[jd],
                                       b.mu_upper[k] * p[jd] - b.mu_lower[k] * p_in,
                                       coeff_[k]);
            accP[jd] += chi_flux * w_in;
            if (i >= g_->n_slack) accP[g_->demand_index(i)] -= chi_flux * c2[g_->demand_index(i)];
        }
        const vec r = ps_->controls_constant ? r0_ : storage_coeff(b);
        vec dp(Vd);
        for (int j = 0; j < Vd; ++j) {
            const double b2 = g_->nodes[g_->n_slack + j].role == node_role::injection
                                  ? gas_.c2(b.injection_h2[j])
                                  : c2[j];
            dp[j] = (accP[j] - b2 * b.demand[j]) / r[j];
        }
        return dp;
    }

    // -- diagnostics ------------------------------------------------------------

    /// Inlet mass flux of every edge (kg m^-2 s^-1) for a partial-density state.
    vec edge_fluxes(const boundary_values& b, const vec& y) const {
        const int Vd = demand_count();
        require_size(y, 2 * Vd, "partial-density state");
        const double s1 = gas_.sigma1 * gas_.sigma1, s2 = gas_.sigma2 * gas_.sigma2;
        vec F(g_->edge_count());
        for (int k = 0; k < g_->edge_count(); ++k) {
            const int i = g_->tail[k];
            const int jd = g_->demand_index(g_->head[k]);
            const double p_in = i < g_->n_slack
                                    ? b.slack_pressure_pa[i]
                                    : gas_.sigma1 * gas_.sigma1 * y[g_->demand_index(i)] +
                                          gas_.sigma2 * gas_.sigma2 * y[Vd + g_->demand_index(i)];
            F[k] = flux_closure(b.mu_upper[k] * (y[jd] + y[Vd + jd]),
                                b.mu_upper[k] * (s1 * y[jd] + s2 * y[Vd + jd]) -
                                    b.mu_lower[k] * p_in,
                                coeff_[k]);
        }
        return F;
    }

    /// Smallest edge flux; negative values indicate flow against the edge
    /// orientation, outside the regime the discretized model assumes.
    double min_edge_flux(const boundary_values& b, const vec& y) const {
        const vec F = edge_fluxes(b, y);
        return F.size() ? F.minCoeff() : 0.0;
    }

    /// Largest relative inlet-to-outlet jump of the per-constituent edge
    /// densities (the discretization accuracy monitor; should stay << 1).
    double density_jump(const boundary_values& b, const vec& y) const {
        const int Vd = demand_count();
        require_size(y, 2 * Vd, "partial-density state");
        double worst = 0.0;
        for (int k = 0; k < g_->edge_count(); ++k) {
            const int i = g_->tail[k];
            const int jd = g_->demand_index(g_->head[k]);
            double in1, in2;
            if (i < g_->n_slack) {
                const double rho_s = b.slack_pressure_pa[i] / gas_.c2(b.slack_h2[i]);
                in1 = (1.0 - b.slack_h2[i]) * rho_s;
                in2 = b.slack_h2[i] * rho_s;
            } else {
                in1 = y[g_->demand_index(i)];
                in2 = y[Vd + g_->demand_index(i)];
            }
            in1 *= b.mu_lower[k];
            in2 *= b.mu_lower[k];
            const double out1 = b.mu_upper[k] * y[jd];
            const double out2 = b.mu_upper[k] * y[Vd + jd];
            const double scale = std::abs(out1) + std::abs(out2);
            auto jump = [&](double a, double o) {
                if (std::max(std::abs(a), std::abs(o)) < 1e-12 * scale) return 0.0;
                const double lo = std::min(std::abs(a), std::abs(o));
                return lo > 0.0 ? std::abs(o - a) / lo : 1.0;
            };
            worst = std::max({worst, jump(in1, out1), jump(in2, out2)});
        }
        return worst;
    }

    /// Mass inflow (kg/s) into each non-slack node through incident edges.
    vec nodal_inflow(const boundary_values& b, const vec& y) const {
        const vec F = edge_fluxes(b, y);
        vec inflow = vec::Zero(demand_count());
        for (int k = 0; k < g_->edge_count(); ++k)
            inflow[g_->demand_index(g_->head[k])] += chi_[k] * F[k];
        return inflow;
    }

    const vec& chi() const { return chi_; }
    const vec& lengths_m() const { return ell_m_; }
    const vec& flux_coeffs() const { return coeff_; }

private:
    static void require_size(const vec& v, int n, const char* what) {
        if (v.size() != n)
            throw input_error(std::string(what) + ": expected length " + std::to_string(n) +
                              ", got " + std::to_string(v.size()));
    }

    const prepared_scenario* ps_;
    const network_graph* g_;
    gas_pair gas_;
    vec chi_, coeff_, ell_m_;
    boundary_values bounds0_;
    vec r0_;
};

// ---------------------------------------------------------------------------
// Steady state
// ---------------------------------------------------------------------------

struct steady_options {
    double tol = 1e-9;       ///< infinity norm of the partial-density RHS
    int max_newton = 80;     ///< Newton iterations per continuation stage
    int continuation = 4;    ///< demand ramp stages used when direct solve fails
};

namespace detail {

/// Newton iteration with backtracking on G(y) = rhs(b, y); returns true on
/// convergence to ||G||_inf <= tol.
inline bool steady_newton(const fv_system& sys, const boundary_values& b, vec& y,
                          double tol, int max_iter) {
    const int n = static_cast<int>(y.size());
    vec G = sys.rhs_partial_density(b, y);
    double gnorm = G.lpNorm<Eigen::Infinity>();
    for (int iter = 0; iter < max_iter && gnorm > tol; ++iter) {
        mat J(n, n);
        for (int c = 0; c < n; ++c) {
            const double h = 1e-7 * (1.0 + std::abs(y[c]));
            vec yp = y;
            yp[c] += h;
            J.col(c) = (sys.rhs_partial_density(b, yp) - G) / h;
        }
        Eigen::PartialPivLU<mat> lu(J);
        vec step = lu.solve(-G);
        if (!step.allFinite()) {
            Eigen::FullPivLU<mat> flu(J);
            flu.setThreshold(1e-12);
            step = flu.solve(-G);
            if (!step.allFinite()) return false;
        }
        double damping = 1.0;
        bool advanced = false;
        const int Vd = n / 2;
        for (int cut = 0; cut < 24; ++cut, damping *= 0.5) {
            vec trial = y + damping * step;
            bool positive = true;
            for (int j = 0; j < Vd; ++j)
                if (!(trial[j] + trial[Vd + j] > 0.0)) { positive = false; break; }
            if (!positive) continue;
            vec Gt = sys.rhs_partial_density(b, trial);
            const double tnorm = Gt.lpNorm<Eigen::Infinity>();
            if (tnorm < gnorm * (1.0 - 1e-4 * damping) || tnorm <= tol) {
                y = std::move(trial);
                G = std::move(Gt);
                gnorm = tnorm;
                advanced = true;
                break;
            }
        }
        if (!advanced) return false;
    }
    return gnorm <= tol;
}

/// Initial steady guess: min-norm mass flows from nodal balance, inlet
/// fractions propagated by a fixed point, and pressures swept outward from
/// the slack nodes through the flux relation.
inline vec steady_guess(const fv_system& sys, const boundary_values& b) {
    const network_graph& g = sys.graph();
    const gas_pair& gas = sys.gas();
    const int E = g.edge_count(), Vs = g.n_slack, Vd = g.non_slack_count();

    // Mass flows Phi_k (kg/s) with minimum norm subject to nodal balance.
    mat A = mat::Zero(Vd, E);
    for (int k = 0; k < E; ++k) {
        A(g.demand_index(g.head[k]), k) += 1.0;
        if (g.tail[k] >= Vs) A(g.demand_index(g.tail[k]), k) -= 1.0;
    }
    Eigen::CompleteOrthogonalDecomposition<mat> cod(A);
    const vec Phi = cod.solve(b.demand);

    // Hydrogen fraction per node from a steady mixing fixed point.
    vec eta2 = vec::Zero(Vd);
    double eta_seed = Vs > 0 ? b.slack_h2[0] : 0.0;
    eta2.setConstant(eta_seed);
    for (int pass = 0; pass < 200; ++pass) {
        double change = 0.0;
        for (int j = 0; j < Vd; ++j) {
            double num = 0.0, den = 0.0;
            for (int k : g.in_edges[Vs + j]) {
                if (Phi[k] <= 0.0) continue;
                const int i = g.tail[k];
                num += Phi[k] * (i < Vs ? b.slack_h2[i] : eta2[g.demand_index(i)]);
                den += Phi[k];
            }
            if (g.nodes[Vs + j].role == node_role::injection) {
                const double q = -b.demand[j];
                if (q > 0.0) {
                    num += q * b.injection_h2[j];
                    den += q;
                }
            }
            double next = eta2[j];
            if (den > 1e-12) {
                next = num / den;
            } else if (!g.in_edges[Vs + j].empty()) {
                const int i = g.tail[g.in_edges[Vs + j][0]];
                next = i < Vs ? b.slack_h2[i] : eta2[g.demand_index(i)];
            }
            change = std::max(change, std::abs(next - eta2[j]));
            eta2[j] = next;
        }
        if (change < 1e-14) break;
    }

    // Pressures outward from the slack nodes along the steady flux relation.
    vec p = vec::Constant(g.node_count(), -1.0);
    std::vector<int> frontier;
    double mean_slack = 0.0;
    for (int i = 0; i < Vs; ++i) {
        p[i] = b.slack_pressure_pa[i];
        mean_slack += p[i] / Vs;
        frontier.push_back(i);
    }
    const vec& coeff = sys.flux_coeffs();
    const vec& chi = sys.chi();
    for (size_t f = 0; f < frontier.size(); ++f) {
        const int i = frontier[f];
        for (int k : g.out_edges[i]) {
            const int j = g.head[k];
            if (p[j] >= 0.0) continue;
            const double flux = Phi[k] / chi[k];
            const double c2_out = gas.c2(eta2[g.demand_index(j)]);
            const double inlet = b.mu_lower[k] * p[i];
            const double drive = flux * std::abs(flux) * c2_out / (coeff[k] * coeff[k]);
            const double disc = inlet * inlet - 4.0 * drive;
            const double outlet_weighted =
                disc >= 0.0 ? 0.5 * (inlet + std::sqrt(disc)) : 0.5 * inlet;
            p[j] = std::max(outlet_weighted, 0.05 * inlet) / b.mu_upper[k];
            frontier.push_back(j);
        }
    }
    for (int j = Vs; j < g.node_count(); ++j)
        if (p[j] < 0.0) p[j] = mean_slack;

    vec y(2 * Vd);
    for (int j = 0; j < Vd; ++j) {
        const double rho = p[Vs + j] / gas.c2(eta2[j]);
        y[j] = (1.0 - eta2[j]) * rho;
        y[Vd + j] = eta2[j] * rho;
    }
    return y;
}

}  // namespace detail

/// Solves the steady partial-density state for the boundary values at time
/// t_s (seconds; default 0).  Returns [rho1; rho2] at the non-slack nodes
/// with RHS infinity norm <= opt.tol.  Throws numeric_error when the solve
/// fails even under demand continuation.
inline vec steady_state(const fv_system& sys, double t_s = 0.0,
                        const steady_options& opt = {}) {
    const boundary_values b = sys.boundary_at(t_s);
    vec y = detail::steady_guess(sys, b);
    if (sys.rhs_partial_density(b, y).lpNorm<Eigen::Infinity>() <= opt.tol) return y;
    if (detail::steady_newton(sys, b, y, opt.tol, opt.max_newton)) return y;

    // Demand continuation: ramp the demands up from a fraction of the target.
    vec y_stage = detail::steady_guess(sys, b) * 0.0;
    {
        boundary_values b0 = b;
        b0.demand.setZero();
        y_stage = detail::steady_guess(sys, b0);
        if (!detail::steady_newton(sys, b0, y_stage, opt.tol, opt.max_newton))
            throw numeric_error("steady state: zero-demand stage did not converge");
    }
    for (int stage = 1; stage <= opt.continuation; ++stage) {
        boundary_values bs = b;
        bs.demand *= static_cast<double>(stage) / opt.continuation;
        if (!detail::steady_newton(sys, bs, y_stage, opt.tol, opt.max_newton))
            throw numeric_error("steady state: continuation stage " +
                                std::to_string(stage) + " did not converge");
    }
    return y_stage;
}

}  // namespace pipeflow
