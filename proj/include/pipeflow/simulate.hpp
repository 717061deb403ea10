/// @file simulate.hpp
/// @brief End-to-end transient simulation: prepares a scenario, solves for
///        the steady initial condition, integrates over the horizon, and
///        samples nodal quantities on a uniform output grid.  Works with both
///        the network solver and the single-pipe collocation solver.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pipeflow/common.hpp"
#include "pipeflow/fv.hpp"
#include "pipeflow/gas.hpp"
#include "pipeflow/scenario.hpp"
#include "pipeflow/spectral.hpp"
#include "pipeflow/timeint.hpp"

namespace pipeflow {

/// Nodal quantities reported by a simulation.
enum class quantity { p_mpa, rho, rho1, rho2, eta2, nu2, energy_gj_s };

inline const std::array<quantity, 7>& all_quantities() {
    static const std::array<quantity, 7> q = {
        quantity::p_mpa, quantity::rho,  quantity::rho1, quantity::rho2,
        quantity::eta2,  quantity::nu2,  quantity::energy_gj_s};
    return q;
}

inline const char* to_string(quantity q) {
    switch (q) {
        case quantity::p_mpa: return "p_mpa";
        case quantity::rho: return "rho";
        case quantity::rho1: return "rho1";
        case quantity::rho2: return "rho2";
        case quantity::eta2: return "eta2";
        case quantity::nu2: return "nu2";
        case quantity::energy_gj_s: return "energy_gj_s";
    }
    return "unknown";
}

inline quantity quantity_from_string(const std::string& name) {
    for (quantity q : all_quantities())
        if (name == to_string(q)) return q;
    throw input_error("unknown quantity '" + name + "'");
}

struct sim_options {
    std::string solver;                ///< override: "", "fv", or "spectral"
    bool include_auxiliary = false;    ///< also report refinement nodes
    vec initial_state;                 ///< nonempty: start here instead of the steady state
};

/// Sampled simulation output.  Each quantity matrix has one row per sample
/// time and one column per reported node (in `node_ids` order).
struct sim_result {
    std::vector<double> t_hr;
    std::vector<std::string> node_ids;
    mat p_mpa, rho, rho1, rho2, eta2, nu2, energy_gj_s;
    integ_stats stats;
    double max_density_jump = 0.0;  ///< discretization accuracy monitor
    double min_edge_flux = 0.0;     ///< most negative flux seen at samples

    mat& series(quantity q) {
        switch (q) {
            case quantity::p_mpa: return p_mpa;
            case quantity::rho: return rho;
            case quantity::rho1: return rho1;
            case quantity::rho2: return rho2;
            case quantity::eta2: return eta2;
            case quantity::nu2: return nu2;
            case quantity::energy_gj_s: return energy_gj_s;
        }
        return p_mpa;
    }
    const mat& series(quantity q) const { return const_cast<sim_result*>(this)->series(q); }

    int column_of(const std::string& node_id) const {
        for (std::size_t c = 0; c < node_ids.size(); ++c)
            if (node_ids[c] == node_id) return static_cast<int>(c);
        throw input_error("node '" + node_id + "' is not in the simulation output");
    }
};

namespace detail {

/// Absolute flux (kg m^-2 s^-1) below which a negative value is treated as
/// numerical noise rather than a genuine flow reversal.
inline constexpr double kReverseFlowTol = 1e-6;

inline void fill_row(sim_result& out, std::size_t row, std::size_t col, double rho1,
                     double rho2, double inflow_kg_s, const gas_pair& gas) {
    const double rho = rho1 + rho2;
    const double p = gas.sigma1 * gas.sigma1 * rho1 + gas.sigma2 * gas.sigma2 * rho2;
    const double eta2 = rho != 0.0 ? rho2 / rho : 0.0;
    out.p_mpa(row, col) = p / kPaPerMPa;
    out.rho(row, col) = rho;
    out.rho1(row, col) = rho1;
    out.rho2(row, col) = rho2;
    out.eta2(row, col) = eta2;
    out.nu2(row, col) = p != 0.0 ? gas.sigma2 * gas.sigma2 * rho2 / p : 0.0;
    out.energy_gj_s(row, col) = nodal_energy(inflow_kg_s, eta2, gas);
}

inline sim_result run_fv(const prepared_scenario& ps, const sim_options& o) {
    fv_system sys(ps);
    const network_graph& g = sys.graph();

    // Reported nodes in scenario input order; refinement nodes (appended at
    // the end with input_position -1) follow when requested.
    std::vector<std::pair<int, int>> order;  // (input position, graph index)
    for (int j = 0; j < g.node_count(); ++j) {
        if (g.nodes[j].auxiliary && !o.include_auxiliary) continue;
        order.emplace_back(g.nodes[j].auxiliary ? g.node_count() + j : g.input_position[j],
                           j);
    }
    std::sort(order.begin(), order.end());

    const int n_samples = ps.output_samples;
    const double horizon_s = ps.horizon_hr * kSecondsPerHour;
    sim_result out;
    out.node_ids.reserve(order.size());
    for (auto& [pos, j] : order) out.node_ids.push_back(g.nodes[j].id);
    out.t_hr.resize(n_samples + 1);
    std::vector<double> times(n_samples + 1);
    for (int k = 0; k <= n_samples; ++k) {
        times[k] = horizon_s * static_cast<double>(k) / n_samples;
        out.t_hr[k] = times[k] / kSecondsPerHour;
    }
    const int n_cols = static_cast<int>(order.size());
    for (quantity q : all_quantities()) out.series(q) = mat::Zero(n_samples + 1, n_cols);

    vec y = o.initial_state.size() ? o.initial_state : steady_state(sys);
    if (y.size() != sys.state_size())
        throw input_error("initial state: expected length " +
                          std::to_string(sys.state_size()) + ", got " +
                          std::to_string(y.size()));
    out.min_edge_flux = std::numeric_limits<double>::infinity();

    sample_fn emit = [&](std::size_t k, double t_s, const vec& state) {
        const boundary_values b = sys.boundary_at(t_s);
        const vec F = sys.edge_fluxes(b, state);
        vec inflow = vec::Zero(g.node_count());
        for (int e = 0; e < g.edge_count(); ++e) inflow[g.head[e]] += sys.chi()[e] * F[e];
        for (int c = 0; c < n_cols; ++c) {
            const int j = order[c].second;
            double r1, r2;
            if (j < g.n_slack) {
                const double rho_s = b.slack_pressure_pa[j] / sys.gas().c2(b.slack_h2[j]);
                r1 = (1.0 - b.slack_h2[j]) * rho_s;
                r2 = b.slack_h2[j] * rho_s;
            } else {
                r1 = state[g.demand_index(j)];
                r2 = state[sys.demand_count() + g.demand_index(j)];
            }
            fill_row(out, k, c, r1, r2, inflow[j], sys.gas());
        }
        out.max_density_jump = std::max(out.max_density_jump, sys.density_jump(b, state));
        out.min_edge_flux = std::min(out.min_edge_flux, F.size() ? F.minCoeff() : 0.0);
    };

    step_fn guard;
    if (!ps.settings.allow_reverse_flow)
        guard = [&](double t_s, const vec& state) {
            const double low = sys.min_edge_flux(sys.boundary_at(t_s), state);
            if (low < -kReverseFlowTol)
                throw numeric_error("flow reversed (flux " + std::to_string(low) +
                                    " kg/m^2/s at t = " +
                                    std::to_string(t_s / kSecondsPerHour) + " hr)");
        };

    rhs_fn f = [&](double t_s, const vec& state) { return sys.rhs_partial_density(t_s, state); };
    if (ps.settings.method == "rk4") {
        out.stats = integrate_rk4(f, 0.0, horizon_s, y, ps.settings.fixed_dt_s, times, emit,
                                  guard);
    } else {
        integ_options opt;
        opt.rel_tol = ps.settings.rel_tol;
        opt.abs_tol = ps.settings.abs_tol;
        opt.h_max = std::min(3600.0, horizon_s / 10.0);
        out.stats = integrate_trbdf2(f, 0.0, horizon_s, y, opt, times, emit, guard);
    }
    return out;
}

inline sim_result run_spectral(const prepared_scenario& ps, const sim_options& o) {
    spectral_system sys(ps, ps.settings.spectral_nodes);
    const network_graph& g = ps.fine;
    const int N = sys.nodes();

    const int n_samples = ps.output_samples;
    const double horizon_s = ps.horizon_hr * kSecondsPerHour;
    sim_result out;
    {
        std::vector<std::pair<int, int>> order = {{g.input_position[0], 0},
                                                  {g.input_position[1], 1}};
        std::sort(order.begin(), order.end());
        for (auto& [pos, j] : order) out.node_ids.push_back(g.nodes[j].id);
    }
    out.t_hr.resize(n_samples + 1);
    std::vector<double> times(n_samples + 1);
    for (int k = 0; k <= n_samples; ++k) {
        times[k] = horizon_s * static_cast<double>(k) / n_samples;
        out.t_hr[k] = times[k] / kSecondsPerHour;
    }
    for (quantity q : all_quantities()) out.series(q) = mat::Zero(n_samples + 1, 2);

    vec y = o.initial_state.size() ? o.initial_state : sys.steady_init();
    if (y.size() != sys.state_size())
        throw input_error("initial state: expected length " +
                          std::to_string(sys.state_size()) + ", got " +
                          std::to_string(y.size()));
    out.min_edge_flux = std::numeric_limits<double>::infinity();

    sample_fn emit = [&](std::size_t k, double t_s, const vec& state) {
        const boundary_values b = sys.boundary_at(t_s);
        const auto f = sys.reconstruct(b, state);
        for (std::size_t c = 0; c < out.node_ids.size(); ++c) {
            const int j = g.index_of(out.node_ids[c]);
            const int gi = j < g.n_slack ? 0 : N;
            const double inflow = gi == 0 ? 0.0 : sys.area() * f.flux[N];
            fill_row(out, k, c, f.rho1[gi], f.rho2[gi], inflow, sys.gas());
        }
        out.min_edge_flux = std::min(out.min_edge_flux, f.flux.minCoeff());
    };

    step_fn guard;
    if (!ps.settings.allow_reverse_flow)
        guard = [&](double t_s, const vec& state) {
            const auto f = sys.reconstruct(sys.boundary_at(t_s), state);
            const double low = f.flux.minCoeff();
            if (low < -kReverseFlowTol)
                throw numeric_error("flow reversed (flux " + std::to_string(low) +
                                    " kg/m^2/s at t = " +
                                    std::to_string(t_s / kSecondsPerHour) + " hr)");
        };

    rhs_fn f = [&](double t_s, const vec& state) { return sys.rhs(t_s, state); };
    if (ps.settings.method == "rk4") {
        out.stats = integrate_rk4(f, 0.0, horizon_s, y, ps.settings.fixed_dt_s, times, emit,
                                  guard);
    } else {
        integ_options opt;
        opt.rel_tol = ps.settings.rel_tol;
        opt.abs_tol = ps.settings.abs_tol;
        opt.h_max = std::min(3600.0, horizon_s / 10.0);
        out.stats = integrate_trbdf2(f, 0.0, horizon_s, y, opt, times, emit, guard);
    }
    return out;
}

}  // namespace detail

/// Runs a transient simulation of the scenario and samples all nodal
/// quantities at output_samples + 1 uniformly spaced times.
inline sim_result run_simulation(const scenario& sc_in, const sim_options& o = {}) {
    scenario sc = sc_in;
    if (!o.solver.empty()) sc.settings.solver = o.solver;
    prepared_scenario ps = prepare(sc);
    if (ps.settings.solver == "spectral") return detail::run_spectral(ps, o);
    return detail::run_fv(ps, o);
}

}  // namespace pipeflow
