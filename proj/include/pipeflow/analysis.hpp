/// @file analysis.hpp
/// @brief Response diagnostics for forced pipeline transients and the
///        parameter-plane interface sweeps built on them:
///        - crossing detection between two ordered solutions, and the
///          monotonic interface (smallest forcing amplitude at which ordered
///          constant-outflow solutions cross);
///        - normalized DFT of the tail of the outlet pressure, the average
///          power spectrum periodicity measure, and the periodic interface;
///        - the trajectory-divergence chaos measure from two runs differing
///          only in their initial condition, and the chaotic interface.
///
/// All sweeps vary the hydrogen fraction at the slack inlet as
/// mean*(1 + kappa*sin(2*pi*omega*t)) over an (omega, kappa) grid.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pipeflow/cache.hpp"
#include "pipeflow/common.hpp"
#include "pipeflow/fv.hpp"
#include "pipeflow/scenario.hpp"
#include "pipeflow/simulate.hpp"
#include "pipeflow/spectral.hpp"

namespace pipeflow {

// ---------------------------------------------------------------------------
// Crossing detection
// ---------------------------------------------------------------------------

struct crossing_event {
    std::size_t index;  ///< sample index where the sign flip is observed
    double t_hr;
};

/// Sign changes of a - b, ignoring excursions smaller than
/// rel_tol * (combined range of a and b).  Samples inside the tolerance band
/// neither produce nor reset a crossing.  The band never shrinks below
/// 1e-12 of the data magnitude, so two series that agree to machine
/// precision (e.g. the same constant concentration transported by two
/// different flows) do not register their roundoff noise as crossings.
inline std::vector<crossing_event> detect_crossings(const std::vector<double>& t_hr,
                                                    const vec& a, const vec& b,
                                                    double rel_tol = 1e-6) {
    if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != t_hr.size())
        throw input_error("crossing detection needs both series on the same time grid");
    std::vector<crossing_event> events;
    if (a.size() == 0) return events;
    const double hi = std::max(a.maxCoeff(), b.maxCoeff());
    const double lo = std::min(a.minCoeff(), b.minCoeff());
    const double tol =
        std::max(rel_tol * (hi - lo), 1e-12 * std::max(std::abs(hi), std::abs(lo)));
    int last_sign = 0;
    for (int k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        if (std::abs(d) <= tol) continue;
        const int s = d > 0.0 ? 1 : -1;
        if (last_sign != 0 && s != last_sign)
            events.push_back({static_cast<std::size_t>(k), t_hr[k]});
        last_sign = s;
    }
    return events;
}

// ---------------------------------------------------------------------------
// Periodicity: normalized DFT and average power spectrum
// ---------------------------------------------------------------------------

struct spectrum {
    std::vector<double> omega_cyc_hr;          ///< bin frequencies
    std::vector<std::complex<double>> value;   ///< normalized DFT
    double measure = 0.0;                      ///< average power x 100
};

/// Normalized DFT of a tail-sample sequence psi[k], k = 0..L, evaluated at
/// bins n = 0..L with kernel exp(-2*pi*i*n*k/L); frequencies are n divided by
/// the tail duration.  The largest bin modulus is scaled to exactly 1.
inline spectrum dft_normalized(const vec& psi, double tail_hr) {
    const int L = static_cast<int>(psi.size()) - 1;
    if (L < 1) throw input_error("DFT needs at least two samples");
    if (!(tail_hr > 0.0)) throw input_error("tail duration must be positive");

    std::vector<std::complex<double>> roots(L);
    for (int r = 0; r < L; ++r) {
        const double angle = -2.0 * kPi * static_cast<double>(r) / static_cast<double>(L);
        roots[r] = {std::cos(angle), std::sin(angle)};
    }

    spectrum sp;
    sp.value.resize(L + 1);
    sp.omega_cyc_hr.resize(L + 1);
    double max_mod = 0.0;
    for (int n = 0; n <= L; ++n) {
        std::complex<double> acc{0.0, 0.0};
        for (int k = 0; k <= L; ++k)
            acc += psi[k] * roots[static_cast<std::size_t>(
                                (static_cast<long long>(n) * k) % L)];
        sp.value[n] = acc;
        sp.omega_cyc_hr[n] = static_cast<double>(n) / tail_hr;
        max_mod = std::max(max_mod, std::abs(acc));
    }
    if (max_mod == 0.0) throw numeric_error("DFT of an all-zero signal cannot be normalized");
    double power = 0.0;
    for (auto& v : sp.value) {
        v /= max_mod;
        power += std::norm(v);
    }
    sp.measure = power / static_cast<double>(L + 1) * 100.0;
    return sp;
}

/// Relative fluctuation below which the tail is classified as steady and the
/// periodicity measure is zero (a DFT of pure integrator noise would be
/// meaningless broadband content).
inline constexpr double kSteadyTailTol = 1e-6;

/// Tail spectrum of an outlet pressure series sampled uniformly on [0, T]:
/// takes the samples from 0.6*T onward, subtracts the initial (steady) value,
/// and returns the normalized DFT with the average power measure.  A tail
/// whose fluctuation around the initial value stays within kSteadyTailTol
/// (relatively) yields an empty spectrum with measure 0.
inline spectrum outlet_spectrum(const vec& series, double horizon_hr) {
    const int N = static_cast<int>(series.size()) - 1;
    if (N < 5) throw input_error("outlet spectrum needs a sampled trajectory");
    const int start = static_cast<int>(std::llround(0.6 * N));
    const int L = N - start;
    const double reference = series[0];
    vec psi(L + 1);
    double sup = 0.0;
    for (int k = 0; k <= L; ++k) {
        psi[k] = series[start + k] - reference;
        sup = std::max(sup, std::abs(psi[k]));
    }
    if (sup <= kSteadyTailTol * std::max(1e-300, std::abs(reference))) {
        spectrum sp;
        sp.measure = 0.0;
        return sp;
    }
    return dft_normalized(psi, horizon_hr * static_cast<double>(L) / N);
}

// ---------------------------------------------------------------------------
// Chaos measure
// ---------------------------------------------------------------------------

struct divergence_report {
    vec log_ratio;               ///< Psi[n]; NaN where the difference vanished
    std::size_t excluded = 0;    ///< samples dropped inside the averaging intervals
    double measure = 0.0;
};

/// Mean exponential divergence rate between two trajectories that share the
/// boundary forcing but start apart: Psi[n] = log |(psi2[n]-psi1[n]) /
/// (psi2[0]-psi1[0])|, compared between an early window [n0, n1] and a late
/// window [n2, n3] (inclusive indices), scaled by 1/(n2 - n1).
inline divergence_report chaos_measure(const vec& psi1, const vec& psi2, std::size_t n0,
                                       std::size_t n1, std::size_t n2, std::size_t n3) {
    if (psi1.size() != psi2.size())
        throw input_error("divergence measure needs both series on the same time grid");
    const std::size_t n = static_cast<std::size_t>(psi1.size());
    if (!(n0 < n1 && n1 < n2 && n2 < n3 && n3 < n))
        throw input_error("divergence intervals must satisfy n0 < n1 < n2 < n3 < size");
    const double base = psi2[0] - psi1[0];
    if (base == 0.0)
        throw input_error("divergence measure undefined: trajectories start identically");

    divergence_report rep;
    rep.log_ratio.resize(psi1.size());
    for (int k = 0; k < psi1.size(); ++k) {
        const double diff = psi2[k] - psi1[k];
        rep.log_ratio[k] = diff == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                       : std::log(std::abs(diff / base));
    }
    auto window_mean = [&](std::size_t lo, std::size_t hi) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = lo; k <= hi; ++k) {
            if (std::isnan(rep.log_ratio[k])) {
                ++rep.excluded;
                continue;
            }
            sum += rep.log_ratio[k];
            ++count;
        }
        if (count == 0)
            throw numeric_error("divergence window contains no usable samples");
        return sum / static_cast<double>(count);
    };
    const double early = window_mean(n0, n1);
    const double late = window_mean(n2, n3);
    rep.measure = (late - early) / static_cast<double>(n2 - n1);
    return rep;
}

// ---------------------------------------------------------------------------
// Interface sweeps
// ---------------------------------------------------------------------------

struct sweep_config {
    std::vector<double> omegas;    ///< forcing frequencies, cyc/hr
    std::vector<double> kappas;    ///< amplitude factors, ascending
    int workers = 1;
    std::string cache_dir;         ///< "" -> PIPEFLOW_CACHE_DIR -> disabled
    double threshold = 0.3;        ///< periodicity threshold
    std::string crossing_node;     ///< "" = the scenario's withdrawal outlet
};

/// Uniform grid helper: count values from lo to hi inclusive.
inline std::vector<double> uniform_grid(double lo, double hi, int count) {
    if (count < 1) throw input_error("grid needs at least one point");
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    return g;
}

struct interface_point {
    double omega = 0.0;
    double kappa_star = 0.0;
    bool failed = false;
    std::string error;
};

struct interface_curve {
    std::string kind;  ///< "mi", "pi", or "ci"
    double threshold = 0.0;
    std::vector<interface_point> points;
};

namespace detail {

inline void parallel_for(int n_items, int workers, const std::function<void(int)>& body) {
    workers = std::max(1, std::min(workers, n_items));
    if (workers <= 1) {
        for (int i = 0; i < n_items; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = next.fetch_add(1); i < n_items; i = next.fetch_add(1)) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline const std::string& single_node_of_role(const scenario& s, node_role role,
                                              const char* what) {
    const std::string* found = nullptr;
    for (const node& n : s.graph.nodes) {
        if (n.role != role || n.auxiliary) continue;
        if (found) throw input_error(std::string("sweep template must have exactly one ") + what);
        found = &n.id;
    }
    if (!found) throw input_error(std::string("sweep template is missing a ") + what);
    return *found;
}

inline double profile_mean(const profile& p) {
    switch (p.kind) {
        case profile::kind_t::constant: return p.value;
        case profile::kind_t::sinusoid: return p.mean;
        default: throw input_error("sweep template concentration must be constant or sinusoid");
    }
}

/// Template scenario with the slack hydrogen fraction replaced by
/// mean*(1 + kappa*sin(2*pi*omega*t)).
inline scenario with_inlet_sine(const scenario& tmpl, double omega, double kappa) {
    scenario s = tmpl;
    const std::string slack = single_node_of_role(s, node_role::slack, "slack node");
    boundary_entry& entry = s.boundary[static_cast<std::size_t>(s.graph.index_of(slack))];
    entry.h2_fraction = profile::sinusoid(profile_mean(entry.h2_fraction), kappa, omega);
    return s;
}

inline scenario with_outflow(const scenario& tmpl, double flow_kg_s) {
    scenario s = tmpl;
    const std::string outlet =
        single_node_of_role(s, node_role::withdrawal, "withdrawal node");
    boundary_entry& entry = s.boundary[static_cast<std::size_t>(s.graph.index_of(outlet))];
    entry.flow_kg_per_s = profile::constant(flow_kg_s);
    entry.flow_is_flux = false;
    return s;
}

inline std::string point_key(const std::string& kind, const std::string& material,
                             double omega, double kappa) {
    return kind + "\n" + material + "\nomega=" + format_double(omega) +
           "\nkappa=" + format_double(kappa);
}

}  // namespace detail

/// Monotonic interface: per forcing frequency, the smallest grid kappa at
/// which the three solutions with ordered constant outflows cross in the
/// given quantity at the observation node; kappa grid max when none does.
/// Each point caches the crossing flags of every quantity, so sweeps for
/// different quantities share the same simulations.
inline interface_curve monotonic_interface(const scenario& tmpl, quantity q,
                                           const std::vector<double>& outflows_kg_s,
                                           const sweep_config& cfg) {
    if (outflows_kg_s.size() < 2)
        throw input_error("the monotonic sweep needs at least two ordered outflows");
    if (!std::is_sorted(outflows_kg_s.begin(), outflows_kg_s.end()))
        throw input_error("the monotonic sweep outflows must be ascending");
    if (cfg.kappas.empty() || cfg.omegas.empty())
        throw input_error("sweep grids must be nonempty");

    const std::string node = cfg.crossing_node.empty()
                                 ? detail::single_node_of_role(tmpl, node_role::withdrawal,
                                                               "withdrawal node")
                                 : cfg.crossing_node;
    std::string material = serialize_scenario(tmpl) + "node=" + node;
    for (double w : outflows_kg_s) material += ",outflow=" + format_double(w);
    const point_cache cache = point_cache::from_env_or(cfg.cache_dir);

    auto point_flags = [&](double omega, double kappa) -> nlohmann::json {
        const std::string key = detail::point_key("mi", material, omega, kappa);
        if (auto hit = cache.lookup(key)) return *hit;
        std::vector<sim_result> runs;
        runs.reserve(outflows_kg_s.size());
        for (double w : outflows_kg_s)
            runs.push_back(
                run_simulation(detail::with_outflow(detail::with_inlet_sine(tmpl, omega, kappa), w)));
        nlohmann::json flags;
        for (quantity qq : all_quantities()) {
            bool crossed = false;
            const int col = runs[0].column_of(node);
            for (std::size_t i = 0; i + 1 < runs.size() && !crossed; ++i)
                for (std::size_t j = i + 1; j < runs.size() && !crossed; ++j)
                    crossed = !detect_crossings(runs[i].t_hr, runs[i].series(qq).col(col),
                                                runs[j].series(qq).col(col))
                                   .empty();
            flags[to_string(qq)] = crossed;
        }
        cache.store(key, flags);
        return flags;
    };

    interface_curve curve;
    curve.kind = "mi";
    curve.threshold = 0.0;
    curve.points.resize(cfg.omegas.size());
    detail::parallel_for(
        static_cast<int>(cfg.omegas.size()), cfg.workers, [&](int i) {
            interface_point& pt = curve.points[i];
            pt.omega = cfg.omegas[i];
            pt.kappa_star = cfg.kappas.back();
            try {
                for (double kappa : cfg.kappas) {
                    if (point_flags(pt.omega, kappa).value(to_string(q), false)) {
                        pt.kappa_star = kappa;
                        break;
                    }
                }
            } catch (const std::exception& e) {
                pt.failed = true;
                pt.error = e.what();
                pt.kappa_star = std::numeric_limits<double>::quiet_NaN();
            }
        });
    return curve;
}

/// Periodicity measure of one sweep point: outlet-pressure trajectory of the
/// template with the inlet concentration sinusoid applied.
inline double periodic_point_measure(const scenario& tmpl, double omega, double kappa,
                                     const std::string& outlet) {
    const sim_result run = run_simulation(detail::with_inlet_sine(tmpl, omega, kappa));
    return outlet_spectrum(run.p_mpa.col(run.column_of(outlet)), tmpl.horizon_hr).measure;
}

/// Periodic interface: per forcing frequency, the first grid kappa whose
/// periodicity measure reaches the threshold (every smaller grid kappa stays
/// below it); kappa grid max when the whole column stays below.
inline interface_curve periodic_interface(const scenario& tmpl, const sweep_config& cfg) {
    if (cfg.kappas.empty() || cfg.omegas.empty())
        throw input_error("sweep grids must be nonempty");
    const std::string outlet =
        detail::single_node_of_role(tmpl, node_role::withdrawal, "withdrawal node");
    const std::string material = serialize_scenario(tmpl);
    const point_cache cache = point_cache::from_env_or(cfg.cache_dir);

    auto point_measure = [&](double omega, double kappa) {
        const std::string key = detail::point_key("pi", material, omega, kappa);
        if (auto hit = cache.lookup(key)) return hit->value("measure", 0.0);
        const double m = periodic_point_measure(tmpl, omega, kappa, outlet);
        cache.store(key, nlohmann::json{{"measure", m}});
        return m;
    };

    interface_curve curve;
    curve.kind = "pi";
    curve.threshold = cfg.threshold;
    curve.points.resize(cfg.omegas.size());
    detail::parallel_for(
        static_cast<int>(cfg.omegas.size()), cfg.workers, [&](int i) {
            interface_point& pt = curve.points[i];
            pt.omega = cfg.omegas[i];
            pt.kappa_star = cfg.kappas.back();
            try {
                for (double kappa : cfg.kappas) {
                    if (point_measure(pt.omega, kappa) >= cfg.threshold) {
                        pt.kappa_star = kappa;
                        break;
                    }
                }
            } catch (const std::exception& e) {
                pt.failed = true;
                pt.error = e.what();
                pt.kappa_star = std::numeric_limits<double>::quiet_NaN();
            }
        });
    return curve;
}

/// Divergence measure of one sweep point: two runs share the sinusoidally
/// forced boundary, but the second starts from the steady state of a
/// different outflow (initial_flow_2).  Windows are fixed fractions of the
/// output grid: [0.08N, 0.15N] early, [0.5N, 0.8N] late.
inline double chaotic_point_measure(const scenario& tmpl, double omega, double kappa,
                                    double initial_flow_2_kg_s, const std::string& outlet) {
    const scenario forced = detail::with_inlet_sine(tmpl, omega, kappa);
    const sim_result run1 = run_simulation(forced);

    // Initial state for the second run: steady flow at the alternate outflow.
    const scenario alt = detail::with_outflow(forced, initial_flow_2_kg_s);
    const prepared_scenario alt_ps = prepare(alt);
    vec y2;
    if (alt_ps.settings.solver == "spectral")
        y2 = spectral_system(alt_ps, alt_ps.settings.spectral_nodes).steady_init();
    else
        y2 = steady_state(fv_system(alt_ps));
    sim_options o;
    o.initial_state = y2;
    const sim_result run2 = run_simulation(forced, o);

    const int N = static_cast<int>(run1.t_hr.size()) - 1;
    const auto frac = [N](double f) {
        return static_cast<std::size_t>(std::llround(f * N));
    };
    const int col = run1.column_of(outlet);
    return chaos_measure(run1.p_mpa.col(col), run2.p_mpa.col(col), frac(0.08), frac(0.15),
                         frac(0.5), frac(0.8))
        .measure;
}

/// Chaotic interface: per forcing frequency, the largest grid kappa whose
/// divergence measure is still <= 0 (so all larger grid kappas diverge).
/// All-positive columns give the grid minimum; all-nonpositive columns give
/// kappa_star = 1.
inline interface_curve chaotic_interface(const scenario& tmpl, double initial_flow_2_kg_s,
                                         const sweep_config& cfg) {
    if (cfg.kappas.empty() || cfg.omegas.empty())
        throw input_error("sweep grids must be nonempty");
    const std::string outlet =
        detail::single_node_of_role(tmpl, node_role::withdrawal, "withdrawal node");
    const std::string material =
        serialize_scenario(tmpl) + "flow2=" + format_double(initial_flow_2_kg_s);
    const point_cache cache = point_cache::from_env_or(cfg.cache_dir);

    const int n_omega = static_cast<int>(cfg.omegas.size());
    const int n_kappa = static_cast<int>(cfg.kappas.size());
    mat measures = mat::Zero(n_omega, n_kappa);
    std::vector<std::string> failures(static_cast<std::size_t>(n_omega) * n_kappa);

    detail::parallel_for(n_omega * n_kappa, cfg.workers, [&](int item) {
        const int i = item / n_kappa, j = item % n_kappa;
        const double omega = cfg.omegas[i], kappa = cfg.kappas[j];
        const std::string key = detail::point_key("ci", material, omega, kappa);
        if (auto hit = cache.lookup(key)) {
            measures(i, j) = hit->value("measure", 0.0);
            return;
        }
        try {
            measures(i, j) =
                chaotic_point_measure(tmpl, omega, kappa, initial_flow_2_kg_s, outlet);
            cache.store(key, nlohmann::json{{"measure", measures(i, j)}});
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(item)] = e.what();
        }
    });

    interface_curve curve;
    curve.kind = "ci";
    curve.threshold = 0.0;
    curve.points.resize(cfg.omegas.size());
    for (int i = 0; i < n_omega; ++i) {
        interface_point& pt = curve.points[i];
        pt.omega = cfg.omegas[i];
        for (int j = 0; j < n_kappa; ++j) {
            const std::string& err = failures[static_cast<std::size_t>(i) * n_kappa + j];
            if (!err.empty()) {
                pt.failed = true;
                pt.error = err;
                break;
            }
        }
        if (pt.failed) {
            pt.kappa_star = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        int last_nonpositive = -1;
        bool any_positive = false;
        for (int j = 0; j < n_kappa; ++j) {
            if (measures(i, j) <= 0.0)
                last_nonpositive = j;
            else
                any_positive = true;
        }
        if (!any_positive)
            pt.kappa_star = 1.0;
        else if (last_nonpositive < 0)
            pt.kappa_star = cfg.kappas.front();
        else
            pt.kappa_star = cfg.kappas[last_nonpositive];
    }
    return curve;
}

}  // namespace pipeflow
