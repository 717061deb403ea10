/// @file acceptance_main.cpp
/// @brief End-to-end verification suites for the library's headline
///        behaviors.  Each suite is selected by number on the command line,
///        prints one [PASS]/[FAIL] line per check plus a final verdict line,
///        and exits nonzero if any check failed.
///
///        Suites:
///          1  steady pipe law          closed-form pressure profile recovery
///          2  ordered pressures        monotone response to ordered inputs
///          3  jacobian signs           cooperative structure + counterexample
///          4  crossing regressions     network trajectory crossing patterns
///          5  nesting order            monotonic-interface variable nesting
///          6  periodicity values       average power spectrum reproduction
///          7  divergence values        trajectory divergence measure signs
///          8  interface ordering       monotonic below periodic and chaotic
///          9  discretization accuracy  collocation exactness + cross-solver
///         10  determinism              worker-count-independent sweep output

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pipeflow/analysis.hpp"
#include "pipeflow/cli.hpp"

namespace {

using namespace pipeflow;

int g_failed = 0;
int g_checked = 0;

void check(bool ok, const std::string& label) {
    ++g_checked;
    if (!ok) ++g_failed;
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", label.c_str());
    std::fflush(stdout);
}

std::string source_path(const std::string& rel) {
    return std::string(PIPEFLOW_SOURCE_DIR "/") + rel;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("pipeflow_accept_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Distance of every node from the (single) slack inlet, by walking the
/// refined chain of pipe segments.
std::vector<double> node_positions_m(const network_graph& g) {
    std::vector<double> x(static_cast<std::size_t>(g.node_count()), -1.0);
    x[0] = 0.0;
    bool progress = true;
    while (progress) {
        progress = false;
        for (int k = 0; k < g.edge_count(); ++k) {
            if (x[static_cast<std::size_t>(g.tail[k])] >= 0.0 &&
                x[static_cast<std::size_t>(g.head[k])] < 0.0) {
                x[static_cast<std::size_t>(g.head[k])] =
                    x[static_cast<std::size_t>(g.tail[k])] + g.pipes[k].length_m();
                progress = true;
            }
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Suite 1: steady pressure profile against the closed-form pipe law
// ---------------------------------------------------------------------------

/// 50 km single-gas pipe delivering a constant mass flux; the discrete steady
/// state is compared per node with p(x) = sqrt(p0^2 - lam*sigma^2*phi^2*x/D).
void suite_steady_pipe_law() {
    const double sigma = 377.0, p0 = 7.0e6, lam = 0.11, dia = 0.5, len_km = 50.0;
    const double area = kPi * dia * dia / 4.0;
    for (double flux : {120.0, 140.0, 160.0}) {
        json doc = {
            {"gas", {{"sigma1_m_per_s", sigma}, {"sigma2_m_per_s", sigma * 2.8}}},
            {"nodes", json::array({{{"id", "inlet"}, {"role", "slack"}},
                                   {{"id", "outlet"}, {"role", "withdrawal"}}})},
            {"pipes", json::array({{{"from", "inlet"},
                                    {"to", "outlet"},
                                    {"length_km", len_km},
                                    {"diameter_m", dia},
                                    {"friction", lam}}})},
            {"boundaries",
             {{"inlet", {{"pressure_mpa", p0 / 1e6}, {"h2_fraction", 0.0}}},
              {"outlet", {{"outflow_kg_per_s", flux * area}}}}},
            {"simulation",
             {{"horizon_hr", 1.0}, {"output_samples", 10}, {"solver", "fv"},
              {"max_segment_km", 1.0}}}};
        const scenario s = parse_scenario(doc.dump());
        const prepared_scenario ps = prepare(s);
        const fv_system sys(ps);
        const vec y = steady_state(sys);
        const std::vector<double> x = node_positions_m(ps.fine);

        const int Vd = ps.fine.node_count() - ps.fine.n_slack;
        double worst = 0.0;
        for (int j = 0; j < Vd; ++j) {
            const double p = sigma * sigma * (y[j] + y[Vd + j]);
            const double want = std::sqrt(p0 * p0 - lam * sigma * sigma * flux * flux *
                                                        x[static_cast<std::size_t>(
                                                            ps.fine.n_slack + j)] /
                                                        dia);
            worst = std::max(worst, std::abs(p - want) / want);
        }
        check(worst <= 1.0e-3, "steady profile vs closed form, flux " + fmt(flux) +
                                   " kg/m^2/s, 1 km cells: max rel err " + fmt(worst) +
                                   " (bound 0.001)");
        // Context for the failure mode: the node-averaged storage plus
        // upwinded edge closure is first-order accurate, so the discrete
        // steady profile carries an O(cell length) bias that the tightest
        // draw amplifies; halving the cell roughly halves the error.
        if (worst > 1.0e-3) {
            for (double seg : {0.5, 0.25}) {
                scenario r = s;
                r.settings.max_segment_km = seg;
                const prepared_scenario rps = prepare(r);
                const fv_system rsys(rps);
                const vec ry = steady_state(rsys);
                const std::vector<double> rx = node_positions_m(rps.fine);
                const int rVd = rps.fine.node_count() - rps.fine.n_slack;
                double rw = 0.0;
                for (int j = 0; j < rVd; ++j) {
                    const double p = sigma * sigma * (ry[j] + ry[rVd + j]);
                    const double want =
                        std::sqrt(p0 * p0 - lam * sigma * sigma * flux * flux *
                                                rx[static_cast<std::size_t>(
                                                    rps.fine.n_slack + j)] /
                                                dia);
                    rw = std::max(rw, std::abs(p - want) / want);
                }
                std::printf("       refinement note: %g km cells -> max rel err %s\n",
                            seg, fmt(rw).c_str());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Suite 2: componentwise pressure ordering under ordered boundary inputs
// ---------------------------------------------------------------------------

json random_tree_scenario(std::mt19937& rng) {
    std::uniform_int_distribution<int> n_nodes(2, 10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = n_nodes(rng);

    json nodes = json::array();
    json pipes = json::array();
    json bounds = json::object();
    const double h2 = 0.2 * unit(rng);  // shared constant concentration
    nodes.push_back({{"id", "n0"}, {"role", "slack"}});
    bounds["n0"] = {{"pressure_mpa", 4.5 + 2.0 * unit(rng)}, {"h2_fraction", h2}};
    for (int j = 1; j < n; ++j) {
        const std::string id = "n" + std::to_string(j);
        nodes.push_back({{"id", id}, {"role", "withdrawal"}});
        std::uniform_int_distribution<int> parent(0, j - 1);
        pipes.push_back({{"from", "n" + std::to_string(parent(rng))},
                         {"to", id},
                         {"length_km", 2.0 + 8.0 * unit(rng)},
                         {"diameter_m", 0.35 + 0.35 * unit(rng)},
                         {"friction", 0.03 + 0.09 * unit(rng)}});
        bounds[id] = {{"outflow_kg_per_s",
                       {{"kind", "sinusoid"},
                        {"mean", 0.3 + 2.2 * unit(rng)},
                        {"kappa", 0.3 * unit(rng)},
                        {"omega_cyc_hr", 0.1 + 0.4 * unit(rng)}}}};
    }
    return {{"gas", {{"sigma1_m_per_s", 377.0}, {"sigma2_m_per_s", 1055.6}}},
            {"nodes", nodes},
            {"pipes", pipes},
            {"boundaries", bounds},
            {"simulation",
             {{"horizon_hr", 3.0}, {"output_samples", 150}, {"solver", "fv"},
              {"max_segment_km", 2.0}}}};
}

void suite_ordered_pressures() {
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double t0 = now_s();
    int produced = 0, attempts = 0;
    double worst_violation = -1.0e300;
    while (produced < 50 && attempts < 200) {
        ++attempts;
        json doc = random_tree_scenario(rng);
        // Dominating variant: more source pressure, 90% of every draw.
        json dom = doc;
        dom["boundaries"]["n0"]["pressure_mpa"] =
            doc["boundaries"]["n0"]["pressure_mpa"].get<double>() + 0.05 +
            0.25 * unit(rng);
        for (auto& [id, entry] : dom["boundaries"].items()) {
            if (!entry.contains("outflow_kg_per_s")) continue;
            entry["outflow_kg_per_s"]["mean"] =
                0.9 * entry["outflow_kg_per_s"]["mean"].get<double>();
        }
        try {
            const sim_result lo = run_simulation(parse_scenario(doc.dump()));
            const sim_result hi = run_simulation(parse_scenario(dom.dump()));
            double gap = -1.0e300;  // max of p_lo - p_hi; ordering wants <= 0
            for (int c = 0; c < lo.p_mpa.cols(); ++c)
                gap = std::max(gap, (lo.p_mpa.col(c) - hi.p_mpa.col(c)).maxCoeff());
            worst_violation = std::max(worst_violation, gap);
            ++produced;
        } catch (const std::exception&) {
            continue;  // infeasible draw for this topology; try another
        }
    }
    check(produced == 50, "generated 50 feasible ordered scenario pairs (" +
                              std::to_string(attempts) + " attempts)");
    check(worst_violation <= 1.0e-8,
          "pressures stay componentwise ordered: max(p_low - p_high) = " +
              fmt(worst_violation) + " MPa (bound 1e-8)");
    check(now_s() - t0 < 300.0, "suite runtime " + fmt(now_s() - t0) + " s < 300 s");
}

// ---------------------------------------------------------------------------
// Suite 3: cooperative sign structure of the constant-mixture pressure
//          system, and its loss for the two-variable system
// ---------------------------------------------------------------------------

void suite_jacobian_signs() {
    const double t0 = now_s();
    {
        scenario s = parse_scenario(slurp(source_path("scenarios/fig3_lo.json")));
        s.settings.max_segment_km = 1.0e9;  // work on the unrefined graph
        const prepared_scenario ps = prepare(s);
        const fv_system sys(ps);
        const network_graph& g = ps.fine;
        const int Vd = g.node_count() - g.n_slack;
        const boundary_values b = sys.boundary_at(0.0);

        std::mt19937 rng(907u);
        std::uniform_real_distribution<double> drop(0.80, 0.985);
        std::uniform_real_distribution<double> mix(0.0, 0.3);
        double min_offdiag = 1.0e300;
        for (int trial = 0; trial < 100; ++trial) {
            // Downstream-decreasing nodal pressures keep every edge in its
            // design flow direction.
            std::vector<double> pn(static_cast<std::size_t>(g.node_count()), -1.0);
            for (int i = 0; i < g.n_slack; ++i) pn[static_cast<std::size_t>(i)] =
                b.slack_pressure_pa[i];
            bool progress = true;
            while (progress) {
                progress = false;
                for (int k = 0; k < g.edge_count(); ++k) {
                    const auto ti = static_cast<std::size_t>(g.tail[k]);
                    const auto hi = static_cast<std::size_t>(g.head[k]);
                    if (pn[ti] >= 0.0 && pn[hi] < 0.0) {
                        pn[hi] = pn[ti] * drop(rng);
                        progress = true;
                    }
                }
            }
            vec p(Vd), c2(Vd);
            for (int j = 0; j < Vd; ++j) {
                p[j] = pn[static_cast<std::size_t>(g.n_slack + j)];
                c2[j] = ps.gas.c2(mix(rng));
            }
            for (int j = 0; j < Vd; ++j) {
                const double h = 1.0e-4 * p[j];
                vec pp = p, pm = p;
                pp[j] += h;
                pm[j] -= h;
                const vec fp = sys.rhs_isolated_pressure(b, pp, c2);
                const vec fm = sys.rhs_isolated_pressure(b, pm, c2);
                for (int i = 0; i < Vd; ++i) {
                    if (i == j) continue;
                    min_offdiag = std::min(min_offdiag, (fp[i] - fm[i]) / (2.0 * h));
                }
            }
        }
        check(min_offdiag >= -1.0e-8,
              "constant-mixture pressure system: smallest off-diagonal response " +
                  fmt(min_offdiag) + " 1/s >= -1e-8 over 100 random states");
    }
    {
        // Two-pipe chain with an interior node: raising the interior density
        // while holding its pressure lowers the downstream pressure rate,
        // because the transported wave-speed weight p/rho falls.
        json doc = {
            {"gas", {{"sigma1_m_per_s", 377.0}, {"sigma2_m_per_s", 1055.6}}},
            {"nodes", json::array({{{"id", "inlet"}, {"role", "slack"}},
                                   {{"id", "mid"}, {"role", "withdrawal"}},
                                   {{"id", "outlet"}, {"role", "withdrawal"}}})},
            {"pipes", json::array({{{"from", "inlet"}, {"to", "mid"},
                                    {"length_km", 5.0}, {"diameter_m", 0.5},
                                    {"friction", 0.11}},
                                   {{"from", "mid"}, {"to", "outlet"},
                                    {"length_km", 5.0}, {"diameter_m", 0.5},
                                    {"friction", 0.11}}})},
            {"boundaries",
             {{"inlet", {{"pressure_mpa", 7.0}, {"h2_fraction", 0.05}}},
              {"mid", {{"outflow_kg_per_s", 0.0}}},
              {"outlet", {{"outflow_kg_per_s", 10.0}}}}},
            {"simulation",
             {{"horizon_hr", 1.0}, {"output_samples", 10}, {"solver", "fv"},
              {"max_segment_km", 1.0e9}}}};
        scenario s = parse_scenario(doc.dump());
        const prepared_scenario ps = prepare(s);
        const fv_system sys(ps);
        const boundary_values b = sys.boundary_at(0.0);
        vec y(4);
        y << 52.0, 50.0, 6.5e6, 6.2e6;  // [rho_mid, rho_out, p_mid, p_out]
        const double h = 1.0e-4 * y[0];
        vec yp = y, ym = y;
        yp[0] += h;
        ym[0] -= h;
        const double j30 = (sys.rhs_pressure_density(b, yp)[3] -
                            sys.rhs_pressure_density(b, ym)[3]) /
                           (2.0 * h);
        const double expected = -79.39642536968947;
        check(j30 < -1.0e-8, "density/pressure system: downstream pressure rate "
                             "falls when the interior density rises (" +
                                 fmt(j30) + " < -1e-8)");
        check(std::abs(j30 - expected) <= 1.0e-3 * std::abs(expected),
              "counterexample entry matches the hand-derived value " +
                  fmt(expected) + " within 0.1% (got " + fmt(j30) + ")");
    }
    check(now_s() - t0 < 60.0, "suite runtime " + fmt(now_s() - t0) + " s < 60 s");
}

// ---------------------------------------------------------------------------
// Suite 4: trajectory-crossing regressions on the demonstration network
// ---------------------------------------------------------------------------

void suite_crossing_regressions() {
    const double t0 = now_s();
    auto run_pair = [](const char* lo_file, const char* hi_file) {
        const sim_result lo =
            run_simulation(parse_scenario(slurp(source_path(lo_file))));
        const sim_result hi =
            run_simulation(parse_scenario(slurp(source_path(hi_file))));
        return std::make_pair(lo, hi);
    };
    auto nodes_crossing = [](const sim_result& a, const sim_result& b, quantity q) {
        std::vector<std::string> hit;
        for (std::size_t c = 0; c < a.node_ids.size(); ++c) {
            const int col = static_cast<int>(c);
            if (!detect_crossings(a.t_hr, a.series(q).col(col), b.series(q).col(col))
                     .empty())
                hit.push_back(a.node_ids[c]);
        }
        return hit;
    };

    {
        const auto [lo, hi] = run_pair("scenarios/fig3_lo.json", "scenarios/fig3_hi.json");
        const auto eta = nodes_crossing(lo, hi, quantity::eta2);
        const auto prs = nodes_crossing(lo, hi, quantity::p_mpa);
        const auto enr = nodes_crossing(lo, hi, quantity::energy_gj_s);
        check(!eta.empty(), "demand-step pair: concentrations cross at " +
                                std::to_string(eta.size()) + " node(s)");
        check(prs.empty(), "demand-step pair: pressures never cross (" +
                               std::to_string(prs.size()) + " nodes crossed)");
        check(enr.empty(), "demand-step pair: delivered energies never cross (" +
                               std::to_string(enr.size()) + " nodes crossed)");
    }
    {
        const auto [lo, hi] = run_pair("scenarios/fig4_lo.json", "scenarios/fig4_hi.json");
        std::size_t crossed = 0, non_slack = 0;
        for (std::size_t c = 0; c < lo.node_ids.size(); ++c) {
            if (lo.node_ids[c] == "blue") continue;  // the pressure-fed source
            ++non_slack;
            const int col = static_cast<int>(c);
            if (!detect_crossings(lo.t_hr, lo.rho.col(col), hi.rho.col(col)).empty())
                ++crossed;
        }
        check(crossed == non_slack, "hydrogen-injection pair: total density crosses "
                                    "at every non-slack node (" +
                                        std::to_string(crossed) + "/" +
                                        std::to_string(non_slack) + ")");
    }
    check(now_s() - t0 < 600.0, "suite runtime " + fmt(now_s() - t0) + " s < 600 s");
}

// ---------------------------------------------------------------------------
// Suite 5: nesting of the monotonic interface across observed variables
// ---------------------------------------------------------------------------

void suite_nesting_order() {
    const double t0 = now_s();
    const scenario tmpl = parse_scenario(slurp(source_path("scenarios/mi_pipe.json")));
    const auto cache = fresh_dir("nesting");
    sweep_config cfg;
    cfg.omegas = {0.4, 0.8, 1.2, 1.6, 2.0};
    cfg.kappas = uniform_grid(0.0, 1.0, 41);
    cfg.workers = 8;
    cfg.cache_dir = cache.string();
    const std::vector<double> flows = {23.561944901923447, 27.48893571891069,
                                       31.41592653589793};

    // Same simulations serve every variable: each cached sweep point stores
    // the crossing flag of all reported quantities.
    const std::vector<quantity> order = {quantity::rho2, quantity::rho1, quantity::rho,
                                         quantity::energy_gj_s, quantity::p_mpa};
    std::vector<interface_curve> curves;
    for (quantity q : order) curves.push_back(monotonic_interface(tmpl, q, flows, cfg));

    for (std::size_t i = 0; i < cfg.omegas.size(); ++i) {
        bool ok = true;
        std::string line;
        for (std::size_t v = 0; v < curves.size(); ++v) {
            const interface_point& pt = curves[v].points[i];
            if (pt.failed) ok = false;
            if (v) ok = ok && curves[v - 1].points[i].kappa_star <= pt.kappa_star;
            line += std::string(v ? " <= " : "") + to_string(order[v]) + "=" +
                    fmt(pt.kappa_star);
        }
        check(ok, "variable nesting at omega " + fmt(cfg.omegas[i]) + ": " + line);
    }
    std::filesystem::remove_all(cache);
    check(now_s() - t0 < 3600.0, "suite runtime " + fmt(now_s() - t0) + " s < 3600 s");
}

// ---------------------------------------------------------------------------
// Suite 6: average power spectrum values and shapes of the forced pipe
// ---------------------------------------------------------------------------

void suite_periodicity_values() {
    const double t0 = now_s();
    const scenario tmpl = parse_scenario(slurp(source_path("scenarios/pi_pipe.json")));
    struct point {
        double omega, kappa, expect;
    };
    const std::vector<point> pts = {{0.25, 1.0, 0.30}, {0.1, 0.98, 0.62}, {0.5, 0.9, 1.19}};

    std::vector<spectrum> spectra(pts.size());
    std::vector<bool> have(pts.size(), false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& pt = pts[i];
        const std::string where =
            "(" + fmt(pt.omega) + ", " + fmt(pt.kappa) + ")";
        try {
            const sim_result run =
                run_simulation(detail::with_inlet_sine(tmpl, pt.omega, pt.kappa));
            spectra[i] = outlet_spectrum(run.p_mpa.col(run.column_of("outlet")),
                                         tmpl.horizon_hr);
            have[i] = true;
            const double m = spectra[i].measure;
            check(std::abs(m - pt.expect) <= 0.5 * pt.expect,
                  "power measure at " + where + ": " + fmt(m) + " within 50% of " +
                      fmt(pt.expect));
        } catch (const std::exception& e) {
            check(false, "power measure at " + where + ": simulation failed (" +
                             std::string(e.what()) + ")");
        }
    }

    // Half-frequency comb: the slow strongly-forced point responds with
    // period doubling, so pulses appear midway between harmonics of the
    // forcing frequency.
    if (have[1]) {
        const spectrum& sp = spectra[1];
        const double half = pts[1].omega / 2.0;  // 0.05 cyc/hr
        double best = 0.0;
        for (std::size_t n = 0; n < sp.value.size(); ++n) {
            const double f = sp.omega_cyc_hr[n];
            const double r = std::fmod(f, pts[1].omega);
            const double to_half = std::abs(r - half);
            const double to_whole = std::min(r, pts[1].omega - r);
            if (to_half < 0.004 && to_whole > 0.02 && f > 0.01 && f < 1.0)
                best = std::max(best, std::abs(sp.value[n]));
        }
        check(best >= 0.05, "half-frequency pulses present at (0.1, 0.98): strongest "
                            "midway bin modulus " +
                                fmt(best) + " >= 0.05");
    } else {
        check(false, "half-frequency comb check skipped: no (0.1, 0.98) spectrum");
    }

    // Spectral spread: the fast strongly-forced point fills at least ten
    // times as many bins above 1% of its peak as the periodic reference.
    if (have[0] && have[2]) {
        auto bins_above = [](const spectrum& sp) {
            std::size_t n = 0;
            for (const auto& v : sp.value)
                if (std::abs(v) >= 0.01) ++n;
            return n;
        };
        const std::size_t broad = bins_above(spectra[2]), narrow = bins_above(spectra[0]);
        check(broad >= 10 * narrow, "spectral spread: (0.5, 0.9) has " +
                                        std::to_string(broad) +
                                        " bins above 1% of peak vs " +
                                        std::to_string(narrow) + " at (0.25, 1.0)");
    } else {
        check(false, "spectral spread ratio skipped: missing spectrum at (0.25, 1.0) "
                     "or (0.5, 0.9)");
    }
    check(now_s() - t0 < 5400.0, "suite runtime " + fmt(now_s() - t0) + " s < 5400 s");
}

// ---------------------------------------------------------------------------
// Suite 7: trajectory divergence measure signs and arithmetic
// ---------------------------------------------------------------------------

void suite_divergence_values() {
    const double t0 = now_s();
    const scenario tmpl = parse_scenario(slurp(source_path("scenarios/ci_pipe.json")));
    const double flow2 = 14.74585051778709;  // nudged initial draw

    try {
        const double c = chaotic_point_measure(tmpl, 0.5, 0.95, flow2, "outlet");
        check(c > 0.0, "divergence at (0.5, 0.95) from nudged initial draw: " +
                           fmt(c) + " > 0");
    } catch (const std::exception& e) {
        check(false, std::string("divergence at (0.5, 0.95): simulation failed (") +
                         e.what() + ")");
    }
    try {
        const double c = chaotic_point_measure(tmpl, 0.5, 0.0, flow2, "outlet");
        check(c <= 0.0, "steady forcing contracts the nudge: measure " + fmt(c) +
                            " <= 0 at kappa 0");
    } catch (const std::exception& e) {
        check(false, std::string("divergence at (0.5, 0.0): simulation failed (") +
                         e.what() + ")");
    }
    {
        // Planted exponential separation: psi2 - psi1 = delta * exp(rate * t).
        const int N = 10000;
        const double T = 100.0, rate = 0.05, delta = 1.0e-3;
        vec a(N + 1), b2(N + 1);
        for (int k = 0; k <= N; ++k) {
            const double t = T * k / N;
            a[k] = std::sin(0.3 * t);
            b2[k] = a[k] + delta * std::exp(rate * t);
        }
        const auto frac = [N](double f) {
            return static_cast<std::size_t>(std::llround(f * N));
        };
        const auto rep =
            chaos_measure(a, b2, frac(0.08), frac(0.15), frac(0.5), frac(0.8));
        // Window means of rate*t differ by rate * (65 - 11.5) hr; the
        // normalization divides by n2 - n1 samples.
        const double expected = rate * (65.0 - 11.5) / (frac(0.5) - frac(0.15));
        check(std::abs(rep.measure - expected) <= 0.01 * expected,
              "planted exponential rate recovered: " + fmt(rep.measure) + " vs " +
                  fmt(expected) + " within 1%");
    }
    check(now_s() - t0 < 1800.0, "suite runtime " + fmt(now_s() - t0) + " s < 1800 s");
}

// ---------------------------------------------------------------------------
// Suite 8: monotonic interface sits below the periodic and chaotic ones
// ---------------------------------------------------------------------------

void suite_interface_ordering() {
    const double t0 = now_s();
    auto run_sweep = [](const char* file) {
        const detail::sweep_spec sw = detail::load_sweep(source_path(file));
        sweep_config cfg;
        cfg.omegas = uniform_grid(sw.omega_min, sw.omega_max, sw.omega_count);
        cfg.kappas = uniform_grid(sw.kappa_min, sw.kappa_max, sw.kappa_count);
        cfg.workers = 4;
        cfg.threshold = sw.threshold;
        cfg.crossing_node = sw.crossing_node;
        if (sw.kind == "mi")
            return monotonic_interface(sw.tmpl, sw.mi_quantity, sw.outflows_kg_s, cfg);
        if (sw.kind == "pi") return periodic_interface(sw.tmpl, cfg);
        return chaotic_interface(sw.tmpl, sw.initial_flow_2_kg_s, cfg);
    };
    const interface_curve mi = run_sweep("sweeps/mi_reduced.json");
    const interface_curve pi = run_sweep("sweeps/pi_reduced.json");
    const interface_curve ci = run_sweep("sweeps/ci_reduced.json");
    for (std::size_t i = 0; i < mi.points.size(); ++i) {
        const interface_point& m = mi.points[i];
        const interface_point& p = pi.points[i];
        const interface_point& c = ci.points[i];
        const bool ok = !m.failed && !p.failed && !c.failed &&
                        m.kappa_star < p.kappa_star && m.kappa_star < c.kappa_star;
        check(ok, "interfaces at omega " + fmt(m.omega) + ": monotonic " +
                      fmt(m.kappa_star) + " strictly below periodic " +
                      fmt(p.kappa_star) + " and chaotic " + fmt(c.kappa_star));
    }
    check(now_s() - t0 < 5400.0, "suite runtime " + fmt(now_s() - t0) + " s < 5400 s");
}

// ---------------------------------------------------------------------------
// Suite 9: collocation derivative exactness and cross-solver agreement
// ---------------------------------------------------------------------------

void suite_discretization_accuracy() {
    const double t0 = now_s();
    {
        const int N = 16;
        const double L = 5.0e4;
        const cheb_grid g = make_cheb(N, L);
        std::mt19937 rng(41u);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> a(static_cast<std::size_t>(N) + 1);
            for (auto& c : a) c = coef(rng);
            vec p(N + 1), dp(N + 1);
            for (int i = 0; i <= N; ++i) {
                const double u = g.x[i] / L;  // scaled coordinate in [0, 1]
                double v = 0.0, d = 0.0;
                for (int k = N; k >= 0; --k) v = v * u + a[static_cast<std::size_t>(k)];
                for (int k = N; k >= 1; --k)
                    d = d * u + k * a[static_cast<std::size_t>(k)];
                p[i] = v;
                dp[i] = d / L;
            }
            const vec got = g.D * p;
            worst = std::max(worst, (got - dp).cwiseAbs().maxCoeff() /
                                        dp.cwiseAbs().maxCoeff());
        }
        check(worst <= 1.0e-8, "collocation derivative exact on degree-16 "
                               "polynomials: rel err " +
                                   fmt(worst) + " <= 1e-8");
    }
    {
        json doc = {
            {"gas", {{"sigma1_m_per_s", 377.0}, {"sigma2_m_per_s", 1055.6}}},
            {"nodes", json::array({{{"id", "inlet"}, {"role", "slack"}},
                                   {{"id", "outlet"}, {"role", "withdrawal"}}})},
            {"pipes", json::array({{{"from", "inlet"},
                                    {"to", "outlet"},
                                    {"length_km", 50.0},
                                    {"diameter_m", 0.5},
                                    {"friction", 0.11}}})},
            {"boundaries",
             {{"inlet", {{"pressure_mpa", 7.0}, {"h2_fraction", 0.0}}},
              {"outlet",
               {{"outflow_kg_per_s",
                 {{"kind", "sinusoid"}, {"mean", 14.726215563702155},
                  {"kappa", 0.25}, {"omega_cyc_hr", 0.08333333333333333}}}}}}},
            {"simulation",
             {{"horizon_hr", 24.0}, {"output_samples", 600}, {"solver", "fv"},
              {"max_segment_km", 0.25}, {"rel_tol", 1.0e-6}, {"abs_tol", 1.0e-7}}}};
        const scenario s = parse_scenario(doc.dump());
        const sim_result fv = run_simulation(s);
        sim_options o;
        o.solver = "spectral";
        const sim_result sp = run_simulation(s, o);
        const int jo = fv.column_of("outlet");
        double worst = 0.0;
        for (std::size_t k = 0; k < fv.t_hr.size(); ++k)
            worst = std::max(worst, std::abs(fv.p_mpa(static_cast<int>(k), jo) -
                                             sp.p_mpa(static_cast<int>(k), jo)) /
                                        sp.p_mpa(static_cast<int>(k), jo));
        check(worst <= 5.0e-3, "volume and collocation solvers agree on a slowly "
                               "forced pipe: sup rel diff " +
                                   fmt(worst) + " <= 0.005");
    }
    check(now_s() - t0 < 300.0, "suite runtime " + fmt(now_s() - t0) + " s < 300 s");
}

// ---------------------------------------------------------------------------
// Suite 10: sweep output independent of the worker count
// ---------------------------------------------------------------------------

void suite_determinism() {
    const double t0 = now_s();
    std::string reference;
    bool all_equal = true;
    for (int workers : {1, 4, 8}) {
        const auto dir = fresh_dir("det_w" + std::to_string(workers));
        const int rc = run_cli({"interface", "--scenario",
                                source_path("sweeps/mi_determinism.json"), "--out",
                                dir.string(), "--workers", std::to_string(workers)});
        check(rc == 0, "sweep with " + std::to_string(workers) + " workers exits 0");
        const std::string csv = slurp((dir / "interface.csv").string());
        if (reference.empty())
            reference = csv;
        else
            all_equal = all_equal && csv == reference;
        std::filesystem::remove_all(dir);
    }
    check(all_equal && !reference.empty(),
          "interface tables byte-identical across worker counts 1, 4, 8");
    check(now_s() - t0 < 600.0, "suite runtime " + fmt(now_s() - t0) + " s < 600 s");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <suite number 1..10>\n", argv[0]);
        return 2;
    }
    const int n = std::atoi(argv[1]);
    try {
        switch (n) {
            case 1: suite_steady_pipe_law(); break;
            case 2: suite_ordered_pressures(); break;
            case 3: suite_jacobian_signs(); break;
            case 4: suite_crossing_regressions(); break;
            case 5: suite_nesting_order(); break;
            case 6: suite_periodicity_values(); break;
            case 7: suite_divergence_values(); break;
            case 8: suite_interface_ordering(); break;
            case 9: suite_discretization_accuracy(); break;
            case 10: suite_determinism(); break;
            default:
                std::fprintf(stderr, "unknown suite %d\n", n);
                return 2;
        }
    } catch (const std::exception& e) {
        check(false, std::string("suite aborted: ") + e.what());
    }
    std::printf("SUITE %d: %s (%d/%d checks)\n", n, g_failed ? "FAIL" : "PASS",
                g_checked - g_failed, g_checked);
    return g_failed ? 1 : 0;
}
