/// @file scenario.hpp
/// @brief Declarative simulation descriptions: network, gas constants,
///        time-varying boundary and control profiles, and solver settings.
///        Parses/serializes the JSON scenario document format and samples
///        all boundary data at arbitrary times.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pipeflow/common.hpp"
#include "pipeflow/gas.hpp"
#include "pipeflow/network.hpp"
#include "pipeflow/profile.hpp"

namespace pipeflow {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scenario data model
// ---------------------------------------------------------------------------

/// Boundary profiles attached to one (non-auxiliary) node.  Only the fields
/// matching the node's role are meaningful.
struct boundary_entry {
    profile pressure_mpa = profile::constant(0.0);   ///< slack: supply pressure
    profile h2_fraction = profile::constant(0.0);    ///< slack/injection: hydrogen mass fraction
    profile flow_kg_per_s = profile::constant(0.0);  ///< injection inflow or withdrawal outflow
    bool flow_is_flux = false;  ///< outflow given as kg/(m^2 s) through the feed pipe
};

/// Integration and discretization settings.
struct solver_settings {
    std::string solver = "fv";      ///< "fv" (network) or "spectral" (single pipe)
    std::string method = "trbdf2";  ///< "trbdf2" (adaptive) or "rk4" (fixed step)
    double max_segment_km = 1.0;    ///< refinement limit for the fv solver
    int spectral_nodes = 60;        ///< collocation intervals for the spectral solver
    double rel_tol = 1e-6;          ///< adaptive relative tolerance
    double abs_tol = 1e-7;          ///< adaptive absolute tolerance
    double fixed_dt_s = 1.0;        ///< rk4 step, seconds
    bool allow_reverse_flow = false;  ///< permit flow against edge orientation
};

/// A parsed and validated simulation description.
struct scenario {
    gas_pair gas;
    network_graph graph;  ///< unrefined, canonical node order
    std::vector<boundary_entry> boundary;  ///< per node, canonical order
    std::vector<profile> edge_mu_lower;    ///< per pipe: inlet multiplier profile
    std::vector<profile> edge_mu_upper;    ///< per pipe: outlet multiplier profile
    solver_settings settings;
    double horizon_hr = 0.0;
    int output_samples = 10000;  ///< N; the solution is reported at N+1 times
};

/// A scenario readied for a solver: the graph is refined (fv) and all
/// profiles are mapped onto refined nodes/edges.
struct prepared_scenario {
    gas_pair gas;
    network_graph fine;  ///< refined graph (fv) or the raw pipe (spectral)
    solver_settings settings;
    double horizon_hr = 0.0;
    int output_samples = 10000;

    std::vector<profile> slack_pressure_mpa;  ///< per slack node
    std::vector<profile> slack_h2;            ///< per slack node
    std::vector<profile> demand_flow;         ///< per non-slack node, kg/s (magnitude)
    std::vector<profile> injection_h2;        ///< per non-slack node (injection only)
    std::vector<profile> edge_mu_lower;       ///< per refined edge
    std::vector<profile> edge_mu_upper;       ///< per refined edge
    bool controls_constant = true;  ///< all control profiles constant (common case)
};

/// All boundary data sampled at one instant (SI units).
struct boundary_values {
    vec slack_pressure_pa;  ///< per slack node
    vec slack_h2;           ///< per slack node
    vec demand;             ///< per non-slack node: +outflow or -inflow, kg/s
    vec injection_h2;       ///< per non-slack node (zero at withdrawals)
    vec mu_lower;           ///< per edge
    vec mu_upper;           ///< per edge
};

// ---------------------------------------------------------------------------
// Profile <-> JSON
// ---------------------------------------------------------------------------

/// Parses a profile value: a bare number means a constant; otherwise an
/// object {"kind": "constant"|"sinusoid"|"piecewise_linear", ...}.
inline profile parse_profile(const json& j, const std::string& where) {
    if (j.is_number()) return profile::constant(j.get<double>());
    if (!j.is_object())
        throw input_error(where + ": profile must be a number or an object");
    const std::string kind = j.value("kind", "");
    if (kind == "constant") {
        if (!j.contains("value")) throw input_error(where + ": constant profile needs 'value'");
        return profile::constant(j.at("value").get<double>());
    }
    if (kind == "sinusoid") {
        for (const char* key : {"mean", "kappa", "omega_cyc_hr"})
            if (!j.contains(key))
                throw input_error(where + ": sinusoid profile needs '" + std::string(key) + "'");
        return profile::sinusoid(j.at("mean").get<double>(), j.at("kappa").get<double>(),
                                 j.at("omega_cyc_hr").get<double>(),
                                 j.value("phase_rad", 0.0));
    }
    if (kind == "piecewise_linear") {
        if (!j.contains("knots") || !j.at("knots").is_array())
            throw input_error(where + ": piecewise_linear profile needs a 'knots' array");
        std::vector<std::pair<double, double>> knots;
        for (const json& k : j.at("knots")) {
            if (!k.is_array() || k.size() != 2)
                throw input_error(where + ": each knot must be a [t_hr, value] pair");
            knots.emplace_back(k[0].get<double>(), k[1].get<double>());
        }
        try {
            return profile::piecewise(std::move(knots));
        } catch (const input_error& e) {
            throw input_error(where + ": " + e.what());
        }
    }
    throw input_error(where + ": unknown profile kind '" + kind + "'");
}

/// Serializes a profile (inverse of parse_profile; constants stay numbers).
inline json profile_to_json(const profile& p) {
    switch (p.kind) {
        case profile::kind_t::constant:
            return json(p.value);
        case profile::kind_t::sinusoid: {
            json j{{"kind", "sinusoid"},
                   {"mean", p.mean},
                   {"kappa", p.kappa},
                   {"omega_cyc_hr", p.omega}};
            if (p.phase != 0.0) j["phase_rad"] = p.phase;
            return j;
        }
        case profile::kind_t::piecewise_linear: {
            json knots = json::array();
            for (const auto& k : p.knots) knots.push_back({k.first, k.second});
            return json{{"kind", "piecewise_linear"}, {"knots", knots}};
        }
    }
    return json();
}

// ---------------------------------------------------------------------------
// Scenario parsing
// ---------------------------------------------------------------------------

namespace detail {

inline void require_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) { ok = true; break; }
        if (!ok) throw input_error(where + ": unknown key '" + it.key() + "'");
    }
}

inline void check_range(const profile& p, double lo, double hi, const std::string& what) {
    const auto [a, b] = p.range();
    if (a < lo - 1e-12 || b > hi + 1e-12)
        throw input_error(what + " must stay within [" + format_double(lo) + ", " +
                          format_double(hi) + "]; profile spans [" + format_double(a) +
                          ", " + format_double(b) + "]");
}

}  // namespace detail

/// Parses and validates a scenario document (JSON text).
inline scenario parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw input_error(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw input_error("scenario document must be a JSON object");
    detail::require_keys(doc, {"gas", "nodes", "pipes", "boundaries", "controls", "simulation"},
                         "scenario");
    for (const char* required : {"nodes", "pipes", "boundaries", "simulation"})
        if (!doc.contains(required))
            throw input_error(std::string("scenario: missing section '") + required + "'");

    scenario s;

    // --- gas ---------------------------------------------------------------
    if (doc.contains("gas")) {
        const json& g = doc.at("gas");
        detail::require_keys(
            g, {"sigma1_m_per_s", "sigma2_m_per_s", "r1_mj_per_kg", "r2_mj_per_kg"}, "gas");
        s.gas.sigma1 = g.value("sigma1_m_per_s", s.gas.sigma1);
        s.gas.sigma2 = g.value("sigma2_m_per_s", s.gas.sigma2);
        s.gas.r1 = g.value("r1_mj_per_kg", s.gas.r1);
        s.gas.r2 = g.value("r2_mj_per_kg", s.gas.r2);
    }
    s.gas.validate();

    // --- nodes and pipes ---------------------------------------------------
    std::vector<node> nodes;
    for (const json& jn : doc.at("nodes")) {
        detail::require_keys(jn, {"id", "role"}, "node");
        if (!jn.contains("id") || !jn.contains("role"))
            throw input_error("each node needs 'id' and 'role'");
        node n;
        n.id = jn.at("id").get<std::string>();
        const std::string role = jn.at("role").get<std::string>();
        if (role == "slack") n.role = node_role::slack;
        else if (role == "injection") n.role = node_role::injection;
        else if (role == "withdrawal") n.role = node_role::withdrawal;
        else throw input_error("node '" + n.id + "': unknown role '" + role + "'");
        nodes.push_back(std::move(n));
    }
    std::vector<pipe> pipes;
    for (const json& jp : doc.at("pipes")) {
        detail::require_keys(jp, {"from", "to", "length_km", "diameter_m", "friction"}, "pipe");
        for (const char* key : {"from", "to", "length_km", "diameter_m", "friction"})
            if (!jp.contains(key))
                throw input_error(std::string("each pipe needs '") + key + "'");
        pipe p;
        p.from = jp.at("from").get<std::string>();
        p.to = jp.at("to").get<std::string>();
        p.length_km = jp.at("length_km").get<double>();
        p.diameter_m = jp.at("diameter_m").get<double>();
        p.friction = jp.at("friction").get<double>();
        pipes.push_back(std::move(p));
    }
    s.graph = build_graph(std::move(nodes), std::move(pipes));

    // --- controls ----------------------------------------------------------
    s.edge_mu_lower.assign(s.graph.edge_count(), profile::constant(1.0));
    s.edge_mu_upper.assign(s.graph.edge_count(), profile::constant(1.0));
    if (doc.contains("controls")) {
        for (const json& jc : doc.at("controls")) {
            detail::require_keys(jc, {"pipe", "compressor_ratio", "regulator_ratio"},
                                 "control");
            if (!jc.contains("pipe"))
                throw input_error("each control entry needs 'pipe' (\"from->to\")");
            const std::string ref = jc.at("pipe").get<std::string>();
            const auto sep = ref.find("->");
            if (sep == std::string::npos)
                throw input_error("control pipe reference '" + ref + "' is not \"from->to\"");
            const std::string from = ref.substr(0, sep), to = ref.substr(sep + 2);
            int found = -1;
            for (int k = 0; k < s.graph.edge_count(); ++k)
                if (s.graph.pipes[k].from == from && s.graph.pipes[k].to == to) {
                    if (found >= 0)
                        throw input_error("control pipe reference '" + ref + "' is ambiguous");
                    found = k;
                }
            if (found < 0) throw input_error("control references unknown pipe '" + ref + "'");
            if (jc.contains("compressor_ratio")) {
                s.edge_mu_lower[found] =
                    parse_profile(jc.at("compressor_ratio"), "control " + ref);
                s.graph.pipes[found].compressor_ratio =
                    s.edge_mu_lower[found].sample(0.0);
            }
            if (jc.contains("regulator_ratio")) {
                s.edge_mu_upper[found] =
                    parse_profile(jc.at("regulator_ratio"), "control " + ref);
                s.graph.pipes[found].regulator_ratio =
                    s.edge_mu_upper[found].sample(0.0);
            }
        }
        for (int k = 0; k < s.graph.edge_count(); ++k) {
            const std::string where =
                "control " + s.graph.pipes[k].from + "->" + s.graph.pipes[k].to;
            const auto lo = s.edge_mu_lower[k].range();
            const auto hi = s.edge_mu_upper[k].range();
            if (lo.first < 1.0 - 1e-12 || hi.first < 1.0 - 1e-12)
                throw input_error(where + ": control ratios must stay >= 1");
        }
    }

    // --- boundaries ----------------------------------------------------------
    const json& jb = doc.at("boundaries");
    if (!jb.is_object()) throw input_error("'boundaries' must map node ids to entries");
    s.boundary.assign(s.graph.node_count(), boundary_entry{});
    std::vector<char> have(s.graph.node_count(), 0);
    for (auto it = jb.begin(); it != jb.end(); ++it) {
        const std::string& id = it.key();
        const int j = s.graph.index_of(id);  // throws for unknown id
        const json& e = it.value();
        boundary_entry be;
        const node_role role = s.graph.nodes[j].role;
        switch (role) {
            case node_role::slack:
                detail::require_keys(e, {"pressure_mpa", "h2_fraction"}, "boundary " + id);
                if (!e.contains("pressure_mpa") || !e.contains("h2_fraction"))
                    throw input_error("slack node '" + id +
                                      "' needs 'pressure_mpa' and 'h2_fraction'");
                be.pressure_mpa = parse_profile(e.at("pressure_mpa"), "boundary " + id);
                be.h2_fraction = parse_profile(e.at("h2_fraction"), "boundary " + id);
                if (be.pressure_mpa.range().first <= 0.0)
                    throw input_error("slack node '" + id + "' pressure must stay positive");
                detail::check_range(be.h2_fraction, 0.0, 1.0,
                                    "boundary " + id + ": h2_fraction");
                break;
            case node_role::injection:
                detail::require_keys(e, {"inflow_kg_per_s", "h2_fraction"}, "boundary " + id);
                if (!e.contains("inflow_kg_per_s") || !e.contains("h2_fraction"))
                    throw input_error("injection node '" + id +
                                      "' needs 'inflow_kg_per_s' and 'h2_fraction'");
                be.flow_kg_per_s = parse_profile(e.at("inflow_kg_per_s"), "boundary " + id);
                be.h2_fraction = parse_profile(e.at("h2_fraction"), "boundary " + id);
                if (be.flow_kg_per_s.range().first < 0.0)
                    throw input_error("injection node '" + id + "' inflow must stay >= 0");
                detail::check_range(be.h2_fraction, 0.0, 1.0,
                                    "boundary " + id + ": h2_fraction");
                break;
            case node_role::withdrawal:
                detail::require_keys(e, {"outflow_kg_per_s", "outflow_flux_kg_per_m2_s"},
                                     "boundary " + id);
                if (e.contains("outflow_kg_per_s") == e.contains("outflow_flux_kg_per_m2_s"))
                    throw input_error("withdrawal node '" + id +
                                      "' needs exactly one of 'outflow_kg_per_s' or "
                                      "'outflow_flux_kg_per_m2_s'");
                if (e.contains("outflow_kg_per_s")) {
                    be.flow_kg_per_s = parse_profile(e.at("outflow_kg_per_s"), "boundary " + id);
                } else {
                    be.flow_kg_per_s =
                        parse_profile(e.at("outflow_flux_kg_per_m2_s"), "boundary " + id);
                    be.flow_is_flux = true;
                    if (s.graph.in_edges[j].size() != 1)
                        throw input_error(
                            "withdrawal node '" + id +
                            "': flux-form outflow requires exactly one incoming pipe");
                }
                if (be.flow_kg_per_s.range().first < 0.0)
                    throw input_error("withdrawal node '" + id + "' outflow must stay >= 0");
                break;
        }
        s.boundary[j] = std::move(be);
        have[j] = 1;
    }
    for (int j = 0; j < s.graph.node_count(); ++j)
        if (!have[j] && !s.graph.nodes[j].auxiliary)
            throw input_error("missing boundary entry for node '" + s.graph.nodes[j].id + "'");

    // --- simulation ----------------------------------------------------------
    const json& js = doc.at("simulation");
    detail::require_keys(js,
                         {"horizon_hr", "output_samples", "solver", "method",
                          "max_segment_km", "spectral_nodes", "rel_tol", "abs_tol",
                          "fixed_dt_s", "allow_reverse_flow"},
                         "simulation");
    if (!js.contains("horizon_hr")) throw input_error("simulation: missing 'horizon_hr'");
    s.horizon_hr = js.at("horizon_hr").get<double>();
    if (!(s.horizon_hr > 0.0)) throw input_error("simulation: horizon_hr must be positive");
    s.output_samples = js.value("output_samples", 10000);
    if (s.output_samples < 1) throw input_error("simulation: output_samples must be >= 1");
    solver_settings& st = s.settings;
    st.solver = js.value("solver", st.solver);
    if (st.solver != "fv" && st.solver != "spectral")
        throw input_error("simulation: solver must be 'fv' or 'spectral'");
    st.method = js.value("method", st.method);
    if (st.method != "trbdf2" && st.method != "rk4")
        throw input_error("simulation: method must be 'trbdf2' or 'rk4'");
    st.max_segment_km = js.value("max_segment_km", st.max_segment_km);
    if (!(st.max_segment_km > 0.0))
        throw input_error("simulation: max_segment_km must be positive");
    st.spectral_nodes = js.value("spectral_nodes", st.spectral_nodes);
    if (st.spectral_nodes < 2) throw input_error("simulation: spectral_nodes must be >= 2");
    st.rel_tol = js.value("rel_tol", st.rel_tol);
    st.abs_tol = js.value("abs_tol", st.abs_tol);
    if (!(st.rel_tol > 0.0) || !(st.abs_tol > 0.0))
        throw input_error("simulation: tolerances must be positive");
    st.fixed_dt_s = js.value("fixed_dt_s", st.fixed_dt_s);
    if (!(st.fixed_dt_s > 0.0)) throw input_error("simulation: fixed_dt_s must be positive");
    st.allow_reverse_flow = js.value("allow_reverse_flow", st.allow_reverse_flow);

    if (st.solver == "spectral") {
        if (s.graph.edge_count() != 1 || s.graph.node_count() != 2)
            throw input_error("spectral solver supports a single pipe only");
        if (s.graph.nodes[0].role != node_role::slack ||
            s.graph.nodes[1].role != node_role::withdrawal)
            throw input_error("spectral solver needs a slack inlet and a withdrawal outlet");
        if (!s.edge_mu_lower[0].is_constant() || s.edge_mu_lower[0].value != 1.0 ||
            !s.edge_mu_upper[0].is_constant() || s.edge_mu_upper[0].value != 1.0)
            throw input_error("spectral solver does not support control ratios");
    }
    return s;
}

/// Serializes a scenario back into its document form.  parse(serialize(s))
/// reproduces s exactly.
inline std::string serialize_scenario(const scenario& s) {
    json doc;
    doc["gas"] = {{"sigma1_m_per_s", s.gas.sigma1},
                  {"sigma2_m_per_s", s.gas.sigma2},
                  {"r1_mj_per_kg", s.gas.r1},
                  {"r2_mj_per_kg", s.gas.r2}};
    doc["nodes"] = json::array();
    for (const node& n : s.graph.nodes)
        doc["nodes"].push_back({{"id", n.id}, {"role", to_string(n.role)}});
    doc["pipes"] = json::array();
    for (const pipe& p : s.graph.pipes)
        doc["pipes"].push_back({{"from", p.from},
                                {"to", p.to},
                                {"length_km", p.length_km},
                                {"diameter_m", p.diameter_m},
                                {"friction", p.friction}});
    json controls = json::array();
    for (int k = 0; k < s.graph.edge_count(); ++k) {
        const bool lo_trivial =
            s.edge_mu_lower[k].is_constant() && s.edge_mu_lower[k].value == 1.0;
        const bool hi_trivial =
            s.edge_mu_upper[k].is_constant() && s.edge_mu_upper[k].value == 1.0;
        if (lo_trivial && hi_trivial) continue;
        json jc{{"pipe", s.graph.pipes[k].from + "->" + s.graph.pipes[k].to}};
        if (!lo_trivial) jc["compressor_ratio"] = profile_to_json(s.edge_mu_lower[k]);
        if (!hi_trivial) jc["regulator_ratio"] = profile_to_json(s.edge_mu_upper[k]);
        controls.push_back(jc);
    }
    if (!controls.empty()) doc["controls"] = controls;
    json jb = json::object();
    for (int j = 0; j < s.graph.node_count(); ++j) {
        if (s.graph.nodes[j].auxiliary) continue;
        const boundary_entry& be = s.boundary[j];
        json e;
        switch (s.graph.nodes[j].role) {
            case node_role::slack:
                e["pressure_mpa"] = profile_to_json(be.pressure_mpa);
                e["h2_fraction"] = profile_to_json(be.h2_fraction);
                break;
            case node_role::injection:
                e["inflow_kg_per_s"] = profile_to_json(be.flow_kg_per_s);
                e["h2_fraction"] = profile_to_json(be.h2_fraction);
                break;
            case node_role::withdrawal:
                e[be.flow_is_flux ? "outflow_flux_kg_per_m2_s" : "outflow_kg_per_s"] =
                    profile_to_json(be.flow_kg_per_s);
                break;
        }
        jb[s.graph.nodes[j].id] = e;
    }
    doc["boundaries"] = jb;
    doc["simulation"] = {{"horizon_hr", s.horizon_hr},
                         {"output_samples", s.output_samples},
                         {"solver", s.settings.solver},
                         {"method", s.settings.method},
                         {"max_segment_km", s.settings.max_segment_km},
                         {"spectral_nodes", s.settings.spectral_nodes},
                         {"rel_tol", s.settings.rel_tol},
                         {"abs_tol", s.settings.abs_tol},
                         {"fixed_dt_s", s.settings.fixed_dt_s},
                         {"allow_reverse_flow", s.settings.allow_reverse_flow}};
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Preparation and boundary sampling
// ---------------------------------------------------------------------------

/// Refines the network per the solver settings and maps all boundary and
/// control profiles onto the refined graph.
inline prepared_scenario prepare(const scenario& s) {
    prepared_scenario ps;
    ps.gas = s.gas;
    ps.settings = s.settings;
    ps.horizon_hr = s.horizon_hr;
    ps.output_samples = s.output_samples;
    ps.fine = (s.settings.solver == "fv") ? refine(s.graph, s.settings.max_segment_km)
                                          : s.graph;

    const int Vs = ps.fine.n_slack;
    const int Vd = ps.fine.non_slack_count();
    ps.slack_pressure_mpa.assign(Vs, profile::constant(0.0));
    ps.slack_h2.assign(Vs, profile::constant(0.0));
    ps.demand_flow.assign(Vd, profile::constant(0.0));
    ps.injection_h2.assign(Vd, profile::constant(0.0));

    for (int j = 0; j < s.graph.node_count(); ++j) {
        const node& n = s.graph.nodes[j];
        const boundary_entry& be = s.boundary[j];
        const int fj = ps.fine.index_of(n.id);  // refinement preserves original ids
        switch (n.role) {
            case node_role::slack:
                ps.slack_pressure_mpa[fj] = be.pressure_mpa;
                ps.slack_h2[fj] = be.h2_fraction;
                break;
            case node_role::injection:
                ps.demand_flow[ps.fine.demand_index(fj)] = be.flow_kg_per_s;
                ps.injection_h2[ps.fine.demand_index(fj)] = be.h2_fraction;
                break;
            case node_role::withdrawal: {
                profile w = be.flow_kg_per_s;
                if (be.flow_is_flux) w = w.scaled(s.graph.pipes[s.graph.in_edges[j][0]].area());
                ps.demand_flow[ps.fine.demand_index(fj)] = w;
                break;
            }
        }
    }

    const int E = ps.fine.edge_count();
    ps.edge_mu_lower.assign(E, profile::constant(1.0));
    ps.edge_mu_upper.assign(E, profile::constant(1.0));
    ps.controls_constant = true;
    for (int k = 0; k < E; ++k) {
        const int pk = ps.fine.parent_edge[k];
        if (ps.fine.first_segment[k]) ps.edge_mu_lower[k] = s.edge_mu_lower[pk];
        if (ps.fine.last_segment[k]) ps.edge_mu_upper[k] = s.edge_mu_upper[pk];
        if (!ps.edge_mu_lower[k].is_constant() || !ps.edge_mu_upper[k].is_constant())
            ps.controls_constant = false;
    }
    return ps;
}

/// Samples every boundary and control profile at time t (hours), converting
/// to SI units.  Demands are signed: positive for withdrawals, negative for
/// injections.  Throws input_error for t outside [0, horizon].
inline boundary_values sample_boundary(const prepared_scenario& ps, double t_hr) {
    if (t_hr < -1e-12 || t_hr > ps.horizon_hr * (1.0 + 1e-12))
        throw input_error("sample time " + format_double(t_hr) + " outside [0, " +
                          format_double(ps.horizon_hr) + "] hr");
    boundary_values b;
    const int Vs = ps.fine.n_slack;
    const int Vd = ps.fine.non_slack_count();
    b.slack_pressure_pa.resize(Vs);
    b.slack_h2.resize(Vs);
    for (int i = 0; i < Vs; ++i) {
        b.slack_pressure_pa[i] = ps.slack_pressure_mpa[i].sample(t_hr) * kPaPerMPa;
        b.slack_h2[i] = ps.slack_h2[i].sample(t_hr);
    }
    b.demand.resize(Vd);
    b.injection_h2.resize(Vd);
    for (int j = 0; j < Vd; ++j) {
        const double flow = ps.demand_flow[j].sample(t_hr);
        const bool is_injection =
            ps.fine.nodes[Vs + j].role == node_role::injection;
        b.demand[j] = is_injection ? -flow : flow;
        b.injection_h2[j] = is_injection ? ps.injection_h2[j].sample(t_hr) : 0.0;
    }
    const int E = ps.fine.edge_count();
    b.mu_lower.resize(E);
    b.mu_upper.resize(E);
    for (int k = 0; k < E; ++k) {
        b.mu_lower[k] = ps.edge_mu_lower[k].sample(t_hr);
        b.mu_upper[k] = ps.edge_mu_upper[k].sample(t_hr);
    }
    return b;
}

}  // namespace pipeflow
