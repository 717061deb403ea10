/// @file cli.hpp
/// @brief Command-line front end: steady states, transient simulations,
///        outlet spectra, crossing reports, and interface sweeps, all driven
///        by scenario/sweep JSON files.  Every command writes its CSV
///        artifacts plus a manifest.json into the output directory.
///
/// Exit codes: 0 success, 1 numerical failure, 2 invalid input.

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeflow/analysis.hpp"
#include "pipeflow/cache.hpp"
#include "pipeflow/common.hpp"
#include "pipeflow/csv.hpp"
#include "pipeflow/fv.hpp"
#include "pipeflow/scenario.hpp"
#include "pipeflow/simulate.hpp"
#include "pipeflow/spectral.hpp"

namespace pipeflow {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline scenario load_scenario(const std::string& path, const std::string& solver_override) {
    scenario sc = parse_scenario(read_file(path));
    if (!solver_override.empty()) {
        sc.settings.solver = solver_override;
        // Re-validate through the canonical round trip so an override to the
        // single-pipe solver on a network still fails fast.
        sc = parse_scenario(serialize_scenario(sc));
    }
    return sc;
}

/// Parsed sweep description (the `interface` command input file).
struct sweep_spec {
    std::string kind;
    scenario tmpl;
    double omega_min = 0.0, omega_max = 0.0;
    int omega_count = 0;
    double kappa_min = 0.0, kappa_max = 0.0;
    int kappa_count = 0;
    quantity mi_quantity = quantity::p_mpa;
    std::vector<double> outflows_kg_s;
    std::string crossing_node;
    double initial_flow_2_kg_s = 0.0;
    double threshold = 0.3;
};

inline void parse_grid(const nlohmann::json& j, const char* name, double& lo, double& hi,
                       int& count) {
    if (!j.is_object()) throw input_error(std::string(name) + ": expected an object");
    require_keys(j, {"min", "max", "count"}, name);
    lo = j.at("min").get<double>();
    hi = j.at("max").get<double>();
    count = j.at("count").get<int>();
    if (count < 1) throw input_error(std::string(name) + ".count must be >= 1");
    if (hi < lo) throw input_error(std::string(name) + ".max must be >= min");
}

inline sweep_spec load_sweep(const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw input_error("sweep file '" + path + "' is not a JSON object");
    require_keys(doc,
                 {"kind", "scenario", "scenario_path", "omega", "kappa", "quantity",
                  "outflows_kg_per_s", "crossing_node", "initial_flow_2_kg_per_s",
                  "threshold"},
                 "sweep");
    sweep_spec sw;
    sw.kind = doc.at("kind").get<std::string>();
    if (sw.kind != "mi" && sw.kind != "pi" && sw.kind != "ci")
        throw input_error("sweep kind must be one of mi, pi, ci");

    if (doc.contains("scenario") == doc.contains("scenario_path"))
        throw input_error("sweep needs exactly one of 'scenario' or 'scenario_path'");
    if (doc.contains("scenario")) {
        sw.tmpl = parse_scenario(doc.at("scenario").dump());
    } else {
        const std::filesystem::path base = std::filesystem::path(path).parent_path();
        const std::string rel = doc.at("scenario_path").get<std::string>();
        sw.tmpl = parse_scenario(read_file((base / rel).string()));
    }

    parse_grid(doc.at("omega"), "omega", sw.omega_min, sw.omega_max, sw.omega_count);
    parse_grid(doc.at("kappa"), "kappa", sw.kappa_min, sw.kappa_max, sw.kappa_count);
    if (doc.contains("quantity"))
        sw.mi_quantity = quantity_from_string(doc.at("quantity").get<std::string>());
    if (doc.contains("outflows_kg_per_s"))
        sw.outflows_kg_s = doc.at("outflows_kg_per_s").get<std::vector<double>>();
    if (doc.contains("crossing_node"))
        sw.crossing_node = doc.at("crossing_node").get<std::string>();
    if (doc.contains("initial_flow_2_kg_per_s"))
        sw.initial_flow_2_kg_s = doc.at("initial_flow_2_kg_per_s").get<double>();
    if (doc.contains("threshold")) sw.threshold = doc.at("threshold").get<double>();

    if (sw.kind == "mi" && sw.outflows_kg_s.size() < 2)
        throw input_error("mi sweep needs 'outflows_kg_per_s' with at least two values");
    if (sw.kind == "ci" && !(sw.initial_flow_2_kg_s > 0.0))
        throw input_error("ci sweep needs a positive 'initial_flow_2_kg_per_s'");
    return sw;
}

/// The single withdrawal node, used as the default observation point.
inline std::string default_outlet(const scenario& sc) {
    return single_node_of_role(sc, node_role::withdrawal, "withdrawal node");
}

inline void write_manifest(const std::string& out_dir, const nlohmann::json& manifest) {
    std::ofstream out(std::filesystem::path(out_dir) / "manifest.json", std::ios::trunc);
    if (!out) throw input_error("cannot write manifest in '" + out_dir + "'");
    out << manifest.dump(2) << "\n";
}

}  // namespace detail

/// Runs the command line given program arguments (without argv[0]).
inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Transient two-gas pipeline network simulator and response analyzer"};
    app.require_subcommand(1);

    std::string scenario_path, other_path, out_dir = ".", solver, node, grid_spec,
                cache_dir;
    int workers = 1;
    double threshold = -1.0;
    bool include_auxiliary = false, all_nodes = false;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario = true) {
        if (needs_scenario)
            cmd->add_option("--scenario", scenario_path, "input file")->required();
        cmd->add_option("--out", out_dir, "output directory (default: current)");
        return cmd;
    };

    CLI::App* c_steady = add_common(app.add_subcommand("steady", "solve the steady state"));
    c_steady->add_option("--solver", solver, "fv or spectral");

    CLI::App* c_sim = add_common(app.add_subcommand("simulate", "run a transient simulation"));
    c_sim->add_option("--solver", solver, "fv or spectral");
    c_sim->add_flag("--include-auxiliary", include_auxiliary,
                    "also report refinement nodes");

    CLI::App* c_spec = add_common(
        app.add_subcommand("spectrum", "tail spectrum of a node's pressure"));
    c_spec->add_option("--solver", solver, "fv or spectral");
    c_spec->add_option("--node", node, "observation node (default: the withdrawal node)");

    CLI::App* c_cross = add_common(
        app.add_subcommand("crossings", "crossing report between two scenarios"));
    c_cross->add_option("--other", other_path, "second scenario file")->required();
    c_cross->add_option("--solver", solver, "fv or spectral");
    c_cross->add_flag("--all-nodes", all_nodes, "check every node (default: outlet only)");

    CLI::App* c_iface =
        add_common(app.add_subcommand("interface", "parameter-plane interface sweep"));
    c_iface->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    c_iface->add_option("--threshold", threshold, "periodicity threshold override");
    c_iface->add_option("--grid", grid_spec, "grid override, e.g. 5x9 (omega x kappa)");
    c_iface->add_option("--cache", cache_dir,
                        "per-point cache directory (default: PIPEFLOW_CACHE_DIR)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const auto t_start = std::chrono::steady_clock::now();
    try {
        std::filesystem::create_directories(out_dir);
        nlohmann::json manifest;
        manifest["version"] = kVersion;
        std::vector<std::string> outputs;

        if (*c_steady) {
            manifest["command"] = "steady";
            scenario sc = detail::load_scenario(scenario_path, solver);
            manifest["scenario_hash"] = hex64(fnv1a64(serialize_scenario(sc)));
            prepared_scenario ps = prepare(sc);
            std::vector<steady_row> rows;
            auto add_row = [&](const std::string& id, double r1, double r2) {
                const double rho = r1 + r2;
                const double p = ps.gas.sigma1 * ps.gas.sigma1 * r1 +
                                 ps.gas.sigma2 * ps.gas.sigma2 * r2;
                rows.push_back({id, p / kPaPerMPa, rho, r1, r2, rho != 0.0 ? r2 / rho : 0.0});
            };
            if (ps.settings.solver == "spectral") {
                spectral_system sys(ps, ps.settings.spectral_nodes);
                const boundary_values b = sys.boundary_at(0.0);
                const auto f = sys.reconstruct(b, sys.steady_init());
                std::vector<std::pair<int, int>> order = {{ps.fine.input_position[0], 0},
                                                          {ps.fine.input_position[1], 1}};
                std::sort(order.begin(), order.end());
                for (auto& [pos, j] : order) {
                    const int gi = j < ps.fine.n_slack ? 0 : sys.nodes();
                    add_row(ps.fine.nodes[j].id, f.rho1[gi], f.rho2[gi]);
                }
            } else {
                fv_system sys(ps);
                const vec y = steady_state(sys);
                const boundary_values b = sys.boundary_at(0.0);
                const network_graph& g = sys.graph();
                std::vector<std::pair<int, int>> order;
                for (int j = 0; j < g.node_count(); ++j)
                    if (!g.nodes[j].auxiliary) order.emplace_back(g.input_position[j], j);
                std::sort(order.begin(), order.end());
                for (auto& [pos, j] : order) {
                    if (j < g.n_slack) {
                        const double rho_s =
                            b.slack_pressure_pa[j] / ps.gas.c2(b.slack_h2[j]);
                        add_row(g.nodes[j].id, (1.0 - b.slack_h2[j]) * rho_s,
                                b.slack_h2[j] * rho_s);
                    } else {
                        add_row(g.nodes[j].id, y[g.demand_index(j)],
                                y[sys.demand_count() + g.demand_index(j)]);
                    }
                }
            }
            const std::string file = (std::filesystem::path(out_dir) / "steady.csv").string();
            write_steady_csv(file, rows);
            outputs.push_back(file);
            std::cout << "wrote " << file << " (" << rows.size() << " nodes)\n";
        } else if (*c_sim) {
            manifest["command"] = "simulate";
            scenario sc = detail::load_scenario(scenario_path, solver);
            manifest["scenario_hash"] = hex64(fnv1a64(serialize_scenario(sc)));
            sim_options o;
            o.include_auxiliary = include_auxiliary;
            const sim_result r = run_simulation(sc, o);
            const std::string file = (std::filesystem::path(out_dir) / "series.csv").string();
            write_series_csv(file, r);
            outputs.push_back(file);
            manifest["extras"] = {{"steps", r.stats.steps},
                                  {"rejected_steps", r.stats.rejected},
                                  {"jacobians", r.stats.jacobians},
                                  {"max_density_jump", r.max_density_jump},
                                  {"min_edge_flux", r.min_edge_flux}};
            std::cout << "wrote " << file << " (" << r.t_hr.size() << " samples x "
                      << r.node_ids.size() << " nodes)\n";
        } else if (*c_spec) {
            manifest["command"] = "spectrum";
            scenario sc = detail::load_scenario(scenario_path, solver);
            manifest["scenario_hash"] = hex64(fnv1a64(serialize_scenario(sc)));
            const std::string target = node.empty() ? detail::default_outlet(sc) : node;
            const sim_result r = run_simulation(sc);
            const spectrum sp =
                outlet_spectrum(r.p_mpa.col(r.column_of(target)), sc.horizon_hr);
            const std::string file =
                (std::filesystem::path(out_dir) / "spectrum.csv").string();
            write_spectrum_csv(file, sp);
            outputs.push_back(file);
            manifest["extras"] = {{"node", target}, {"measure", sp.measure}};
            std::cout << "wrote " << file << " (node " << target
                      << ", periodicity measure " << format_double(sp.measure) << ")\n";
        } else if (*c_cross) {
            manifest["command"] = "crossings";
            scenario sc_a = detail::load_scenario(scenario_path, solver);
            scenario sc_b = detail::load_scenario(other_path, solver);
            manifest["scenario_hash"] = hex64(fnv1a64(serialize_scenario(sc_a) + "\n" +
                                                      serialize_scenario(sc_b)));
            const sim_result a = run_simulation(sc_a);
            const sim_result b = run_simulation(sc_b);
            if (a.node_ids != b.node_ids || a.t_hr != b.t_hr)
                throw input_error("crossing report needs both scenarios on the same "
                                  "network and time grid");
            std::vector<std::string> targets =
                all_nodes ? a.node_ids
                          : std::vector<std::string>{detail::default_outlet(sc_a)};
            std::vector<crossing_row> rows;
            for (const std::string& id : targets) {
                const int col = a.column_of(id);
                for (quantity q : all_quantities())
                    for (const crossing_event& ev :
                         detect_crossings(a.t_hr, a.series(q).col(col), b.series(q).col(col)))
                        rows.push_back({id, to_string(q), ev.t_hr});
            }
            const std::string file =
                (std::filesystem::path(out_dir) / "crossings.csv").string();
            write_crossings_csv(file, rows);
            outputs.push_back(file);
            manifest["extras"] = {{"crossings", rows.size()}};
            std::cout << "wrote " << file << " (" << rows.size() << " crossings)\n";
        } else if (*c_iface) {
            manifest["command"] = "interface";
            const detail::sweep_spec sw = detail::load_sweep(scenario_path);
            manifest["scenario_hash"] = hex64(fnv1a64(detail::read_file(scenario_path)));
            sweep_config cfg;
            int n_omega = sw.omega_count, n_kappa = sw.kappa_count;
            if (!grid_spec.empty()) {
                const auto x = grid_spec.find('x');
                if (x == std::string::npos)
                    throw input_error("--grid expects OMEGAxKAPPA, e.g. 5x9");
                n_omega = std::stoi(grid_spec.substr(0, x));
                n_kappa = std::stoi(grid_spec.substr(x + 1));
                if (n_omega < 1 || n_kappa < 1) throw input_error("--grid counts must be >= 1");
            }
            cfg.omegas = uniform_grid(sw.omega_min, sw.omega_max, n_omega);
            cfg.kappas = uniform_grid(sw.kappa_min, sw.kappa_max, n_kappa);
            cfg.workers = workers;
            cfg.threshold = threshold >= 0.0 ? threshold : sw.threshold;
            cfg.cache_dir = cache_dir;
            cfg.crossing_node = sw.crossing_node;

            interface_curve curve;
            if (sw.kind == "mi")
                curve = monotonic_interface(sw.tmpl, sw.mi_quantity, sw.outflows_kg_s, cfg);
            else if (sw.kind == "pi")
                curve = periodic_interface(sw.tmpl, cfg);
            else
                curve = chaotic_interface(sw.tmpl, sw.initial_flow_2_kg_s, cfg);

            const std::string file =
                (std::filesystem::path(out_dir) / "interface.csv").string();
            write_interface_csv(file, curve);
            outputs.push_back(file);
            nlohmann::json failures = nlohmann::json::array();
            for (const interface_point& pt : curve.points)
                if (pt.failed) failures.push_back({{"omega", pt.omega}, {"error", pt.error}});
            manifest["extras"] = {{"kind", curve.kind},
                                  {"points", curve.points.size()},
                                  {"failed_points", failures}};
            std::cout << "wrote " << file << " (" << curve.points.size() << " points, "
                      << failures.size() << " failed)\n";
        }

        manifest["outputs"] = outputs;
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                .count();
        detail::write_manifest(out_dir, manifest);
        return 0;
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pipeflow
