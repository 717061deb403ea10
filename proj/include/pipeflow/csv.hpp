/// @file csv.hpp
/// @brief CSV emission for all artifact types: sampled time series, steady
///        states, spectra, interface curves, and crossing reports.  Numbers
///        are written in shortest round-trip form so outputs are
///        byte-reproducible across runs and worker counts.

#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "pipeflow/analysis.hpp"
#include "pipeflow/common.hpp"
#include "pipeflow/simulate.hpp"

namespace pipeflow {

namespace detail {

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw input_error("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace detail

/// Time series: t_hr plus one column per node and quantity, node-major.
inline void write_series_csv(std::ostream& out, const sim_result& r) {
    out << "t_hr";
    for (const std::string& node : r.node_ids)
        for (quantity q : all_quantities()) out << "," << node << "." << to_string(q);
    out << "\n";
    for (std::size_t k = 0; k < r.t_hr.size(); ++k) {
        out << format_double(r.t_hr[k]);
        for (std::size_t c = 0; c < r.node_ids.size(); ++c)
            for (quantity q : all_quantities())
                out << "," << format_double(r.series(q)(k, c));
        out << "\n";
    }
}

inline void write_series_csv(const std::string& path, const sim_result& r) {
    auto out = detail::open_csv(path);
    write_series_csv(out, r);
}

/// Steady state: one row per node.
struct steady_row {
    std::string node;
    double p_mpa, rho, rho1, rho2, eta2;
};

inline void write_steady_csv(std::ostream& out, const std::vector<steady_row>& rows) {
    out << "node,p_mpa,rho,rho1,rho2,eta2\n";
    for (const steady_row& r : rows)
        out << r.node << "," << format_double(r.p_mpa) << "," << format_double(r.rho)
            << "," << format_double(r.rho1) << "," << format_double(r.rho2) << ","
            << format_double(r.eta2) << "\n";
}

inline void write_steady_csv(const std::string& path, const std::vector<steady_row>& rows) {
    auto out = detail::open_csv(path);
    write_steady_csv(out, rows);
}

/// Spectrum: bin frequency, complex value, modulus.
inline void write_spectrum_csv(std::ostream& out, const spectrum& sp) {
    out << "omega_cyc_hr,re,im,modulus\n";
    for (std::size_t n = 0; n < sp.value.size(); ++n)
        out << format_double(sp.omega_cyc_hr[n]) << "," << format_double(sp.value[n].real())
            << "," << format_double(sp.value[n].imag()) << ","
            << format_double(std::abs(sp.value[n])) << "\n";
}

inline void write_spectrum_csv(const std::string& path, const spectrum& sp) {
    auto out = detail::open_csv(path);
    write_spectrum_csv(out, sp);
}

/// Interface curve: one row per forcing frequency.
inline void write_interface_csv(std::ostream& out, const interface_curve& c) {
    out << "omega_star,kappa_star,kind,threshold\n";
    for (const interface_point& pt : c.points)
        out << format_double(pt.omega) << "," << format_double(pt.kappa_star) << ","
            << c.kind << "," << format_double(c.threshold) << "\n";
}

inline void write_interface_csv(const std::string& path, const interface_curve& c) {
    auto out = detail::open_csv(path);
    write_interface_csv(out, c);
}

/// Crossing report rows.
struct crossing_row {
    std::string node;
    std::string quantity_name;
    double t_hr;
};

inline void write_crossings_csv(std::ostream& out, const std::vector<crossing_row>& rows) {
    out << "node,quantity,t_hr\n";
    for (const crossing_row& r : rows)
        out << r.node << "," << r.quantity_name << "," << format_double(r.t_hr) << "\n";
}

inline void write_crossings_csv(const std::string& path,
                                const std::vector<crossing_row>& rows) {
    auto out = detail::open_csv(path);
    write_crossings_csv(out, rows);
}

}  // namespace pipeflow
