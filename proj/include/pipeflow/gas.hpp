/// @file gas.hpp
/// @brief Two-gas mixture algebra: wave speeds, equation of state, and
///        conversions among partial densities, pressure, mass fraction,
///        volumetric fraction, and delivered energy flow.
///
/// Constituent 1 is natural gas, constituent 2 is hydrogen.  The equation of
/// state is isothermal-ideal per constituent: p = sigma1^2*rho1 + sigma2^2*rho2,
/// so the local mixture sound speed satisfies sigma^2 = sigma1^2*eta1 + sigma2^2*eta2
/// with eta the mass fractions.  Pressures are in Pa internally; MPa appears
/// only at I/O boundaries.
#pragma once

#include <cmath>
#include <string>

#include "pipeflow/common.hpp"

namespace pipeflow {

/// Physical constants of the two transported gases.
struct gas_pair {
    double sigma1 = 377.0;   ///< natural gas isothermal sound speed, m/s
    double sigma2 = 1055.6;  ///< hydrogen isothermal sound speed, m/s
    double r1 = 44.2;        ///< natural gas calorific value, MJ/kg
    double r2 = 141.8;       ///< hydrogen calorific value, MJ/kg

    void validate() const {
        if (!(sigma1 > 0.0) || !(sigma2 > sigma1))
            throw input_error("gas_pair: require sigma2 > sigma1 > 0");
        if (!(r1 > 0.0) || !(r2 > 0.0))
            throw input_error("gas_pair: calorific values must be positive");
    }

    /// Squared mixture sound speed at hydrogen mass fraction eta2.
    double c2(double eta2) const {
        return sigma1 * sigma1 * (1.0 - eta2) + sigma2 * sigma2 * eta2;
    }
};

/// A mixture state at one location together with all derived equivalents.
struct mixture_sample {
    double rho1 = 0.0;  ///< natural gas partial density, kg/m^3
    double rho2 = 0.0;  ///< hydrogen partial density, kg/m^3
    double rho = 0.0;   ///< total density, kg/m^3
    double p = 0.0;     ///< total pressure, Pa
    double eta2 = 0.0;  ///< hydrogen mass fraction
    double nu2 = 0.0;   ///< hydrogen volumetric (partial-pressure) fraction
    double sigma = 0.0; ///< local mixture sound speed, m/s
};

/// Mixture sound speed as a function of hydrogen mass fraction.
inline double mixture_wave_speed(double eta2, const gas_pair& gas) {
    if (!(eta2 >= 0.0 && eta2 <= 1.0))
        throw input_error("mixture_wave_speed: eta2 outside [0,1]: " + format_double(eta2));
    return std::sqrt(gas.c2(eta2));
}

/// All equivalent variables from the fundamental partial densities.
inline mixture_sample partials_to_equivalents(double rho1, double rho2, const gas_pair& gas) {
    if (!(rho1 >= 0.0) || !(rho2 >= 0.0))
        throw input_error("partials_to_equivalents: negative partial density");
    if (rho1 + rho2 <= 0.0)
        throw input_error("partials_to_equivalents: both partial densities zero");
    mixture_sample m;
    m.rho1 = rho1;
    m.rho2 = rho2;
    m.rho = rho1 + rho2;
    m.p = gas.sigma1 * gas.sigma1 * rho1 + gas.sigma2 * gas.sigma2 * rho2;
    m.eta2 = rho2 / m.rho;
    m.nu2 = gas.sigma2 * gas.sigma2 * rho2 / m.p;
    m.sigma = std::sqrt(m.p / m.rho);
    return m;
}

/// Inverse map: recover partial densities from total pressure and hydrogen
/// mass fraction.
inline void partials_from_pressure_eta(double p, double eta2, const gas_pair& gas,
                                       double& rho1, double& rho2) {
    if (!(p > 0.0)) throw input_error("partials_from_pressure_eta: nonpositive pressure");
    if (!(eta2 >= 0.0 && eta2 <= 1.0))
        throw input_error("partials_from_pressure_eta: eta2 outside [0,1]");
    const double rho = p / gas.c2(eta2);
    rho1 = (1.0 - eta2) * rho;
    rho2 = eta2 * rho;
}

/// Volumetric fraction from mass fraction.
inline double eta_to_nu(double eta2, const gas_pair& gas) {
    const double s1 = gas.sigma1 * gas.sigma1, s2 = gas.sigma2 * gas.sigma2;
    return s2 * eta2 / (s1 * (1.0 - eta2) + s2 * eta2);
}

/// Delivered energy flow at one node, GJ/s: (mass inflow through incident
/// edges, kg/s) x (calorific value of the local mixture, MJ/kg) / 1000.
inline double nodal_energy(double mass_inflow_kg_s, double eta2, const gas_pair& gas) {
    return mass_inflow_kg_s * (gas.r1 * (1.0 - eta2) + gas.r2 * eta2) / 1000.0;
}

}  // namespace pipeflow
