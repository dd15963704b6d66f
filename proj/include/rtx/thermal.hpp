#pragma once

#include <functional>
#include <vector>

#include "rtx/config.hpp"

namespace rtx {

struct ThermalScenario {
    double nu = 0;         // Hz
    double T_env = 0;      // K
    double B = 0;          // Hz
    double tau_int = 0;    // s
    double r_med = 0, L = 0;
    double A = 0;          // m^2
    double theta_min = 0;  // rad
    double eta_max = 0;
};

// Fills A and theta_min from the geometry. Throws std::invalid_argument when
// 2 r >= L or a length is not positive.
ThermalScenario make_scenario(double nu, double T_env, double B, double tau_int, double r_med,
                              double L, double eta_max);
ThermalScenario thermal_scenario(const TransducerConfig& cfg);

struct Occupation {
    double n = 0;
    bool zero_temperature = false;
};

// Bose factor 1/(exp(h nu / kT) - 1); T <= 0 gives the limit 0, flagged.
Occupation occupation(double nu, double T);
double mean_occupation(double nu, double T);

// Narrowband form (2 nu^2 nbar / c^2) pi A B, or the band integral of the
// same integrand over [nu - B/2, nu + B/2].
double thermal_flux(const ThermalScenario& s, bool narrowband = true);

// Phi tau / 2: one circular polarization is converted.
double stored_thermal_photons(double Phi, double tau_int);

using LengthEfficiency = std::function<double(double)>;

// max(0, 1 - (1 - eta_max) L / l): optimal-storage law with the OD scaled by
// l / L and normalized so that eta(L) = eta_max.
LengthEfficiency length_efficiency(const ThermalScenario& s);

struct QuadratureError : std::runtime_error {
    QuadratureError(const std::string& what, double estimate, double error, int levels);
    double estimate, error;
    int levels;
};

struct NoiseCount {
    double n_th = 0;
    double bulk = 0, cap = 0;
    double N_stored = 0;
    double error = 0;  // quadrature error estimate
};

// Bulk integral of eta(l(theta)) N sin(theta)/2 over [theta_min, pi - theta_min]
// with l = 2r / sin(theta), plus the paraxial cap
// 2 eta_max N (1 - cos theta_min) / (4 pi). The bulk uses the mirror
// symmetry about pi/2 and a logarithmic variable near theta_min.
NoiseCount converted_noise_count(const ThermalScenario& s, const LengthEfficiency& eta,
                                 double rel_tol = 1e-4);
NoiseCount converted_noise_count(const ThermalScenario& s);

// Integral of w(theta) sin(theta)/2 over [0, pi] with the same rule as the
// bulk term; returns 1 for w = 1.
double hemisphere_measure(const std::function<double(double)>& w);

struct TemperaturePoint {
    double T = 0, n_th = 0;
};

// n_th(T) = n_th(T_env) nbar(T) / nbar(T_env).
std::vector<TemperaturePoint> noise_count_vs_temperature(const ThermalScenario& s,
                                                         const std::vector<double>& T_grid);

struct NoiseEquivalentTemperature {
    double T = 0;
    bool flagged = false;  // n_st >= n_th(T_env): T >= T_env
};

// Solves n_th_ref nbar(T)/nbar(T_env) = n_st by bisection on the exact Bose
// factor. Throws std::domain_error for n_st <= 0 or n_th_ref <= 0.
NoiseEquivalentTemperature noise_equivalent_temperature(double n_th_ref, double n_st,
                                                        const ThermalScenario& s);

struct NoiseBudget {
    double n_occ = 0, Phi = 0, N_stored = 0, n_th = 0, n_st = 0, T_NE = 0;
    double nu = 0, T_env = 0;
    bool T_NE_flagged = false;
};

NoiseBudget noise_budget(const TransducerConfig& cfg);

}  // namespace rtx
