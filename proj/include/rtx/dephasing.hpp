#pragma once

#include <string>

#include "rtx/config.hpp"

namespace rtx {

// All C6 / C3 arguments here are angular (rad/s m^6, rad/s m^3).
double blockade_radius(double C6_33, double gamma_pump);
double c6_for_blockade_radius(double R_B, double gamma_pump);

// 4 pi C6^2 rho n / (9 R_B^9)
double level_shift_variance(double C6, double rho_pop, double n_at, double R_B);

double gamma51_of_photon_number(double N_bar, double gamma0);

// Closed form 4 pi C3^2 |P41 P51*| n / (3 rho11 R_B^3). With
// include_w_limit the upper integration limit w is kept, which multiplies the
// closed form by 1 - (R_B/w)^3.
double dde_variance(double C3, double P41_P51, double rho11, double n_at, double R_B, double w,
                    bool include_w_limit = false);

struct MotionalCoherence {
    double u = 0;       // m/s
    double tau_sw = 0;  // s
};

MotionalCoherence motional_coherence(double T, double lambda_sw, double mass = phys.m_Rb87);

enum class BeamGeometry { copropagating, counterpropagating };

// 2 pi / |k_P -+ k_A|; +infinity when the mismatch vanishes.
double spin_wave_wavelength(double k_P, double k_A, BeamGeometry g = BeamGeometry::copropagating);

struct DephasingBudget {
    double var_33 = 0, var_35 = 0, var_55 = 0, var_45 = 0;  // (rad/s)^2
    double gamma0 = 0;         // rad/s
    double N_bar = 0;
    double gamma51 = 0;        // sqrt(N_bar) gamma0
    double R_B = 0;            // m
    double rho33 = 0;          // population used in the variances
    double P41_P51 = 0;        // few-photon estimate entering var_45
    double tau_sw = 0, lambda_sw = 0, u = 0;
    bool coefficients_cyclic = true;
    std::string rho33_source;  // "cpt" or "ensemble"

    double gamma51_at(double N) const { return gamma51_of_photon_number(N, gamma0); }
};

DephasingBudget dephasing_budget(const TransducerConfig& cfg);

// Stored-amplitude factor from thermal motion, exp(-t^2 / (2 tau_sw^2)).
double motional_amplitude_factor(double t, double tau_sw);

}  // namespace rtx
