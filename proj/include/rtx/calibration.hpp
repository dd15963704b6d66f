#pragma once

#include <Eigen/Dense>
#include <functional>

#include "rtx/config.hpp"

namespace rtx {

struct MixerCalibration {
    double amplitude = 1.0;  // rad/s at the response peak
    double center = 0.2;     // V
    double width = 0.072;    // V
    double floor = 0.0;      // rad/s
    double u_min = 0.0, u_max = 0.2;  // calibrated IF range, V
};

MixerCalibration mixer_calibration(const TransducerConfig& cfg);

// Gaussian IF-voltage response. Sets *extrapolated when U is outside the
// calibrated range (the value is still returned).
double mixer_output(double U, const MixerCalibration& cal, bool* extrapolated = nullptr);

// 0 -> peak -> 0 over `duration`, centred on t = 0.
Eigen::VectorXd triangular_if(const Eigen::VectorXd& t, double peak, double duration);

// I = eps0 c (hbar Omega / mu)^2 / 2, mu in e a0.
double microwave_intensity(double rabi, double mu_ea0);

double input_photon_number(const Eigen::VectorXd& t, const Eigen::VectorXcd& omega_M, double S_M, double mu_ea0,
                           double carrier_hz);

// Peak Rabi frequency of a Gaussian pulse (intensity FWHM T_p) carrying N_bar
// photons through S_M.
double omega_for_photon_number(double N_bar, double T_p, double S_M, const TransducerConfig& cfg);

struct GeometryInputs {
    double L = 0.02;
    double w_A = 0.0;            // 0: 2L/3
    double profile_center = -1;  // <0: L/2
    double d_L = 122;
    double Gamma2 = 0;           // rad/s
    double omega_P = 0;          // probe carrier, rad/s
    double mu12 = 2.99;          // e a0
    double w_P = 54e-6, r_rear = 79e-6;
    double t_optics = 0.91, t_filter = 0.80, t_fiber = 0.83, qe = 0.65;
};

GeometryInputs geometry_inputs(const TransducerConfig& cfg);

struct GeometryCalibration {
    double w_P = 0, R_rayleigh = 0;
    std::function<double(double)> r;        // beam radius r(z)
    std::function<double(double)> n_tilde;  // density profile n(z), m^-3
    double beta_bar = 0;
    double n_max = 0, N_avg = 0;
    double S_M = 0, mean_radius = 0;
    double kappa = 0;
};

GeometryCalibration density_and_cross_section(const GeometryInputs& in);

double detection_efficiency(double t_optics, double t_filter, double t_fiber, double qe);

struct OdFit {
    double d0 = 0, sigma = 0;
    bool converged = false;
    bool ill_conditioned = false;
};

// Single-parameter fit of the two-level transmission
// I_in exp(-d0 (Gamma2/2)^2 / (omega^2 + (Gamma2/2)^2)).
OdFit fit_global_od(const Eigen::VectorXd& omega, const Eigen::VectorXd& transmission, double Gamma2,
                    double I_in = 1.0, double noise = 0.0);

struct PartialOd {
    double d_M = 0, d_L = 0;
};

PartialOd partial_od(double d0, double rho11, double rho33, double mu34, double mu12, double lambda_P,
                     double lambda_M, double Gamma2, double Gamma4);

// hbar omega_M (C_L - C_N) / (kappa S_M  int I_M dt)
double ase_from_counts(double C_L, double C_N, double kappa, double S_M, const Eigen::VectorXd& t,
                       const Eigen::VectorXd& I_M, double carrier_hz);

struct IntensityEquivalence {
    double eta_ii = 0, eta = 0;
    bool applicable = true;
};

IntensityEquivalence intensity_efficiency_equivalence(double N_L, double omega_L, double S_I, double S_M,
                                                      double t0, const Eigen::VectorXd& t,
                                                      const Eigen::VectorXd& I_M, double carrier_hz);

double trapezoid(const Eigen::VectorXd& t, const Eigen::VectorXd& y);

}  // namespace rtx
