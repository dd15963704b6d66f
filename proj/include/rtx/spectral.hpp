#pragma once

#include <Eigen/Dense>
#include <complex>

#include "rtx/config.hpp"

namespace rtx {

using cd = std::complex<double>;

struct EfficiencyBreakdown {
    double t_dM = 0, t_dL = 0, t_d = 0;  // s
    double zeta_M = 1;
    double alpha_M = 0, alpha_L = 0;
    double eta_M = 0, eta_L = 0, eta_t = 0, eta0 = 0, eta = 0;
    double T_pL = 0;  // s
};

// Parameters of the microwave-channel kernel. D is the effective OD that
// enters the kernel, rho33 * d_M (= |rho13|^2 d_M / rho11 for a pure state).
struct KernelParams {
    double D = 0;
    double Gamma4 = 0, gamma41 = 0, gamma51 = 0;
    double Omega_W = 0;
    double L = 0;  // m, for the vacuum term i omega L / c
};

KernelParams kernel_params(const TransducerConfig& cfg);

// Exponent of W_M(omega, L) = W_M(omega, 0) exp(kernel). Inverse transform
// convention is exp(-i omega t).
template <class Scalar>
auto mw_exponent(Scalar omega, const KernelParams& k)
{
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    auto io = i * omega;
    auto den = 4.0 * (io - k.gamma41) * (io - k.gamma51) + k.Omega_W * k.Omega_W;
    return io * (k.L / phys.c) + k.D * k.Gamma4 * (io - k.gamma51) / den;
}

cd mw_kernel(double omega, const KernelParams& k);
cd mw_kernel(double omega, const TransducerConfig& cfg);

struct Broadening {
    double zeta_M = 1, t_dM = 0, alpha_M = 0, alpha_L = 0, t_dL = 0;
};

double alpha_coefficient(double gamma, double Gamma, double t_d, double T);
Broadening broadening_and_delay(const TransducerConfig& cfg);

// Optional symmetric estimate Gamma6 rho11 d_L / Omega_R^2; the chain uses the
// measured storage.t_dL instead.
double optical_delay_estimate(const TransducerConfig& cfg);

struct ChainInputs {
    double gamma51 = 0;
    double t_dM = 0, t_dL = 0;
    double alpha_M = 0, alpha_L = 0;
    double d_M = 0, d_L = 0;
    double eta_s = 1, eta_c = 1;
    double T_pL = 0;
};

EfficiencyBreakdown transmission_efficiency(const ChainInputs& in);

// Config-driven chain. The microwave OD passed to the chain is the effective
// kernel OD rho33*d_M so that eta_M equals the closed-form pulse area.
ChainInputs chain_inputs(const TransducerConfig& cfg);
EfficiencyBreakdown transmission_efficiency(const TransducerConfig& cfg);

double photon_number_efficiency(double N_bar, double eta0, double gamma0, double t_d);
double od_scaling(double d_M, double beta);

// |exp(kernel(delta))|^2 times the optical-channel efficiency. Only defined
// inside the transparency window |delta| < Omega_W/2.
double detuning_response(double delta, const TransducerConfig& cfg);
Eigen::VectorXd detuning_grid(const TransducerConfig& cfg, int n, double fraction = 0.98);

struct AnalyticPropagation {
    Eigen::VectorXd t;            // s
    Eigen::VectorXcd input;       // Omega_M(0, t)
    Eigen::VectorXcd closed_form; // truncated-quadratic slow-light pulse
    Eigen::VectorXcd integral;    // numerical inverse transform of the full kernel
    double peak_amplitude = 0;    // Omega_M0 / zeta_M
    double delay = 0;             // t_dM (+ L/c)
    double width = 0;             // zeta_M T_p
    double zeta_M = 1;
    double cubic_phase = 0;       // neglected phase at the spectral 1/e point, rad
    bool valid = true;
};

struct SpectralGridSpec {
    int n_omega = 4096;
    double span = 8.0;  // half-width in units of 1/T_p
};

// t: sample times; pulse centred at pulse.t0.
AnalyticPropagation propagate_gaussian_analytic(const PulseSpec& pulse, const KernelParams& k,
                                                const Eigen::VectorXd& t, SpectralGridSpec grid = {});
AnalyticPropagation propagate_gaussian_analytic(const PulseSpec& pulse, const TransducerConfig& cfg,
                                                const Eigen::VectorXd& t, SpectralGridSpec grid = {});

// Relative L2 distance ||a-b|| / ||b||.
double relative_l2(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace rtx
