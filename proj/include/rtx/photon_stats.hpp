#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>

#include "rtx/config.hpp"

namespace rtx {

using cd = std::complex<double>;

// Normalized |S(delta)|^2 on a uniform detuning grid (rad/s).
struct SpectralDensity {
    Eigen::VectorXd delta;
    Eigen::VectorXd S2;
};

// Lorentzian of the given FWHM (rad/s) on +-span*fwhm with n points.
SpectralDensity lorentzian_spectrum(double fwhm, double span = 200.0, int n = 1 << 16);

struct G1Result {
    Eigen::VectorXd tau;  // s, 0 .. pi/d_delta
    Eigen::VectorXcd g1;
    double edge_fraction = 0;  // larger edge value of S2 over its maximum
    bool leakage = false;      // edge_fraction > 1%

    // linear interpolation, g1(-tau) = conj(g1(tau)); zero beyond the grid
    cd operator()(double t) const;
    // first time |g1| falls to 1/e
    double coherence_time() const;
};

// g1(tau) = int S2 e^{-i delta tau} d delta / int S2 d delta, by a forward
// DFT of the trapezoid-weighted grid. The tau step is 2 pi / (n d_delta);
// only the non-negative half of the periodic result is returned.
G1Result g1_from_spectrum(const SpectralDensity& S);

// exp(-fwhm |tau| / 2)
double lorentzian_g1(double tau, double fwhm);

struct G2Inputs {
    double n_th = 0, n_st = 0, N_bar = 0, eta = 0;
    std::function<cd(double)> g1 = [](double) { return cd(1.0); };
};

// 1 + (|n_th g1 + eta N|^2 - (eta N)^2) / (n_th + n_st + eta N)^2
double g2_predicted(double tau, const G2Inputs& in);

double exponential_g2_model(double tau, double g2_0, double tau_coh);

struct HbtOptions {
    long pulses = 1000000;
    std::uint64_t seed = 1;
    double bin = 1e-9;       // s
    double window = 512e-9;  // s, detection window per pulse
    double tau_coh = 0;      // s, amplitude 1/e time of the thermal field
    int rebin = 32;          // 1 ns bins per reported bin
    long shard_pulses = 1 << 15;
    int workers = 0;         // 0: worker_count()
};

struct HbtResult {
    Eigen::VectorXd tau;          // s, pair-weighted mean |lag| of each reported bin
    Eigen::VectorXd g2, err;      // Monte Carlo estimate and 1 sigma
    Eigen::VectorXd expected;     // coincidences expected without correlation
    Eigen::VectorXd coincidences;
    Eigen::VectorXd analytic;     // g2_predicted with the same lag weighting
    long pulses = 0;
    long clicks_A = 0, clicks_B = 0;
};

// Thermal field: complex Gaussian AR(1) on the bin grid with correlation
// exp(-bin / tau_coh), mean |a|^2 = n_th per window. Per-bin click rate
// |a + alpha|^2 + n_st / W with |alpha|^2 = eta N / W; clicks are Poisson
// per bin and go to either detector with probability 1/2. Coincidences are
// histogrammed over signed lags, folded and normalized by
// N_A N_B (W - |k|) / (pulses W^2). The result depends only on the seed and
// the shard size, not on the number of workers.
HbtResult hbt_monte_carlo(const G2Inputs& in, const HbtOptions& opt);

}  // namespace rtx
