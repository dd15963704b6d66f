#include "rtx/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rtx {

KernelParams kernel_params(const TransducerConfig& cfg)
{
    return {cfg.ensemble.rho33 * cfg.ensemble.d_M, cfg.levels.Gamma4, cfg.levels.gamma41, cfg.levels.gamma51,
            cfg.fields.W.rabi, cfg.ensemble.L};
}

cd mw_kernel(double omega, const KernelParams& k)
{
    const cd i(0.0, 1.0);
    cd den = 4.0 * (i * omega - k.gamma41) * (i * omega - k.gamma51) + k.Omega_W * k.Omega_W;
    if (den == 0.0) throw std::domain_error("mw_kernel: pole of the kernel at the requested detuning");
    return mw_exponent(omega, k);
}

cd mw_kernel(double omega, const TransducerConfig& cfg) { return mw_kernel(omega, kernel_params(cfg)); }

double alpha_coefficient(double gamma, double Gamma, double t_d, double T)
{
    if (Gamma == 0.0) return 0.0;
    return 32.0 * ln2 * gamma * t_d * t_d / (Gamma * T * T);
}

Broadening broadening_and_delay(const TransducerConfig& cfg)
{
    const auto& lv = cfg.levels;
    double Ow = cfg.fields.W.rabi;
    double Tp = cfg.pulse.T_p;
    if (Ow == 0.0) throw std::domain_error("broadening_and_delay: Omega_W = 0 gives an infinite group delay");
    if (!(Tp > 0)) throw std::domain_error("broadening_and_delay: T_p must be positive");
    double D = cfg.ensemble.rho33 * cfg.ensemble.d_M;
    Broadening b;
    b.zeta_M = std::sqrt(1.0 + 32.0 * ln2 * lv.gamma41 * lv.Gamma4 * D / (Tp * Tp * std::pow(Ow, 4)));
    b.t_dM = lv.Gamma4 * D / (Ow * Ow);
    b.alpha_M = alpha_coefficient(lv.gamma41, lv.Gamma4, b.t_dM, Tp);
    b.t_dL = cfg.storage.t_dL;
    b.alpha_L = alpha_coefficient(lv.gamma61, lv.Gamma6, b.t_dL, cfg.storage.T_pL);
    return b;
}

double optical_delay_estimate(const TransducerConfig& cfg)
{
    double Or = cfg.fields.R.rabi;
    if (Or == 0.0) throw std::domain_error("optical_delay_estimate: Omega_R = 0");
    return cfg.levels.Gamma6 * cfg.ensemble.rho11 * cfg.ensemble.d_L / (Or * Or);
}

EfficiencyBreakdown transmission_efficiency(const ChainInputs& in)
{
    if (!(in.d_M > 0) || !(in.d_L > 0)) throw std::domain_error("transmission_efficiency: d_M and d_L must be positive");
    EfficiencyBreakdown e;
    e.t_dM = in.t_dM;
    e.t_dL = in.t_dL;
    e.t_d = in.t_dM + in.t_dL;
    e.alpha_M = in.alpha_M;
    e.alpha_L = in.alpha_L;
    e.T_pL = in.T_pL;
    double bM = 1.0 + in.alpha_M / in.d_M;
    double bL = 1.0 + in.alpha_L / in.d_L;
    e.zeta_M = std::sqrt(bM);
    e.eta_M = std::exp(-2.0 * in.gamma51 * in.t_dM) / std::sqrt(bM);
    e.eta_L = std::exp(-2.0 * in.gamma51 * in.t_dL) / std::sqrt(bL);
    e.eta0 = 1.0 / std::sqrt(bM * bL);
    e.eta_t = e.eta_M * e.eta_L;
    e.eta = e.eta_t * in.eta_s * in.eta_c;
    return e;
}

ChainInputs chain_inputs(const TransducerConfig& cfg)
{
    Broadening b = broadening_and_delay(cfg);
    ChainInputs in;
    in.gamma51 = cfg.levels.gamma51;
    in.t_dM = b.t_dM;
    in.t_dL = b.t_dL;
    in.alpha_M = b.alpha_M;
    in.alpha_L = b.alpha_L;
    in.d_M = cfg.ensemble.rho33 * cfg.ensemble.d_M;
    in.d_L = cfg.ensemble.d_L;
    in.eta_s = cfg.storage.eta_s;
    in.eta_c = cfg.storage.eta_c;
    in.T_pL = cfg.storage.T_pL;
    return in;
}

EfficiencyBreakdown transmission_efficiency(const TransducerConfig& cfg)
{
    return transmission_efficiency(chain_inputs(cfg));
}

double photon_number_efficiency(double N_bar, double eta0, double gamma0, double t_d)
{
    if (N_bar < 0) throw std::domain_error("photon_number_efficiency: N_bar must be non-negative");
    return eta0 * std::exp(-2.0 * std::sqrt(N_bar) * gamma0 * t_d);
}

double od_scaling(double d_M, double beta)
{
    if (!(d_M > 0)) throw std::domain_error("od_scaling: d_M must be positive");
    return std::clamp(1.0 - beta / d_M, 0.0, 1.0);
}

double detuning_response(double delta, const TransducerConfig& cfg)
{
    double half = cfg.fields.W.rabi / 2.0;
    if (!(std::abs(delta) < half))
        throw std::domain_error("detuning_response: |delta| must lie inside the transparency window Omega_W/2");
    cd k = mw_kernel(delta, cfg);
    return std::exp(2.0 * k.real()) * transmission_efficiency(cfg).eta_L;
}

Eigen::VectorXd detuning_grid(const TransducerConfig& cfg, int n, double fraction)
{
    double half = fraction * cfg.fields.W.rabi / 2.0;
    return Eigen::VectorXd::LinSpaced(n, -half, half);
}

AnalyticPropagation propagate_gaussian_analytic(const PulseSpec& pulse, const KernelParams& k,
                                                const Eigen::VectorXd& t, SpectralGridSpec grid)
{
    const double Tp = pulse.T_p;
    const double O0 = pulse.Omega_M0;
    if (!(Tp > 0)) throw std::domain_error("propagate_gaussian_analytic: T_p must be positive");
    if (grid.n_omega < 16) throw std::domain_error("propagate_gaussian_analytic: spectral grid too small");

    AnalyticPropagation out;
    out.t = t;
    const double Ow = k.Omega_W;
    const double t_dM = Ow > 0 ? k.Gamma4 * k.D / (Ow * Ow) : 0.0;
    const double zeta = Ow > 0 ? std::sqrt(1.0 + 32.0 * ln2 * k.gamma41 * k.Gamma4 * k.D / (Tp * Tp * std::pow(Ow, 4)))
                               : 1.0;
    const double vac = k.L / phys.c;
    out.zeta_M = zeta;
    out.delay = t_dM + vac;
    out.width = zeta * Tp;
    out.peak_amplitude = O0 / zeta;

    // Truncation is trustworthy when the kernel's cubic term is small over the
    // pulse spectrum: 4 t_dM w^3 / Omega_W^2 at the 1/e point w = sqrt(8 ln2)/T_p.
    const double w_e = std::sqrt(8.0 * ln2) / Tp;
    out.cubic_phase = Ow > 0 ? 4.0 * t_dM * std::pow(w_e, 3) / (Ow * Ow) : 0.0;
    out.valid = Ow * Ow > 100.0 * k.gamma41 * k.gamma51 && out.cubic_phase < 0.1 && w_e < Ow / 2.0;

    const Eigen::Index nt = t.size();
    out.input.resize(nt);
    out.closed_form.resize(nt);
    out.integral.resize(nt);
    const double amp_decay = std::exp(-k.gamma51 * t_dM);
    for (Eigen::Index j = 0; j < nt; ++j) {
        double s = t(j) - pulse.t0;
        out.input(j) = O0 * std::exp(-2.0 * ln2 * s * s / (Tp * Tp));
        double u = (s - out.delay) / (zeta * Tp);
        out.closed_form(j) = out.peak_amplitude * amp_decay * std::exp(-2.0 * ln2 * u * u);
    }

    // trapezoidal inverse transform of the full kernel
    const int n = grid.n_omega;
    const double wmax = grid.span / Tp;
    const double dw = 2.0 * wmax / (n - 1);
    Eigen::VectorXcd weight(n);
    for (int m = 0; m < n; ++m) {
        double w = -wmax + m * dw;
        cd e = mw_exponent(w, k);
        weight(m) = std::exp(-Tp * Tp * w * w / (8.0 * ln2) + e) * ((m == 0 || m == n - 1) ? 0.5 : 1.0);
    }
    const double pref = O0 * Tp / std::sqrt(8.0 * pi * ln2) * dw;
    for (Eigen::Index j = 0; j < nt; ++j) {
        double s = t(j) - pulse.t0;
        // exp(-i w s) by recurrence from the first grid point
        cd ph = std::polar(1.0, wmax * s);
        const cd step = std::polar(1.0, -dw * s);
        cd acc = 0.0;
        for (int m = 0; m < n; ++m) {
            acc += weight(m) * ph;
            ph *= step;
        }
        out.integral(j) = pref * acc;
    }
    return out;
}

AnalyticPropagation propagate_gaussian_analytic(const PulseSpec& pulse, const TransducerConfig& cfg,
                                                const Eigen::VectorXd& t, SpectralGridSpec grid)
{
    return propagate_gaussian_analytic(pulse, kernel_params(cfg), t, grid);
}

double relative_l2(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    double nb = b.norm();
    if (nb == 0.0) return a.norm() == 0.0 ? 0.0 : INFINITY;
    return (a - b).norm() / nb;
}

}  // namespace rtx
