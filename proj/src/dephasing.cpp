#include "rtx/dephasing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rtx/cpt.hpp"

namespace rtx {

double blockade_radius(double C6_33, double gamma_pump)
{
    if (!(C6_33 > 0) || !(gamma_pump > 0))
        throw std::domain_error("blockade_radius: C6 and gamma_pump must be positive");
    return std::pow(2.0 * C6_33 / gamma_pump, 1.0 / 6.0);
}

double c6_for_blockade_radius(double R_B, double gamma_pump)
{
    if (!(R_B > 0) || !(gamma_pump > 0))
        throw std::domain_error("c6_for_blockade_radius: R_B and gamma_pump must be positive");
    return std::pow(R_B, 6) * gamma_pump / 2.0;
}

double level_shift_variance(double C6, double rho_pop, double n_at, double R_B)
{
    if (!(R_B > 0)) throw std::domain_error("level_shift_variance: R_B = 0 makes the cutoff integral singular");
    if (rho_pop < 0 || n_at < 0) throw std::domain_error("level_shift_variance: negative population or density");
    return 4.0 * pi * C6 * C6 * rho_pop * n_at / (9.0 * std::pow(R_B, 9));
}

double gamma51_of_photon_number(double N_bar, double gamma0)
{
    if (N_bar < 0) throw std::domain_error("gamma51_of_photon_number: N_bar must be non-negative");
    return std::sqrt(N_bar) * gamma0;
}

double dde_variance(double C3, double P41_P51, double rho11, double n_at, double R_B, double w, bool include_w_limit)
{
    if (!(R_B > 0) || !(R_B < w))
        throw std::domain_error("dde_variance: need 0 < R_B < w (blockade sphere inside the coupling beam)");
    if (!(rho11 > 0)) throw std::domain_error("dde_variance: rho11 must be positive");
    double v = 4.0 * pi * C3 * C3 * std::abs(P41_P51) * n_at / (3.0 * rho11 * std::pow(R_B, 3));
    if (include_w_limit) v *= 1.0 - std::pow(R_B / w, 3);
    return v;
}

MotionalCoherence motional_coherence(double T, double lambda_sw, double mass)
{
    if (!(T > 0)) throw std::domain_error("motional_coherence: temperature must be positive");
    MotionalCoherence m;
    m.u = std::sqrt(phys.kB * T / mass);
    m.tau_sw = lambda_sw / (two_pi * m.u);
    return m;
}

double spin_wave_wavelength(double k_P, double k_A, BeamGeometry g)
{
    double dk = g == BeamGeometry::copropagating ? std::abs(k_P - k_A) : std::abs(k_P + k_A);
    if (dk == 0.0) return std::numeric_limits<double>::infinity();
    return two_pi / dk;
}

double motional_amplitude_factor(double t, double tau_sw)
{
    if (!(tau_sw > 0)) return 1.0;
    return std::exp(-t * t / (2.0 * tau_sw * tau_sw));
}

DephasingBudget dephasing_budget(const TransducerConfig& cfg)
{
    const auto& in = cfg.interaction;
    const auto& en = cfg.ensemble;
    const double to_rad = in.coefficients_cyclic ? two_pi : 1.0;

    DephasingBudget b;
    b.coefficients_cyclic = in.coefficients_cyclic;
    b.rho33_source = in.rho33_from_cpt ? "cpt" : "ensemble";
    b.rho33 = in.rho33_from_cpt ? cpt_zero_order(cfg.fields.P.rabi, cfg.fields.A.rabi).rho33 : en.rho33;
    b.R_B = in.R_B;
    b.N_bar = cfg.pulse.N_bar;

    const double n = en.n_at;
    const double V = pi * en.r_med * en.r_med * en.L;
    const double rho55 = n > 0 ? b.N_bar / (n * V) : 0.0;

    b.var_33 = level_shift_variance(in.C6_33 * to_rad, b.rho33, n, b.R_B);
    b.var_35 = level_shift_variance(in.Cbar6_35 * to_rad, b.N_bar * b.rho33, n, b.R_B);
    b.var_55 = level_shift_variance(in.C6_55 * to_rad, rho55, n, b.R_B);
    b.gamma0 = std::sqrt(level_shift_variance(in.Cbar6_35 * to_rad, b.rho33, n, b.R_B));
    b.gamma51 = gamma51_of_photon_number(b.N_bar, b.gamma0);

    // N_bar stored excitations spread over the volume, times the adiabatic
    // following ratio P41/P51 ~ 2/(Omega_W T_p)
    double Ow = cfg.fields.W.rabi;
    b.P41_P51 = (n > 0 && Ow > 0) ? (b.N_bar / (n * V)) * 2.0 / (Ow * cfg.pulse.T_p) : 0.0;
    if (b.R_B < in.w && en.rho11 > 0) b.var_45 = dde_variance(in.C3 * to_rad, b.P41_P51, en.rho11, n, b.R_B, in.w);

    double kP = two_pi / cfg.fields.P.wavelength;
    double kA = two_pi / cfg.fields.A.wavelength;
    b.lambda_sw = spin_wave_wavelength(kP, kA);
    if (en.T_atoms > 0) {
        auto m = motional_coherence(en.T_atoms, b.lambda_sw);
        b.u = m.u;
        b.tau_sw = m.tau_sw;
    }
    return b;
}

}  // namespace rtx
