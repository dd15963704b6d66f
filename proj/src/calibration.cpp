#include "rtx/calibration.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>

#include "rtx/fitting.hpp"

namespace rtx {

namespace {

double integrate(const std::function<double(double)>& f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-12);
}

}  // namespace

double trapezoid(const Eigen::VectorXd& t, const Eigen::VectorXd& y)
{
    if (t.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
    double s = 0.0;
    for (Eigen::Index i = 1; i < t.size(); ++i) s += 0.5 * (y(i) + y(i - 1)) * (t(i) - t(i - 1));
    return s;
}

MixerCalibration mixer_calibration(const TransducerConfig& cfg)
{
    const auto& c = cfg.calibration;
    MixerCalibration m;
    m.amplitude = c.mixer_amplitude;
    m.center = c.mixer_center;
    m.width = c.mixer_width;
    m.floor = c.mixer_floor;
    m.u_max = std::max(c.if_peak, c.mixer_center);
    return m;
}

double mixer_output(double U, const MixerCalibration& cal, bool* extrapolated)
{
    if (extrapolated) *extrapolated = U < cal.u_min - 1e-12 || U > cal.u_max + 1e-12;
    double u = (U - cal.center) / cal.width;
    return cal.amplitude * std::exp(-0.5 * u * u) + cal.floor;
}

Eigen::VectorXd triangular_if(const Eigen::VectorXd& t, double peak, double duration)
{
    Eigen::VectorXd u(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i)
        u(i) = peak * std::max(0.0, 1.0 - std::abs(t(i)) / (duration / 2.0));
    return u;
}

double microwave_intensity(double rabi, double mu_ea0)
{
    double E = phys.hbar * rabi / (mu_ea0 * phys.e_a0);
    return 0.5 * phys.eps0 * phys.c * E * E;
}

double input_photon_number(const Eigen::VectorXd& t, const Eigen::VectorXcd& omega_M, double S_M, double mu_ea0,
                           double carrier_hz)
{
    Eigen::VectorXd I(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) I(i) = microwave_intensity(std::abs(omega_M(i)), mu_ea0);
    return trapezoid(t, I) * S_M / (phys.hbar * two_pi * carrier_hz);
}

double omega_for_photon_number(double N_bar, double T_p, double S_M, const TransducerConfig& cfg)
{
    if (!(T_p > 0) || !(S_M > 0)) throw std::domain_error("omega_for_photon_number: T_p and S_M must be positive");
    double mu = cfg.fields.M.dipole * phys.e_a0;
    double w = two_pi * cfg.fields.M.frequency;
    // int exp(-4 ln2 t^2 / T_p^2) dt
    double area = T_p * std::sqrt(pi / (4.0 * ln2));
    return std::sqrt(2.0 * N_bar * mu * mu * w / (phys.eps0 * phys.c * phys.hbar * area * S_M));
}

GeometryInputs geometry_inputs(const TransducerConfig& cfg)
{
    GeometryInputs g;
    g.L = cfg.ensemble.L;
    g.w_A = cfg.ensemble.w_A;
    g.d_L = cfg.ensemble.d_L;
    g.Gamma2 = cfg.levels.Gamma2;
    g.omega_P = two_pi * cfg.fields.P.frequency;
    g.mu12 = cfg.fields.P.dipole;
    const auto& c = cfg.calibration;
    g.w_P = c.w_P;
    g.r_rear = c.r_rear;
    g.t_optics = c.t_optics;
    g.t_filter = c.t_filter;
    g.t_fiber = c.t_fiber;
    g.qe = c.qe;
    return g;
}

double detection_efficiency(double t_optics, double t_filter, double t_fiber, double qe)
{
    for (double f : {t_optics, t_filter, t_fiber, qe})
        if (!(f > 0 && f <= 1)) throw std::domain_error("detection_efficiency: factors must lie in (0,1]");
    return t_optics * t_filter * t_fiber * qe;
}

GeometryCalibration density_and_cross_section(const GeometryInputs& in)
{
    if (!(in.L > 0) || !(in.w_P > 0)) throw std::domain_error("density_and_cross_section: L and w_P must be positive");
    if (in.r_rear < in.w_P) throw std::domain_error("density_and_cross_section: rear radius smaller than the waist");

    GeometryCalibration g;
    const double L = in.L;
    const double wA = in.w_A > 0 ? in.w_A : 2.0 * L / 3.0;
    const double zc = in.profile_center >= 0 ? in.profile_center : L / 2.0;
    g.w_P = in.w_P;
    const double ratio = in.r_rear / in.w_P;
    g.R_rayleigh = ratio > 1.0 ? L / std::sqrt(ratio * ratio - 1.0) : INFINITY;
    const double R = g.R_rayleigh;
    const double wP = in.w_P;
    g.r = [wP, R](double z) { return std::isinf(R) ? wP : wP * std::sqrt(1.0 + (z / R) * (z / R)); };

    auto shape = [zc, wA](double z) {
        double u = (z - zc) / wA;
        return std::exp(-2.0 * u * u);
    };
    const double mean_shape = integrate(shape, 0.0, L) / L;

    g.beta_bar = 2.0 * in.omega_P * std::pow(in.mu12 * phys.e_a0, 2) / (phys.hbar * phys.eps0 * phys.c);
    g.N_avg = g.beta_bar > 0 ? in.d_L * in.Gamma2 / (g.beta_bar * L) : 0.0;
    g.n_max = g.N_avg / mean_shape;
    const double nmax = g.n_max;
    g.n_tilde = [shape, nmax, L](double z) { return (z < 0 || z > L) ? 0.0 : nmax * shape(z); };

    auto r = g.r;
    g.S_M = integrate(
                [&](double z) {
                    double rho = shape(z) / mean_shape;
                    double rz = r(z);
                    return pi * rz * rz * rho * rho;
                },
                0.0, L)
            / L;
    g.mean_radius = std::sqrt(g.S_M / pi);
    g.kappa = detection_efficiency(in.t_optics, in.t_filter, in.t_fiber, in.qe);
    return g;
}

OdFit fit_global_od(const Eigen::VectorXd& omega, const Eigen::VectorXd& transmission, double Gamma2, double I_in,
                    double noise)
{
    if (!(Gamma2 > 0)) throw std::domain_error("fit_global_od: Gamma2 must be positive");
    if (omega.size() < 3) throw std::invalid_argument("fit_global_od: need at least 3 samples");
    if (omega.cwiseAbs().maxCoeff() < 3.0 * Gamma2)
        throw std::invalid_argument("fit_global_od: scan must cover at least +-3 linewidths");

    FitData data{omega, transmission, {}};
    if (noise > 0) data.sigma = Eigen::VectorXd::Constant(omega.size(), noise);

    // points that carry information about d0: neither opaque nor flat
    int informative = 0;
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        double T = transmission(i) / I_in;
        if (T > 1e-4 && T < 0.99) ++informative;
    }

    Model m = two_level_transmission(Gamma2, I_in);
    FitResult r = fit_nlls(m, data);
    OdFit out;
    out.d0 = r.params(0);
    out.sigma = r.sigma(0);
    out.converged = r.converged;
    out.ill_conditioned = informative < 3;
    return out;
}

PartialOd partial_od(double d0, double rho11, double rho33, double mu34, double mu12, double lambda_P,
                     double lambda_M, double Gamma2, double Gamma4)
{
    if (!(mu12 > 0) || !(lambda_M > 0) || !(Gamma4 > 0))
        throw std::domain_error("partial_od: mu12, lambda_M and Gamma4 must be positive");
    PartialOd p;
    p.d_M = mu34 * mu34 * lambda_P * Gamma2 * rho33 * d0 / (mu12 * mu12 * lambda_M * Gamma4);
    p.d_L = rho11 * d0;
    return p;
}

double ase_from_counts(double C_L, double C_N, double kappa, double S_M, const Eigen::VectorXd& t,
                       const Eigen::VectorXd& I_M, double carrier_hz)
{
    if (C_L < C_N) throw std::invalid_argument("ase_from_counts: signal counts below noise counts");
    if (!(kappa > 0 && kappa <= 1)) throw std::invalid_argument("ase_from_counts: kappa must lie in (0,1]");
    double E = trapezoid(t, I_M);
    if (!(E > 0) || !(S_M > 0)) throw std::domain_error("ase_from_counts: zero microwave pulse energy");
    return phys.hbar * two_pi * carrier_hz * (C_L - C_N) / (kappa * S_M * E);
}

IntensityEquivalence intensity_efficiency_equivalence(double N_L, double omega_L, double S_I, double S_M, double t0,
                                                      const Eigen::VectorXd& t, const Eigen::VectorXd& I_M,
                                                      double carrier_hz)
{
    double E = trapezoid(t, I_M);
    if (!(E > 0) || !(t0 > 0)) throw std::domain_error("intensity_efficiency_equivalence: zero pulse energy");
    const double omega_M = two_pi * carrier_hz;
    double I_L = N_L * phys.hbar * omega_L / (S_I * t0);
    double I_bar = E / t0;
    IntensityEquivalence r;
    r.eta_ii = (I_L / (phys.hbar * omega_L)) / (I_bar / (phys.hbar * omega_M));
    r.eta = phys.hbar * omega_M * N_L / (S_M * E);
    r.applicable = std::abs(S_I - S_M) <= 1e-12 * std::abs(S_M);
    return r;
}

}  // namespace rtx
