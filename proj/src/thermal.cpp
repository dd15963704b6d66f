#include "rtx/thermal.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

namespace rtx {

namespace {

constexpr int max_levels = 20;

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

// Integral of f(theta) over [a, b] in the variable u = ln(theta), which
// concentrates nodes near a small lower limit.
double log_integral(const std::function<double(double)>& f, double a, double b, double tol,
                    double* err)
{
    auto g = [&](double u) {
        double th = std::exp(u);
        return f(th) * th;
    };
    return GK::integrate(g, std::log(a), std::log(b), max_levels, tol, err);
}

}  // namespace

ThermalScenario make_scenario(double nu, double T_env, double B, double tau_int, double r_med,
                              double L, double eta_max)
{
    if (!(r_med > 0) || !(L > 0)) throw std::invalid_argument("thermal scenario: r and L must be positive");
    if (2.0 * r_med >= L) throw std::invalid_argument("thermal scenario: needs 2 r < L");
    ThermalScenario s;
    s.nu = nu;
    s.T_env = T_env;
    s.B = B;
    s.tau_int = tau_int;
    s.r_med = r_med;
    s.L = L;
    s.eta_max = eta_max;
    s.A = 2.0 * pi * r_med * r_med + 2.0 * pi * r_med * L;
    s.theta_min = std::asin(2.0 * r_med / L);
    return s;
}

ThermalScenario thermal_scenario(const TransducerConfig& cfg)
{
    const auto& th = cfg.thermal;
    double nu = th.nu > 0 ? th.nu : cfg.fields.M.frequency;
    return make_scenario(nu, th.T_env, th.bandwidth, th.tau_int, cfg.ensemble.r_med, cfg.ensemble.L,
                         th.eta_max);
}

Occupation occupation(double nu, double T)
{
    if (T <= 0) return {0.0, true};
    double x = phys.h * nu / (phys.kB * T);
    return {1.0 / std::expm1(x), false};
}

double mean_occupation(double nu, double T) { return occupation(nu, T).n; }

double thermal_flux(const ThermalScenario& s, bool narrowband)
{
    auto spectral = [&](double f) { return 2.0 * f * f * mean_occupation(f, s.T_env) / (phys.c * phys.c); };
    // the cos(theta) weighted hemisphere gives pi
    if (narrowband || s.B <= 0) return spectral(s.nu) * pi * s.A * s.B;
    double band = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        spectral, s.nu - s.B / 2, s.nu + s.B / 2, 5, 1e-12);
    return band * pi * s.A;
}

double stored_thermal_photons(double Phi, double tau_int) { return Phi * tau_int / 2.0; }

LengthEfficiency length_efficiency(const ThermalScenario& s)
{
    const double loss = (1.0 - s.eta_max) * s.L;
    return [loss](double l) { return l > 0 ? std::max(0.0, 1.0 - loss / l) : 0.0; };
}

QuadratureError::QuadratureError(const std::string& what, double estimate, double error, int levels)
    : std::runtime_error(what), estimate(estimate), error(error), levels(levels)
{
}

NoiseCount converted_noise_count(const ThermalScenario& s, const LengthEfficiency& eta, double rel_tol)
{
    NoiseCount out;
    out.N_stored = stored_thermal_photons(thermal_flux(s), s.tau_int);
    const double N = out.N_stored;
    const double two_r = 2.0 * s.r_med;

    auto dS = [&](double th) { return eta(two_r / std::sin(th)) * N * std::sin(th) / 2.0; };
    double err = 0;
    double half = log_integral(dS, s.theta_min, pi / 2, rel_tol * 1e-3, &err);
    out.bulk = 2.0 * half;
    out.error = 2.0 * err;
    if (!std::isfinite(out.bulk) || out.error > rel_tol * std::abs(out.bulk) + 1e-300) {
        std::ostringstream os;
        os << "converted_noise_count: theta quadrature did not converge (estimate " << out.bulk
           << ", error " << out.error << ", 31-point Kronrod, " << max_levels
           << " bisection levels on ln(theta) in [" << std::log(s.theta_min) << ", " << std::log(pi / 2)
           << "])";
        throw QuadratureError(os.str(), out.bulk, out.error, max_levels);
    }
    out.cap = 2.0 * s.eta_max * N * (1.0 - std::cos(s.theta_min)) / (4.0 * pi);
    out.n_th = out.bulk + out.cap;
    return out;
}

NoiseCount converted_noise_count(const ThermalScenario& s)
{
    return converted_noise_count(s, length_efficiency(s));
}

double hemisphere_measure(const std::function<double(double)>& w)
{
    // split at a small angle so the log variable has a finite lower limit
    const double a = 1e-4;
    auto f = [&](double th) { return w(th) * std::sin(th) / 2.0; };
    double e1 = 0, e2 = 0;
    double cap = GK::integrate(f, 0.0, a, max_levels, 1e-14, &e1);
    double bulk = log_integral(f, a, pi / 2, 1e-14, &e2);
    auto mirror = [&](double th) { return w(pi - th) * std::sin(th) / 2.0; };
    double cap2 = GK::integrate(mirror, 0.0, a, max_levels, 1e-14, &e1);
    double bulk2 = log_integral(mirror, a, pi / 2, 1e-14, &e2);
    return cap + bulk + cap2 + bulk2;
}

std::vector<TemperaturePoint> noise_count_vs_temperature(const ThermalScenario& s,
                                                         const std::vector<double>& T_grid)
{
    const double ref = converted_noise_count(s).n_th;
    const double n_ref = mean_occupation(s.nu, s.T_env);
    std::vector<TemperaturePoint> out;
    out.reserve(T_grid.size());
    for (double T : T_grid) {
        if (!(T > 0)) throw std::invalid_argument("noise_count_vs_temperature: temperatures must be positive");
        out.push_back({T, ref * mean_occupation(s.nu, T) / n_ref});
    }
    return out;
}

NoiseEquivalentTemperature noise_equivalent_temperature(double n_th_ref, double n_st,
                                                        const ThermalScenario& s)
{
    if (!(n_st > 0)) throw std::domain_error("noise_equivalent_temperature: n_st must be positive");
    if (!(n_th_ref > 0)) throw std::domain_error("noise_equivalent_temperature: n_th must be positive");
    const double target = mean_occupation(s.nu, s.T_env) * n_st / n_th_ref;
    auto f = [&](double T) { return mean_occupation(s.nu, T) - target; };

    NoiseEquivalentTemperature out;
    out.flagged = n_st >= n_th_ref;
    if (n_st == n_th_ref) {
        out.T = s.T_env;
        return out;
    }
    double lo = 0.0, hi = s.T_env;
    while (f(hi) < 0) {
        lo = hi;
        hi *= 2;
    }
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
    auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol);
    out.T = 0.5 * (a + b);
    return out;
}

NoiseBudget noise_budget(const TransducerConfig& cfg)
{
    ThermalScenario s = thermal_scenario(cfg);
    NoiseBudget b;
    b.nu = s.nu;
    b.T_env = s.T_env;
    b.n_occ = mean_occupation(s.nu, s.T_env);
    b.Phi = thermal_flux(s);
    NoiseCount nc = converted_noise_count(s);
    b.N_stored = nc.N_stored;
    b.n_th = nc.n_th;
    b.n_st = cfg.thermal.n_st;
    if (b.n_st > 0 && b.n_th > 0) {
        auto t = noise_equivalent_temperature(b.n_th, b.n_st, s);
        b.T_NE = t.T;
        b.T_NE_flagged = t.flagged;
    }
    return b;
}

}  // namespace rtx
