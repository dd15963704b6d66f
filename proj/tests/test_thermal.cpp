#include <doctest.h>

#include <cmath>

#include "rtx/constants.hpp"
#include "rtx/thermal.hpp"
#include "support.hpp"

using namespace rtx;
using rtx::test::paper_config;

namespace {

ThermalScenario paper_scenario(double eta_max = 0.93)
{
    auto s = thermal_scenario(paper_config());
    s.eta_max = eta_max;
    return s;
}

}  // namespace

TEST_CASE("Bose occupation and its limits")
{
    CHECK(mean_occupation(37e9, 300) == doctest::Approx(170).epsilon(3.0 / 170));
    CHECK(mean_occupation(1e15, 1.0) < 1e-300);
    double x = phys.h * 1e9 / (phys.kB * 300);
    CHECK(mean_occupation(1e9, 300) == doctest::Approx(1 / x).epsilon(0.01));
    auto z = occupation(37e9, 0.0);
    CHECK(z.n == 0.0);
    CHECK(z.zero_temperature);
    CHECK_FALSE(occupation(37e9, 1.0).zero_temperature);
}

TEST_CASE("thermal flux through the medium surface")
{
    auto s = paper_scenario();
    CHECK(s.A == doctest::Approx(2 * pi * 66e-6 * 66e-6 + 2 * pi * 66e-6 * 0.02).epsilon(1e-14));
    double Phi = thermal_flux(s);
    CHECK(Phi == doctest::Approx(295e6).epsilon(0.05));
    CHECK(thermal_flux(s, false) == doctest::Approx(Phi).epsilon(1e-6));

    auto t = s;
    t.A *= 2;
    CHECK(thermal_flux(t) == doctest::Approx(2 * Phi).epsilon(1e-14));
    t = s;
    t.B = 0;
    CHECK(thermal_flux(t) == 0.0);
}

TEST_CASE("stored thermal photons")
{
    CHECK(stored_thermal_photons(295e6, 550e-9) == doctest::Approx(81.2).epsilon(0.02));
    CHECK(stored_thermal_photons(295e6, 0.0) == 0.0);
    CHECK(stored_thermal_photons(147.5e6, 550e-9) == doctest::Approx(stored_thermal_photons(295e6, 550e-9) / 2));
}

TEST_CASE("scenario geometry")
{
    CHECK_THROWS_AS(make_scenario(37.5e9, 300, 2.1e6, 550e-9, 0.01, 0.02, 0.93), std::invalid_argument);
    CHECK_THROWS_AS(make_scenario(37.5e9, 300, 2.1e6, 550e-9, 66e-6, 0.0, 0.93), std::invalid_argument);
    auto s = paper_scenario();
    CHECK(std::sin(s.theta_min) == doctest::Approx(2 * 66e-6 / 0.02).epsilon(1e-14));
    auto eta = length_efficiency(s);
    CHECK(eta(s.L) == doctest::Approx(0.93).epsilon(1e-14));
    CHECK(eta(2 * s.r_med) == 0.0);
}

TEST_CASE("converted noise count at the two efficiency presets")
{
    auto a = converted_noise_count(paper_scenario(0.93));
    auto b = converted_noise_count(paper_scenario(0.91));
    CHECK(a.n_th == doctest::Approx(0.109).epsilon(0.10));
    CHECK(b.n_th == doctest::Approx(0.08).epsilon(0.15));
    CHECK(a.n_th == doctest::Approx(a.bulk + a.cap).epsilon(1e-15));
    CHECK(a.error < 1e-4 * a.n_th);
    // ratio of thermal to other intrinsic noise
    CHECK(a.n_th / 0.01 == doctest::Approx(10.9).epsilon(0.10));
}

TEST_CASE("zero efficiency converts nothing")
{
    auto s = paper_scenario(0.0);
    CHECK(converted_noise_count(s).n_th == 0.0);
    CHECK(converted_noise_count(s, [](double) { return 0.0; }).n_th == 0.0);
}

TEST_CASE("solid-angle normalization")
{
    CHECK(std::abs(hemisphere_measure([](double) { return 1.0; }) - 1.0) < 1e-10);
    // constant efficiency: the bulk covers [theta_min, pi - theta_min]
    auto s = paper_scenario();
    auto nc = converted_noise_count(s, [&](double) { return s.eta_max; }, 1e-12);
    CHECK(nc.bulk == doctest::Approx(s.eta_max * nc.N_stored * std::cos(s.theta_min)).epsilon(1e-10));
    CHECK(hemisphere_measure([](double th) { return std::cos(th) * std::cos(th); }) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("n_th is monotone in temperature, bandwidth, integration time and efficiency")
{
    auto base = paper_scenario();
    auto value = [](ThermalScenario s) { return converted_noise_count(s).n_th; };
    double prev = 0;
    for (double T : {1.0, 10.0, 77.0, 300.0, 600.0}) {
        auto s = base;
        s.T_env = T;
        CHECK(value(s) >= prev);
        prev = value(s);
    }
    prev = 0;
    for (double B : {0.1e6, 1e6, 2.1e6, 5e6}) {
        auto s = base;
        s.B = B;
        CHECK(value(s) >= prev);
        prev = value(s);
    }
    prev = 0;
    for (double tau : {50e-9, 550e-9, 2e-6}) {
        auto s = base;
        s.tau_int = tau;
        CHECK(value(s) >= prev);
        prev = value(s);
    }
    prev = 0;
    for (double e : {0.5, 0.9, 0.91, 0.93, 0.99}) {
        auto s = base;
        s.eta_max = e;
        CHECK(value(s) >= prev);
        prev = value(s);
    }
}

TEST_CASE("noise against environment temperature")
{
    auto s = paper_scenario(0.91);
    auto curve = noise_count_vs_temperature(s, {0.01, 4.0, 300.0});
    CHECK(curve[0].n_th < 1e-4);
    CHECK(curve[1].n_th < 1e-3);
    CHECK(curve[2].n_th == doctest::Approx(converted_noise_count(s).n_th).epsilon(1e-14));
    CHECK(paper_scenario(0.93).T_env == 300.0);
    CHECK(noise_count_vs_temperature(paper_scenario(0.93), {0.01})[0].n_th < 1e-4);
    CHECK_THROWS(noise_count_vs_temperature(s, {0.0}));
}

TEST_CASE("noise-equivalent temperature")
{
    auto s = paper_scenario();
    auto t = noise_equivalent_temperature(0.109, 0.01, s);
    CHECK(t.T > 24);
    CHECK(t.T < 30);
    CHECK(t.T == doctest::Approx(26).epsilon(0.15));
    CHECK_FALSE(t.flagged);
    CHECK(0.109 * mean_occupation(s.nu, t.T) / mean_occupation(s.nu, 300) == doctest::Approx(0.01).epsilon(1e-9));

    CHECK(noise_equivalent_temperature(0.109, 0.109, s).T == 300.0);
    CHECK(noise_equivalent_temperature(0.109, 1e-12, s).T < 0.1);
    auto hot = noise_equivalent_temperature(0.109, 0.5, s);
    CHECK(hot.flagged);
    CHECK(hot.T > 300);
    CHECK_THROWS_AS(noise_equivalent_temperature(0.109, 0.0, s), std::domain_error);
    CHECK_THROWS_AS(noise_equivalent_temperature(0.0, 0.01, s), std::domain_error);
}

TEST_CASE("noise budget from the config")
{
    auto b = noise_budget(paper_config());
    CHECK(b.N_stored == doctest::Approx(stored_thermal_photons(b.Phi, 550e-9)).epsilon(1e-15));
    CHECK(b.n_th == doctest::Approx(0.109).epsilon(0.10));
    CHECK(b.T_NE > 24);
    CHECK(b.T_NE < 30);
}
