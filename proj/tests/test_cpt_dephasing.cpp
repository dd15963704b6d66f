#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rtx/constants.hpp"
#include "rtx/cpt.hpp"
#include "rtx/dephasing.hpp"
#include "support.hpp"

using namespace rtx;

TEST_CASE("cpt_zero_order examples")
{
    auto s = cpt_zero_order(0.0, mhz(7.6));
    CHECK(s.rho11 == 1.0);
    CHECK(s.rho33 == 0.0);
    CHECK(std::abs(s.rho13) == 0.0);

    s = cpt_zero_order(mhz(3), mhz(3));
    CHECK(s.rho11 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.rho33 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.rho13.real() == doctest::Approx(-0.5).epsilon(1e-15));

    s = cpt_zero_order(mhz(2.1), mhz(7.6));
    CHECK(s.rho11 == doctest::Approx(7.6 * 7.6 / (2.1 * 2.1 + 7.6 * 7.6)).epsilon(1e-13));
    CHECK(s.rho11 == doctest::Approx(0.929).epsilon(1e-3));

    CHECK_THROWS(cpt_zero_order(0.0, 0.0));
}

TEST_CASE("cpt purity and normalization over random complex inputs")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        double scale = std::pow(10.0, 6 + 2 * u(gen));
        cd P(scale * u(gen), scale * u(gen)), A(scale * u(gen), scale * u(gen));
        auto s = cpt_zero_order(P, A);
        CHECK(std::abs(s.rho11 + s.rho33 - 1.0) < 1e-12);
        CHECK(std::abs(std::norm(s.rho13) - s.rho11 * s.rho33) < 1e-12);
        CHECK(s.rho11 >= 0.0);
        CHECK(s.rho11 <= 1.0);
    }
}

TEST_CASE("cpt state is invariant under a common rescaling")
{
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 200; ++i) {
        double P = mhz(u(gen)), A = mhz(u(gen)), k = u(gen);
        auto a = cpt_zero_order(P, A), b = cpt_zero_order(k * P, k * A);
        CHECK(a.rho11 == doctest::Approx(b.rho11).epsilon(1e-15));
        CHECK(std::abs(a.rho13 - b.rho13) < 1e-15);
    }
}

TEST_CASE("dark_state examples")
{
    double W = mhz(1.8), A = mhz(7.6), P = mhz(2.1);
    auto d = dark_state(W, A, P, 0.0);
    CHECK(std::abs(d.c5) == 0.0);
    // (c1, c3) proportional to (A, -P)
    CHECK((d.c3 / d.c1).real() == doctest::Approx(-P / A).epsilon(1e-14));

    d = dark_state(W, A, 0.0, mhz(1));
    CHECK(std::abs(d.c3) == 0.0);
    CHECK(std::abs(d.c5) == 0.0);
    CHECK(std::abs(d.c1) == doctest::Approx(1.0).epsilon(1e-15));

    double w = mhz(2);
    d = dark_state(w, w, w, w);
    double r = 1 / std::sqrt(3.0);
    CHECK(std::abs(d.c1 - cd(r)) < 1e-14);
    CHECK(std::abs(d.c3 - cd(-r)) < 1e-14);
    CHECK(std::abs(d.c5 - cd(r)) < 1e-14);

    CHECK_THROWS(dark_state(0.0, A, 0.0, mhz(1)));
    CHECK_THROWS(dark_state(W, 0.0, 0.0, mhz(1)));
}

TEST_CASE("dark_state amplitudes are normalized")
{
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        auto rnd = [&] { return cd(mhz(5 * u(gen)), mhz(5 * u(gen))); };
        auto d = dark_state(rnd(), rnd(), rnd(), rnd());
        CHECK(std::abs(std::norm(d.c1) + std::norm(d.c3) + std::norm(d.c5) - 1.0) < 1e-12);
    }
}

TEST_CASE("blockade radius inversion and scaling")
{
    double gp = mhz(3);
    double C6 = c6_for_blockade_radius(4.1e-6, gp);
    // quoted as a cyclic coefficient in GHz um^6
    CHECK(C6 / two_pi / 1e9 / 1e-36 == doctest::Approx(7.1).epsilon(0.01));
    CHECK(blockade_radius(C6, gp) == doctest::Approx(4.1e-6).epsilon(1e-14));
    CHECK(blockade_radius(8 * C6, gp) / blockade_radius(C6, gp) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(blockade_radius(0.0, gp), std::domain_error);
    CHECK_THROWS_AS(blockade_radius(C6, -1.0), std::domain_error);
}

TEST_CASE("level shift variance scaling")
{
    double C6 = two_pi * 0.15e9 * 1e-36, n = 2.4e16, R = 4.1e-6, rho = 0.07;
    double v = level_shift_variance(C6, rho, n, R);
    CHECK(v == doctest::Approx(4 * pi * C6 * C6 * rho * n / (9 * std::pow(R, 9))).epsilon(1e-14));
    CHECK(level_shift_variance(C6, 0.0, n, R) == 0.0);
    CHECK(level_shift_variance(C6, rho, 2 * n, R) == doctest::Approx(2 * v).epsilon(1e-14));
    CHECK(level_shift_variance(2 * C6, rho, n, R) == doctest::Approx(4 * v).epsilon(1e-14));
    CHECK(level_shift_variance(C6, rho, n, 2 * R) == doctest::Approx(v / 512).epsilon(1e-14));
    CHECK_THROWS(level_shift_variance(C6, rho, n, 0.0));
}

TEST_CASE("gamma51 is sqrt(N) gamma0 exactly")
{
    double g0 = khz(10.8);
    CHECK(gamma51_of_photon_number(1.0, g0) == g0);
    CHECK(gamma51_of_photon_number(4.0, g0) == 2 * g0);
    CHECK(gamma51_of_photon_number(0.1, g0) / g0 == doctest::Approx(0.3162).epsilon(1e-4));
    CHECK(gamma51_of_photon_number(0.0, g0) == 0.0);
    for (double N : {0.01, 0.3, 2.0, 17.0, 1e4})
        CHECK(gamma51_of_photon_number(N, g0) / g0 == doctest::Approx(std::sqrt(N)).epsilon(1e-15));
}

TEST_CASE("dipole-exchange variance")
{
    double C3 = two_pi * 0.29e9 * 1e-18, n = 2.4e16, R = 4.1e-6, w = 128e-6;
    double v = dde_variance(C3, 1e-6, 0.9, n, R, w);
    CHECK(v == doctest::Approx(4 * pi * C3 * C3 * 1e-6 * n / (3 * 0.9 * R * R * R)).epsilon(1e-14));
    CHECK(dde_variance(C3, 0.0, 0.9, n, R, w) == 0.0);
    CHECK(dde_variance(2 * C3, 1e-6, 0.9, n, R, w) == doctest::Approx(4 * v).epsilon(1e-14));
    CHECK(dde_variance(C3, 1e-6, 0.9, n, R, w, true) ==
          doctest::Approx(v * (1 - std::pow(R / w, 3))).epsilon(1e-14));
    CHECK_THROWS(dde_variance(C3, 1e-6, 0.9, n, w, w));
}

TEST_CASE("motional coherence time")
{
    auto m = motional_coherence(150e-6, 1.3e-6);
    CHECK(m.tau_sw == doctest::Approx(1.7e-6).epsilon(0.03));
    CHECK(m.u == doctest::Approx(std::sqrt(phys.kB * 150e-6 / phys.m_Rb87)).epsilon(1e-14));
    CHECK(motional_coherence(600e-6, 1.3e-6).tau_sw == doctest::Approx(m.tau_sw / 2).epsilon(1e-14));
    CHECK(motional_coherence(150e-6, 2.6e-6).tau_sw == doctest::Approx(2 * m.tau_sw).epsilon(1e-14));
    CHECK_THROWS(motional_coherence(0.0, 1.3e-6));
}

TEST_CASE("spin-wave wavelength conventions")
{
    double kP = two_pi / 780.2e-9, kA = two_pi / 479.7e-9;
    double co = spin_wave_wavelength(kP, kA, BeamGeometry::copropagating);
    double counter = spin_wave_wavelength(kP, kA, BeamGeometry::counterpropagating);
    CHECK(co == doctest::Approx(1.0 / (1.0 / 479.7e-9 - 1.0 / 780.2e-9)).epsilon(1e-12));
    CHECK(co == doctest::Approx(1.3e-6).epsilon(0.05));
    CHECK(counter < 0.5e-6);
    CHECK(spin_wave_wavelength(kA, kP) == co);
    CHECK(spin_wave_wavelength(kP, kP) == std::numeric_limits<double>::infinity());
}

TEST_CASE("dephasing budget at paper parameters")
{
    auto cfg = rtx::test::paper_config();
    auto b = dephasing_budget(cfg);
    CHECK(b.var_33 >= 0);
    CHECK(b.var_35 >= 0);
    CHECK(b.var_55 >= 0);
    CHECK(b.var_45 >= 0);
    CHECK(b.var_55 < b.var_35);
    CHECK(b.var_45 / b.var_35 < 0.1);
    CHECK(b.gamma51 == b.gamma0 * std::sqrt(b.N_bar));
    // within the documented factor of 2 of 2 pi x 10.8 kHz
    CHECK(b.gamma0 / khz(10.8) < 2.0);
    CHECK(b.gamma0 / khz(10.8) > 0.5);
    CHECK(b.tau_sw == doctest::Approx(1.7e-6).epsilon(0.03));
    CHECK(motional_amplitude_factor(0.0, b.tau_sw) == 1.0);
    CHECK(motional_amplitude_factor(b.tau_sw, b.tau_sw) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
}
