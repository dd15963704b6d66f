#pragma once

#include <numbers>

namespace rtx {

// CODATA 2018
struct PhysicalConstants {
    double hbar = 1.054571817e-34;   // J s
    double h = 6.62607015e-34;       // J s
    double kB = 1.380649e-23;        // J/K
    double c = 299792458.0;          // m/s
    double eps0 = 8.8541878128e-12;  // F/m
    double mu0 = 1.25663706212e-6;   // H/m
    double e_a0 = 1.602176634e-19 * 5.29177210903e-11;  // C m
    double m_Rb87 = 86.909180527 * 1.66053906660e-27;   // kg
};

inline constexpr PhysicalConstants phys{};

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double ln2 = std::numbers::ln2;

// angular rate from a cyclic frequency given in MHz, and back
constexpr double mhz(double f) { return two_pi * 1e6 * f; }
constexpr double khz(double f) { return two_pi * 1e3 * f; }
constexpr double to_mhz(double w) { return w / (two_pi * 1e6); }
constexpr double to_khz(double w) { return w / (two_pi * 1e3); }

}  // namespace rtx
