#include "rtx/cpt.hpp"

#include <cmath>
#include <stdexcept>

namespace rtx {

CptState cpt_zero_order(cd omega_P, cd omega_A)
{
    double p2 = std::norm(omega_P);
    double a2 = std::norm(omega_A);
    double s = p2 + a2;
    if (s == 0.0) throw std::domain_error("cpt_zero_order: Omega_P and Omega_A both zero, trapped state undefined");
    return {a2 / s, p2 / s, -omega_P * omega_A / s};
}

DarkStateAmplitudes dark_state(cd omega_W, cd omega_A, cd omega_P, cd omega_M)
{
    cd c1 = std::conj(omega_W) * std::conj(omega_A);
    cd c3 = -std::conj(omega_W) * omega_P;
    cd c5 = std::conj(omega_M) * omega_P;
    double n = std::sqrt(std::norm(c1) + std::norm(c3) + std::norm(c5));
    if (n == 0.0) throw std::domain_error("dark_state: all amplitude products vanish, state undefined");
    return {c1 / n, c3 / n, c5 / n};
}

}  // namespace rtx
