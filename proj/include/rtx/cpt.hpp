#pragma once

#include <complex>

namespace rtx {

using cd = std::complex<double>;

// Zero-order populations and coherence of the |1>-|2>-|3> trapping triad.
struct CptState {
    double rho11 = 1.0;
    double rho33 = 0.0;
    cd rho13 = 0.0;
};

struct DarkStateAmplitudes {
    cd c1, c3, c5;
};

// Inputs may be complex; the formulas are applied verbatim
// (rho13 = -Omega_P Omega_A / (|Omega_P|^2 + |Omega_A|^2)).
CptState cpt_zero_order(cd omega_P, cd omega_A);

// Normalized (c1, c3, c5) proportional to
// (W* A*, -W* P, M* P).
DarkStateAmplitudes dark_state(cd omega_W, cd omega_A, cd omega_P, cd omega_M);

}  // namespace rtx
