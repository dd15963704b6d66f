#pragma once

#include <string>
#include <string_view>

namespace rtx {

enum class Quantity {
    rate,         // cyclic frequency in the file, rad/s in memory
    frequency,    // carrier frequency, Hz
    length,       // m
    time,         // s
    density,      // m^-3
    temperature,  // K
    dipole,       // multiples of e a0
    c6,           // Hz m^6 (cyclic, 2pi applied by the dephasing module)
    c3,           // Hz m^3
    voltage,      // V
    dimensionless
};

std::string_view quantity_name(Quantity q);

// The unit a bare number is taken in when a sweep overrides a key.
std::string_view default_unit(Quantity q);

// "2.1 MHz" -> 1.3194689e7 for Quantity::rate. Throws std::invalid_argument
// with a short reason on a malformed number or a unit that does not fit q.
double parse_quantity(std::string_view text, Quantity q);

}  // namespace rtx
