#include "rtx/units.hpp"

#include <charconv>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rtx/constants.hpp"

namespace rtx {

namespace {

using UnitTable = std::vector<std::pair<std::string_view, double>>;

const UnitTable& units_for(Quantity q)
{
    static const UnitTable rate{{"Hz", two_pi}, {"kHz", two_pi * 1e3}, {"MHz", two_pi * 1e6},
                                {"GHz", two_pi * 1e9}, {"rad/s", 1.0}};
    static const UnitTable freq{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}, {"THz", 1e12}};
    static const UnitTable length{{"nm", 1e-9}, {"um", 1e-6}, {"µm", 1e-6}, {"mm", 1e-3},
                                  {"cm", 1e-2}, {"m", 1.0}};
    static const UnitTable time{{"ps", 1e-12}, {"ns", 1e-9}, {"us", 1e-6}, {"µs", 1e-6},
                                {"ms", 1e-3}, {"s", 1.0}};
    static const UnitTable density{{"cm^-3", 1e6}, {"m^-3", 1.0}};
    static const UnitTable temperature{{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}, {"µK", 1e-6}};
    static const UnitTable dipole{{"ea0", 1.0}};
    static const UnitTable c6{{"GHz um^6", 1e9 * 1e-36}, {"GHz µm^6", 1e9 * 1e-36}, {"Hz m^6", 1.0}};
    static const UnitTable c3{{"GHz um^3", 1e9 * 1e-18}, {"GHz µm^3", 1e9 * 1e-18}, {"Hz m^3", 1.0}};
    static const UnitTable voltage{{"V", 1.0}, {"mV", 1e-3}};
    static const UnitTable none{};
    switch (q) {
    case Quantity::rate: return rate;
    case Quantity::frequency: return freq;
    case Quantity::length: return length;
    case Quantity::time: return time;
    case Quantity::density: return density;
    case Quantity::temperature: return temperature;
    case Quantity::dipole: return dipole;
    case Quantity::c6: return c6;
    case Quantity::c3: return c3;
    case Quantity::voltage: return voltage;
    case Quantity::dimensionless: return none;
    }
    return none;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view quantity_name(Quantity q)
{
    switch (q) {
    case Quantity::rate: return "rate";
    case Quantity::frequency: return "frequency";
    case Quantity::length: return "length";
    case Quantity::time: return "time";
    case Quantity::density: return "density";
    case Quantity::temperature: return "temperature";
    case Quantity::dipole: return "dipole";
    case Quantity::c6: return "C6 coefficient";
    case Quantity::c3: return "C3 coefficient";
    case Quantity::voltage: return "voltage";
    case Quantity::dimensionless: return "number";
    }
    return "?";
}

std::string_view default_unit(Quantity q)
{
    switch (q) {
    case Quantity::rate: return "MHz";
    case Quantity::frequency: return "GHz";
    case Quantity::length: return "mm";
    case Quantity::time: return "ns";
    case Quantity::density: return "cm^-3";
    case Quantity::temperature: return "K";
    case Quantity::dipole: return "ea0";
    case Quantity::c6: return "GHz um^6";
    case Quantity::c3: return "GHz um^3";
    case Quantity::voltage: return "mV";
    case Quantity::dimensionless: return "";
    }
    return "";
}

double parse_quantity(std::string_view text, Quantity q)
{
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr == text.data())
        throw std::invalid_argument("expected a number, got '" + std::string(text) + "'");
    std::string_view unit = trim(std::string_view(ptr, text.data() + text.size() - ptr));

    if (q == Quantity::dimensionless) {
        if (!unit.empty())
            throw std::invalid_argument("unexpected unit '" + std::string(unit) + "' on a plain number");
        return value;
    }
    if (unit.empty())
        throw std::invalid_argument(std::string(quantity_name(q)) + " needs an explicit unit (e.g. "
                                    + std::string(default_unit(q)) + ")");
    for (const auto& [name, scale] : units_for(q))
        if (unit == name) return value * scale;
    throw std::invalid_argument("unit '" + std::string(unit) + "' is not a " + std::string(quantity_name(q))
                                + " unit");
}

}  // namespace rtx
