#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtx/constants.hpp"
#include "rtx/units.hpp"

namespace rtx {

// Thrown for both syntax problems and invariant violations. `field` is
// "section.key" when the problem is tied to one entry, `line` is 0 when
// unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, int line, const std::string& what);
    const std::string& field() const { return field_; }
    int line() const { return line_; }

private:
    std::string field_;
    int line_;
};

struct Field {
    double rabi = 0.0;        // rad/s
    double frequency = 0.0;   // Hz
    double wavelength = 0.0;  // m
    std::string polarization;
    double dipole = 0.0;      // e a0
    double radius = 0.0;      // m, 0 when not given
};

// P, A: CPT pump pair on |1>-|2>-|3>; W, R: write/read controls;
// M: microwave signal on |3>-|4>; L: optical output on |1>-|6>.
struct FieldParams {
    Field P, A, W, R, M, L;
};

struct LevelScheme {
    double Gamma2 = 0.0, Gamma4 = 0.0, Gamma6 = 0.0;  // rad/s
    double gamma3 = 0.0;
    double gamma41 = 0.0, gamma51 = 0.0, gamma61 = 0.0;
    bool gamma41_is_Gamma4 = true;
    bool gamma61_is_half_Gamma6 = true;
    std::string gamma51_preset;  // "prediction", "fit" or empty for a literal value
};

struct EnsembleParams {
    double n_at = 0.0;     // m^-3
    double L = 0.0;        // m
    double r_med = 0.0;    // m
    double w_A = 0.0;      // m
    double d0 = 0.0;
    double T_atoms = 0.0;  // K

    double rho11 = 0.0, rho33 = 0.0;
    bool rho_from_cpt = true;

    double sigma_M = 0.0, sigma_L = 0.0;  // m^2
    double d_M = 0.0, d_L = 0.0;
    bool d_M_given = false, d_L_given = false;
    double n1 = 0.0, n3 = 0.0;  // m^-3
};

struct PulseSpec {
    double Omega_M0 = 0.0;  // rad/s
    double T_p = 0.0;       // intensity FWHM, s
    double N_bar = 0.0;
    double t0 = 0.0;        // s
};

struct SolverGrid {
    int Nz = 201;
    int Nt = 0;            // filled by the solver from the schedule
    double dz = 0.0;       // m
    double dt = 1e-9;      // s
    bool co_moving = true;
    double lead_time = 0.0;    // window start before the pulse centre, s (0: 4 T_p)
    double read_window = 3e-6; // s
    int history_stride = 1;
};

struct StorageParams {
    double hold = 50e-9;        // s
    double write_ramp = 10e-9;  // s
    double read_ramp = 10e-9;   // s
    double write_off = -1.0;    // end of write ramp after pulse centre, s; <0 means t_dM/2
    double t_dL = 123e-9;       // measured optical delay, s
    double T_pL = 620e-9;       // s
    double eta_s = 1.0, eta_c = 1.0;
    bool backward = true;
    bool motional_dephasing = false;
};

struct InteractionParams {
    double C6_33 = 0.0, C6_55 = 0.0, Cbar6_35 = 0.0;  // Hz m^6, cyclic as quoted
    double C3 = 0.0, C3_prime = 0.0;                  // Hz m^3
    double gamma_pump = 0.0;                          // rad/s
    double R_B = 0.0;                                 // m, 0: derive from C6_33
    double w = 0.0;                                   // m
    bool coefficients_cyclic = true;
    bool rho33_from_cpt = true;
};

struct ThermalParams {
    double nu = 0.0;          // Hz, 0: microwave carrier
    double T_env = 300.0;     // K
    double bandwidth = 2.1e6; // Hz
    double tau_int = 550e-9;  // s
    double eta_max = 0.93;
    double n_st = 0.01;
};

struct StatisticsParams {
    double spectrum_fwhm = mhz(2.1);  // rad/s
    double window = 512e-9;           // s
    long pulses = 1000000;
    double tau_coh = 0.0;             // s, 0: from g1
};

struct CalibrationParams {
    double w_P = 54e-6, r_rear = 79e-6;  // m
    double t_optics = 0.91, t_filter = 0.80, t_fiber = 0.83, qe = 0.65;
    double mixer_amplitude = 1.0;   // rad/s at the response peak
    double mixer_center = 0.200;    // V
    double mixer_width = 0.07207;   // V
    double mixer_floor = 0.0;       // rad/s
    double if_peak = 0.200;         // V
    double if_duration = 1e-6;      // s
};

struct TransducerConfig {
    PhysicalConstants constants;
    FieldParams fields;
    LevelScheme levels;
    EnsembleParams ensemble;
    PulseSpec pulse;
    SolverGrid grid;
    StorageParams storage;
    InteractionParams interaction;
    ThermalParams thermal;
    StatisticsParams statistics;
    CalibrationParams calibration;
};

// Raw key/value view of a config file, remembered with line numbers so
// that later validation can point at the offending line.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static ConfigFile parse(const std::filesystem::path& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const Entry& at(const std::string& key) const;
    void set(const std::string& key, const std::string& value);
    const std::map<std::string, Entry>& entries() const { return entries_; }
    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, Entry> entries_;  // "section.key"
    std::string origin_;
};

// Kind of a known "section.key"; throws ConfigError for unknown keys.
Quantity key_quantity(const std::string& key);
bool key_is_numeric(const std::string& key);
std::vector<std::string> known_keys();

TransducerConfig build_config(const ConfigFile& file);
TransducerConfig load_config(const std::filesystem::path& path);

// Rechecks every invariant; throws ConfigError naming the field.
void validate(const TransducerConfig& cfg);

// sigma_M, sigma_L, n1, n3 and (unless given explicitly) d_M, d_L.
EnsembleParams derive_cross_sections(const TransducerConfig& cfg);

// Named gamma51 presets (rad/s).
double gamma51_prediction();
double gamma51_fit();

}  // namespace rtx
