#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

#include "rtx/config.hpp"

namespace rtx {

using cd = std::complex<double>;

// Raised when the step size is too coarse for the field-coupling rates.
class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Write/read control envelopes on the co-moving time axis. The write field
// is Omega_W until write_off - write_ramp and falls linearly to zero at
// write_off; the read field rises linearly from read_on.
struct ControlSchedule {
    double Omega_W = 0, Omega_R = 0;
    double write_off = 0, write_ramp = 10e-9;
    double read_on = 0, read_ramp = 10e-9;
    bool write_constant = false;  // never switch the write field off

    double W(double t) const;
    double R(double t) const;
};

// Default sequence for a config: write switched off t_dM/2 after the pulse
// centre (or storage.write_off when given), read switched on after the hold.
ControlSchedule make_schedule(const TransducerConfig& cfg);

enum class Direction { forward, backward };

struct SpinWaveField {
    Eigen::VectorXd z, t;                    // m, s (recorded samples)
    Eigen::MatrixXcd Omega_M, Omega_L;       // rows z, cols t; empty when not recorded
    Eigen::MatrixXcd P41, P51, P61;
    Direction direction = Direction::forward;
    double max_coherence = 0;
    bool weak_violation = false;             // |P| exceeded the perturbative bound
};

struct SolverOptions {
    cd input_scale = 1.0;      // multiplies Omega_M(0, t)
    double detuning = 0.0;     // carrier offset of the input pulse, rad/s
    bool keep_history = false;
};

inline constexpr double weak_excitation_bound = 0.1;

struct StorageResult {
    SpinWaveField field;
    Eigen::VectorXd t;          // s, lab time at z = L
    Eigen::VectorXcd input;     // Omega_M(0, t)
    Eigen::VectorXcd output;    // Omega_M(L, t)
    Eigen::VectorXcd spin_wave; // P51(z) at write turn-off
    Eigen::VectorXcd P41_final; // P41(z) at the end of the write phase
    double input_measure = 0;   // int |Omega_in|^2 dt / (d_M Gamma4), whole pulse
    double stored_fraction = 0;
    double transmitted_fraction = 0;
};

struct RetrievalResult {
    SpinWaveField field;
    Eigen::VectorXd t;
    Eigen::VectorXcd output;    // Omega_L(L, t)
    double output_measure = 0;  // int |Omega_L|^2 dt / (d_L Gamma6)
    double retrieved_fraction = 0;  // of the spin-wave excitation
};

struct TransductionResult {
    StorageResult storage;
    RetrievalResult retrieval;
    ControlSchedule schedule;
    double hold_factor = 1;     // amplitude factor applied during the hold
    double eta_sim = 0;
    bool weak_violation = false;
};

struct TransmissionResult {
    Eigen::VectorXd t;
    Eigen::VectorXcd input, output;
    double energy_ratio = 0;     // int |out|^2 / int |in|^2
    double peak_delay = 0;       // argmax |out| - t0
    double excitation_in = 0;    // flux measure absorbed over the window
    double excitation_medium = 0;// sum |P|^2 dz left in the medium at the end
};

StorageResult simulate_storage(const TransducerConfig& cfg, const ControlSchedule& schedule,
                               const SolverOptions& opt = {});

RetrievalResult simulate_retrieval(const Eigen::VectorXcd& spin_wave, const TransducerConfig& cfg,
                                   const ControlSchedule& schedule, Direction direction,
                                   const SolverOptions& opt = {});

TransductionResult simulate_full_transduction(const TransducerConfig& cfg, const SolverOptions& opt = {});

// Constant write field, no turn-off: slow-light transmission of the input.
TransmissionResult simulate_transmission(const TransducerConfig& cfg, const SolverOptions& opt = {},
                                         double window_end = 0.0);

// Group delay d arg H / d omega at omega = 0 of the solver's constant-control
// transfer function, read off from the centroid shift of a spectrally narrow
// probe (default FWHM keeps the probe spectrum clear of the Autler-Townes
// poles at +-Omega_W/2, whose slowly damped ringing would otherwise bias the
// centroid).
double solver_group_delay(const TransducerConfig& cfg, double probe_fwhm = 0.0);

// Input pulse window start used by the solver.
double solver_window_start(const TransducerConfig& cfg);

}  // namespace rtx
