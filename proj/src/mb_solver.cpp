#include "rtx/mb_solver.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>

#include "rtx/dephasing.hpp"

namespace rtx {

namespace {

using State = Eigen::Matrix<cd, 3, Eigen::Dynamic>;
const cd I(0.0, 1.0);

// One phase of the sequence (write or read). Rows of the state are
// P41, P51, P61. Only the source row `src` feeds the propagating field
// F(z) = boundary(t) + a * int_0^z P_src dz', and F feeds back into the
// same row with coefficient b. Everything else is the local 3x3 block,
// integrated exactly.
struct Phase {
    int src = 0;
    cd a, b;
    std::function<cd(double)> boundary;
    std::function<Eigen::Matrix3cd(double)> block;  // local generator at time t
    double dz = 0;
    int Nz = 0;

    void field(const State& Y, double t, Eigen::VectorXcd& F) const
    {
        cd acc = 0.0;
        F(0) = boundary(t);
        for (int j = 1; j < Nz; ++j) {
            acc += 0.5 * dz * (Y(src, j) + Y(src, j - 1));
            F(j) = F(0) + a * acc;
        }
    }

    State nonlinear(const State& Y, double t, Eigen::VectorXcd& F) const
    {
        field(Y, t, F);
        State N = State::Zero(3, Nz);
        N.row(src) = (b * F).transpose();
        return N;
    }
};

struct Recorder {
    bool keep = false;
    int stride = 1;
    std::vector<double> t;
    std::vector<Eigen::VectorXcd> F, P41, P51, P61;

    void push(double time, const State& Y, const Eigen::VectorXcd& field)
    {
        t.push_back(time);
        F.push_back(field);
        P41.push_back(Y.row(0).transpose());
        P51.push_back(Y.row(1).transpose());
        P61.push_back(Y.row(2).transpose());
    }

    static Eigen::MatrixXcd stack(const std::vector<Eigen::VectorXcd>& cols)
    {
        if (cols.empty()) return {};
        Eigen::MatrixXcd m(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = cols[k];
        return m;
    }
};

struct PhaseOutput {
    Eigen::VectorXd t;
    Eigen::VectorXcd out;  // field at z = L
    State Y;
    double max_coherence = 0;
};

// Lawson (integrating-factor) RK4 with the local block frozen at the
// step midpoint.
PhaseOutput integrate(const Phase& ph, State Y, double t_start, double h, int steps, Recorder& rec)
{
    PhaseOutput o;
    o.t.resize(steps + 1);
    o.out.resize(steps + 1);
    Eigen::VectorXcd F(ph.Nz);

    Eigen::Matrix3cd Akey = Eigen::Matrix3cd::Constant(cd(NAN, NAN));
    Eigen::Matrix3cd E, Eh;
    for (int n = 0; n <= steps; ++n) {
        const double t = t_start + n * h;
        State k1 = ph.nonlinear(Y, t, F);
        o.t(n) = t;
        o.out(n) = F(ph.Nz - 1);
        o.max_coherence = std::max(o.max_coherence, Y.cwiseAbs().maxCoeff());
        if (rec.keep && n % rec.stride == 0) rec.push(t, Y, F);
        if (n == steps) break;

        Eigen::Matrix3cd A = ph.block(t + 0.5 * h);
        if (A != Akey) {
            Akey = A;
            E = (A * h).exp();
            Eh = (A * (0.5 * h)).exp();
        }
        State k2 = ph.nonlinear(Eh * (Y + 0.5 * h * k1), t + 0.5 * h, F);
        State k3 = ph.nonlinear(Eh * Y + 0.5 * h * k2, t + 0.5 * h, F);
        State k4 = ph.nonlinear(E * Y + h * (Eh * k3), t + h, F);
        Y = E * Y + (h / 6.0) * (E * k1 + 2.0 * (Eh * (k2 + k3)) + k4);
    }
    o.Y = std::move(Y);
    return o;
}

double trapz_abs2(const Eigen::VectorXcd& f, double h)
{
    if (f.size() < 2) return 0.0;
    double s = f.cwiseAbs2().sum() - 0.5 * (std::norm(f(0)) + std::norm(f(f.size() - 1)));
    return s * h;
}

double gaussian_energy(double amp2, double T_p) { return amp2 * T_p * std::sqrt(pi / (4.0 * ln2)); }

void check_grid(const TransducerConfig& cfg)
{
    const auto& en = cfg.ensemble;
    const auto& lv = cfg.levels;
    if (!cfg.grid.co_moving)
        throw GridError("mb-solver: only the co-moving frame is implemented (set grid.co_moving)");
    if (cfg.grid.Nz < 8) throw GridError("mb-solver: need at least 8 spatial points");
    const double h = cfg.grid.dt;
    double rate_M = 0.25 * en.rho33 * en.d_M * lv.Gamma4;
    double rate_L = 0.25 * en.rho11 * en.d_L * lv.Gamma6;
    double rate_ctrl = 0.5 * std::max(cfg.fields.W.rabi, cfg.fields.R.rabi);
    double worst = h * std::max({rate_M, rate_L});
    if (worst > 1.0)
        throw GridError("mb-solver: time step too coarse for the field coupling (dt * rate = " + std::to_string(worst)
                        + " > 1); refine grid.dt");
    (void)rate_ctrl;  // control couplings are integrated exactly
}

Eigen::VectorXd z_axis(const TransducerConfig& cfg)
{
    return Eigen::VectorXd::LinSpaced(cfg.grid.Nz, 0.0, cfg.ensemble.L);
}

SpinWaveField make_field(const TransducerConfig& cfg, Recorder& rec, bool write, Direction dir, double t_shift)
{
    SpinWaveField f;
    f.direction = dir;
    if (!rec.keep) return f;
    f.z = z_axis(cfg);
    f.t = Eigen::Map<Eigen::VectorXd>(rec.t.data(), static_cast<Eigen::Index>(rec.t.size())).array() + t_shift;
    (write ? f.Omega_M : f.Omega_L) = Recorder::stack(rec.F);
    f.P41 = Recorder::stack(rec.P41);
    f.P51 = Recorder::stack(rec.P51);
    f.P61 = Recorder::stack(rec.P61);
    return f;
}

double excitation(const Eigen::VectorXcd& p, double dz) { return trapz_abs2(p, dz); }

}  // namespace

double ControlSchedule::W(double t) const
{
    if (write_constant) return Omega_W;
    if (t >= write_off) return 0.0;
    if (write_ramp <= 0 || t <= write_off - write_ramp) return Omega_W;
    return Omega_W * (write_off - t) / write_ramp;
}

double ControlSchedule::R(double t) const
{
    if (t <= read_on) return 0.0;
    if (read_ramp <= 0 || t >= read_on + read_ramp) return Omega_R;
    return Omega_R * (t - read_on) / read_ramp;
}

double solver_window_start(const TransducerConfig& cfg)
{
    double lead = cfg.grid.lead_time > 0 ? cfg.grid.lead_time : 4.0 * cfg.pulse.T_p;
    return cfg.pulse.t0 - lead;
}

ControlSchedule make_schedule(const TransducerConfig& cfg)
{
    ControlSchedule s;
    s.Omega_W = cfg.fields.W.rabi;
    s.Omega_R = cfg.fields.R.rabi;
    s.write_ramp = cfg.storage.write_ramp;
    s.read_ramp = cfg.storage.read_ramp;
    double offset = cfg.storage.write_off;
    if (offset < 0) {
        double Ow = cfg.fields.W.rabi;
        double t_dM = Ow > 0 ? cfg.levels.Gamma4 * cfg.ensemble.rho33 * cfg.ensemble.d_M / (Ow * Ow) : 0.0;
        offset = 0.5 * t_dM;
    }
    s.write_off = cfg.pulse.t0 + std::max(offset, 0.0);
    s.read_on = s.write_off + cfg.storage.hold;
    return s;
}

namespace {

StorageResult run_write(const TransducerConfig& cfg, const ControlSchedule& schedule, const SolverOptions& opt,
                        double t_end)
{
    check_grid(cfg);
    const auto& en = cfg.ensemble;
    const auto& lv = cfg.levels;
    const int Nz = cfg.grid.Nz;
    const double L = en.L;
    const double dz = L / (Nz - 1);
    const double h = cfg.grid.dt;

    const cd rho13 = -std::sqrt(en.rho11 * en.rho33);
    Phase ph;
    ph.src = 0;
    ph.Nz = Nz;
    ph.dz = dz;
    ph.a = en.rho11 > 0 ? 0.5 * I * (std::conj(rho13) / en.rho11) * (en.d_M / L) * lv.Gamma4 : cd(0.0);
    ph.b = 0.5 * I * rho13;
    const cd amp = opt.input_scale * cfg.pulse.Omega_M0;
    const double t0 = cfg.pulse.t0, Tp = cfg.pulse.T_p, delta = opt.detuning;
    ph.boundary = [=](double t) {
        double s = t - t0;
        return amp * std::exp(-2.0 * ln2 * s * s / (Tp * Tp)) * std::exp(-I * delta * s);
    };
    const double g41 = lv.gamma41, g51 = lv.gamma51, g61 = lv.gamma61;
    ph.block = [&schedule, g41, g51, g61](double t) {
        double w = schedule.W(t);
        Eigen::Matrix3cd A;
        A << -g41, 0.5 * I * w, 0.0, 0.5 * I * w, -g51, 0.0, 0.0, 0.0, -g61;
        return A;
    };

    const double t_start = solver_window_start(cfg);
    const int steps = std::max(1, static_cast<int>(std::ceil((t_end - t_start) / h - 1e-9)));

    Recorder rec;
    rec.keep = opt.keep_history;
    rec.stride = cfg.grid.history_stride;
    PhaseOutput o = integrate(ph, State::Zero(3, Nz), t_start, h, steps, rec);

    StorageResult r;
    const double vac = L / phys.c;
    r.t = o.t.array() + vac;
    r.input.resize(o.t.size());
    for (Eigen::Index k = 0; k < o.t.size(); ++k) r.input(k) = ph.boundary(o.t(k));
    r.output = o.out;
    r.spin_wave = o.Y.row(1).transpose();
    r.P41_final = o.Y.row(0).transpose();
    r.field = make_field(cfg, rec, true, Direction::forward, vac);
    r.field.max_coherence = o.max_coherence;
    r.field.weak_violation = o.max_coherence > weak_excitation_bound;

    const double E_in = gaussian_energy(std::norm(amp), Tp);
    if (en.d_M > 0 && lv.Gamma4 > 0) {
        r.input_measure = E_in / (en.d_M * lv.Gamma4);
        double photons_in = E_in * en.rho11 * L / (en.d_M * lv.Gamma4);
        r.stored_fraction = photons_in > 0 ? excitation(r.spin_wave, dz) / photons_in : 0.0;
    }
    r.transmitted_fraction = E_in > 0 ? trapz_abs2(r.output, h) / E_in : 0.0;
    return r;
}

}  // namespace

StorageResult simulate_storage(const TransducerConfig& cfg, const ControlSchedule& schedule, const SolverOptions& opt)
{
    if (schedule.write_constant)
        throw std::invalid_argument("simulate_storage: schedule never switches the write field off");
    return run_write(cfg, schedule, opt, schedule.write_off);
}

RetrievalResult simulate_retrieval(const Eigen::VectorXcd& spin_wave, const TransducerConfig& cfg,
                                   const ControlSchedule& schedule, Direction direction, const SolverOptions& opt)
{
    check_grid(cfg);
    const auto& en = cfg.ensemble;
    const auto& lv = cfg.levels;
    const int Nz = cfg.grid.Nz;
    if (spin_wave.size() != Nz) throw std::invalid_argument("simulate_retrieval: spin wave does not match grid.nz");
    const double L = en.L;
    const double dz = L / (Nz - 1);
    const double h = cfg.grid.dt;

    Phase ph;
    ph.src = 2;
    ph.Nz = Nz;
    ph.dz = dz;
    ph.a = 0.5 * I * (en.d_L / L) * lv.Gamma6;
    ph.b = 0.5 * I * en.rho11;
    ph.boundary = [](double) { return cd(0.0); };
    const double g41 = lv.gamma41, g51 = lv.gamma51, g61 = lv.gamma61;
    ph.block = [&schedule, g41, g51, g61](double t) {
        double r = schedule.R(t);
        Eigen::Matrix3cd A;
        A << -g41, 0.0, 0.0, 0.0, -g51, 0.5 * I * r, 0.0, 0.5 * I * r, -g61;
        return A;
    };

    State Y = State::Zero(3, Nz);
    if (direction == Direction::backward)
        Y.row(1) = spin_wave.reverse().transpose();
    else
        Y.row(1) = spin_wave.transpose();

    const int steps = std::max(1, static_cast<int>(std::ceil(cfg.grid.read_window / h - 1e-9)));
    Recorder rec;
    rec.keep = opt.keep_history;
    rec.stride = cfg.grid.history_stride;
    PhaseOutput o = integrate(ph, Y, schedule.read_on, h, steps, rec);

    RetrievalResult r;
    const double vac = L / phys.c;
    r.t = o.t.array() + vac;
    r.output = o.out;
    r.field = make_field(cfg, rec, false, direction, vac);
    r.field.max_coherence = o.max_coherence;
    r.field.weak_violation = o.max_coherence > weak_excitation_bound;
    const double flux = trapz_abs2(r.output, h);
    if (en.d_L > 0 && lv.Gamma6 > 0) {
        r.output_measure = flux / (en.d_L * lv.Gamma6);
        double stored = excitation(spin_wave, dz);
        r.retrieved_fraction = stored > 0 ? flux * en.rho11 * L / (en.d_L * lv.Gamma6) / stored : 0.0;
    }
    return r;
}

TransductionResult simulate_full_transduction(const TransducerConfig& cfg, const SolverOptions& opt)
{
    TransductionResult res;
    res.schedule = make_schedule(cfg);
    res.storage = simulate_storage(cfg, res.schedule, opt);

    double f = std::exp(-cfg.levels.gamma51 * cfg.storage.hold);
    if (cfg.storage.motional_dephasing) {
        auto b = dephasing_budget(cfg);
        f *= motional_amplitude_factor(cfg.storage.hold, b.tau_sw);
    }
    res.hold_factor = f;
    Eigen::VectorXcd wave = res.storage.spin_wave * f;
    Direction dir = cfg.storage.backward ? Direction::backward : Direction::forward;
    res.retrieval = simulate_retrieval(wave, cfg, res.schedule, dir, opt);

    if (res.storage.input_measure > 0) res.eta_sim = res.retrieval.output_measure / res.storage.input_measure;
    res.weak_violation = res.storage.field.weak_violation || res.retrieval.field.weak_violation;
    return res;
}

TransmissionResult simulate_transmission(const TransducerConfig& cfg, const SolverOptions& opt, double window_end)
{
    const auto& en = cfg.ensemble;
    const auto& lv = cfg.levels;
    ControlSchedule s = make_schedule(cfg);
    s.write_constant = true;

    const double t_start = solver_window_start(cfg);
    const double Ow = cfg.fields.W.rabi;
    const double t_dM = Ow > 0 ? lv.Gamma4 * en.rho33 * en.d_M / (Ow * Ow) : 0.0;
    if (window_end <= 0) window_end = cfg.pulse.t0 + (cfg.pulse.t0 - t_start) + 4.0 * t_dM + 4.0 * cfg.pulse.T_p;
    StorageResult st = run_write(cfg, s, opt, window_end);

    TransmissionResult r;
    r.t = st.t;
    r.input = st.input;
    r.output = st.output;
    const double h = cfg.grid.dt;
    const double E_in = trapz_abs2(st.input, h);
    const double E_out = trapz_abs2(st.output, h);
    r.energy_ratio = E_in > 0 ? E_out / E_in : 0.0;

    Eigen::Index kmax = 0;
    r.output.cwiseAbs().maxCoeff(&kmax);
    r.peak_delay = r.t(kmax) - cfg.pulse.t0;

    if (en.d_M > 0 && lv.Gamma4 > 0) {
        const double dz = en.L / (cfg.grid.Nz - 1);
        r.excitation_in = (E_in - E_out) * en.rho11 * en.L / (en.d_M * lv.Gamma4);
        r.excitation_medium = excitation(st.P41_final, dz) + excitation(st.spin_wave, dz);
    }
    return r;
}

double solver_group_delay(const TransducerConfig& cfg, double probe_fwhm)
{
    const auto& en = cfg.ensemble;
    const auto& lv = cfg.levels;
    const double Ow = cfg.fields.W.rabi;
    if (probe_fwhm <= 0) probe_fwhm = Ow > 0 ? std::max(2e-6, 24.0 / Ow) : 2e-6;
    const double t_dM = Ow > 0 ? lv.Gamma4 * en.rho33 * en.d_M / (Ow * Ow) : 0.0;

    TransducerConfig c = cfg;
    c.pulse.T_p = probe_fwhm;
    c.grid.lead_time = 4.0 * probe_fwhm;
    TransmissionResult tr = simulate_transmission(c, {}, c.pulse.t0 + 4.0 * probe_fwhm + 4.0 * t_dM);

    // centroid shift of the complex envelopes: Re(M1/M0)_out - Re(M1/M0)_in
    // equals d arg H / d omega at omega = 0 when both are fully captured
    const double vac = en.L / phys.c;
    cd m0o = 0.0, m1o = 0.0, m0i = 0.0, m1i = 0.0;
    for (Eigen::Index k = 0; k < tr.t.size(); ++k) {
        m0o += tr.output(k);
        m1o += tr.t(k) * tr.output(k);
        m0i += tr.input(k);
        m1i += (tr.t(k) - vac) * tr.input(k);
    }
    if (std::abs(m0o) == 0.0 || std::abs(m0i) == 0.0)
        throw std::domain_error("solver_group_delay: no transmitted signal");
    return (m1o / m0o).real() - (m1i / m0i).real();
}

}  // namespace rtx
