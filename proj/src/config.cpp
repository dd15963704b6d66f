#include "rtx/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "rtx/calibration.hpp"
#include "rtx/cpt.hpp"

namespace rtx {

ConfigError::ConfigError(std::string field, int line, const std::string& what)
    : std::runtime_error(what), field_(std::move(field)), line_(line)
{
}

namespace {

enum class Kind { number, integer, boolean, text };

struct KeyInfo {
    Kind kind;
    Quantity q = Quantity::dimensionless;
};

const std::map<std::string, KeyInfo>& registry()
{
    static const std::map<std::string, KeyInfo> reg = [] {
        std::map<std::string, KeyInfo> r;
        auto num = [&](const std::string& k, Quantity q) { r[k] = {Kind::number, q}; };
        for (const char* f : {"p", "a", "w", "r", "m", "l"}) {
            std::string s(f);
            num("fields.omega_" + s, Quantity::rate);
            num("fields.lambda_" + s, Quantity::length);
            num("fields.freq_" + s, Quantity::frequency);
            num("fields.mu_" + s, Quantity::dipole);
            num("fields.radius_" + s, Quantity::length);
            r["fields.pol_" + s] = {Kind::text};
        }
        for (const char* k : {"gamma2", "gamma4", "gamma6", "gamma3", "gamma41", "gamma61"})
            num(std::string("levels.") + k, Quantity::rate);
        r["levels.gamma51"] = {Kind::text, Quantity::rate};

        num("ensemble.n_at", Quantity::density);
        num("ensemble.length", Quantity::length);
        num("ensemble.radius", Quantity::length);
        num("ensemble.w_a", Quantity::length);
        num("ensemble.d0", Quantity::dimensionless);
        num("ensemble.temperature", Quantity::temperature);
        num("ensemble.rho11", Quantity::dimensionless);
        num("ensemble.rho33", Quantity::dimensionless);
        num("ensemble.d_m", Quantity::dimensionless);
        num("ensemble.d_l", Quantity::dimensionless);

        num("pulse.t_p", Quantity::time);
        num("pulse.t0", Quantity::time);
        num("pulse.n_bar", Quantity::dimensionless);
        num("pulse.omega_m0", Quantity::rate);

        r["grid.nz"] = {Kind::integer};
        r["grid.history_stride"] = {Kind::integer};
        num("grid.dt", Quantity::time);
        num("grid.lead_time", Quantity::time);
        num("grid.read_window", Quantity::time);

        num("storage.hold", Quantity::time);
        num("storage.write_ramp", Quantity::time);
        num("storage.read_ramp", Quantity::time);
        num("storage.write_off", Quantity::time);
        num("storage.t_dl", Quantity::time);
        num("storage.t_pl", Quantity::time);
        num("storage.eta_s", Quantity::dimensionless);
        num("storage.eta_c", Quantity::dimensionless);
        r["storage.direction"] = {Kind::text};
        r["storage.motional_dephasing"] = {Kind::boolean};

        num("dephasing.c6_33", Quantity::c6);
        num("dephasing.c6_55", Quantity::c6);
        num("dephasing.c6_35", Quantity::c6);
        num("dephasing.c3", Quantity::c3);
        num("dephasing.c3_prime", Quantity::c3);
        num("dephasing.gamma_pump", Quantity::rate);
        num("dephasing.r_b", Quantity::length);
        num("dephasing.w", Quantity::length);
        r["dephasing.coefficients_cyclic"] = {Kind::boolean};
        r["dephasing.rho33_source"] = {Kind::text};

        num("thermal.nu", Quantity::frequency);
        num("thermal.t_env", Quantity::temperature);
        num("thermal.bandwidth", Quantity::frequency);
        num("thermal.tau_int", Quantity::time);
        num("thermal.eta_max", Quantity::dimensionless);
        num("thermal.n_st", Quantity::dimensionless);

        num("statistics.spectrum_fwhm", Quantity::rate);
        num("statistics.window", Quantity::time);
        num("statistics.tau_coh", Quantity::time);
        r["statistics.pulses"] = {Kind::integer};

        num("calibration.w_p", Quantity::length);
        num("calibration.r_rear", Quantity::length);
        num("calibration.t_optics", Quantity::dimensionless);
        num("calibration.t_filter", Quantity::dimensionless);
        num("calibration.t_fiber", Quantity::dimensionless);
        num("calibration.qe", Quantity::dimensionless);
        num("calibration.mixer_amplitude", Quantity::rate);
        num("calibration.mixer_center", Quantity::voltage);
        num("calibration.mixer_width", Quantity::voltage);
        num("calibration.mixer_floor", Quantity::rate);
        num("calibration.if_peak", Quantity::voltage);
        num("calibration.if_duration", Quantity::time);
        return r;
    }();
    return reg;
}

std::string strip_comment(std::string v)
{
    for (std::size_t i = 0; i < v.size(); ++i) {
        if ((v[i] == '#' || v[i] == ';') && (i == 0 || v[i - 1] == ' ' || v[i - 1] == '\t')) {
            v.erase(i);
            break;
        }
    }
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.pop_back();
    std::size_t s = 0;
    while (s < v.size() && (v[s] == ' ' || v[s] == '\t')) ++s;
    return v.substr(s);
}

// Line number of "key" inside "[section]" by a plain scan of the text.
int find_line(const std::string& text, const std::string& section, const std::string& key)
{
    std::istringstream in(text);
    std::string line, current;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        if (line[b] == '[') {
            auto e = line.find(']', b);
            current = line.substr(b + 1, e == std::string::npos ? std::string::npos : e - b - 1);
            continue;
        }
        if (current != section) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = line.substr(b, eq - b);
        while (!k.empty() && (k.back() == ' ' || k.back() == '\t')) k.pop_back();
        if (k == key) return n;
    }
    return 0;
}

class Reader {
public:
    explicit Reader(const ConfigFile& f) : f_(f) {}

    std::optional<double> number(const std::string& key) const
    {
        if (!f_.has(key)) return std::nullopt;
        const auto& e = f_.at(key);
        try {
            return parse_quantity(e.value, registry().at(key).q);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(key, e.line, where(key, e.line) + ex.what());
        }
    }
    double number(const std::string& key, double fallback) const { return number(key).value_or(fallback); }
    double required(const std::string& key) const
    {
        auto v = number(key);
        if (!v) throw ConfigError(key, 0, f_.origin() + ": missing required key '" + key + "'");
        return *v;
    }
    long integer(const std::string& key, long fallback) const
    {
        if (!f_.has(key)) return fallback;
        const auto& e = f_.at(key);
        try {
            std::size_t pos = 0;
            long v = std::stol(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key, e.line, where(key, e.line) + "expected an integer, got '" + e.value + "'");
        }
    }
    bool boolean(const std::string& key, bool fallback) const
    {
        if (!f_.has(key)) return fallback;
        const auto& e = f_.at(key);
        if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
        if (e.value == "false" || e.value == "no" || e.value == "0") return false;
        throw ConfigError(key, e.line, where(key, e.line) + "expected true/false, got '" + e.value + "'");
    }
    std::string text(const std::string& key, const std::string& fallback) const
    {
        return f_.has(key) ? f_.at(key).value : fallback;
    }
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const
    {
        int line = f_.has(key) ? f_.at(key).line : 0;
        throw ConfigError(key, line, where(key, line) + msg);
    }

private:
    std::string where(const std::string& key, int line) const
    {
        std::string s = f_.origin();
        if (line > 0) s += ":" + std::to_string(line);
        return s + ": " + key + ": ";
    }
    const ConfigFile& f_;
};

void read_field(const Reader& r, Field& f, const std::string& tag, double def_lambda, double def_freq,
                double def_mu, const char* def_pol, double def_radius)
{
    f.rabi = r.number("fields.omega_" + tag, 0.0);
    auto lam = r.number("fields.lambda_" + tag);
    auto fr = r.number("fields.freq_" + tag);
    if (lam && fr) {
        f.wavelength = *lam;
        f.frequency = *fr;
    } else if (lam) {
        f.wavelength = *lam;
        f.frequency = phys.c / *lam;
    } else if (fr) {
        f.frequency = *fr;
        f.wavelength = phys.c / *fr;
    } else if (def_lambda > 0) {
        f.wavelength = def_lambda;
        f.frequency = phys.c / def_lambda;
    } else {
        f.frequency = def_freq;
        f.wavelength = phys.c / def_freq;
    }
    f.dipole = r.number("fields.mu_" + tag, def_mu);
    f.polarization = r.text("fields.pol_" + tag, def_pol);
    f.radius = r.number("fields.radius_" + tag, def_radius);
}

}  // namespace

const ConfigFile::Entry& ConfigFile::at(const std::string& key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(key, 0, origin_ + ": no key '" + key + "'");
    return it->second;
}

void ConfigFile::set(const std::string& key, const std::string& value)
{
    key_quantity(key);
    auto& e = entries_[key];
    e.value = value;
}

ConfigFile ConfigFile::parse(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, path.string() + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path.string());
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", static_cast<int>(e.line()), origin + ":" + std::to_string(e.line()) + ": "
                                                              + e.message());
    }
    if (tree.empty()) throw ConfigError("", 0, origin + ": empty config (no sections)");

    ConfigFile f;
    f.origin_ = origin;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, find_line(text, "", section),
                              origin + ": key '" + section + "' outside of any section");
        for (const auto& [key, node] : body) {
            std::string full = section + "." + key;
            int line = find_line(text, section, key);
            if (!registry().count(full))
                throw ConfigError(full, line, origin + ":" + std::to_string(line) + ": unknown key '" + full + "'");
            f.entries_[full] = {strip_comment(node.data()), line};
        }
    }
    return f;
}

Quantity key_quantity(const std::string& key)
{
    auto it = registry().find(key);
    if (it == registry().end()) throw ConfigError(key, 0, "unknown config key '" + key + "'");
    return it->second.q;
}

bool key_is_numeric(const std::string& key)
{
    auto it = registry().find(key);
    if (it == registry().end()) return false;
    return it->second.kind == Kind::number || it->second.kind == Kind::integer || key == "levels.gamma51";
}

std::vector<std::string> known_keys()
{
    std::vector<std::string> keys;
    for (const auto& [k, info] : registry()) keys.push_back(k);
    return keys;
}

double gamma51_prediction() { return khz(10.8); }
double gamma51_fit() { return khz(12.8); }

TransducerConfig build_config(const ConfigFile& file)
{
    for (const char* s : {"fields", "levels", "ensemble", "pulse"}) {
        bool found = false;
        for (const auto& [k, e] : file.entries())
            if (k.rfind(std::string(s) + ".", 0) == 0) found = true;
        if (!found) throw ConfigError(s, 0, file.origin() + ": missing section [" + std::string(s) + "]");
    }

    Reader r(file);
    TransducerConfig cfg;

    auto& fl = cfg.fields;
    read_field(r, fl.P, "p", 780.2e-9, 0, 2.99, "sigma+", 66e-6);
    read_field(r, fl.L, "l", 780.2e-9, 0, 1.22, "sigma-", 0);
    read_field(r, fl.A, "a", 479.7e-9, 0, 0.0089, "sigma-", 128e-6);
    read_field(r, fl.R, "r", 479.7e-9, 0, 0.0098, "sigma+", 128e-6);
    read_field(r, fl.M, "m", 0, 37.5e9, 1271, "sigma+", 0);
    read_field(r, fl.W, "w", 0, 22.1e9, 541, "sigma-", 0);
    for (const char* k : {"fields.omega_p", "fields.omega_a", "fields.omega_w", "fields.omega_r"})
        r.required(k);

    auto& lv = cfg.levels;
    lv.Gamma2 = r.required("levels.gamma2");
    lv.Gamma4 = r.required("levels.gamma4");
    lv.Gamma6 = r.required("levels.gamma6");
    lv.gamma3 = r.number("levels.gamma3", 0.0);
    if (auto g = r.number("levels.gamma41")) {
        lv.gamma41 = *g;
        lv.gamma41_is_Gamma4 = false;
    } else {
        lv.gamma41 = lv.Gamma4;
    }
    if (auto g = r.number("levels.gamma61")) {
        lv.gamma61 = *g;
        lv.gamma61_is_half_Gamma6 = false;
    } else {
        lv.gamma61 = lv.Gamma6 / 2.0;
    }
    std::string g51 = r.text("levels.gamma51", "prediction");
    if (g51 == "prediction") {
        lv.gamma51 = gamma51_prediction();
        lv.gamma51_preset = g51;
    } else if (g51 == "fit") {
        lv.gamma51 = gamma51_fit();
        lv.gamma51_preset = g51;
    } else {
        try {
            lv.gamma51 = parse_quantity(g51, Quantity::rate);
        } catch (const std::invalid_argument& e) {
            r.fail("levels.gamma51", std::string(e.what()) + " (or preset 'prediction' / 'fit')");
        }
    }

    auto& en = cfg.ensemble;
    en.n_at = r.required("ensemble.n_at");
    en.L = r.required("ensemble.length");
    en.r_med = r.number("ensemble.radius", 66e-6);
    en.w_A = r.number("ensemble.w_a", 2.0 * en.L / 3.0);
    en.d0 = r.number("ensemble.d0", 141.0);
    en.T_atoms = r.number("ensemble.temperature", 150e-6);
    auto rho11 = r.number("ensemble.rho11");
    auto rho33 = r.number("ensemble.rho33");
    if (rho11 || rho33) {
        CptState s = (fl.P.rabi > 0 || fl.A.rabi > 0) ? cpt_zero_order(fl.P.rabi, fl.A.rabi) : CptState{1, 0, 0};
        en.rho11 = rho11.value_or(s.rho11);
        en.rho33 = rho33.value_or(s.rho33);
        en.rho_from_cpt = false;
    } else {
        if (fl.P.rabi == 0 && fl.A.rabi == 0)
            r.fail("fields.omega_a", "Omega_P and Omega_A both zero: CPT state undefined");
        CptState s = cpt_zero_order(std::abs(fl.P.rabi), std::abs(fl.A.rabi));
        en.rho11 = s.rho11;
        en.rho33 = s.rho33;
    }
    if (auto d = r.number("ensemble.d_m")) {
        en.d_M = *d;
        en.d_M_given = true;
    }
    if (auto d = r.number("ensemble.d_l")) {
        en.d_L = *d;
        en.d_L_given = true;
    }

    auto& pu = cfg.pulse;
    pu.T_p = r.required("pulse.t_p");
    pu.t0 = r.number("pulse.t0", 0.0);
    pu.N_bar = r.number("pulse.n_bar", 0.1);

    auto& gr = cfg.grid;
    gr.Nz = static_cast<int>(r.integer("grid.nz", 201));
    gr.dt = r.number("grid.dt", 1e-9);
    gr.lead_time = r.number("grid.lead_time", 0.0);
    gr.read_window = r.number("grid.read_window", 3e-6);
    gr.history_stride = static_cast<int>(r.integer("grid.history_stride", 1));
    gr.dz = gr.Nz > 1 ? en.L / (gr.Nz - 1) : 0.0;

    auto& st = cfg.storage;
    st.hold = r.number("storage.hold", st.hold);
    st.write_ramp = r.number("storage.write_ramp", st.write_ramp);
    st.read_ramp = r.number("storage.read_ramp", st.read_ramp);
    st.write_off = r.number("storage.write_off", st.write_off);
    st.t_dL = r.number("storage.t_dl", st.t_dL);
    st.T_pL = r.number("storage.t_pl", st.T_pL);
    st.eta_s = r.number("storage.eta_s", 1.0);
    st.eta_c = r.number("storage.eta_c", 1.0);
    std::string dir = r.text("storage.direction", "backward");
    if (dir != "backward" && dir != "forward") r.fail("storage.direction", "expected backward or forward");
    st.backward = dir == "backward";
    st.motional_dephasing = r.boolean("storage.motional_dephasing", false);

    auto& in = cfg.interaction;
    in.coefficients_cyclic = r.boolean("dephasing.coefficients_cyclic", true);
    std::string src = r.text("dephasing.rho33_source", "cpt");
    if (src != "cpt" && src != "ensemble") r.fail("dephasing.rho33_source", "expected cpt or ensemble");
    in.rho33_from_cpt = src == "cpt";
    in.gamma_pump = r.number("dephasing.gamma_pump", mhz(3.0));
    in.Cbar6_35 = r.number("dephasing.c6_35", 0.15e9 * 1e-36);
    in.C3 = r.number("dephasing.c3", 0.29e9 * 1e-18);
    in.C3_prime = r.number("dephasing.c3_prime", 0.0);
    in.w = r.number("dephasing.w", fl.A.radius > 0 ? fl.A.radius : 128e-6);
    auto c633 = r.number("dephasing.c6_33");
    auto rb = r.number("dephasing.r_b");
    double to_rad = in.coefficients_cyclic ? two_pi : 1.0;
    if (c633) {
        in.C6_33 = *c633;
        in.R_B = rb.value_or(std::pow(2.0 * in.C6_33 * to_rad / in.gamma_pump, 1.0 / 6.0));
    } else {
        in.R_B = rb.value_or(4.1e-6);
        in.C6_33 = std::pow(in.R_B, 6) * in.gamma_pump / 2.0 / to_rad;
    }
    in.C6_55 = r.number("dephasing.c6_55", in.C6_33);

    auto& th = cfg.thermal;
    th.nu = r.number("thermal.nu", fl.M.frequency);
    th.T_env = r.number("thermal.t_env", th.T_env);
    th.bandwidth = r.number("thermal.bandwidth", th.bandwidth);
    th.tau_int = r.number("thermal.tau_int", th.tau_int);
    th.eta_max = r.number("thermal.eta_max", th.eta_max);
    th.n_st = r.number("thermal.n_st", th.n_st);

    auto& sp = cfg.statistics;
    sp.spectrum_fwhm = r.number("statistics.spectrum_fwhm", sp.spectrum_fwhm);
    sp.window = r.number("statistics.window", sp.window);
    sp.tau_coh = r.number("statistics.tau_coh", 0.0);
    sp.pulses = r.integer("statistics.pulses", sp.pulses);

    auto& ca = cfg.calibration;
    ca.w_P = r.number("calibration.w_p", ca.w_P);
    ca.r_rear = r.number("calibration.r_rear", ca.r_rear);
    ca.t_optics = r.number("calibration.t_optics", ca.t_optics);
    ca.t_filter = r.number("calibration.t_filter", ca.t_filter);
    ca.t_fiber = r.number("calibration.t_fiber", ca.t_fiber);
    ca.qe = r.number("calibration.qe", ca.qe);
    ca.mixer_amplitude = r.number("calibration.mixer_amplitude", ca.mixer_amplitude);
    ca.mixer_center = r.number("calibration.mixer_center", ca.mixer_center);
    ca.mixer_width = r.number("calibration.mixer_width", ca.mixer_width);
    ca.mixer_floor = r.number("calibration.mixer_floor", ca.mixer_floor);
    ca.if_peak = r.number("calibration.if_peak", ca.if_peak);
    ca.if_duration = r.number("calibration.if_duration", ca.if_duration);

    // validate the raw numbers first so that error messages name the
    // offending key before any derived quantity divides by it
    validate(cfg);
    cfg.ensemble = derive_cross_sections(cfg);

    if (auto om = r.number("pulse.omega_m0")) {
        pu.Omega_M0 = *om;
    } else {
        double S_M = pi * en.r_med * en.r_med;
        pu.Omega_M0 = omega_for_photon_number(pu.N_bar, pu.T_p, S_M, cfg);
    }
    validate(cfg);
    return cfg;
}

TransducerConfig load_config(const std::filesystem::path& path)
{
    return build_config(ConfigFile::parse(path));
}

void validate(const TransducerConfig& cfg)
{
    auto fail = [](const std::string& key, const std::string& msg) { throw ConfigError(key, 0, key + ": " + msg); };

    const auto& fl = cfg.fields;
    const std::pair<const Field*, const char*> all[] = {{&fl.P, "p"}, {&fl.A, "a"}, {&fl.W, "w"},
                                                          {&fl.R, "r"}, {&fl.M, "m"}, {&fl.L, "l"}};
    for (auto [f, tag] : all) {
        std::string t(tag);
        std::string sym = "Omega_" + std::string(1, static_cast<char>(std::toupper(tag[0])));
        if (!(f->rabi >= 0.0)) fail("fields.omega_" + t, sym + " must be non-negative");
        if (f->wavelength > 0 && f->frequency > 0
            && std::abs(f->wavelength * f->frequency / phys.c - 1.0) > 1e-6)
            fail("fields.lambda_" + t, "wavelength and frequency of " + sym + " disagree (lambda*f != c)");
        if (f->dipole < 0) fail("fields.mu_" + t, "dipole moment must be non-negative");
    }

    const auto& lv = cfg.levels;
    const std::pair<double, const char*> rates[] = {
        {lv.Gamma2, "levels.gamma2"},   {lv.Gamma4, "levels.gamma4"},   {lv.Gamma6, "levels.gamma6"},
        {lv.gamma3, "levels.gamma3"},   {lv.gamma41, "levels.gamma41"}, {lv.gamma51, "levels.gamma51"},
        {lv.gamma61, "levels.gamma61"}};
    for (auto [v, key] : rates)
        if (!(v >= 0.0)) fail(key, "rates must be non-negative");
    if (lv.gamma41_is_Gamma4 && lv.gamma41 != lv.Gamma4) fail("levels.gamma41", "flagged gamma41 = Gamma4 but differs");
    if (lv.gamma61_is_half_Gamma6 && lv.gamma61 != lv.Gamma6 / 2.0)
        fail("levels.gamma61", "flagged gamma61 = Gamma6/2 but differs");

    const auto& en = cfg.ensemble;
    if (!(en.n_at >= 0)) fail("ensemble.n_at", "density must be non-negative");
    if (!(en.L > 0)) fail("ensemble.length", "medium length must be positive");
    if (!(en.r_med > 0)) fail("ensemble.radius", "medium radius must be positive");
    if (!(en.rho11 >= 0 && en.rho11 <= 1)) fail("ensemble.rho11", "rho11 outside [0,1]");
    if (!(en.rho33 >= 0 && en.rho33 <= 1)) fail("ensemble.rho33", "rho33 outside [0,1]");
    if (en.rho11 + en.rho33 > 1.0 + 1e-12) fail("ensemble.rho33", "rho11 + rho33 exceeds 1");
    if (!(en.d_M >= 0)) fail("ensemble.d_m", "d_M must be non-negative");
    if (!(en.d_L >= 0)) fail("ensemble.d_l", "d_L must be non-negative");
    if (!(en.d0 >= 0)) fail("ensemble.d0", "d0 must be non-negative");

    const auto& pu = cfg.pulse;
    if (!(pu.T_p > 0)) fail("pulse.t_p", "T_p must be positive");
    if (!(pu.N_bar >= 0)) fail("pulse.n_bar", "N_bar must be non-negative");
    if (!(pu.Omega_M0 >= 0)) fail("pulse.omega_m0", "Omega_M0 must be non-negative");

    const auto& gr = cfg.grid;
    if (gr.Nz < 8) fail("grid.nz", "need at least 8 spatial points");
    if (!(gr.dt > 0)) fail("grid.dt", "time step must be positive");
    if (gr.history_stride < 1) fail("grid.history_stride", "stride must be >= 1");
    if (!(gr.read_window > 0)) fail("grid.read_window", "read window must be positive");

    const auto& st = cfg.storage;
    if (!(st.hold >= 0)) fail("storage.hold", "hold time must be non-negative");
    if (!(st.write_ramp >= 0)) fail("storage.write_ramp", "ramp must be non-negative");
    if (!(st.read_ramp >= 0)) fail("storage.read_ramp", "ramp must be non-negative");
    if (!(st.t_dL >= 0)) fail("storage.t_dl", "delay must be non-negative");
    if (!(st.T_pL > 0)) fail("storage.t_pl", "T_pL must be positive");
    if (!(st.eta_s >= 0 && st.eta_s <= 1)) fail("storage.eta_s", "must be in [0,1]");
    if (!(st.eta_c >= 0 && st.eta_c <= 1)) fail("storage.eta_c", "must be in [0,1]");

    const auto& in = cfg.interaction;
    if (!(in.R_B > 0) || !std::isfinite(in.R_B)) fail("dephasing.r_b", "blockade radius must be positive");
    if (!(in.gamma_pump > 0)) fail("dephasing.gamma_pump", "must be positive");

    const auto& th = cfg.thermal;
    if (!(th.nu > 0)) fail("thermal.nu", "must be positive");
    if (!(th.T_env >= 0)) fail("thermal.t_env", "must be non-negative");
    if (!(th.eta_max >= 0 && th.eta_max <= 1)) fail("thermal.eta_max", "must be in [0,1]");
    if (!(th.n_st >= 0)) fail("thermal.n_st", "must be non-negative");

    const auto& sp = cfg.statistics;
    if (!(sp.spectrum_fwhm > 0)) fail("statistics.spectrum_fwhm", "must be positive");
    if (!(sp.window > 0)) fail("statistics.window", "must be positive");
    if (sp.pulses < 1) fail("statistics.pulses", "must be positive");

    const auto& ca = cfg.calibration;
    for (auto [v, key] : {std::pair{ca.t_optics, "calibration.t_optics"}, std::pair{ca.t_filter, "calibration.t_filter"},
                          std::pair{ca.t_fiber, "calibration.t_fiber"}, std::pair{ca.qe, "calibration.qe"}})
        if (!(v > 0 && v <= 1)) fail(key, "efficiency factor must be in (0,1]");
    if (!(ca.mixer_width > 0)) fail("calibration.mixer_width", "must be positive");
}

EnsembleParams derive_cross_sections(const TransducerConfig& cfg)
{
    EnsembleParams en = cfg.ensemble;
    const auto& fl = cfg.fields;
    const auto& lv = cfg.levels;
    auto sigma = [](const Field& f, double Gamma, const char* what) {
        if (Gamma == 0.0)
            throw std::domain_error(std::string("cross section of transition ") + what + ": zero decay rate");
        double mu = f.dipole * phys.e_a0;
        return 4.0 * pi * mu * mu / (f.wavelength * phys.eps0 * phys.hbar * Gamma);
    };
    en.sigma_M = sigma(fl.M, lv.Gamma4, "|3>-|4> (Gamma4)");
    en.sigma_L = sigma(fl.L, lv.Gamma6, "|1>-|6> (Gamma6)");
    en.n1 = en.rho11 * en.n_at;
    en.n3 = en.rho33 * en.n_at;
    if (!en.d_M_given) en.d_M = en.n3 * en.sigma_M * en.L;
    if (!en.d_L_given) en.d_L = en.n1 * en.sigma_L * en.L;
    return en;
}

}  // namespace rtx
