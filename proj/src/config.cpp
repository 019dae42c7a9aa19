#include "eoread/config.hpp"

#include "eoread/errors.hpp"

#include "default_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace eoread {

namespace {

namespace pt = boost::property_tree;

using Table = std::map<std::string, std::map<std::string, std::string>>;

constexpr std::array<std::pair<const char*, const char*>, 8> kSuffixes{{
    {"_sqrtphotons", "photons^(1/2)"},
    {"_photons", "photons"},
    {"_hz", "Hz (ordinary frequency, X/2pi)"},
    {"_s", "seconds"},
    {"_dimless", "dimensionless"},
    {"_count", "non-negative integer"},
    {"_v", "volts"},
    {"_name", "enumerated word"},
}};

const std::map<std::string, std::vector<std::string>>& known_keys()
{
    static const std::map<std::string, std::vector<std::string>> keys{
        {"transducer",
         {"omega_m_hz", "gamma_m_hz", "g_o_hz", "g_e_hz", "kappa_o_hz", "kappa_o_ext_hz",
          "kappa_e_low_hz", "kappa_e_high_hz", "kappa_e_ext_hz", "epsilon_dimless",
          "gamma_e_max_hz", "kappa_e_table_gamma_e_hz", "kappa_e_table_kappa_e_hz",
          "mechanical_occupancy_photons"}},
        {"cqed",
         {"omega_q_hz", "omega_c_hz", "g_qc_hz", "nu_hz", "chi_hz", "kappa_c_hz",
          "kappa_c_ext_hz", "kappa_c_w_hz", "kappa_c_int_hz", "t1_s", "t2_s",
          "p_residual_dimless"}},
        {"operating_point", {"gamma_e_hz", "gamma_o_hz", "kappa_e_hz"}},
        {"budget", {"eta_mic_dimless", "eta_opt_dimless"}},
        {"noise", {"s_b_photons", "n_t_at_gamma_e_max_photons", "s_t0_photons"}},
        {"pulse",
         {"amplitude_sqrtphotons", "t_p_s", "t_r_s", "envelope_dimless", "samples_count",
          "t_int_s"}},
        {"montecarlo",
         {"shots_count", "mode_name", "bins_count", "p_ground_given_e_dimless", "decay_t1_s",
          "rabi_omega_hz", "rabi_tau_s", "rabi_detuning_hz", "rabi_shots_count"}},
        {"sweep",
         {"gamma_e_min_hz", "gamma_e_max_hz", "gamma_e_count", "gamma_e_hz", "gamma_o_hz"}},
        {"calibration",
         {"chain_name", "voltages_v", "voltage_count", "snr_min_dimless", "snr_max_dimless",
          "eta_loss_dimless", "n_t_photons", "amplitude_per_volt_sqrtphotons", "shots_count",
          "min_r2_dimless"}},
    };
    return keys;
}

std::optional<std::string> suffix_of(const std::string& key)
{
    for (const auto& [suffix, unit] : kSuffixes) {
        const std::string s(suffix);
        if (key.size() > s.size() && key.compare(key.size() - s.size(), s.size(), s) == 0) {
            return s;
        }
    }
    return std::nullopt;
}

std::string unit_hint(const std::string& key)
{
    for (const auto& [suffix, unit] : kSuffixes) {
        if (suffix_of(key) == std::string(suffix)) return unit;
    }
    return "unknown unit";
}

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (const auto& s : v) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

Table read_table(const std::string& text, const std::string& source)
{
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ": line " + std::to_string(e.line()) + ": " + e.message());
    }
    Table table;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(source + ": key '" + section + "' outside of any section");
        }
        const auto known = known_keys().find(section);
        if (known == known_keys().end()) {
            std::vector<std::string> names;
            for (const auto& [name, unused] : known_keys()) names.push_back(name);
            throw ConfigError(source + ": unknown section [" + section + "] (expected one of " +
                              join(names) + ")");
        }
        for (const auto& [key, value] : body) {
            const auto& list = known->second;
            if (std::find(list.begin(), list.end(), key) != list.end()) {
                table[section][key] = value.data();
                continue;
            }
            if (!suffix_of(key)) {
                std::string hint;
                for (const auto& k : list) {
                    if (k.rfind(key + "_", 0) == 0) hint = "; did you mean '" + k + "'?";
                }
                throw ConfigError(source + ": key '" + section + "." + key +
                                  "' has no unit suffix (_hz, _s, _photons, _dimless, ...)" +
                                  hint);
            }
            throw ConfigError(source + ": unknown key '" + section + "." + key +
                              "'; keys in [" + section + "]: " + join(list));
        }
    }
    return table;
}

class Reader {
public:
    explicit Reader(const Table& t) : table_(t) {}

    bool has(const std::string& section, const std::string& key) const
    {
        const auto s = table_.find(section);
        return s != table_.end() && s->second.count(key) && !s->second.at(key).empty();
    }

    double number(const std::string& section, const std::string& key) const
    {
        const std::string& raw = value(section, key);
        return parse(section, key, raw);
    }

    std::optional<double> optional_number(const std::string& section, const std::string& key) const
    {
        if (!has(section, key)) return std::nullopt;
        return number(section, key);
    }

    std::size_t count(const std::string& section, const std::string& key) const
    {
        const double v = number(section, key);
        if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw ConfigError(section + "." + key + ": expected a non-negative integer, got '" +
                              value(section, key) + "'");
        }
        return static_cast<std::size_t>(v);
    }

    std::vector<double> list(const std::string& section, const std::string& key) const
    {
        std::vector<double> out;
        if (!has(section, key)) return out;
        std::istringstream in(value(section, key));
        std::string item;
        while (std::getline(in, item, ',')) {
            out.push_back(parse(section, key, item));
        }
        return out;
    }

    std::string word(const std::string& section, const std::string& key) const
    {
        std::string w = value(section, key);
        w.erase(0, w.find_first_not_of(" \t"));
        w.erase(w.find_last_not_of(" \t") + 1);
        return w;
    }

private:
    const std::string& value(const std::string& section, const std::string& key) const
    {
        if (!has(section, key)) {
            throw ConfigError("missing key '" + section + "." + key + "' (" + unit_hint(key) + ")");
        }
        return table_.at(section).at(key);
    }

    static double parse(const std::string& section, const std::string& key, const std::string& raw)
    {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(raw, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || raw.find_first_not_of(" \t", used) != std::string::npos ||
            !std::isfinite(v)) {
            throw ConfigError(section + "." + key + ": expected a number in " + unit_hint(key) +
                              ", got '" + raw + "'");
        }
        return v;
    }

    const Table& table_;
};

std::string canonical_text(const Table& t)
{
    std::string out;
    for (const auto& [section, body] : t) {
        for (const auto& [key, value] : body) {
            out += section + "." + key + " = " + value + "\n";
        }
    }
    return out;
}

RunConfig decode(const Table& t)
{
    const Reader r(t);
    RunConfig c;

    TransducerParams& p = c.transducer;
    p.omega_m = r.number("transducer", "omega_m_hz");
    p.gamma_m = r.number("transducer", "gamma_m_hz");
    p.g_o = r.number("transducer", "g_o_hz");
    p.g_e = r.number("transducer", "g_e_hz");
    p.kappa_o = r.number("transducer", "kappa_o_hz");
    p.kappa_o_ext = r.number("transducer", "kappa_o_ext_hz");
    p.kappa_e_low = r.number("transducer", "kappa_e_low_hz");
    p.kappa_e_high = r.number("transducer", "kappa_e_high_hz");
    p.kappa_e_ext = r.number("transducer", "kappa_e_ext_hz");
    p.epsilon = r.number("transducer", "epsilon_dimless");
    p.gamma_e_max = r.number("transducer", "gamma_e_max_hz");
    p.kappa_e_table_gamma_e = r.list("transducer", "kappa_e_table_gamma_e_hz");
    p.kappa_e_table_kappa_e = r.list("transducer", "kappa_e_table_kappa_e_hz");
    c.mechanical_occupancy = r.number("transducer", "mechanical_occupancy_photons");

    CircuitQedParams& q = c.cqed;
    q.omega_q = r.number("cqed", "omega_q_hz");
    q.omega_c = r.number("cqed", "omega_c_hz");
    q.g_qc = r.number("cqed", "g_qc_hz");
    q.nu = r.number("cqed", "nu_hz");
    q.chi = r.number("cqed", "chi_hz");
    q.kappa_c = r.number("cqed", "kappa_c_hz");
    q.kappa_c_ext = r.number("cqed", "kappa_c_ext_hz");
    q.kappa_c_w = r.number("cqed", "kappa_c_w_hz");
    q.kappa_c_int = r.number("cqed", "kappa_c_int_hz");
    q.t1 = r.number("cqed", "t1_s");
    q.t2 = r.number("cqed", "t2_s");
    q.p_residual = r.number("cqed", "p_residual_dimless");

    c.gamma_e = r.number("operating_point", "gamma_e_hz");
    c.gamma_o = r.number("operating_point", "gamma_o_hz");
    c.kappa_e = r.optional_number("operating_point", "kappa_e_hz");

    c.eta_mic = r.number("budget", "eta_mic_dimless");
    c.eta_opt = r.number("budget", "eta_opt_dimless");

    c.s_b = r.number("noise", "s_b_photons");
    c.n_t_at_gamma_e_max = r.number("noise", "n_t_at_gamma_e_max_photons");
    c.s_t0 = r.optional_number("noise", "s_t0_photons");

    c.pulse.amplitude = r.number("pulse", "amplitude_sqrtphotons");
    c.pulse.t_p = r.number("pulse", "t_p_s");
    c.pulse.t_r = r.number("pulse", "t_r_s");
    c.pulse.envelope = r.list("pulse", "envelope_dimless");
    c.samples = r.count("pulse", "samples_count");
    c.t_int = r.optional_number("pulse", "t_int_s");

    MonteCarloSpec& mc = c.montecarlo;
    mc.shots = r.count("montecarlo", "shots_count");
    const std::string mode = r.word("montecarlo", "mode_name");
    if (mode == "trace") {
        mc.mode = ShotMode::trace;
    } else if (mode == "projected") {
        mc.mode = ShotMode::projected;
    } else {
        throw ConfigError("montecarlo.mode_name: expected 'trace' or 'projected', got '" + mode + "'");
    }
    if (r.has("montecarlo", "bins_count")) mc.bins = r.count("montecarlo", "bins_count");
    mc.p_ground_given_e = r.optional_number("montecarlo", "p_ground_given_e_dimless");
    mc.decay_t1 = r.number("montecarlo", "decay_t1_s");
    mc.rabi_omega = r.number("montecarlo", "rabi_omega_hz");
    mc.rabi_tau = r.list("montecarlo", "rabi_tau_s");
    mc.rabi_detuning = r.list("montecarlo", "rabi_detuning_hz");
    mc.rabi_shots = r.count("montecarlo", "rabi_shots_count");

    SweepSpec& sw = c.sweep;
    sw.gamma_e = r.list("sweep", "gamma_e_hz");
    if (sw.gamma_e.empty()) {
        const double lo = r.number("sweep", "gamma_e_min_hz");
        const double hi = r.number("sweep", "gamma_e_max_hz");
        const std::size_t n = r.count("sweep", "gamma_e_count");
        if (n == 0 || (n > 1 && !(hi > lo))) {
            throw ConfigError("sweep: need gamma_e_count >= 1 and gamma_e_max_hz > gamma_e_min_hz");
        }
        for (std::size_t i = 0; i < n; ++i) {
            sw.gamma_e.push_back(n == 1 ? lo
                                        : lo + (hi - lo) * static_cast<double>(i) /
                                                   static_cast<double>(n - 1));
        }
    }
    sw.gamma_o = r.list("sweep", "gamma_o_hz");

    CalibrationSpec& cal = c.calibration;
    const std::string chain = r.word("calibration", "chain_name");
    if (chain == "amplifier") {
        cal.chain = CalibrationChain::amplifier;
    } else if (chain == "transducer") {
        cal.chain = CalibrationChain::transducer;
    } else {
        throw ConfigError("calibration.chain_name: expected 'amplifier' or 'transducer', got '" +
                          chain + "'");
    }
    cal.voltages = r.list("calibration", "voltages_v");
    cal.voltage_count = r.count("calibration", "voltage_count");
    cal.snr_min = r.number("calibration", "snr_min_dimless");
    cal.snr_max = r.number("calibration", "snr_max_dimless");
    cal.eta_loss = r.number("calibration", "eta_loss_dimless");
    cal.n_t = r.number("calibration", "n_t_photons");
    cal.amplitude_per_volt = r.number("calibration", "amplitude_per_volt_sqrtphotons");
    cal.shots = r.count("calibration", "shots_count");
    cal.min_r2 = r.number("calibration", "min_r2_dimless");

    c.canonical = canonical_text(t);

    try {
        p.validate();
        q.validate();
        c.pulse.validate();
        (void)c.operating_point();
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    if (c.eta_mic <= 0.0 || c.eta_mic > 1.0 || c.eta_opt <= 0.0 || c.eta_opt > 1.0) {
        throw ConfigError("budget: eta_mic_dimless and eta_opt_dimless must lie in (0, 1]");
    }
    if (c.s_b < 0.0 || c.n_t_at_gamma_e_max < c.s_b) {
        throw ConfigError("noise: need 0 <= s_b_photons <= n_t_at_gamma_e_max_photons");
    }
    if (c.samples < 16) {
        throw ConfigError("pulse.samples_count: need at least 16 samples");
    }
    return c;
}

Table merged(const std::string& text, const std::string& source)
{
    Table base = read_table(detail::kDefaultConfigText, "<bundled defaults>");
    for (const auto& [section, body] : read_table(text, source)) {
        for (const auto& [key, value] : body) base[section][key] = value;
    }
    return base;
}

} // namespace

double RunConfig::n_t_at(double ge) const
{
    const double frac = std::clamp(ge / transducer.gamma_e_max, 0.0, 1.0);
    return s_b + (n_t_at_gamma_e_max - s_b) * frac;
}

OperatingPoint RunConfig::operating_point(double ge, double go) const
{
    return make_operating_point(transducer, ge, go, kappa_e);
}

PipelineConfig RunConfig::pipeline(double ge, double go) const
{
    PipelineConfig p;
    p.transducer = transducer;
    p.cqed = cqed;
    p.op = operating_point(ge, go);
    p.pulse = pulse;
    p.eta_mic = eta_mic;
    p.eta_opt = eta_opt;
    p.noise.s_b = s_b;
    if (s_t0) {
        p.noise.s_t0 = s_t0;
    } else {
        p.noise.n_t = n_t_at(ge);
    }
    p.samples = samples;
    p.t_int = t_int;
    p.model.mechanical_occupancy = mechanical_occupancy;
    return p;
}

RunConfig default_config()
{
    return parse_config("", "<bundled defaults>");
}

RunConfig parse_config(const std::string& text, const std::string& source)
{
    return decode(merged(text, source));
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

std::string config_hash(const RunConfig& cfg)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(cfg.canonical.data(), cfg.canonical.size(), digest.data(), &len, EVP_sha256(),
                   nullptr) != 1) {
        throw NumericalError("config_hash: SHA-256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

} // namespace eoread
