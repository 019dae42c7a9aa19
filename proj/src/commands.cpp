#include "eoread/commands.hpp"

#include "eoread/errors.hpp"
#include "eoread/montecarlo.hpp"
#include "eoread/parallel.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace eoread {

namespace {

using detail::require;

const std::vector<std::string> kBudgetColumns{
    "gamma_e_hz", "gamma_o_hz", "gamma_t_hz",     "kappa_e_hz",    "eta_bw",
    "eta_t",      "eta_g",      "eta_mic",        "eta_opt",       "eta_cav",
    "eta_noise",  "eta_loss",   "eta_q",          "n_t_photons",   "n_det_photons",
    "n_cqed_photons", "n_r_photons", "snr",       "fidelity"};

double saturation_fidelity(const RunConfig& cfg)
{
    const double p_ge = cfg.montecarlo.p_ground_given_e.value_or(cfg.cqed.p_residual);
    return std::clamp(1.0 - cfg.cqed.p_residual - p_ge, 0.0, 1.0);
}

void check_sweep_range(const TransducerParams& p, double ge)
{
    if (!p.kappa_e_table_gamma_e.empty()) {
        require(ge >= p.kappa_e_table_gamma_e.front() && ge <= p.kappa_e_table_gamma_e.back(),
                "sweep: gamma_e " + format_number(ge) + " Hz outside the kappa_e table");
    } else {
        require(ge > 0.0 && ge <= p.gamma_e_max * (1.0 + 1e-12),
                "sweep: gamma_e " + format_number(ge) + " Hz outside (0, gamma_e_max]");
    }
}

std::vector<Cell> budget_row(const RunConfig& cfg, double ge, double go, const CommandOptions& opt)
{
    const OperatingPoint op = cfg.operating_point(ge, go);
    EfficiencyBudget b;
    if (opt.exact_bandwidth || cfg.s_t0) {
        const PipelineResult r = run_pipeline(cfg.pipeline(ge, go));
        b = opt.exact_bandwidth
                ? r.budget
                : efficiency_budget(cfg.transducer, cfg.cqed, op, cfg.eta_mic, cfg.eta_opt,
                                    r.stats.n_t, cfg.pulse.t_p);
    } else {
        b = efficiency_budget(cfg.transducer, cfg.cqed, op, cfg.eta_mic, cfg.eta_opt,
                              cfg.n_t_at(ge), cfg.pulse.t_p);
    }
    const double n_r = cfg.pulse.amplitude * cfg.pulse.amplitude;
    const double snr = snr_from_budget(n_r, b, opt.convention);
    return {ge,         go,        op.gamma_t, op.kappa_e_effective, b.eta_bw,   b.eta_t,
            b.eta_g,    b.eta_mic, b.eta_opt,  b.eta_cav,            b.eta_noise, b.eta_loss,
            b.eta_q,    b.n_t,     b.n_det,    b.n_cqed,             n_r,        snr,
            fidelity_from_snr(snr, saturation_fidelity(cfg))};
}

std::string cell_text(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

nlohmann::ordered_json cell_json(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

struct Header {
    std::string command;
    std::string config_sha256;
    std::uint64_t seed = 0;
};

void write_table(std::ostream& os, const OutputTable& t, const Header& header,
                 OutputFormat format)
{
    if (format == OutputFormat::csv) {
        os << "# eoread " << header.command << " config_sha256=" << header.config_sha256
           << " seed=" << header.seed << " table=" << t.name << '\n';
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            os << (i ? "," : "") << t.columns[i];
        }
        os << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                os << (i ? "," : "") << cell_text(row[i]);
            }
            os << '\n';
        }
        return;
    }
    nlohmann::ordered_json meta;
    meta["eoread"] = header.command;
    meta["config_sha256"] = header.config_sha256;
    meta["seed"] = header.seed;
    meta["table"] = t.name;
    os << meta.dump() << '\n';
    for (const auto& row : t.rows) {
        nlohmann::ordered_json j;
        for (std::size_t i = 0; i < row.size(); ++i) j[t.columns[i]] = cell_json(row[i]);
        os << j.dump() << '\n';
    }
}

OutputTable summary_table(const CommandOutput& out)
{
    OutputTable t{"summary", {"key", "value"}, {}};
    for (const auto& [k, v] : out.summary) t.rows.push_back({k, v});
    return t;
}

} // namespace

std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CommandOutput cmd_budget(const RunConfig& cfg, const CommandOptions& opt)
{
    CommandOutput out;
    out.command = "budget";
    OutputTable t{"budget", kBudgetColumns, {}};
    t.rows.push_back(budget_row(cfg, cfg.gamma_e, cfg.gamma_o, opt));
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        out.summary.emplace_back(t.columns[i], t.rows.front()[i]);
    }
    out.tables.push_back(std::move(t));
    if (opt.dump_model) {
        std::ostringstream os;
        write_model(os, build_model(cfg.transducer, cfg.operating_point(),
                                    ModelOptions{cfg.mechanical_occupancy}));
        out.model_dump = os.str();
    }
    return out;
}

CommandOutput cmd_sweep(const RunConfig& cfg, const CommandOptions& opt)
{
    const auto& ge = cfg.sweep.gamma_e;
    const auto& go = cfg.sweep.gamma_o;
    require(!ge.empty() && !go.empty(), "sweep: gamma_e and gamma_o grids must be non-empty");
    for (double g : ge) check_sweep_range(cfg.transducer, g);

    CommandOutput out;
    out.command = "sweep";
    OutputTable t{"sweep", kBudgetColumns, {}};
    t.rows.resize(ge.size() * go.size());
    // rows ordered by gamma_o, then gamma_e
    parallel_for(t.rows.size(), opt.workers, [&](std::size_t i) {
        t.rows[i] = budget_row(cfg, ge[i % ge.size()], go[i / ge.size()], opt);
    });

    std::size_t best = 0;
    const std::size_t eta_q_col = 12;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (std::get<double>(t.rows[i][eta_q_col]) > std::get<double>(t.rows[best][eta_q_col])) {
            best = i;
        }
    }
    out.summary = {{"points", static_cast<long long>(t.rows.size())},
                   {"max_eta_q", t.rows[best][eta_q_col]},
                   {"max_gamma_e_hz", t.rows[best][0]},
                   {"max_gamma_o_hz", t.rows[best][1]}};
    out.tables.push_back(std::move(t));
    return out;
}

CommandOutput cmd_shots(const RunConfig& cfg, const CommandOptions& opt)
{
    const MonteCarloSpec& mc = cfg.montecarlo;
    const PipelineConfig pc = cfg.pipeline();
    const PipelineResult r = run_pipeline(pc);
    const Preparation prep{cfg.cqed.p_residual, mc.p_ground_given_e.value_or(cfg.cqed.p_residual)};
    const ShotModel model = shot_model(pc, r, prep, mc.decay_t1);
    const ShotSimulator sim(model, mc.mode, opt.seed);
    const ShotRun run = run_histograms(sim, mc.shots, mc.bins, opt.workers);
    const HistogramPair& h = run.histograms;

    CommandOutput out;
    out.command = "shots";
    OutputTable hist{"histogram", {"bin_center_v", "count_g", "count_e"}, {}};
    for (std::size_t i = 0; i < h.counts_g.size(); ++i) {
        hist.rows.push_back({0.5 * (h.edges[i] + h.edges[i + 1]),
                             static_cast<long long>(h.counts_g[i]),
                             static_cast<long long>(h.counts_e[i])});
    }
    out.tables.push_back(std::move(hist));

    if (!mc.rabi_tau.empty() && !mc.rabi_detuning.empty() && mc.rabi_omega > 0.0) {
        const ShotSimulator projected(model, ShotMode::projected, opt.seed);
        const auto points = rabi_scan(projected, mc.rabi_tau, mc.rabi_detuning, mc.rabi_omega,
                                      mc.rabi_shots, opt.workers);
        OutputTable rabi{"rabi", {"tau_s", "detuning_hz", "p_e", "p_e_stderr", "p_e_raw", "p_e_model"}, {}};
        for (const auto& p : points) {
            rabi.rows.push_back({p.tau, p.detuning, p.p_e, p.stderr_p, p.p_raw, p.p_true});
        }
        out.tables.push_back(std::move(rabi));
    }

    out.summary = {{"shots_per_state", static_cast<long long>(mc.shots)},
                   {"mu_g_v", sim.mean(QubitState::ground)},
                   {"mu_e_v", sim.mean(QubitState::excited)},
                   {"sigma_v", sim.sigma()},
                   {"snr", run.snr},
                   {"n_t_photons", r.stats.n_t},
                   {"n_r_photons", r.n_r},
                   {"eta_q", r.budget.eta_q},
                   {"v_thresh_v", h.v_thresh},
                   {"p_e_given_g", h.p_e_given_g},
                   {"p_g_given_e", h.p_g_given_e},
                   {"f_opt", h.f_opt},
                   {"f_opt_stderr", h.f_stderr},
                   {"f_analytic", run.f_analytic}};
    return out;
}

CommandOutput cmd_calibrate(const RunConfig& cfg, const CommandOptions& opt)
{
    const CalibrationSpec& cs = cfg.calibration;
    ChainSignals chain;
    double injected = 0.0;
    if (cs.chain == CalibrationChain::amplifier) {
        ReadoutPulse pulse = cfg.pulse;
        pulse.envelope.clear();
        chain = amplifier_chain(cfg.cqed, pulse, cs.eta_loss, cs.n_t, cs.amplitude_per_volt,
                                cfg.samples);
        injected = cs.eta_loss / (1.0 + cs.n_t);
    } else {
        const PipelineConfig pc = cfg.pipeline();
        chain = transducer_chain(pc, cs.amplitude_per_volt);
        PipelineConfig unit = pc;
        unit.pulse.amplitude = cs.amplitude_per_volt;
        injected = run_pipeline(unit).budget.eta_q;
    }
    const std::vector<double> voltages =
        cs.voltages.empty() ? voltage_grid_for_snr(chain, cs.snr_min, cs.snr_max, cs.voltage_count)
                            : cs.voltages;
    const SnrEstimator estimator =
        cs.shots > 0 ? monte_carlo_snr(opt.seed, cs.shots, cfg.montecarlo.mode, opt.workers)
                     : SnrEstimator{};
    const CalibrationResult res =
        calibrate_quantum_efficiency(voltages, chain, estimator, cs.min_r2);

    CommandOutput out;
    out.command = "calibrate";
    OutputTable t{"calibration", {"voltage_v", "snr", "coherence", "log_coherence"}, {}};
    for (const auto& p : res.table) {
        t.rows.push_back({p.voltage, p.snr, p.coherence, p.log_coherence});
    }
    out.tables.push_back(std::move(t));
    out.summary = {{"chain", cs.chain == CalibrationChain::amplifier ? "amplifier" : "transducer"},
                   {"points", static_cast<long long>(res.table.size())},
                   {"a_per_v", res.a},
                   {"sigma_v", res.sigma_v},
                   {"eta_q", res.eta_q},
                   {"eta_q_injected", injected},
                   {"snr_r2", res.snr_r2},
                   {"coherence_r2", res.coherence_r2}};
    return out;
}

void write_output(const CommandOutput& out, const RunConfig& cfg, const CommandOptions& opt,
                  std::ostream& console)
{
    const Header header{out.command, config_hash(cfg), opt.seed};
    const OutputTable summary = summary_table(out);
    if (opt.out_dir.empty()) {
        for (const auto& t : out.tables) {
            write_table(console, t, header, opt.format);
            console << '\n';
        }
        write_table(console, summary, header, opt.format);
        if (!out.model_dump.empty()) console << '\n' << out.model_dump;
        return;
    }

    namespace fs = std::filesystem;
    const fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + opt.out_dir + "': " + ec.message());
    }
    const std::string ext = opt.format == OutputFormat::csv ? ".csv" : ".jsonl";
    const auto open = [&](const std::string& stem) {
        const fs::path path = dir / (out.command + "_" + stem);
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ConfigError("cannot write '" + path.string() + "'");
        return os;
    };
    for (const auto& t : out.tables) {
        auto os = open(t.name + ext);
        write_table(os, t, header, opt.format);
    }
    {
        auto os = open("summary" + ext);
        write_table(os, summary, header, opt.format);
    }
    if (!out.model_dump.empty()) {
        auto os = open("model.txt");
        os << out.model_dump;
    }
    write_table(console, summary, header, opt.format);
}

} // namespace eoread
