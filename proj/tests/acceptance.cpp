// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "eoread/commands.hpp"
#include "eoread/config.hpp"
#include "eoread/montecarlo.hpp"
#include "eoread/noise.hpp"
#include "eoread/params.hpp"
#include "eoread/readout.hpp"
#include "eoread/statespace.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace eoread;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;
    std::function<Outcome()> run;
};

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

PipelineConfig table_pipeline(double ge, double go)
{
    return default_config().pipeline(ge, go);
}

Outcome dispersive_shift_check()
{
    const double chi = dispersive_shift(66.4e6, -2.306e9, 228e6);
    return {rel(chi, 172e3) < 0.01, fmt("chi = %.2f kHz", chi / 1e3)};
}

Outcome transducer_efficiency_check()
{
    const TransducerParams p = table_transducer_params();
    const double eta = eta_transducer(p, make_operating_point(p, 1.1e3, 5.0e3, 2.7e6));
    return {rel(eta, 0.19) < 0.05, fmt("eta_t = %.4f", eta)};
}

Outcome gain_factor_check()
{
    const TransducerParams p = table_transducer_params();
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i <= 110; ++i) {
        const double g = eta_gain(1.6e6 + i * 1e4, p.kappa_o, p.omega_m);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    return {lo >= 1.3 && hi <= 1.5, fmt("eta_G in [%.4f, %.4f]", lo, hi)};
}

Outcome bandwidth_check()
{
    const RunConfig c = default_config();
    double lo = 1e9, hi = -1e9;
    for (double go : c.sweep.gamma_o) {
        for (double ge : c.sweep.gamma_e) {
            const double e = eta_bandwidth(c.operating_point(ge, go).gamma_t, c.pulse.t_p);
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
    }
    const PipelineResult r = run_pipeline(c.pipeline());
    return {lo >= 0.02 && hi <= 0.15 && r.eta_bw_exact <= 0.16,
            fmt("closed form in [%.4f, %.4f], time-domain %.4f at the max point", lo, hi,
                r.eta_bw_exact)};
}

Outcome budget_check()
{
    const TransducerParams p = table_transducer_params();
    const CircuitQedParams q = table_cqed_params();
    const EfficiencyBudget b =
        efficiency_budget(p, q, make_operating_point(p, 1.1e3, 5.0e3), 0.17, 0.28, 1.4, 15e-6);
    const bool ok = rel(b.eta_loss, 1.9e-3) < 0.15 && rel(b.eta_q, 8e-4) < 0.15 &&
                    rel(b.n_cqed, 740) < 0.15 && rel(b.eta_cav, 0.96) < 0.01;
    return {ok, fmt("eta_loss = %.3e, eta_q = %.3e, N_cQED = %.0f, eta_cav = %.3f", b.eta_loss,
                    b.eta_q, b.n_cqed, b.eta_cav)};
}

Outcome backaction_check()
{
    const CircuitQedParams q = table_cqed_params();
    const double n = effective_occupancy(dephasing_from_lifetimes(17e-6, 20.4e-6), q.kappa_c, q.chi);
    return {rel(n, 0.019) < 0.10, fmt("n_eff = %.4f", n)};
}

Outcome state_space_check()
{
    double worst_dc = 0.0;
    const TransducerParams p = oracle::artificial_transducer(1e6, 1e8);
    for (auto [ge, go] : {std::pair{2e3, 2e3}, std::pair{1e3, 5e3}, std::pair{3e3, 500.0}}) {
        const OperatingPoint op = make_operating_point(p, ge, go);
        if (p.kappa_o < 100 * op.gamma_t) return {false, "test parameters violate kappa >= 100 Gamma_T"};
        const auto h = transfer_matrix(build_model(p, op), 0.0);
        const double t = std::norm(h(port::kOpticalOut[0], port::kMicrowaveIn[0]));
        worst_dc = std::max(worst_dc, rel(t, oracle::adiabatic_transmission(p, op)));
    }

    const TransducerParams pc = oracle::artificial_transducer(1e5, 1e8);
    const StateSpaceModel m = build_model(pc, make_operating_point(pc, 2e3, 2e3), ModelOptions{10.0});
    const Matrix6 v = steady_state_covariance(m);
    const Matrix6 w = oracle::integrate_covariance(m, 25.0 / -spectral_abscissa(m),
                                                   0.05 / m.a_rwa.cwiseAbs().maxCoeff());
    const double cov_err = (v - w).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
    return {worst_dc < 0.01 && cov_err < 0.01,
            fmt("DC transfer rel. error %.2e, covariance rel. error %.2e", worst_dc, cov_err)};
}

Outcome rwa_check()
{
    const double kappa = 1e4;
    const TransducerParams p = oracle::artificial_transducer(kappa, 100 * kappa);
    const OperatingPoint op = make_operating_point(p, kappa / 10, kappa / 10);
    const StateSpaceModel m = build_model(p, op);

    const double sigma = 3.0 / (kTwoPi * op.gamma_t);
    const double t0 = 5 * sigma;
    const double t_end = 2 * t0 + 20.0 / (kTwoPi * op.gamma_t);
    const auto drive = [&](double t) {
        Vector10 u = Vector10::Zero();
        u(port::kMicrowaveIn[0]) = std::exp(-0.5 * std::pow((t - t0) / sigma, 2));
        return u;
    };
    const auto energy = [&](bool counter) {
        const double dt = 1.0 / (20.0 * (counter ? m.max_rate() : m.rwa_rate_hz()));
        const Propagation r = propagate(m, drive, dt, t_end, counter);
        double e = 0.0;
        for (const auto& y : r.outputs) {
            e += (y(port::kOpticalOut[0]) * y(port::kOpticalOut[0]) +
                  y(port::kOpticalOut[1]) * y(port::kOpticalOut[1])) * dt;
        }
        return e;
    };
    const double e_rwa = energy(false);
    const double e_full = energy(true);
    return {rel(e_full, e_rwa) < 0.02,
            fmt("output energy RWA %.5e, with counter-rotating terms %.5e (rel. %.2e)", e_rwa,
                e_full, rel(e_full, e_rwa))};
}

Outcome noise_check()
{
    // Welch estimate: Hann segments of 512 points, half overlap, I and Q pooled
    const NoiseParams n{0.0, 1.0, 5e3};
    const double dt = max_sample_step(n);
    const std::size_t count = 1'000'000, seg = 512, hop = seg / 2;
    const QuadratureTrace t = sample_noise(n, 2024, dt, count);

    std::vector<double> w(seg);
    double w2 = 0.0;
    for (std::size_t k = 0; k < seg; ++k) {
        w[k] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * k / seg);
        w2 += w[k] * w[k];
    }
    const double df = 1.0 / (seg * dt);
    const auto bins = static_cast<std::size_t>(5 * n.gamma_t / df) + 1;
    std::vector<std::vector<std::complex<double>>> twiddle(bins, std::vector<std::complex<double>>(seg));
    for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t k = 0; k < seg; ++k) {
            twiddle[b][k] = w[k] * std::polar(1.0, -2 * std::numbers::pi * double(b * k) / seg);
        }
    }
    std::vector<double> psd(bins, 0.0);
    std::size_t segments = 0;
    for (const auto* x : {&t.in_phase, &t.quadrature}) {
        for (std::size_t s = 0; s + seg <= count; s += hop) {
            for (std::size_t b = 0; b < bins; ++b) {
                std::complex<double> acc = 0.0;
                for (std::size_t k = 0; k < seg; ++k) acc += twiddle[b][k] * (*x)[s + k];
                psd[b] += std::norm(acc);
            }
            ++segments;
        }
    }
    double worst = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double est = psd[b] * dt / (w2 * segments);
        worst = std::max(worst, rel(est, output_spectrum(n, b * df)));
    }

    // integrated voltage over 10^4 trace-mode shots of the readout pipeline
    const PipelineConfig cfg = table_pipeline(1.1e3, 5.0e3);
    const PipelineResult r = run_pipeline(cfg);
    const ShotSimulator sim(shot_model(cfg, r, Preparation{}), ShotMode::trace, 99);
    const std::size_t shots = 10000;
    const auto v = simulate_voltages(sim, QubitState::ground, shots);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= shots;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= shots - 1;
    const double expected = sim.sigma() * sim.sigma();
    const double stderr_var = expected * std::sqrt(2.0 / (shots - 1));
    const double z = std::abs(var - expected) / stderr_var;
    return {worst < 0.05 && z < 3,
            fmt("periodogram max rel. deviation %.3f over %zu bins; voltage variance %.4e vs %.4e "
                "(%.2f standard errors)",
                worst, bins, var, expected, z)};
}

Outcome fidelity_check()
{
    const RunConfig c = default_config();
    const PipelineConfig cfg = c.pipeline(0.5e3, 2.4e3);
    const PipelineResult r = run_pipeline(cfg);
    const ShotSimulator sim(shot_model(cfg, r, Preparation::symmetric(0.15)), ShotMode::trace, 7);
    const ShotRun run = run_histograms(sim, 10000);
    const HistogramPair& h = run.histograms;
    const double z = std::abs(h.f_opt - run.f_analytic) / h.f_stderr;
    return {std::abs(h.f_opt - 0.4) <= 0.1 && z < 3,
            fmt("F_opt = %.4f +- %.4f, analytic %.4f (%.2f standard errors), SNR %.3f, eta_q %.3e",
                h.f_opt, h.f_stderr, run.f_analytic, z, run.snr, r.budget.eta_q)};
}

Outcome calibration_check()
{
    const CircuitQedParams q = table_cqed_params();
    ReadoutPulse pulse;
    pulse.amplitude = 1.0;
    const double n_t = 1.4;
    double worst = 0.0;
    std::ostringstream detail;
    std::uint64_t seed = 31;
    for (double eta_q : {1e-4, 1e-3, 1e-2, 1e-1}) {
        // fresh seed per decade: the chains differ only by scale
        const SnrEstimator mc = monte_carlo_snr(seed++, 10000, ShotMode::trace);
        const ChainSignals chain = amplifier_chain(q, pulse, eta_q * (1 + n_t), n_t, 1.0, 256);
        const auto v = voltage_grid_for_snr(chain, 0.1, 2.0, 8);
        const CalibrationResult res = calibrate_quantum_efficiency(v, chain, mc);
        worst = std::max(worst, rel(res.eta_q, eta_q));
        detail << fmt("%.0e->%.4e ", eta_q, res.eta_q);
    }
    return {worst < 0.05, detail.str() + fmt("(max rel. error %.3f)", worst)};
}

Outcome sweep_check()
{
    const RunConfig c = default_config();
    const CommandOutput out = cmd_sweep(c, {});
    const auto& rows = out.tables[0].rows;
    const std::size_t n_ge = c.sweep.gamma_e.size();
    const auto eta = [&](std::size_t io, std::size_t ie) { return std::get<double>(rows[io * n_ge + ie][12]); };

    double global = 0.0;
    bool shape = true;
    std::ostringstream detail;
    for (std::size_t io = 0; io < c.sweep.gamma_o.size(); ++io) {
        double peak = 0.0;
        for (std::size_t ie = 0; ie < n_ge; ++ie) peak = std::max(peak, eta(io, ie));
        global = std::max(global, peak);
        const double drop = eta(io, 0) / peak;
        // plateau: the top fifth of the gamma_e range stays within 10 % of the curve maximum
        double top_min = peak;
        for (std::size_t ie = 4 * n_ge / 5; ie < n_ge; ++ie) top_min = std::min(top_min, eta(io, ie));
        const bool plateau = top_min >= 0.9 * peak;
        shape = shape && plateau && drop < 0.5;
        if (c.sweep.gamma_o[io] == 5000.0) shape = shape && drop < 0.1;
        detail << fmt("Go=%.0f: low/peak %.3f, top/peak %.3f; ", c.sweep.gamma_o[io], drop,
                      top_min / peak);
    }
    return {shape && rel(global, 8e-4) < 0.2, detail.str() + fmt("max eta_q %.3e", global)};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "dispersive shift", 1, dispersive_shift_check},
        {2, "transducer efficiency", 1, transducer_efficiency_check},
        {3, "gain factor", 1, gain_factor_check},
        {4, "bandwidth factor", 1, bandwidth_check},
        {5, "budget reproduction", 1, budget_check},
        {6, "backaction consistency", 1, backaction_check},
        {7, "state-space oracle", 10, state_space_check},
        {8, "RWA validity", 30, rwa_check},
        {9, "noise statistics", 60, noise_check},
        {10, "fidelity reproduction", 60, fidelity_check},
        {11, "calibration closed loop", 60, calibration_check},
        {12, "sweep shape", 10, sweep_check},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.time_limit_s) {
            o.pass = false;
            o.detail += fmt(" [over the %.0f s budget]", c.time_limit_s);
        }
        failed += !o.pass;
        std::printf("%s %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
