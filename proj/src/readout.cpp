#include "eoread/readout.hpp"

#include "eoread/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eoread {

using detail::require;
using Complex = std::complex<double>;

// --- pulse -------------------------------------------------------------------

double ReadoutPulse::envelope_at(double t) const
{
    if (t < 0.0 || t >= t_p) {
        return 0.0;
    }
    if (envelope.empty()) {
        return 1.0;
    }
    if (envelope.size() == 1) {
        return envelope.front();
    }
    const double pos = t / t_p * static_cast<double>(envelope.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), envelope.size() - 2);
    const double f = pos - static_cast<double>(i);
    return envelope[i] + f * (envelope[i + 1] - envelope[i]);
}

double ReadoutPulse::envelope_energy() const
{
    if (envelope.size() < 2) {
        const double level = envelope.empty() ? 1.0 : envelope.front();
        return level * level * t_p;
    }
    const double h = t_p / static_cast<double>(envelope.size() - 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < envelope.size(); ++k) {
        const double w = (k == 0 || k + 1 == envelope.size()) ? 0.5 : 1.0;
        sum += w * envelope[k] * envelope[k];
    }
    return sum * h;
}

void ReadoutPulse::validate() const
{
    require(t_p > 0.0, "ReadoutPulse: t_p must be > 0");
    require(amplitude >= 0.0, "ReadoutPulse: amplitude must be >= 0");
    require(t_r > 0.0, "ReadoutPulse: t_r must be > 0");
    require(envelope.empty() || envelope_energy() > 0.0, "ReadoutPulse: envelope is identically 0");
}

// --- cavity ------------------------------------------------------------------

double drive_amplitude(const ReadoutPulse& pulse, const CircuitQedParams& q)
{
    pulse.validate();
    const double kappa = angular(q.kappa_c);
    const double kappa_ext = angular(q.kappa_c_ext);
    const double chi = angular(q.chi);
    const double energy = pulse.envelope_energy();
    const double n_r = pulse.amplitude * pulse.amplitude;
    const double lorentz = 0.25 * kappa * kappa + chi * chi;
    if (chi == 0.0) {
        return std::sqrt(n_r * 0.25 * kappa * kappa / (kappa * kappa_ext * energy));
    }
    // n_r = kappa kappa_ext |eps|^2 E chi^2 / (kappa^2/4 + chi^2)^2
    return std::sqrt(n_r * lorentz * lorentz / (kappa * kappa_ext * chi * chi * energy));
}

double max_cavity_step(const CircuitQedParams& q)
{
    return 1.0 / (20.0 * std::max(q.kappa_c, 2.0 * std::abs(q.chi)));
}

CavityField cavity_response(const ReadoutPulse& pulse, QubitState state,
                            const CircuitQedParams& q, const TimeGrid& grid,
                            std::optional<double> jump_time)
{
    require(grid.count >= 2 && grid.dt > 0.0, "cavity_response: grid needs >= 2 points");
    require(grid.dt <= max_cavity_step(q) * (1.0 + 1e-12),
            "cavity_response: step does not resolve kappa_c");
    const double eps0 = drive_amplitude(pulse, q);
    const double half_kappa = 0.5 * angular(q.kappa_c);
    const double sqrt_kext = std::sqrt(angular(q.kappa_c_ext));
    const double chi = angular(q.chi);

    const auto detuning = [&](double t) {
        const bool excited =
            state == QubitState::excited && !(jump_time && t >= *jump_time);
        return excited ? chi : -chi;
    };

    CavityField f;
    f.alpha.resize(grid.count);
    f.alpha_out.resize(grid.count);
    f.drive.resize(grid.count);
    const double h = grid.dt;

    Complex alpha(0.0, 0.0);
    for (std::size_t k = 0; k < grid.count; ++k) {
        const double t = grid.time(k);
        const double drive = eps0 * pulse.envelope_at(t);
        f.alpha[k] = alpha;
        f.drive[k] = drive;
        f.alpha_out[k] = sqrt_kext * alpha - drive;

        const double t_mid = t + 0.5 * h;
        const Complex lambda(half_kappa, detuning(t_mid));
        const Complex decay = std::exp(-lambda * h);
        const double source = sqrt_kext * eps0 * pulse.envelope_at(t_mid);
        alpha = decay * alpha + source * (1.0 - decay) / lambda;
    }
    return f;
}

PointerTrajectory pointer_trajectory(const ReadoutPulse& pulse, const CircuitQedParams& q,
                                     const TimeGrid& grid)
{
    CavityField g = cavity_response(pulse, QubitState::ground, q, grid);
    CavityField e = cavity_response(pulse, QubitState::excited, q, grid);
    PointerTrajectory traj;
    traj.grid = grid;
    traj.alpha_g = std::move(g.alpha);
    traj.alpha_e = std::move(e.alpha);
    traj.alpha_out_g = std::move(g.alpha_out);
    traj.alpha_out_e = std::move(e.alpha_out);
    traj.theta = std::atan(2.0 * q.chi / q.kappa_c);
    return traj;
}

double dephasing_exponent(const PointerTrajectory& traj, const CircuitQedParams& q)
{
    const auto w = trapezoid_weights(traj.grid.count, traj.grid.dt);
    double integral = 0.0;
    for (std::size_t k = 0; k < traj.grid.count; ++k) {
        integral += w[k] * std::norm(traj.alpha_e[k] - traj.alpha_g[k]);
    }
    return 0.5 * angular(q.kappa_c) * integral;
}

// --- transducer ------------------------------------------------------------

QuadratureTrace upconvert_field(const StateSpaceModel& m, const ComplexSeries& alpha_out,
                                double cavity_dt, const DetectionChain& chain,
                                std::size_t substeps, std::string label)
{
    require(substeps >= 1, "upconvert: substeps must be >= 1");
    require(alpha_out.size() >= 3 && (alpha_out.size() - 1) % (2 * substeps) == 0,
            "upconvert: cavity grid must hold 2*substeps points per output sample");
    require(chain.eta_mic > 0.0 && chain.eta_opt > 0.0 && chain.eta_g > 0.0 &&
                chain.epsilon >= 0.0,
            "upconvert: detection factors must be positive");

    const double dt = 2.0 * cavity_dt;
    const std::size_t steps = (alpha_out.size() - 1) / 2;
    const double in_scale = std::sqrt(chain.eta_mic);
    const double out_scale = std::sqrt(chain.epsilon * chain.eta_opt * chain.eta_g);

    const InputFunction input = [&](double t) {
        const auto idx = static_cast<std::size_t>(
            std::clamp<long long>(std::llround(t / cavity_dt), 0,
                                  static_cast<long long>(alpha_out.size() - 1)));
        Vector10 u = Vector10::Zero();
        u(port::kMicrowaveIn[0]) = in_scale * alpha_out[idx].real();
        u(port::kMicrowaveIn[1]) = in_scale * alpha_out[idx].imag();
        return u;
    };
    const Propagation prop =
        propagate(m, input, dt, static_cast<double>(steps) * dt, false);

    QuadratureTrace tr;
    tr.dt = dt * static_cast<double>(substeps);
    tr.label = std::move(label);
    const std::size_t n = steps / substeps + 1;
    tr.in_phase.resize(n);
    tr.quadrature.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vector4& y = prop.outputs[k * substeps];
        tr.in_phase[k] = out_scale * y(port::kOpticalOut[0]);
        tr.quadrature[k] = out_scale * y(port::kOpticalOut[1]);
    }
    return tr;
}

OpticalMeans upconvert(const StateSpaceModel& m, const PointerTrajectory& traj,
                       const DetectionChain& chain, std::size_t substeps)
{
    return {upconvert_field(m, traj.alpha_out_g, traj.grid.dt, chain, substeps, "ground"),
            upconvert_field(m, traj.alpha_out_e, traj.grid.dt, chain, substeps, "excited")};
}

// --- matched filter and statistics ------------------------------------------

std::vector<double> trapezoid_weights(std::size_t count, double dt)
{
    std::vector<double> w(count, dt);
    if (count > 0) {
        w.front() *= 0.5;
        w.back() *= 0.5;
    }
    return w;
}

MatchedFilter matched_filter(const QuadratureTrace& mean_e, const QuadratureTrace& mean_g,
                             double t_int)
{
    mean_e.validate();
    mean_g.validate();
    require(std::abs(mean_e.dt - mean_g.dt) <= 1e-12 * mean_g.dt,
            "matched_filter: traces must share dt");
    require(mean_e.size() == mean_g.size(), "matched_filter: traces must share length");
    require(t_int > 0.0, "matched_filter: t_int must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(t_int / mean_g.dt)) + 1;
    require(n <= mean_g.size(), "matched_filter: traces shorter than t_int");

    MatchedFilter f;
    f.t_int = static_cast<double>(n - 1) * mean_g.dt;
    f.weights.dt = mean_g.dt;
    f.weights.label = "weights";
    f.weights.in_phase.resize(n);
    f.weights.quadrature.resize(n);
    const auto c = trapezoid_weights(n, mean_g.dt);
    double energy = 0.0;
    double reference = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double wi = mean_e.in_phase[k] - mean_g.in_phase[k];
        const double wq = mean_e.quadrature[k] - mean_g.quadrature[k];
        f.weights.in_phase[k] = wi;
        f.weights.quadrature[k] = wq;
        energy += c[k] * (wi * wi + wq * wq);
        reference += c[k] * (mean_e.in_phase[k] * mean_e.in_phase[k] +
                             mean_e.quadrature[k] * mean_e.quadrature[k] +
                             mean_g.in_phase[k] * mean_g.in_phase[k] +
                             mean_g.quadrature[k] * mean_g.quadrature[k]);
    }
    if (!(energy > 1e-24 * reference) || energy == 0.0) {
        throw DegenerateFilterError("matched_filter: mean traces are indistinguishable");
    }
    f.g_norm = 0.5 * energy;
    return f;
}

namespace {
double kernel_one(const std::vector<double>& w, const std::vector<double>& c, double rate,
                  double dt, KernelMethod method)
{
    const std::size_t n = w.size();
    if (method == KernelMethod::direct) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double lag = std::abs(static_cast<double>(i) - static_cast<double>(j)) * dt;
                row += c[j] * w[j] * std::exp(-rate * lag);
            }
            sum += c[i] * w[i] * row;
        }
        return sum;
    }
    // sum_i sum_j a_i a_j r^|i-j| = sum_i a_i (2 S_i - a_i), S_i = a_i + r S_{i-1}
    const double r = std::exp(-rate * dt);
    double running = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = c[i] * w[i];
        running = a + r * running;
        sum += a * (2.0 * running - a);
    }
    return sum;
}
} // namespace

double exponential_kernel_integral(const QuadratureTrace& weights, double rate,
                                   KernelMethod method)
{
    require(rate >= 0.0, "exponential_kernel_integral: rate must be >= 0");
    const auto c = trapezoid_weights(weights.size(), weights.dt);
    return kernel_one(weights.in_phase, c, rate, weights.dt, method) +
           kernel_one(weights.quadrature, c, rate, weights.dt, method);
}

ReadoutStatistics integrated_stats(const MatchedFilter& f, const QuadratureTrace& mean_g,
                                   const QuadratureTrace& mean_e, const NoiseParams& n,
                                   KernelMethod method)
{
    n.validate();
    const std::size_t len = f.weights.size();
    require(mean_g.size() >= len && mean_e.size() >= len,
            "integrated_stats: mean traces shorter than the filter");
    require(std::abs(mean_g.dt - f.weights.dt) <= 1e-12 * f.weights.dt &&
                std::abs(mean_e.dt - f.weights.dt) <= 1e-12 * f.weights.dt,
            "integrated_stats: inconsistent sampling");
    const auto c = trapezoid_weights(len, f.weights.dt);
    const auto& wi = f.weights.in_phase;
    const auto& wq = f.weights.quadrature;

    ReadoutStatistics s;
    for (std::size_t k = 0; k < len; ++k) {
        s.mu_g += c[k] * (wi[k] * mean_g.in_phase[k] + wq[k] * mean_g.quadrature[k]);
        s.mu_e += c[k] * (wi[k] * mean_e.in_phase[k] + wq[k] * mean_e.quadrature[k]);
    }
    const double lorentz_weight = 0.25 * angular(n.gamma_t) * n.s_t0;
    double variance = 2.0 * white_level(n) * f.g_norm;
    if (lorentz_weight > 0.0) {
        variance += lorentz_weight *
                    exponential_kernel_integral(f.weights, 0.5 * angular(n.gamma_t), method);
    }
    s.sigma = std::sqrt(variance);
    s.snr = std::abs(s.mu_e - s.mu_g) / s.sigma;
    s.n_t = transducer_noise_number(f, n, method);
    s.fidelity = fidelity_from_snr(s.snr, 1.0);
    return s;
}

double transducer_noise_number(const MatchedFilter& f, const NoiseParams& n, KernelMethod method)
{
    require(f.g_norm > 0.0, "transducer_noise_number: g_norm must be > 0");
    n.validate();
    if (n.s_t0 == 0.0) {
        return n.s_b;
    }
    const double g = angular(n.gamma_t);
    const double kernel = exponential_kernel_integral(f.weights, 0.5 * g, method);
    return g * n.s_t0 / (4.0 * f.g_norm) * kernel + n.s_b;
}

double square_weights_noise_number(const NoiseParams& n, double t)
{
    n.validate();
    require(t > 0.0, "square_weights_noise_number: t must be > 0");
    const double x = 0.5 * angular(n.gamma_t) * t;
    return n.s_b + n.s_t0 * (2.0 + 2.0 * std::expm1(-x) / x);
}

NoiseParams noise_for_target(const MatchedFilter& f, double s_b, double gamma_t, double n_t)
{
    require(n_t >= s_b, "noise_for_target: N_t must be >= S_b");
    require(f.g_norm > 0.0 && gamma_t > 0.0, "noise_for_target: need g_norm > 0 and gamma_t > 0");
    NoiseParams n{s_b, 0.0, gamma_t};
    const double g = angular(gamma_t);
    const double kernel = exponential_kernel_integral(f.weights, 0.5 * g);
    n.s_t0 = (n_t - s_b) * 4.0 * f.g_norm / (g * kernel);
    return n;
}

double snr_from_budget(double n_r, const EfficiencyBudget& budget, SnrConvention convention)
{
    require(n_r >= 0.0, "snr_from_budget: n_r must be >= 0");
    constexpr double two_root_two = 2.0 * std::numbers::sqrt2;
    if (convention == SnrConvention::amplitude) {
        return two_root_two * budget.eta_loss * std::sqrt(n_r) / std::sqrt(1.0 + budget.n_t);
    }
    return two_root_two * std::sqrt(budget.eta_q * n_r);
}

double fidelity_from_snr(double snr, double f_o)
{
    return f_o * std::erf(snr / (2.0 * std::numbers::sqrt2));
}

double fidelity_formula(double eta_q, double n_r, double f_o)
{
    require(eta_q >= 0.0 && n_r >= 0.0, "fidelity_formula: inputs must be >= 0");
    require(f_o >= 0.0 && f_o <= 1.0, "fidelity_formula: f_o must lie in [0, 1]");
    return f_o * std::erf(std::sqrt(eta_q * n_r));
}

double measurement_dephasing(double n_r)
{
    require(n_r >= 0.0, "measurement_dephasing: n_r must be >= 0");
    return std::exp(-2.0 * n_r);
}

// --- pipeline ----------------------------------------------------------------

double default_integration_time(const PipelineConfig& cfg)
{
    return cfg.pulse.t_p + std::max(10.0 / angular(cfg.cqed.kappa_c),
                                    5.0 / angular(cfg.op.gamma_t));
}

namespace {
double trace_energy(const QuadratureTrace& a, const QuadratureTrace& b)
{
    const auto c = trapezoid_weights(a.size(), a.dt);
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double di = a.in_phase[k] - b.in_phase[k];
        const double dq = a.quadrature[k] - b.quadrature[k];
        sum += c[k] * (di * di + dq * dq);
    }
    return sum;
}
} // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg)
{
    cfg.transducer.validate();
    cfg.cqed.validate();
    cfg.pulse.validate();
    require(cfg.samples >= 16, "run_pipeline: need at least 16 samples");

    PipelineResult r;
    r.model = build_model(cfg.transducer, cfg.op, cfg.model);
    r.chain = {cfg.eta_mic, cfg.eta_opt,
               eta_gain(cfg.op.kappa_e_effective, cfg.transducer.kappa_o, cfg.transducer.omega_m),
               cfg.transducer.epsilon};

    const double t_int = cfg.t_int ? *cfg.t_int : default_integration_time(cfg);
    require(t_int > cfg.pulse.t_p, "run_pipeline: integration window shorter than the pulse");
    require(t_int <= cfg.pulse.t_r, "run_pipeline: integration window exceeds repetition interval");

    r.grid.count = cfg.samples;
    r.grid.dt = t_int / static_cast<double>(cfg.samples - 1);
    const double max_dt =
        std::min(1.0 / (20.0 * r.model.rwa_rate_hz()), 2.0 * max_cavity_step(cfg.cqed));
    r.substeps = static_cast<std::size_t>(std::ceil(r.grid.dt / max_dt * (1.0 - 1e-12)));
    r.substeps = std::max<std::size_t>(r.substeps, 1);

    TimeGrid fine;
    fine.dt = r.grid.dt / static_cast<double>(2 * r.substeps);
    fine.count = 2 * r.substeps * (cfg.samples - 1) + 1;
    r.trajectory = pointer_trajectory(cfg.pulse, cfg.cqed, fine);
    r.means = upconvert(r.model, r.trajectory, r.chain, r.substeps);
    r.filter = matched_filter(r.means.excited, r.means.ground, t_int);

    const NoiseSpec& ns = cfg.noise;
    if (ns.s_t0) {
        r.noise = {ns.s_b, *ns.s_t0, cfg.op.gamma_t};
    } else if (ns.n_t) {
        r.noise = noise_for_target(r.filter, ns.s_b, cfg.op.gamma_t, *ns.n_t);
    } else {
        r.noise = {ns.s_b, 0.0, cfg.op.gamma_t};
    }
    r.stats = integrated_stats(r.filter, r.means.ground, r.means.excited, r.noise);

    // Energy transfer of the difference signal relative to the DC response.
    const auto c_fine = trapezoid_weights(fine.count, fine.dt);
    double e_in = 0.0;
    for (std::size_t k = 0; k < fine.count; ++k) {
        e_in += c_fine[k] * std::norm(r.trajectory.alpha_out_e[k] - r.trajectory.alpha_out_g[k]);
    }
    const double dc_gain =
        std::norm(transfer_matrix(r.model, 0.0)(port::kOpticalOut[0], port::kMicrowaveIn[0]));
    const double e_out = trace_energy(r.means.excited, r.means.ground);
    const double scale = r.chain.epsilon * r.chain.eta_opt * r.chain.eta_g * r.chain.eta_mic;
    r.eta_bw_exact = e_out / (scale * dc_gain * e_in);

    r.n_r = 0.5 * dephasing_exponent(r.trajectory, cfg.cqed);
    r.budget = compose_budget(r.eta_bw_exact, eta_transducer(cfg.transducer, cfg.op), r.chain.eta_g,
                              cfg.eta_mic, cfg.eta_opt, eta_cavity(cfg.cqed), r.stats.n_t);
    return r;
}

QuadratureTrace decayed_mean(const PipelineConfig& cfg, const PipelineResult& result,
                             double t_jump)
{
    const CavityField f = cavity_response(cfg.pulse, QubitState::excited, cfg.cqed,
                                          result.trajectory.grid, t_jump);
    return upconvert_field(result.model, f.alpha_out, result.trajectory.grid.dt, result.chain,
                           result.substeps, "decayed");
}

} // namespace eoread
