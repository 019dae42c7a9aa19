#include "eoread/errors.hpp"
#include "eoread/readout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace eoread {

using detail::require;

namespace {

QuadratureTrace scaled(const QuadratureTrace& t, double factor)
{
    QuadratureTrace out = t;
    for (double& v : out.in_phase) v *= factor;
    for (double& v : out.quadrature) v *= factor;
    return out;
}

QuadratureTrace sample_cavity(const ComplexSeries& alpha, std::size_t stride, double dt,
                              double scale, std::string label)
{
    QuadratureTrace tr;
    tr.dt = dt;
    tr.label = std::move(label);
    const std::size_t n = (alpha.size() - 1) / stride + 1;
    tr.in_phase.resize(n);
    tr.quadrature.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        tr.in_phase[k] = scale * alpha[k * stride].real();
        tr.quadrature[k] = scale * alpha[k * stride].imag();
    }
    return tr;
}

double r_squared(const std::vector<double>& y, const std::vector<double>& fit)
{
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - fit[i]) * (y[i] - fit[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

std::string residual_report(const std::vector<double>& v, const std::vector<double>& y,
                            const std::vector<double>& fit)
{
    std::ostringstream os;
    os << " residuals:";
    for (std::size_t i = 0; i < y.size(); ++i) {
        os << " V=" << v[i] << ":" << (y[i] - fit[i]);
    }
    return os.str();
}

} // namespace

ChainSignals amplifier_chain(const CircuitQedParams& q, ReadoutPulse pulse, double eta_loss,
                             double n_t, double amplitude_per_volt, std::size_t samples)
{
    require(eta_loss > 0.0 && eta_loss <= 1.0, "amplifier_chain: eta_loss must lie in (0, 1]");
    require(n_t >= 0.0, "amplifier_chain: N_t must be >= 0");
    require(samples >= 16, "amplifier_chain: need at least 16 samples");
    pulse.amplitude = amplitude_per_volt;

    const double t_int = pulse.t_p + 10.0 / angular(q.kappa_c);
    const double dt = t_int / static_cast<double>(samples - 1);
    const auto stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dt / max_cavity_step(q))));
    TimeGrid fine{dt / static_cast<double>(stride), stride * (samples - 1) + 1};

    const PointerTrajectory traj = pointer_trajectory(pulse, q, fine);
    const double scale = std::sqrt(angular(q.kappa_c) * eta_loss);

    ChainSignals s;
    s.mean_g = sample_cavity(traj.alpha_g, stride, dt, scale, "ground");
    s.mean_e = sample_cavity(traj.alpha_e, stride, dt, scale, "excited");
    // white noise only; gamma_t is a placeholder when s_t0 = 0
    s.noise = {n_t, 0.0, q.kappa_c};
    s.dephasing_exponent = dephasing_exponent(traj, q);
    s.t_int = t_int;
    return s;
}

ChainSignals transducer_chain(PipelineConfig cfg, double amplitude_per_volt)
{
    cfg.pulse.amplitude = amplitude_per_volt;
    const PipelineResult r = run_pipeline(cfg);
    ChainSignals s;
    s.mean_g = r.means.ground;
    s.mean_e = r.means.excited;
    s.noise = r.noise;
    s.dephasing_exponent = 2.0 * r.n_r;
    s.t_int = r.filter.t_int;
    return s;
}

double analytic_snr(const ChainSignals& s, double voltage)
{
    require(voltage > 0.0, "analytic_snr: voltage must be > 0");
    const QuadratureTrace g = scaled(s.mean_g, voltage);
    const QuadratureTrace e = scaled(s.mean_e, voltage);
    const MatchedFilter f = matched_filter(e, g, s.t_int);
    return integrated_stats(f, g, e, s.noise).snr;
}

CalibrationResult fit_calibration(std::vector<CalibrationPoint> table, double min_r2)
{
    if (table.size() < 5) {
        throw PreconditionError("calibration: need at least 5 voltage points, got " +
                                std::to_string(table.size()));
    }
    std::vector<double> v, snr, v2, log_rho;
    for (const auto& p : table) {
        require(p.voltage > 0.0, "calibration: voltages must be > 0");
        require(p.log_coherence <= 1e-12, "calibration: coherence must not exceed 1");
        v.push_back(p.voltage);
        snr.push_back(p.snr);
        v2.push_back(p.voltage * p.voltage);
        log_rho.push_back(p.log_coherence);
    }

    CalibrationResult r;
    // SNR = a V through the origin
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        sxy += v[i] * snr[i];
        sxx += v[i] * v[i];
    }
    r.a = sxy / sxx;
    std::vector<double> snr_fit(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) snr_fit[i] = r.a * v[i];
    r.snr_r2 = r_squared(snr, snr_fit);

    // ln rho = c0 - V^2 / (2 sigma^2)
    const double n = static_cast<double>(v.size());
    const double mx = std::accumulate(v2.begin(), v2.end(), 0.0) / n;
    const double my = std::accumulate(log_rho.begin(), log_rho.end(), 0.0) / n;
    double cov = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        cov += (v2[i] - mx) * (log_rho[i] - my);
        var += (v2[i] - mx) * (v2[i] - mx);
    }
    require(var > 0.0, "calibration: voltages must not all coincide");
    const double slope = cov / var;
    std::vector<double> rho_fit(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) rho_fit[i] = my + slope * (v2[i] - mx);
    r.coherence_r2 = r_squared(log_rho, rho_fit);
    if (!(slope < 0.0)) {
        throw FitQualityError("calibration: coherence does not decay with drive voltage");
    }
    r.sigma_v = std::sqrt(-0.5 / slope);
    r.eta_q = 0.5 * r.sigma_v * r.sigma_v * r.a * r.a;
    r.table = std::move(table);

    if (r.snr_r2 < min_r2) {
        throw FitQualityError("calibration: SNR(V) not linear, R^2 = " + std::to_string(r.snr_r2) +
                              residual_report(v, snr, snr_fit));
    }
    if (r.coherence_r2 < min_r2) {
        throw FitQualityError("calibration: coherence not Gaussian in V, R^2 = " +
                              std::to_string(r.coherence_r2) +
                              residual_report(v, log_rho, rho_fit));
    }
    return r;
}

CalibrationResult calibrate_quantum_efficiency(std::span<const double> voltages,
                                               const ChainSignals& chain,
                                               const SnrEstimator& estimator, double min_r2)
{
    if (voltages.size() < 5) {
        throw PreconditionError("calibration: need at least 5 voltage points, got " +
                                std::to_string(voltages.size()));
    }
    std::vector<CalibrationPoint> table;
    table.reserve(voltages.size());
    for (std::size_t i = 0; i < voltages.size(); ++i) {
        const double v = voltages[i];
        CalibrationPoint p;
        p.voltage = v;
        p.snr = estimator ? estimator(chain, v, i) : analytic_snr(chain, v);
        p.log_coherence = -v * v * chain.dephasing_exponent;
        p.coherence = std::exp(p.log_coherence);
        table.push_back(p);
    }
    const auto [lo, hi] = std::minmax_element(table.begin(), table.end(),
                                              [](const auto& a, const auto& b) { return a.snr < b.snr; });
    require(lo->snr <= 2.0 && hi->snr >= 0.1,
            "calibration: voltage points must reach into SNR in [0.1, 2]");
    return fit_calibration(std::move(table), min_r2);
}

std::vector<double> voltage_grid_for_snr(const ChainSignals& chain, double snr_lo, double snr_hi,
                                         std::size_t count)
{
    require(count >= 2, "voltage_grid_for_snr: count must be >= 2");
    require(snr_lo > 0.0 && snr_hi > snr_lo, "voltage_grid_for_snr: need 0 < snr_lo < snr_hi");
    const double slope = analytic_snr(chain, 1.0);
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double snr = snr_lo + (snr_hi - snr_lo) * static_cast<double>(i) /
                                        static_cast<double>(count - 1);
        v[i] = snr / slope;
    }
    return v;
}

} // namespace eoread
