#pragma once

// Dispersive readout through the transducer: pointer-state dynamics of the
// readout cavity, upconversion through the state-space model, matched-filter
// integration, the added-noise number and the resulting SNR / fidelity.

#include "eoread/noise.hpp"
#include "eoread/params.hpp"
#include "eoread/statespace.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace eoread {

enum class QubitState { ground, excited };

/// How loss enters the SNR. `power` scales the pointer amplitude by
/// sqrt(eta_loss) and is consistent with heterodyne statistics and with the
/// dephasing calibration; `amplitude` scales it by eta_loss itself.
enum class SnrConvention { power, amplitude };

struct TimeGrid {
    double dt = 0.0;
    std::size_t count = 0;

    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    double span() const { return count ? static_cast<double>(count - 1) * dt : 0.0; }
};

struct ReadoutPulse {
    /// sqrt(n_r) in photons^(1/2): |alpha| sin(theta) of the steady-state
    /// pointer states, |alpha|^2 being the photons leaving the cavity.
    double amplitude = 0.0;
    double t_p = 15e-6;  ///< pulse length (s)
    double t_r = 1e-3;   ///< repetition interval (s)
    /// Optional envelope sampled uniformly over [0, t_p]; empty means square.
    std::vector<double> envelope;

    double envelope_at(double t) const;
    /// Integral of envelope^2 over the pulse (s).
    double envelope_energy() const;
    void validate() const;
};

using ComplexSeries = std::vector<std::complex<double>>;

struct CavityField {
    ComplexSeries alpha;     ///< intracavity amplitude (photons^(1/2))
    ComplexSeries alpha_out; ///< output field (photons/s)^(1/2)
    ComplexSeries drive;     ///< incident field
};

struct PointerTrajectory {
    TimeGrid grid;
    ComplexSeries alpha_g, alpha_e;
    ComplexSeries alpha_out_g, alpha_out_e;
    double theta = 0.0; ///< arctan(2 chi / kappa_c)
};

/// Input amplitude (photons/s)^(1/2) that realises pulse.amplitude for the
/// square / user envelope. For chi = 0 the amplitude is read as the square
/// root of the emitted photon number.
double drive_amplitude(const ReadoutPulse& pulse, const CircuitQedParams& q);

/// Largest step accepted by cavity_response (s).
double max_cavity_step(const CircuitQedParams& q);

/// Driven cavity, d alpha/dt = -(i Delta + kappa_c/2) alpha + sqrt(kappa_c_ext) eps_in(t),
/// Delta = -chi for g and +chi for e. Exact exponential update with the
/// drive held at its step-midpoint value. `jump_time` switches e -> g at
/// that instant (qubit decay during readout).
CavityField cavity_response(const ReadoutPulse& pulse, QubitState state,
                            const CircuitQedParams& q, const TimeGrid& grid,
                            std::optional<double> jump_time = std::nullopt);

PointerTrajectory pointer_trajectory(const ReadoutPulse& pulse, const CircuitQedParams& q,
                                     const TimeGrid& grid);

/// Time-domain dephasing exponent, (kappa_c / 2) * integral |alpha_e - alpha_g|^2 dt;
/// the qubit coherence after the pulse is exp(-exponent).
double dephasing_exponent(const PointerTrajectory& traj, const CircuitQedParams& q);

/// Scalar factors applied outside the state-space model.
struct DetectionChain {
    double eta_mic = 1.0;
    double eta_opt = 1.0;
    double eta_g = 1.0;   ///< finite-sideband gain, applied as sqrt(eta_g) in amplitude
    double epsilon = 1.0; ///< heterodyne mode matching
};

struct OpticalMeans {
    QuadratureTrace ground;
    QuadratureTrace excited;
};

/// Send sqrt(eta_mic) * alpha_out through the RWA model (microwave port in,
/// optical port out), then scale by sqrt(epsilon eta_opt eta_g). The cavity
/// output already carries the kappa_c_ext / kappa_c factor. `substeps`
/// integrator steps are taken per sample of the returned traces; the
/// trajectory grid must be twice as fine as the integrator step.
OpticalMeans upconvert(const StateSpaceModel& m, const PointerTrajectory& traj,
                       const DetectionChain& chain, std::size_t substeps);

/// Single-trace variant of upconvert.
QuadratureTrace upconvert_field(const StateSpaceModel& m, const ComplexSeries& alpha_out,
                                double cavity_dt, const DetectionChain& chain,
                                std::size_t substeps, std::string label);

/// Trapezoid weights c_k (1/2 at both ends) times dt.
std::vector<double> trapezoid_weights(std::size_t count, double dt);

struct MatchedFilter {
    QuadratureTrace weights; ///< W_I, W_Q
    double t_int = 0.0;
    double g_norm = 0.0;     ///< (1/2) integral (W_I^2 + W_Q^2) dt
};

/// W_I = <I_e> - <I_g>, W_Q = <Q_e> - <Q_g> over [0, t_int].
/// Throws DegenerateFilterError when the means coincide.
MatchedFilter matched_filter(const QuadratureTrace& mean_e, const QuadratureTrace& mean_g,
                             double t_int);

enum class KernelMethod { recursive, direct };

/// Trapezoid double integral of sum_{I,Q} W(t) W(t') exp(-rate |t - t'|).
/// `recursive` evaluates the same double sum in O(N).
double exponential_kernel_integral(const QuadratureTrace& weights, double rate,
                                   KernelMethod method = KernelMethod::recursive);

struct ReadoutStatistics {
    double mu_g = 0.0;
    double mu_e = 0.0;
    double sigma = 0.0;
    double snr = 0.0;
    double n_t = 0.0;
    double fidelity = 0.0; ///< erf(snr / (2 sqrt 2)), midpoint threshold
};

/// Integrated means and the variance of the weighted integral for the
/// white + Lorentzian noise kernel.
ReadoutStatistics integrated_stats(const MatchedFilter& f, const QuadratureTrace& mean_g,
                                   const QuadratureTrace& mean_e, const NoiseParams& n,
                                   KernelMethod method = KernelMethod::recursive);

/// Added noise of the transducer for the given weights,
/// N_t = (G S_t(0) / 4 g_norm) * kernel integral + S_b.
double transducer_noise_number(const MatchedFilter& f, const NoiseParams& n,
                               KernelMethod method = KernelMethod::recursive);

/// Closed form of transducer_noise_number for constant weights over [0, T].
double square_weights_noise_number(const NoiseParams& n, double t);

/// S_t(0) reproducing a target N_t for the given weights.
NoiseParams noise_for_target(const MatchedFilter& f, double s_b, double gamma_t, double n_t);

double snr_from_budget(double n_r, const EfficiencyBudget& budget,
                       SnrConvention convention = SnrConvention::power);

/// f_o * erf(snr / (2 sqrt 2)) for two equal-width Gaussians split at the midpoint.
double fidelity_from_snr(double snr, double f_o);

/// f_o * erf(sqrt(eta_q n_r)), i.e. fidelity_from_snr with the power-convention SNR.
double fidelity_formula(double eta_q, double n_r, double f_o);

/// Coherence ratio exp(-2 n_r) left by a measurement of strength n_r.
double measurement_dephasing(double n_r);

// --- full pipeline ---------------------------------------------------------

struct NoiseSpec {
    double s_b = 0.0;
    std::optional<double> s_t0; ///< use as given
    std::optional<double> n_t;  ///< or derive S_t(0) from this target
};

struct PipelineConfig {
    TransducerParams transducer;
    CircuitQedParams cqed;
    OperatingPoint op;
    ReadoutPulse pulse;
    double eta_mic = kEtaMicApparent;
    double eta_opt = kEtaOpt;
    NoiseSpec noise;
    std::size_t samples = 4096;
    std::optional<double> t_int; ///< default t_p + max(10/kappa_c, 5/Gamma_T)
    ModelOptions model;
};

struct PipelineResult {
    TimeGrid grid;          ///< filter / noise sampling grid
    std::size_t substeps = 1;
    StateSpaceModel model;
    DetectionChain chain;
    PointerTrajectory trajectory; ///< on the fine cavity grid
    OpticalMeans means;
    MatchedFilter filter;
    NoiseParams noise;
    ReadoutStatistics stats;
    double eta_bw_exact = 0.0;  ///< output / (|H(0)|^2 input) energy of the difference signal
    double n_r = 0.0;           ///< dephasing_exponent / 2
    EfficiencyBudget budget;    ///< closed-form budget with eta_bw_exact and the pipeline N_t
};

double default_integration_time(const PipelineConfig& cfg);

PipelineResult run_pipeline(const PipelineConfig& cfg);

/// Mean optical record for a qubit prepared in e that decays to g at t_jump.
QuadratureTrace decayed_mean(const PipelineConfig& cfg, const PipelineResult& result,
                             double t_jump);

// --- quantum-efficiency calibration -------------------------------------

/// Everything needed to emulate readout at drive voltage V: mean records and
/// dephasing exponent at V = 1 (means scale with V, the exponent with V^2).
struct ChainSignals {
    QuadratureTrace mean_g;
    QuadratureTrace mean_e;
    NoiseParams noise;
    double dephasing_exponent = 0.0;
    double t_int = 0.0;
};

/// Methods-style amplifier model: records sqrt(kappa_c eta_loss) alpha(t)
/// with white noise (1 + N_t)/2. The injected efficiency is eta_loss/(1+N_t).
/// One volt corresponds to one photon^(1/2) of readout amplitude times
/// `amplitude_per_volt`.
ChainSignals amplifier_chain(const CircuitQedParams& q, ReadoutPulse pulse, double eta_loss,
                             double n_t, double amplitude_per_volt = 1.0,
                             std::size_t samples = 4096);

/// Full transducer pipeline as a calibration chain.
ChainSignals transducer_chain(PipelineConfig cfg, double amplitude_per_volt = 1.0);

struct CalibrationPoint {
    double voltage = 0.0;
    double snr = 0.0;
    double coherence = 0.0;     ///< rho_ge / rho_ge(0); may underflow to 0
    double log_coherence = 0.0; ///< what the Gaussian fit uses
};

struct CalibrationResult {
    double a = 0.0;       ///< SNR slope (1/V)
    double sigma_v = 0.0; ///< Gaussian width of the coherence (V)
    double eta_q = 0.0;   ///< sigma_v^2 a^2 / 2
    double snr_r2 = 0.0;
    double coherence_r2 = 0.0;
    std::vector<CalibrationPoint> table;
};

/// SNR estimate at voltage V; `index` identifies the point for RNG streams.
using SnrEstimator = std::function<double(const ChainSignals&, double voltage, std::size_t index)>;

double analytic_snr(const ChainSignals& s, double voltage);

/// Linear fit of SNR(V) through the origin and a Gaussian fit of the
/// coherence; throws FitQualityError when either R^2 is below min_r2.
CalibrationResult fit_calibration(std::vector<CalibrationPoint> table, double min_r2 = 0.99);

CalibrationResult calibrate_quantum_efficiency(std::span<const double> voltages,
                                               const ChainSignals& chain,
                                               const SnrEstimator& estimator = {},
                                               double min_r2 = 0.99);

/// `count` voltages evenly spanning analytic SNR in [snr_lo, snr_hi].
std::vector<double> voltage_grid_for_snr(const ChainSignals& chain, double snr_lo,
                                         double snr_hi, std::size_t count);

} // namespace eoread
