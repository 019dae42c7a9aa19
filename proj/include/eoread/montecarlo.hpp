#pragma once

// Single-shot simulation: noisy integrated voltages, histograms, threshold
// optimisation and Rabi scans.
//
// Each shot draws from its own Philox stream, keyed by the seed and by
// (state, shot index), so results do not depend on the number of workers or
// on the order in which shots are generated.

#include "eoread/readout.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace eoread {

enum class ShotMode {
    trace,     ///< sample a full noise record and apply the filter
    projected, ///< sample the integrated voltage directly from N(mu, sigma^2)
};

struct Preparation {
    double p_excited_given_g = 0.0; ///< g-preparation found in e
    double p_ground_given_e = 0.0;  ///< e-preparation found in g

    static Preparation symmetric(double p_residual) { return {p_residual, p_residual}; }
    void validate() const;
};

/// Inputs of the shot simulator.
struct ShotModel {
    MatchedFilter filter;
    QuadratureTrace mean_g;
    QuadratureTrace mean_e;
    NoiseParams noise;
    Preparation prep;
    /// Qubit lifetime for decay during readout; 0 disables it.
    double t1 = 0.0;
    /// Mean record for a jump e -> g inside bin k of [0, filter.t_int).
    std::vector<QuadratureTrace> decay_means;
};

/// Shot model of a pipeline run. With t1 > 0, `decay_bins` decayed mean
/// records are precomputed at the bin centres.
ShotModel shot_model(const PipelineConfig& cfg, const PipelineResult& r, Preparation prep,
                     double t1 = 0.0, std::size_t decay_bins = 32);

/// Shot model of a calibration chain at drive voltage V.
ShotModel shot_model(const ChainSignals& chain, double voltage, Preparation prep = {});

struct ShotRecord {
    QubitState prepared = QubitState::ground;
    QubitState true_state = QubitState::ground;
    bool decayed = false;
    double v = 0.0;
};

class ShotSimulator {
public:
    /// `batch` separates independent shot sets drawn with the same seed.
    ShotSimulator(ShotModel model, ShotMode mode, std::uint64_t seed, std::uint32_t batch = 0);

    ShotRecord simulate_shot(std::size_t index, QubitState prepared) const;

    /// Integrated mean for a given true state (no noise, no decay).
    double mean(QubitState s) const { return s == QubitState::excited ? mu_e_ : mu_g_; }
    double sigma() const { return sigma_; }
    double snr() const { return std::abs(mu_e_ - mu_g_) / sigma_; }
    const ShotModel& model() const { return model_; }
    std::uint64_t seed() const { return seed_; }

private:
    double integrate(const QuadratureTrace& mean, const double* noise_i,
                     const double* noise_q) const;

    ShotModel model_;
    ShotMode mode_;
    std::uint64_t seed_;
    std::uint32_t batch_;
    std::vector<double> c_;
    double mu_g_ = 0.0;
    double mu_e_ = 0.0;
    double sigma_ = 0.0;
    std::vector<double> mu_decay_;
    std::optional<NoiseSampler> sampler_;
};

/// Voltages of n shots prepared in `state`, shots 0..n-1.
std::vector<double> simulate_voltages(const ShotSimulator& sim, QubitState state, std::size_t n,
                                      unsigned workers = 0);

struct HistogramPair {
    std::vector<double> edges; ///< bin edges, size = counts + 1
    std::vector<std::size_t> counts_g;
    std::vector<std::size_t> counts_e;
    bool excited_above = true; ///< e is assigned to voltages above v_thresh
    double v_thresh = 0.0;
    double p_e_given_g = 0.0;
    double p_g_given_e = 0.0;
    double f_opt = 0.0;
    double f_stderr = 0.0;

    std::size_t total_g() const;
    std::size_t total_e() const;
};

/// Histograms over a common binning of both sample sets; Freedman-Diaconis
/// bin width unless `bin_count` is given. Threshold fields are filled by
/// optimal_threshold.
HistogramPair build_histograms(const std::vector<double>& v_g, const std::vector<double>& v_e,
                               std::optional<std::size_t> bin_count = std::nullopt);

/// Exhaustive scan over bin edges maximising 1 - P(e|g) - P(g|e); ties go to
/// the edge nearest the middle of the tied range. Throws PreconditionError
/// for empty histograms.
void optimal_threshold(HistogramPair& h);

struct ShotRun {
    HistogramPair histograms;
    std::vector<ShotRecord> shots_g;
    std::vector<ShotRecord> shots_e;
    double snr = 0.0;           ///< analytic SNR of the shot model
    double f_analytic = 0.0;    ///< erf-mixture prediction
};

/// n_shots per prepared state (>= 1000).
ShotRun run_histograms(const ShotSimulator& sim, std::size_t n_shots,
                       std::optional<std::size_t> bin_count = std::nullopt,
                       unsigned workers = 0);

/// (1 - p_eg - p_ge) erf(snr / (2 sqrt 2)): optimum for two equal-width
/// Gaussians with symmetric or asymmetric preparation errors.
double mixture_fidelity(double snr, const Preparation& prep);

/// Weight of the `minor` component in samples drawn from a two-Gaussian
/// mixture with known means and common width (EM on the weight alone).
double mixture_weight(const std::vector<double>& v, double mu_major, double mu_minor,
                      double sigma);

struct RabiPoint {
    double tau = 0.0;       ///< s
    double detuning = 0.0;  ///< Hz
    double p_true = 0.0;    ///< model excitation probability
    double p_raw = 0.0;     ///< fraction of shots above threshold
    double p_e = 0.0;       ///< p_raw corrected for assignment errors
    double stderr_p = 0.0;  ///< standard error of p_e
};

/// Excitation probability after a detuned Rabi pulse starting from the
/// thermal population p0: p0 + (1 - 2 p0) W sin^2(Omega' tau / 2).
double rabi_probability(double tau, double detuning, double omega_r, double p0);

/// Shots are drawn in projected mode; the threshold is the midpoint of the
/// two means and p_e is corrected with the analytic assignment errors.
std::vector<RabiPoint> rabi_scan(const ShotSimulator& sim, const std::vector<double>& taus,
                                 const std::vector<double>& detunings, double omega_r,
                                 std::size_t shots_per_point, unsigned workers = 0);

/// Monte Carlo SNR estimator for calibrate_quantum_efficiency: `shots`
/// per state, pooled standard deviation.
SnrEstimator monte_carlo_snr(std::uint64_t seed, std::size_t shots, ShotMode mode,
                             unsigned workers = 0);

} // namespace eoread
