#pragma once

// INI run configuration. Keys carry their unit as a suffix (_hz, _s,
// _photons, _sqrtphotons, _dimless, _count, _v, _name); the loader rejects
// unknown and unsuffixed keys. A user file is applied on top of the bundled
// defaults, so it only needs the keys it changes.

#include "eoread/montecarlo.hpp"
#include "eoread/readout.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eoread {

enum class CalibrationChain { amplifier, transducer };

struct MonteCarloSpec {
    std::size_t shots = 10000;
    ShotMode mode = ShotMode::trace;
    std::optional<std::size_t> bins;
    std::optional<double> p_ground_given_e; ///< defaults to p_residual
    double decay_t1 = 0.0;                  ///< 0 disables decay during readout
    double rabi_omega = 0.0;                ///< Hz
    std::vector<double> rabi_tau;           ///< s
    std::vector<double> rabi_detuning;      ///< Hz
    std::size_t rabi_shots = 2000;
};

struct SweepSpec {
    std::vector<double> gamma_e; ///< Hz
    std::vector<double> gamma_o; ///< Hz
};

struct CalibrationSpec {
    CalibrationChain chain = CalibrationChain::amplifier;
    std::vector<double> voltages; ///< empty: derived from the SNR range
    std::size_t voltage_count = 8;
    double snr_min = 0.1;
    double snr_max = 2.0;
    double eta_loss = 1.9e-3; ///< amplifier chain only
    double n_t = 1.4;         ///< amplifier chain only
    double amplitude_per_volt = 1.0;
    std::size_t shots = 0;    ///< 0: analytic SNR
    double min_r2 = 0.99;
};

struct RunConfig {
    TransducerParams transducer;
    CircuitQedParams cqed;
    double mechanical_occupancy = 0.0;
    double gamma_e = 0.0;
    double gamma_o = 0.0;
    std::optional<double> kappa_e;
    double eta_mic = kEtaMicApparent;
    double eta_opt = kEtaOpt;
    double s_b = 0.0;
    double n_t_at_gamma_e_max = 1.4;
    std::optional<double> s_t0;
    ReadoutPulse pulse;
    std::size_t samples = 4096;
    std::optional<double> t_int;
    MonteCarloSpec montecarlo;
    SweepSpec sweep;
    CalibrationSpec calibration;

    /// Sorted "section.key = value" lines of the effective configuration.
    std::string canonical;

    /// Added-noise number at an operating point: s_b plus the excess over s_b
    /// scaled linearly with gamma_e, held beyond gamma_e_max.
    double n_t_at(double gamma_e) const;

    OperatingPoint operating_point(double gamma_e, double gamma_o) const;
    OperatingPoint operating_point() const { return operating_point(gamma_e, gamma_o); }

    /// Pipeline inputs at an operating point.
    PipelineConfig pipeline(double gamma_e, double gamma_o) const;
    PipelineConfig pipeline() const { return pipeline(gamma_e, gamma_o); }
};

/// Bundled defaults.
RunConfig default_config();
/// Parse INI text over the bundled defaults; `source` names it in errors.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

/// Hex SHA-256 of the canonical configuration.
std::string config_hash(const RunConfig& cfg);

} // namespace eoread
