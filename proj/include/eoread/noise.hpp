#pragma once

// Noise at the input of the optical heterodyne detector, normalised to LO
// shot noise: a white floor (vacuum + ideal heterodyne + pump phase noise)
// plus a Lorentzian of width Gamma_T from thermal motion of the membrane.

#include "eoread/random.hpp"
#include "eoread/statespace.hpp"

#include <cstdint>
#include <span>

namespace eoread {

struct NoiseParams {
    double s_b = 0.0;     ///< pump phase-noise level (shot-noise units)
    double s_t0 = 0.0;    ///< Lorentzian amplitude on resonance
    double gamma_t = 1.0; ///< Lorentzian full width Gamma_T (Hz)

    void validate() const;
};

/// Single-quadrature power spectral density at frequency f (Hz),
/// S(w) = (1 + S_b)/2 + (G^2/4) S_t(0) / (G^2/4 + w^2) with w = 2 pi f.
double output_spectrum(const NoiseParams& n, double frequency);

/// Weight of the delta-correlated part of <zeta(t) zeta(t')>: (1 + S_b)/2.
double white_level(const NoiseParams& n);

/// Continuous part of <zeta(t) zeta(t + tau)>: (G/4) S_t(0) exp(-G|tau|/2),
/// G = 2 pi gamma_t.
double autocorrelation(const NoiseParams& n, double tau);

/// Largest sampling step accepted by the sampler: 0.1 * 2 / (2 pi gamma_t).
double max_sample_step(const NoiseParams& n);

/// Draws I and Q noise records with the statistics above. The delta term is
/// realised as independent Gaussians of variance (1 + S_b)/(2 dt) per sample;
/// the Lorentzian as an Ornstein-Uhlenbeck process updated with its exact
/// one-step transition, started from its stationary distribution.
class NoiseSampler {
public:
    NoiseSampler(const NoiseParams& n, double dt);

    /// Overwrites both spans (equal length) with one independent realisation.
    void fill(Philox4x32& rng, std::span<double> in_phase, std::span<double> quadrature) const;

    double dt() const { return dt_; }

private:
    void fill_one(Philox4x32& rng, std::span<double> out) const;

    double dt_;
    double white_sigma_;
    double ou_sigma_;
    double ou_decay_;
    double ou_kick_;
};

/// Deterministic per seed; uses stream (kNoiseTrace, 0).
QuadratureTrace sample_noise(const NoiseParams& n, std::uint64_t seed, double dt,
                             std::size_t count);

} // namespace eoread
