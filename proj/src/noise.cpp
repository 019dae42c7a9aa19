#include "eoread/noise.hpp"

#include "eoread/errors.hpp"

#include <cmath>
#include <random>

namespace eoread {

using detail::require;

void NoiseParams::validate() const
{
    require(s_b >= 0.0 && s_t0 >= 0.0, "NoiseParams: s_b and s_t0 must be >= 0");
    require(gamma_t > 0.0, "NoiseParams: gamma_t must be > 0");
}

double output_spectrum(const NoiseParams& n, double frequency)
{
    const double half_width = 0.5 * angular(n.gamma_t);
    const double w = angular(frequency);
    const double h2 = half_width * half_width;
    return white_level(n) + h2 * n.s_t0 / (h2 + w * w);
}

double white_level(const NoiseParams& n)
{
    return 0.5 * (1.0 + n.s_b);
}

double autocorrelation(const NoiseParams& n, double tau)
{
    const double g = angular(n.gamma_t);
    return 0.25 * g * n.s_t0 * std::exp(-0.5 * g * std::abs(tau));
}

double max_sample_step(const NoiseParams& n)
{
    return 0.1 * 2.0 / angular(n.gamma_t);
}

NoiseSampler::NoiseSampler(const NoiseParams& n, double dt) : dt_(dt)
{
    n.validate();
    require(dt > 0.0, "NoiseSampler: dt must be > 0");
    // the step bound only matters when the Lorentzian is present
    require(n.s_t0 == 0.0 || dt <= max_sample_step(n) * (1.0 + 1e-12),
            "NoiseSampler: dt must not exceed 0.1 * 2 / Gamma_T");
    white_sigma_ = std::sqrt(white_level(n) / dt);
    ou_sigma_ = std::sqrt(autocorrelation(n, 0.0));
    ou_decay_ = std::exp(-0.5 * angular(n.gamma_t) * dt);
    // sqrt(var (1 - rho^2)), written with expm1 to keep precision for small steps
    ou_kick_ = ou_sigma_ * std::sqrt(-std::expm1(-angular(n.gamma_t) * dt));
}

void NoiseSampler::fill_one(Philox4x32& rng, std::span<double> out) const
{
    std::normal_distribution<double> normal;
    double ou = ou_sigma_ * normal(rng);
    for (double& v : out) {
        v = white_sigma_ * normal(rng) + ou;
        ou = ou_decay_ * ou + ou_kick_ * normal(rng);
    }
}

void NoiseSampler::fill(Philox4x32& rng, std::span<double> in_phase,
                        std::span<double> quadrature) const
{
    require(in_phase.size() == quadrature.size(), "NoiseSampler: I and Q spans differ in length");
    fill_one(rng, in_phase);
    fill_one(rng, quadrature);
}

QuadratureTrace sample_noise(const NoiseParams& n, std::uint64_t seed, double dt,
                             std::size_t count)
{
    require(count >= 1, "sample_noise: count must be >= 1");
    const NoiseSampler sampler(n, dt);
    QuadratureTrace trace;
    trace.dt = dt;
    trace.label = "noise";
    trace.in_phase.resize(count);
    trace.quadrature.resize(count);
    Philox4x32 rng(seed, stream::kNoiseTrace, 0);
    sampler.fill(rng, trace.in_phase, trace.quadrature);
    return trace;
}

} // namespace eoread
