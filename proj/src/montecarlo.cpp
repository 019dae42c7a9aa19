#include "eoread/montecarlo.hpp"

#include "eoread/errors.hpp"
#include "eoread/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace eoread {

using detail::require;

namespace {

constexpr std::uint32_t stream_word(std::uint32_t kind, std::uint32_t batch)
{
    return kind | (batch << 8);
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double quantile(std::vector<double> v, double q)
{
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(i), v.end());
    const double lo = v[i];
    if (i + 1 >= v.size()) return lo;
    const double hi = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(i) + 1, v.end());
    return lo + (pos - static_cast<double>(i)) * (hi - lo);
}

} // namespace

void Preparation::validate() const
{
    require(p_excited_given_g >= 0.0 && p_excited_given_g <= 1.0 && p_ground_given_e >= 0.0 &&
                p_ground_given_e <= 1.0,
            "Preparation: probabilities must lie in [0, 1]");
}

ShotModel shot_model(const PipelineConfig& cfg, const PipelineResult& r, Preparation prep,
                     double t1, std::size_t decay_bins)
{
    prep.validate();
    require(t1 >= 0.0, "shot_model: t1 must be >= 0");
    ShotModel m;
    m.filter = r.filter;
    m.mean_g = r.means.ground;
    m.mean_e = r.means.excited;
    m.noise = r.noise;
    m.prep = prep;
    m.t1 = t1;
    if (t1 > 0.0) {
        require(decay_bins >= 1, "shot_model: need at least one decay bin");
        for (std::size_t k = 0; k < decay_bins; ++k) {
            const double t_jump =
                (static_cast<double>(k) + 0.5) / static_cast<double>(decay_bins) * r.filter.t_int;
            m.decay_means.push_back(decayed_mean(cfg, r, t_jump));
        }
    }
    return m;
}

ShotModel shot_model(const ChainSignals& chain, double voltage, Preparation prep)
{
    prep.validate();
    require(voltage > 0.0, "shot_model: voltage must be > 0");
    ShotModel m;
    m.mean_g = chain.mean_g;
    m.mean_e = chain.mean_e;
    for (auto* t : {&m.mean_g, &m.mean_e}) {
        for (double& v : t->in_phase) v *= voltage;
        for (double& v : t->quadrature) v *= voltage;
    }
    m.filter = matched_filter(m.mean_e, m.mean_g, chain.t_int);
    m.noise = chain.noise;
    m.prep = prep;
    return m;
}

// --- simulator ---------------------------------------------------------------

ShotSimulator::ShotSimulator(ShotModel model, ShotMode mode, std::uint64_t seed,
                             std::uint32_t batch)
    : model_(std::move(model)), mode_(mode), seed_(seed), batch_(batch)
{
    model_.prep.validate();
    require(batch < (1u << 24), "ShotSimulator: batch must be < 2^24");
    const ReadoutStatistics s =
        integrated_stats(model_.filter, model_.mean_g, model_.mean_e, model_.noise);
    mu_g_ = s.mu_g;
    mu_e_ = s.mu_e;
    sigma_ = s.sigma;
    c_ = trapezoid_weights(model_.filter.weights.size(), model_.filter.weights.dt);
    for (const auto& d : model_.decay_means) {
        require(d.size() >= c_.size(), "ShotSimulator: decayed mean shorter than the filter");
        mu_decay_.push_back(integrate(d, nullptr, nullptr));
    }
    if (mode_ == ShotMode::trace) {
        sampler_.emplace(model_.noise, model_.filter.weights.dt);
    }
}

double ShotSimulator::integrate(const QuadratureTrace& mean, const double* noise_i,
                                const double* noise_q) const
{
    const auto& wi = model_.filter.weights.in_phase;
    const auto& wq = model_.filter.weights.quadrature;
    double v = 0.0;
    for (std::size_t k = 0; k < c_.size(); ++k) {
        double i = mean.in_phase[k];
        double q = mean.quadrature[k];
        if (noise_i) {
            i += noise_i[k];
            q += noise_q[k];
        }
        v += c_[k] * (wi[k] * i + wq[k] * q);
    }
    return v;
}

ShotRecord ShotSimulator::simulate_shot(std::size_t index, QubitState prepared) const
{
    const std::uint32_t kind =
        prepared == QubitState::excited ? stream::kShotExcited : stream::kShotGround;
    Philox4x32 rng(seed_, stream_word(kind, batch_), static_cast<std::uint32_t>(index));
    std::uniform_real_distribution<double> uniform;

    ShotRecord rec;
    rec.prepared = prepared;
    const double flip = prepared == QubitState::excited ? model_.prep.p_ground_given_e
                                                        : model_.prep.p_excited_given_g;
    const bool flipped = uniform(rng) < flip;
    rec.true_state = (prepared == QubitState::excited) != flipped ? QubitState::excited
                                                                  : QubitState::ground;

    const QuadratureTrace* mean =
        rec.true_state == QubitState::excited ? &model_.mean_e : &model_.mean_g;
    double mu = mean == &model_.mean_e ? mu_e_ : mu_g_;
    if (rec.true_state == QubitState::excited && model_.t1 > 0.0 && !mu_decay_.empty()) {
        const double t_jump = -model_.t1 * std::log1p(-uniform(rng));
        if (t_jump < model_.filter.t_int) {
            const auto bins = mu_decay_.size();
            const auto k = std::min(bins - 1, static_cast<std::size_t>(
                                                  t_jump / model_.filter.t_int *
                                                  static_cast<double>(bins)));
            rec.decayed = true;
            mean = &model_.decay_means[k];
            mu = mu_decay_[k];
        }
    }

    if (mode_ == ShotMode::projected) {
        std::normal_distribution<double> normal;
        rec.v = mu + sigma_ * normal(rng);
        return rec;
    }
    std::vector<double> ni(c_.size());
    std::vector<double> nq(c_.size());
    sampler_->fill(rng, ni, nq);
    rec.v = integrate(*mean, ni.data(), nq.data());
    return rec;
}

std::vector<double> simulate_voltages(const ShotSimulator& sim, QubitState state, std::size_t n,
                                      unsigned workers)
{
    std::vector<double> v(n);
    parallel_for(n, workers, [&](std::size_t i) { v[i] = sim.simulate_shot(i, state).v; });
    return v;
}

// --- histograms ----------------------------------------------------------------

std::size_t HistogramPair::total_g() const
{
    return std::accumulate(counts_g.begin(), counts_g.end(), std::size_t{0});
}

std::size_t HistogramPair::total_e() const
{
    return std::accumulate(counts_e.begin(), counts_e.end(), std::size_t{0});
}

HistogramPair build_histograms(const std::vector<double>& v_g, const std::vector<double>& v_e,
                               std::optional<std::size_t> bin_count)
{
    require(!v_g.empty() && !v_e.empty(), "build_histograms: empty sample set");
    std::vector<double> pooled(v_g);
    pooled.insert(pooled.end(), v_e.begin(), v_e.end());
    for (double v : pooled) {
        if (!std::isfinite(v)) throw NumericalError("build_histograms: non-finite voltage");
    }
    const auto [lo_it, hi_it] = std::minmax_element(pooled.begin(), pooled.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }

    std::size_t bins = 0;
    if (bin_count) {
        require(*bin_count >= 1, "build_histograms: bin_count must be >= 1");
        bins = *bin_count;
    } else {
        const double iqr = quantile(pooled, 0.75) - quantile(pooled, 0.25);
        const double width = 2.0 * iqr / std::cbrt(static_cast<double>(pooled.size()));
        bins = width > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / width)) : 1;
        bins = std::clamp<std::size_t>(bins, 1, 100000);
    }

    HistogramPair h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    const auto bin_of = [&](double v) {
        const auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        return std::min(k, bins - 1);
    };
    h.counts_g.assign(bins, 0);
    h.counts_e.assign(bins, 0);
    for (double v : v_g) ++h.counts_g[bin_of(v)];
    for (double v : v_e) ++h.counts_e[bin_of(v)];

    double mean_g = 0.0;
    double mean_e = 0.0;
    for (double v : v_g) mean_g += v;
    for (double v : v_e) mean_e += v;
    h.excited_above = mean_e / static_cast<double>(v_e.size()) >=
                      mean_g / static_cast<double>(v_g.size());
    optimal_threshold(h);
    return h;
}

void optimal_threshold(HistogramPair& h)
{
    const std::size_t bins = h.counts_g.size();
    require(bins >= 1 && h.counts_e.size() == bins && h.edges.size() == bins + 1,
            "optimal_threshold: inconsistent histogram");
    const double n_g = static_cast<double>(h.total_g());
    const double n_e = static_cast<double>(h.total_e());
    require(n_g > 0.0 && n_e > 0.0, "optimal_threshold: empty histogram");

    // below[i]: counts in bins left of edge i
    std::vector<double> f(bins + 1);
    std::vector<double> peg(bins + 1);
    std::vector<double> pge(bins + 1);
    double below_g = 0.0;
    double below_e = 0.0;
    for (std::size_t i = 0; i <= bins; ++i) {
        if (i > 0) {
            below_g += static_cast<double>(h.counts_g[i - 1]);
            below_e += static_cast<double>(h.counts_e[i - 1]);
        }
        if (h.excited_above) {
            peg[i] = (n_g - below_g) / n_g;
            pge[i] = below_e / n_e;
        } else {
            peg[i] = below_g / n_g;
            pge[i] = (n_e - below_e) / n_e;
        }
        f[i] = 1.0 - peg[i] - pge[i];
    }
    const double best = *std::max_element(f.begin(), f.end());
    const double tol = 1e-12;
    std::size_t first = bins + 1;
    std::size_t last = 0;
    for (std::size_t i = 0; i <= bins; ++i) {
        if (f[i] >= best - tol) {
            first = std::min(first, i);
            last = i;
        }
    }
    const double middle = 0.5 * (h.edges[first] + h.edges[last]);
    std::size_t pick = first;
    for (std::size_t i = first; i <= last; ++i) {
        if (f[i] >= best - tol &&
            std::abs(h.edges[i] - middle) < std::abs(h.edges[pick] - middle)) {
            pick = i;
        }
    }
    h.v_thresh = h.edges[pick];
    h.p_e_given_g = peg[pick];
    h.p_g_given_e = pge[pick];
    h.f_opt = f[pick];
    h.f_stderr = std::sqrt(peg[pick] * (1.0 - peg[pick]) / n_g + pge[pick] * (1.0 - pge[pick]) / n_e);
}

ShotRun run_histograms(const ShotSimulator& sim, std::size_t n_shots,
                       std::optional<std::size_t> bin_count, unsigned workers)
{
    require(n_shots >= 1000, "run_histograms: need at least 1000 shots per state");
    ShotRun run;
    run.shots_g.resize(n_shots);
    run.shots_e.resize(n_shots);
    parallel_for(2 * n_shots, workers, [&](std::size_t i) {
        if (i < n_shots) {
            run.shots_g[i] = sim.simulate_shot(i, QubitState::ground);
        } else {
            run.shots_e[i - n_shots] = sim.simulate_shot(i - n_shots, QubitState::excited);
        }
    });
    std::vector<double> vg(n_shots);
    std::vector<double> ve(n_shots);
    for (std::size_t i = 0; i < n_shots; ++i) {
        vg[i] = run.shots_g[i].v;
        ve[i] = run.shots_e[i].v;
    }
    run.histograms = build_histograms(vg, ve, bin_count);
    run.snr = sim.snr();
    run.f_analytic = mixture_fidelity(run.snr, sim.model().prep);
    return run;
}

double mixture_fidelity(double snr, const Preparation& prep)
{
    prep.validate();
    return (1.0 - prep.p_excited_given_g - prep.p_ground_given_e) *
           std::erf(snr / (2.0 * std::numbers::sqrt2));
}

double mixture_weight(const std::vector<double>& v, double mu_major, double mu_minor,
                      double sigma)
{
    require(!v.empty() && sigma > 0.0, "mixture_weight: need samples and sigma > 0");
    double w = 0.5;
    for (int iter = 0; iter < 500; ++iter) {
        double sum = 0.0;
        for (double x : v) {
            const double a = (x - mu_major) / sigma;
            const double b = (x - mu_minor) / sigma;
            // responsibility of the minor component, written to avoid underflow
            const double log_ratio = 0.5 * (a * a - b * b) + std::log(w / (1.0 - w));
            sum += 1.0 / (1.0 + std::exp(-log_ratio));
        }
        const double next = std::clamp(sum / static_cast<double>(v.size()), 1e-12, 1.0 - 1e-12);
        if (std::abs(next - w) < 1e-12) {
            return next;
        }
        w = next;
    }
    return w;
}

// --- Rabi --------------------------------------------------------------------

double rabi_probability(double tau, double detuning, double omega_r, double p0)
{
    const double om = angular(omega_r);
    const double de = angular(detuning);
    const double gen2 = om * om + de * de;
    if (gen2 == 0.0) {
        return p0;
    }
    const double s = std::sin(0.5 * std::sqrt(gen2) * tau);
    return p0 + (1.0 - 2.0 * p0) * om * om / gen2 * s * s;
}

std::vector<RabiPoint> rabi_scan(const ShotSimulator& sim, const std::vector<double>& taus,
                                 const std::vector<double>& detunings, double omega_r,
                                 std::size_t shots_per_point, unsigned workers)
{
    require(!taus.empty() && !detunings.empty(), "rabi_scan: grids must be non-empty");
    require(shots_per_point >= 1, "rabi_scan: need at least one shot per point");
    require(omega_r >= 0.0, "rabi_scan: omega_r must be >= 0");

    const double mu_g = sim.mean(QubitState::ground);
    const double mu_e = sim.mean(QubitState::excited);
    const double sigma = sim.sigma();
    const double thresh = 0.5 * (mu_g + mu_e);
    const bool excited_above = mu_e >= mu_g;
    // assignment errors of a perfectly prepared state
    const double half_gap = std::abs(mu_e - mu_g) / (2.0 * sigma);
    const double err = normal_cdf(-half_gap);
    const double p0 = sim.model().prep.p_excited_given_g;

    std::vector<RabiPoint> out(taus.size() * detunings.size());
    parallel_for(out.size(), workers, [&](std::size_t idx) {
        RabiPoint& p = out[idx];
        p.tau = taus[idx / detunings.size()];
        p.detuning = detunings[idx % detunings.size()];
        require(p.tau >= 0.0, "rabi_scan: tau must be >= 0");
        p.p_true = rabi_probability(p.tau, p.detuning, omega_r, p0);

        Philox4x32 rng(sim.seed(), stream::kRabi, static_cast<std::uint32_t>(idx));
        std::uniform_real_distribution<double> uniform;
        std::normal_distribution<double> normal;
        std::size_t hits = 0;
        for (std::size_t s = 0; s < shots_per_point; ++s) {
            const bool excited = uniform(rng) < p.p_true;
            const double v = (excited ? mu_e : mu_g) + sigma * normal(rng);
            hits += (v > thresh) == excited_above ? 1 : 0;
        }
        const double n = static_cast<double>(shots_per_point);
        p.p_raw = static_cast<double>(hits) / n;
        const double scale = 1.0 - 2.0 * err;
        p.p_e = scale > 0.0 ? (p.p_raw - err) / scale : p.p_raw;
        p.stderr_p = std::sqrt(p.p_raw * (1.0 - p.p_raw) / n) / (scale > 0.0 ? scale : 1.0);
    });
    return out;
}

SnrEstimator monte_carlo_snr(std::uint64_t seed, std::size_t shots, ShotMode mode,
                             unsigned workers)
{
    require(shots >= 2, "monte_carlo_snr: need at least 2 shots per state");
    return [=](const ChainSignals& chain, double voltage, std::size_t index) {
        const ShotSimulator sim(shot_model(chain, voltage), mode, seed,
                                static_cast<std::uint32_t>(index + 1));
        const auto vg = simulate_voltages(sim, QubitState::ground, shots, workers);
        const auto ve = simulate_voltages(sim, QubitState::excited, shots, workers);
        const auto moments = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return std::pair{m, s / static_cast<double>(v.size() - 1)};
        };
        const auto [mg, sg] = moments(vg);
        const auto [me, se] = moments(ve);
        return std::abs(me - mg) / std::sqrt(0.5 * (sg + se));
    };
}

} // namespace eoread
