#include "eoread/params.hpp"

#include "eoread/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eoread {

using detail::require;

double TransducerParams::kappa_e_at(double gamma_e) const
{
    require(gamma_e >= 0.0, "kappa_e_at: gamma_e must be >= 0");
    if (!kappa_e_table_gamma_e.empty()) {
        const auto& xs = kappa_e_table_gamma_e;
        const auto& ys = kappa_e_table_kappa_e;
        if (gamma_e <= xs.front()) {
            return ys.front();
        }
        if (gamma_e >= xs.back()) {
            return ys.back();
        }
        const auto hi = std::upper_bound(xs.begin(), xs.end(), gamma_e);
        const auto i = static_cast<std::size_t>(hi - xs.begin());
        const double f = (gamma_e - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + f * (ys[i] - ys[i - 1]);
    }
    // Linear in gamma_e between the two quoted endpoints, held beyond.
    const double f = std::min(gamma_e / gamma_e_max, 1.0);
    return kappa_e_low + f * (kappa_e_high - kappa_e_low);
}

void TransducerParams::validate() const
{
    require(omega_m > 0 && gamma_m > 0 && g_o > 0 && g_e > 0, "transducer: rates must be > 0");
    require(kappa_o > 0 && kappa_o_ext > 0 && kappa_o_ext <= kappa_o,
            "transducer: need 0 < kappa_o_ext <= kappa_o");
    require(kappa_e_ext > 0 && kappa_e_ext <= kappa_e_low && kappa_e_low <= kappa_e_high,
            "transducer: need 0 < kappa_e_ext <= kappa_e_low <= kappa_e_high");
    require(epsilon >= 0.0 && epsilon <= 1.0, "transducer: epsilon must lie in [0, 1]");
    require(gamma_e_max > 0, "transducer: gamma_e_max must be > 0");
    require(kappa_e_table_gamma_e.size() == kappa_e_table_kappa_e.size(),
            "transducer: kappa_e table columns differ in length");
    for (std::size_t i = 0; i < kappa_e_table_gamma_e.size(); ++i) {
        require(kappa_e_table_kappa_e[i] >= kappa_e_ext,
                "transducer: kappa_e table entries must be >= kappa_e_ext");
        if (i > 0) {
            require(kappa_e_table_gamma_e[i] > kappa_e_table_gamma_e[i - 1],
                    "transducer: kappa_e table abscissae must increase");
        }
    }
}

void CircuitQedParams::validate() const
{
    require(kappa_c > 0 && kappa_c_ext > 0 && kappa_c_w >= 0 && kappa_c_int >= 0,
            "cqed: cavity rates must be positive");
    const double sum = kappa_c_ext + kappa_c_w + kappa_c_int;
    require(std::abs(sum - kappa_c) <= 1e-9 * kappa_c,
            "cqed: kappa_c_ext + kappa_c_w + kappa_c_int must equal kappa_c");
    require(t1 > 0 && t2 > 0 && t2 <= 2.0 * t1, "cqed: need 0 < t2 <= 2 t1");
    require(p_residual >= 0.0 && p_residual <= 0.5, "cqed: p_residual must lie in [0, 0.5]");
}

OperatingPoint make_operating_point(const TransducerParams& p, double gamma_e, double gamma_o,
                                    std::optional<double> kappa_e_override)
{
    require(gamma_e >= 0.0 && gamma_o >= 0.0, "operating point: damping rates must be >= 0");
    OperatingPoint op;
    op.gamma_e = gamma_e;
    op.gamma_o = gamma_o;
    op.gamma_t = gamma_e + gamma_o + p.gamma_m;
    op.kappa_e_effective = kappa_e_override ? *kappa_e_override : p.kappa_e_at(gamma_e);
    require(op.kappa_e_effective >= p.kappa_e_ext, "operating point: kappa_e below kappa_e_ext");
    op.n_pump_o = pump_photons(p.g_o, gamma_o, p.kappa_o);
    op.n_pump_e = pump_photons(p.g_e, gamma_e, op.kappa_e_effective);
    return op;
}

EfficiencyBudget compose_budget(double eta_bw, double eta_t, double eta_g, double eta_mic,
                                double eta_opt, double eta_cav, double n_t)
{
    require(n_t >= 0.0, "budget: n_t must be >= 0");
    EfficiencyBudget b;
    b.eta_bw = eta_bw;
    b.eta_t = eta_t;
    b.eta_g = eta_g;
    b.eta_mic = eta_mic;
    b.eta_opt = eta_opt;
    b.eta_cav = eta_cav;
    b.n_t = n_t;
    b.eta_loss = eta_bw * eta_t * eta_g * eta_mic * eta_opt * eta_cav;
    b.eta_noise = 1.0 / (1.0 + n_t);
    b.eta_q = b.eta_loss * b.eta_noise;
    b.n_det = 1.0 + n_t;
    b.n_cqed = n_t / b.eta_loss;
    return b;
}

double dispersive_shift(double g_qc, double delta_qc, double nu)
{
    if (delta_qc == 0.0 || delta_qc == nu) {
        throw SingularityError("dispersive_shift: degenerate detuning (Delta = 0 or Delta = nu)");
    }
    // Homogeneous of degree one, so Hz in -> Hz out.
    return g_qc * g_qc * nu / (delta_qc * (delta_qc - nu));
}

double damping_rate(double g, double n_pump, double kappa)
{
    if (!(kappa > 0.0)) {
        throw std::domain_error("damping_rate: kappa must be > 0");
    }
    require(g >= 0.0 && n_pump >= 0.0, "damping_rate: g and n_pump must be >= 0");
    return 4.0 * g * g * n_pump / kappa;
}

double pump_photons(double g, double gamma, double kappa)
{
    require(g > 0.0 && kappa > 0.0 && gamma >= 0.0, "pump_photons: need g, kappa > 0, gamma >= 0");
    return gamma * kappa / (4.0 * g * g);
}

double eta_bandwidth(double gamma_t, double t_p)
{
    require(gamma_t > 0.0 && t_p > 0.0, "eta_bandwidth: gamma_t and t_p must be > 0");
    const double x = angular(gamma_t) * t_p;
    // 1 - 2 (1 - exp(-x/2)) / x, with expm1 for small x
    return 1.0 + 2.0 * std::expm1(-0.5 * x) / x;
}

double eta_transducer(const TransducerParams& p, const OperatingPoint& op)
{
    const double gt = op.gamma_t;
    return p.epsilon * (p.kappa_o_ext / p.kappa_o) * (p.kappa_e_ext / op.kappa_e_effective) *
           (4.0 * op.gamma_e * op.gamma_o / (gt * gt));
}

double eta_gain(double kappa_e, double kappa_o, double omega_m)
{
    require(omega_m > 0.0, "eta_gain: omega_m must be > 0");
    const double re = kappa_e / (4.0 * omega_m);
    const double ro = kappa_o / (4.0 * omega_m);
    return (1.0 + re * re) * (1.0 + ro * ro);
}

double eta_cavity(const CircuitQedParams& q)
{
    return 1.0 - (q.kappa_c_int + q.kappa_c_w) / q.kappa_c;
}

EfficiencyBudget efficiency_budget(const TransducerParams& p, const CircuitQedParams& q,
                                   const OperatingPoint& op, double eta_mic, double eta_opt,
                                   double n_t, double t_p)
{
    require(eta_mic > 0.0 && eta_mic <= 1.0, "efficiency_budget: eta_mic must lie in (0, 1]");
    require(eta_opt > 0.0 && eta_opt <= 1.0, "efficiency_budget: eta_opt must lie in (0, 1]");
    return compose_budget(eta_bandwidth(op.gamma_t, t_p), eta_transducer(p, op),
                          eta_gain(op.kappa_e_effective, p.kappa_o, p.omega_m), eta_mic, eta_opt,
                          eta_cavity(q), n_t);
}

namespace {
// kappa chi^2 / (kappa^2/4 + chi^2); homogeneous of degree one.
double dephasing_per_photon(double kappa_c, double chi)
{
    return kappa_c * chi * chi / (0.25 * kappa_c * kappa_c + chi * chi);
}
} // namespace

double dephasing_rate(double n_eff, double kappa_c, double chi)
{
    require(n_eff >= 0.0, "dephasing_rate: n_eff must be >= 0");
    return dephasing_per_photon(kappa_c, chi) * n_eff;
}

double effective_occupancy(double gamma_phi, double kappa_c, double chi)
{
    const double per_photon = dephasing_per_photon(kappa_c, chi);
    if (per_photon == 0.0) {
        throw SingularityError("effective_occupancy: chi = 0 gives no photon dephasing");
    }
    return gamma_phi / per_photon;
}

double dephasing_from_lifetimes(double t1, double t2)
{
    require(t1 > 0.0 && t2 > 0.0, "dephasing_from_lifetimes: lifetimes must be > 0");
    return (1.0 / t2 - 0.5 / t1) / kTwoPi;
}

double stark_shift(double chi, double n_p)
{
    require(n_p >= 0.0, "stark_shift: n_p must be >= 0");
    return 2.0 * chi * n_p;
}

TransducerParams table_transducer_params()
{
    TransducerParams p;
    p.omega_m = 1.45e6;
    p.gamma_m = 0.11;
    p.g_o = 60.0;
    p.g_e = 1.6;
    p.kappa_o = 2.68e6;
    p.kappa_o_ext = 2.12e6;
    p.kappa_e_low = 1.6e6;
    p.kappa_e_high = 2.7e6;
    p.kappa_e_ext = 1.42e6;
    p.epsilon = 0.80;
    p.gamma_e_max = 1.1e3;
    return p;
}

CircuitQedParams table_cqed_params()
{
    CircuitQedParams q;
    q.omega_q = 5.632e9;
    q.omega_c = 7.938e9;
    q.g_qc = 66.4e6;
    q.nu = 228e6;
    q.chi = 172e3;
    q.kappa_c = 380e3;
    q.kappa_c_w = 5e3;
    q.kappa_c_int = 10e3;
    q.kappa_c_ext = q.kappa_c - q.kappa_c_w - q.kappa_c_int;
    q.t1 = 17e-6;
    q.t2 = 20e-6;
    q.p_residual = 0.15;
    return q;
}

} // namespace eoread
