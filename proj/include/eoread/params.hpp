#pragma once

// Physical parameters of the circuit QED system and the electro-optomechanical
// transducer, plus the closed-form scalar quantities derived from them.
//
// Every frequency and rate is stored as an ordinary frequency in Hz (the
// quantity usually quoted as X/2pi). Conversion to angular units happens
// inside the formulas that need it.

#include <numbers>
#include <optional>
#include <vector>

namespace eoread {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Hz -> rad/s
constexpr double angular(double hz) { return kTwoPi * hz; }

struct TransducerParams {
    double omega_m = 0.0;     ///< mechanical frequency (Hz)
    double gamma_m = 0.0;     ///< intrinsic mechanical loss (Hz)
    double g_o = 0.0;         ///< vacuum optomechanical coupling (Hz)
    double g_e = 0.0;         ///< vacuum electromechanical coupling (Hz)
    double kappa_o = 0.0;     ///< optical linewidth (Hz)
    double kappa_o_ext = 0.0; ///< optical external coupling (Hz)
    double kappa_e_low = 0.0; ///< LC linewidth at low pump power (Hz)
    double kappa_e_high = 0.0;///< LC linewidth at high pump power (Hz)
    double kappa_e_ext = 0.0; ///< LC external coupling (Hz)
    double epsilon = 1.0;     ///< heterodyne mode matching, 0..1

    /// Electromechanical damping at which kappa_e reaches kappa_e_high.
    double gamma_e_max = 1.1e3;

    /// Optional piecewise-linear (gamma_e, kappa_e) table replacing the
    /// two-point interpolation. Abscissae must be strictly increasing.
    std::vector<double> kappa_e_table_gamma_e;
    std::vector<double> kappa_e_table_kappa_e;

    double kappa_o_int() const { return kappa_o - kappa_o_ext; }

    /// LC linewidth at a given electromechanical damping rate.
    double kappa_e_at(double gamma_e) const;

    /// Throws PreconditionError when an invariant is violated.
    void validate() const;
};

struct CircuitQedParams {
    double omega_q = 0.0;     ///< qubit frequency (Hz)
    double omega_c = 0.0;     ///< readout cavity frequency (Hz)
    double g_qc = 0.0;        ///< qubit-cavity coupling (Hz)
    double nu = 0.0;          ///< anharmonicity (Hz)
    double chi = 0.0;         ///< dispersive shift (Hz)
    double kappa_c = 0.0;     ///< total cavity linewidth (Hz)
    double kappa_c_ext = 0.0; ///< output port coupling (Hz)
    double kappa_c_w = 0.0;   ///< weak port coupling (Hz)
    double kappa_c_int = 0.0; ///< internal loss (Hz)
    double t1 = 0.0;          ///< qubit lifetime (s)
    double t2 = 0.0;          ///< Ramsey time (s)
    double p_residual = 0.0;  ///< residual excited-state population

    double delta_qc() const { return omega_q - omega_c; }
    void validate() const;
};

/// Pump-controlled working point of the transducer. Construct through
/// make_operating_point so the derived fields stay consistent.
struct OperatingPoint {
    double gamma_e = 0.0;           ///< electromechanical damping (Hz)
    double gamma_o = 0.0;           ///< optomechanical damping (Hz)
    double gamma_t = 0.0;           ///< gamma_e + gamma_o + gamma_m (Hz)
    double n_pump_o = 0.0;          ///< intracavity optical pump photons
    double n_pump_e = 0.0;          ///< intracavity microwave pump photons
    double kappa_e_effective = 0.0; ///< LC linewidth at this pump power (Hz)
};

/// kappa_e defaults to p.kappa_e_at(gamma_e).
OperatingPoint make_operating_point(const TransducerParams& p, double gamma_e, double gamma_o,
                                    std::optional<double> kappa_e_override = std::nullopt);

struct EfficiencyBudget {
    double eta_bw = 1.0;
    double eta_t = 1.0;
    double eta_g = 1.0;
    double eta_mic = 1.0;
    double eta_opt = 1.0;
    double eta_cav = 1.0;
    double eta_noise = 1.0;
    double eta_loss = 1.0;
    double eta_q = 1.0;
    double n_t = 0.0;
    double n_det = 1.0;
    double n_cqed = 0.0;
};

/// Assemble a budget from the individual factors; fills the products and
/// the noise numbers.
EfficiencyBudget compose_budget(double eta_bw, double eta_t, double eta_g, double eta_mic,
                                double eta_opt, double eta_cav, double n_t);

// --- closed-form quantities ----------------------------------------------

/// chi = g^2 nu / (Delta (Delta - nu)); throws SingularityError when
/// Delta == 0 or Delta == nu.
double dispersive_shift(double g_qc, double delta_qc, double nu);

/// Sideband-resolved damping rate 4 g^2 n / kappa.
double damping_rate(double g, double n_pump, double kappa);
/// Inverse of damping_rate for the pump photon number.
double pump_photons(double g, double gamma, double kappa);

double eta_bandwidth(double gamma_t, double t_p);
double eta_transducer(const TransducerParams& p, const OperatingPoint& op);
double eta_gain(double kappa_e, double kappa_o, double omega_m);

/// 1 - (kappa_c_int + kappa_c_w) / kappa_c
double eta_cavity(const CircuitQedParams& q);

EfficiencyBudget efficiency_budget(const TransducerParams& p, const CircuitQedParams& q,
                                   const OperatingPoint& op, double eta_mic, double eta_opt,
                                   double n_t, double t_p);

/// Qubit dephasing from cavity photon shot noise, returned in Hz
/// (Gamma_phi / 2pi).
double dephasing_rate(double n_eff, double kappa_c, double chi);
/// Inverse of dephasing_rate.
double effective_occupancy(double gamma_phi, double kappa_c, double chi);
/// Pure dephasing implied by T1 and T2, in Hz: (1/T2 - 1/(2 T1)) / 2pi.
double dephasing_from_lifetimes(double t1, double t2);

/// AC Stark shift 2 chi n_p (Hz).
double stark_shift(double chi, double n_p);

// --- presets ---------------------------------------------------------------

inline constexpr double kEtaMicMeasured = 0.34;
inline constexpr double kEtaMicApparent = 0.17;
inline constexpr double kEtaOpt = 0.28;

TransducerParams table_transducer_params();
/// kappa_c_ext is set to kappa_c - 15 kHz (worst case of the quoted bounds).
CircuitQedParams table_cqed_params();

} // namespace eoread
