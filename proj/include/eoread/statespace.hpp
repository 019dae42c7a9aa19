#pragma once

// Six-quadrature linear model of the electro-optomechanical transducer.
//
//   state   x    = (X1, Y1, Z1, X2, Y2, Z2)    optical, microwave, mechanical
//   inputs  x_in = (X1in, X1in_int, Y1in, Y1in_int, Z1in_int,
//                   X2in, X2in_int, Y2in, Y2in_int, Z2in_int)
//   outputs x_out= (X1out, Y1out, X2out, Y2out)
//
//   dx/dt = (A_rwa + A_counter(t)) x + B x_in,   x_out = C x + D x_in
//
// Quadratures follow X1 = (a^dag + a)/2, X2 = i(a^dag - a)/2, so a complex
// amplitude a maps to (X1, X2) = (Re a, Im a) and vacuum has variance 1/4.
// Matrix entries are angular rates (rad/s); pump phases are taken as zero.

#include "eoread/params.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace eoread {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix6x10 = Eigen::Matrix<double, 6, 10>;
using Matrix4x6 = Eigen::Matrix<double, 4, 6>;
using Matrix4x10 = Eigen::Matrix<double, 4, 10>;
using Vector4 = Eigen::Matrix<double, 4, 1>;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Vector10 = Eigen::Matrix<double, 10, 1>;
using TransferMatrix = Eigen::Matrix<std::complex<double>, 4, 10>;

namespace port {
// state indices
inline constexpr int kOpticalX = 0, kMicrowaveX = 1, kMechanicalX = 2;
inline constexpr int kOpticalY = 3, kMicrowaveY = 4, kMechanicalY = 5;
// input indices, first and second quadrature
inline constexpr int kOpticalIn[2] = {0, 5};
inline constexpr int kOpticalLoss[2] = {1, 6};
inline constexpr int kMicrowaveIn[2] = {2, 7};
inline constexpr int kMicrowaveLoss[2] = {3, 8};
inline constexpr int kMechanicalBath[2] = {4, 9};
// output indices
inline constexpr int kOpticalOut[2] = {0, 2};
inline constexpr int kMicrowaveOut[2] = {1, 3};
} // namespace port

struct ModelOptions {
    /// Thermal occupancy of the intrinsic mechanical bath.
    double mechanical_occupancy = 0.0;
};

struct StateSpaceModel {
    Matrix6 a_rwa = Matrix6::Zero();
    Matrix6x10 b = Matrix6x10::Zero();
    Matrix4x6 c = Matrix4x6::Zero();
    Matrix4x10 d = Matrix4x10::Zero();

    double coupling_o = 0.0; ///< g_o * a_bar (rad/s)
    double coupling_e = 0.0; ///< g_e * b_bar (rad/s)
    double omega_m = 0.0;    ///< rad/s

    /// Symmetrized occupation n + 1/2 of every input port (1/2 = vacuum).
    Vector10 input_noise = Vector10::Constant(0.5);

    /// Counter-rotating part, oscillating at 2 omega_m.
    Matrix6 a_counter(double t) const;
    Matrix6 a(double t, bool include_counter) const;

    /// Largest cavity linewidth or coupling, in Hz.
    double rwa_rate_hz() const;
    /// Largest rate in A(t) including 2 omega_m, in rad/s.
    double max_rate() const;
};

/// Throws NumericalError if A_rwa is not strictly stable.
StateSpaceModel build_model(const TransducerParams& p, const OperatingPoint& op,
                            const ModelOptions& options = {});

/// Largest real part among the eigenvalues of A_rwa.
double spectral_abscissa(const StateSpaceModel& m);

/// H(f) = C (i 2pi f - A_rwa)^-1 B + D, for a frequency f in Hz.
TransferMatrix transfer_matrix(const StateSpaceModel& m, double frequency);

/// Solves A V + V A^T + B N B^T = 0 with N = diag(input_noise) / 2.
Matrix6 steady_state_covariance(const StateSpaceModel& m);

/// Drive x_in(t); ports not driven should return zero.
using InputFunction = std::function<Vector10(double)>;

struct Propagation {
    double dt = 0.0;
    std::vector<Vector6> states;  ///< x(k dt), k = 0..steps
    std::vector<Vector4> outputs; ///< x_out(k dt)
};

/// Classical fourth-order Runge-Kutta with the explicit time-dependent A(t).
/// dt must satisfy dt <= 1/(20 max_rate()) with counter-rotating terms and
/// dt <= 1/(20 rwa_rate_hz()) otherwise; violations throw PreconditionError.
Propagation propagate(const StateSpaceModel& m, const InputFunction& input, double dt,
                      double t_end, bool include_counter, const Vector6& x0 = Vector6::Zero());

/// Uniformly sampled quadrature pair.
struct QuadratureTrace {
    double dt = 0.0;
    std::vector<double> in_phase;
    std::vector<double> quadrature;
    std::string label;

    std::size_t size() const { return in_phase.size(); }
    void validate() const;
};

/// Labeled row-major dump of A_rwa, B, C, D.
void write_model(std::ostream& os, const StateSpaceModel& m);

/// CSV with columns t, then <label>_I, <label>_Q per trace. Traces must share dt and length.
void write_traces_csv(std::ostream& os, const std::vector<QuadratureTrace>& traces);

} // namespace eoread
