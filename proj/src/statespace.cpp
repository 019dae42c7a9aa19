#include "eoread/statespace.hpp"

#include "eoread/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace eoread {

using detail::require;

Matrix6 StateSpaceModel::a_counter(double t) const
{
    const double s = std::sin(2.0 * omega_m * t);
    const double c = std::cos(2.0 * omega_m * t);
    const double go = coupling_o;
    const double ge = coupling_e;
    Matrix6 m;
    // clang-format off
    m <<      0.0,      0.0, -go * s,     0.0,     0.0,  go * c,
              0.0,      0.0, -ge * s,     0.0,     0.0,  ge * c,
          -go * s,  -ge * s,     0.0,  go * c,  ge * c,     0.0,
              0.0,      0.0,  go * c,     0.0,     0.0,  go * s,
              0.0,      0.0,  ge * c,     0.0,     0.0,  ge * s,
           go * c,   ge * c,     0.0,  go * s,  ge * s,     0.0;
    // clang-format on
    return m;
}

Matrix6 StateSpaceModel::a(double t, bool include_counter) const
{
    return include_counter ? Matrix6(a_rwa + a_counter(t)) : a_rwa;
}

double StateSpaceModel::rwa_rate_hz() const
{
    const double kappa_o = -2.0 * a_rwa(port::kOpticalX, port::kOpticalX);
    const double kappa_e = -2.0 * a_rwa(port::kMicrowaveX, port::kMicrowaveX);
    return std::max({kappa_o, kappa_e, 2.0 * coupling_o, 2.0 * coupling_e}) / kTwoPi;
}

double StateSpaceModel::max_rate() const
{
    return std::max(a_rwa.cwiseAbs().maxCoeff(), 2.0 * omega_m);
}

StateSpaceModel build_model(const TransducerParams& p, const OperatingPoint& op,
                            const ModelOptions& options)
{
    p.validate();
    require(options.mechanical_occupancy >= 0.0, "build_model: mechanical occupancy must be >= 0");

    const double kappa_o = angular(p.kappa_o);
    const double kappa_o_ext = angular(p.kappa_o_ext);
    const double kappa_o_int = angular(p.kappa_o_int());
    const double kappa_e = angular(op.kappa_e_effective);
    const double kappa_e_ext = angular(p.kappa_e_ext);
    const double kappa_e_int = angular(op.kappa_e_effective - p.kappa_e_ext);
    const double gamma_m = angular(p.gamma_m);

    StateSpaceModel m;
    m.coupling_o = angular(p.g_o) * std::sqrt(op.n_pump_o);
    m.coupling_e = angular(p.g_e) * std::sqrt(op.n_pump_e);
    m.omega_m = angular(p.omega_m);
    const double go = m.coupling_o;
    const double ge = m.coupling_e;

    // clang-format off
    m.a_rwa << -kappa_o / 2,            0,            0,            0,            0,          -go,
                          0, -kappa_e / 2,            0,            0,            0,          -ge,
                          0,            0, -gamma_m / 2,          -go,          -ge,            0,
                          0,            0,           go, -kappa_o / 2,            0,            0,
                          0,            0,           ge,            0, -kappa_e / 2,            0,
                         go,           ge,            0,            0,            0, -gamma_m / 2;
    // clang-format on

    Eigen::Matrix<double, 3, 5> block = Eigen::Matrix<double, 3, 5>::Zero();
    block(0, 0) = std::sqrt(kappa_o_ext);
    block(0, 1) = std::sqrt(kappa_o_int);
    block(1, 2) = std::sqrt(kappa_e_ext);
    block(1, 3) = std::sqrt(kappa_e_int);
    block(2, 4) = std::sqrt(gamma_m);
    m.b.block<3, 5>(0, 0) = block;
    m.b.block<3, 5>(3, 5) = block;

    m.c(0, port::kOpticalX) = std::sqrt(kappa_o_ext);
    m.c(1, port::kMicrowaveX) = std::sqrt(kappa_e_ext);
    m.c(2, port::kOpticalY) = std::sqrt(kappa_o_ext);
    m.c(3, port::kMicrowaveY) = std::sqrt(kappa_e_ext);

    m.d(0, 0) = -1.0;
    m.d(1, 2) = -1.0;
    m.d(2, 5) = -1.0;
    m.d(3, 7) = -1.0;

    m.input_noise = Vector10::Constant(0.5);
    for (int k : port::kMechanicalBath) {
        m.input_noise(k) = options.mechanical_occupancy + 0.5;
    }

    if (!(spectral_abscissa(m) < 0.0)) {
        throw NumericalError("build_model: A_rwa is not stable");
    }
    return m;
}

double spectral_abscissa(const StateSpaceModel& m)
{
    Eigen::EigenSolver<Matrix6> solver(m.a_rwa, false);
    return solver.eigenvalues().real().maxCoeff();
}

TransferMatrix transfer_matrix(const StateSpaceModel& m, double frequency)
{
    using Complex = std::complex<double>;
    using ComplexMatrix6 = Eigen::Matrix<Complex, 6, 6>;
    const Complex iw(0.0, angular(frequency));
    const ComplexMatrix6 resolvent =
        iw * ComplexMatrix6::Identity() - m.a_rwa.cast<Complex>();
    Eigen::FullPivLU<ComplexMatrix6> lu(resolvent);
    if (!lu.isInvertible()) {
        throw NumericalError("transfer_matrix: (i omega - A) is singular");
    }
    const Eigen::Matrix<Complex, 6, 10> x = lu.solve(m.b.cast<Complex>());
    return m.c.cast<Complex>() * x + m.d.cast<Complex>();
}

Matrix6 steady_state_covariance(const StateSpaceModel& m)
{
    if (!(spectral_abscissa(m) < 0.0)) {
        throw NumericalError("steady_state_covariance: A is not stable");
    }
    const Matrix6& a = m.a_rwa;
    const Matrix6 q = m.b * (0.5 * m.input_noise).asDiagonal() * m.b.transpose();

    // Column-major vec: vec(A V + V A^T) = (I (x) A + A (x) I) vec(V).
    using Matrix36 = Eigen::Matrix<double, 36, 36>;
    using Vector36 = Eigen::Matrix<double, 36, 1>;
    Matrix36 kron = Matrix36::Zero();
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            kron.block<6, 6>(6 * i, 6 * i) += (i == j ? 1.0 : 0.0) * a;
            kron.block<6, 6>(6 * i, 6 * j) += a(i, j) * Matrix6::Identity();
        }
    }
    const Vector36 rhs = -Eigen::Map<const Vector36>(q.data());
    Eigen::FullPivLU<Matrix36> lu(kron);
    if (!lu.isInvertible()) {
        throw NumericalError("steady_state_covariance: Lyapunov operator is singular");
    }
    Vector36 v = lu.solve(rhs);
    // one step of iterative refinement
    v += lu.solve(rhs - kron * v);

    Matrix6 cov = Eigen::Map<const Matrix6>(v.data());
    cov = 0.5 * (cov + cov.transpose()).eval();

    const double residual = (a * cov + cov * a.transpose() + q).norm();
    if (!(residual <= 1e-10 * q.norm())) {
        throw NumericalError("steady_state_covariance: residual too large");
    }
    return cov;
}

Propagation propagate(const StateSpaceModel& m, const InputFunction& input, double dt,
                      double t_end, bool include_counter, const Vector6& x0)
{
    require(dt > 0.0 && t_end >= 0.0, "propagate: need dt > 0 and t_end >= 0");
    if (include_counter) {
        require(dt <= 1.0 / (20.0 * m.max_rate()),
                "propagate: dt too large to resolve the counter-rotating terms");
    } else {
        require(dt <= 1.0 / (20.0 * m.rwa_rate_hz()),
                "propagate: dt too large for the cavity linewidths");
    }

    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    Propagation out;
    out.dt = dt;
    out.states.reserve(steps + 1);
    out.outputs.reserve(steps + 1);

    Vector6 x = x0;
    Vector10 u0 = input(0.0);
    out.states.push_back(x);
    out.outputs.push_back(m.c * x + m.d * u0);

    Matrix6 a0 = m.a(0.0, include_counter);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Vector10 u_mid = input(t + 0.5 * dt);
        const Vector10 u1 = input(t + dt);
        const Matrix6 a_mid = include_counter ? m.a(t + 0.5 * dt, true) : m.a_rwa;
        const Matrix6 a1 = include_counter ? m.a(t + dt, true) : m.a_rwa;

        const Vector6 bu0 = m.b * u0;
        const Vector6 bu_mid = m.b * u_mid;
        const Vector6 k1 = a0 * x + bu0;
        const Vector6 k2 = a_mid * (x + 0.5 * dt * k1) + bu_mid;
        const Vector6 k3 = a_mid * (x + 0.5 * dt * k2) + bu_mid;
        const Vector6 k4 = a1 * (x + dt * k3) + m.b * u1;
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        out.states.push_back(x);
        out.outputs.push_back(m.c * x + m.d * u1);
        u0 = u1;
        a0 = a1;
    }
    return out;
}

void QuadratureTrace::validate() const
{
    require(dt > 0.0, "QuadratureTrace: dt must be > 0");
    require(in_phase.size() == quadrature.size(), "QuadratureTrace: I and Q lengths differ");
    const auto finite = [](double v) { return std::isfinite(v); };
    require(std::all_of(in_phase.begin(), in_phase.end(), finite) &&
                std::all_of(quadrature.begin(), quadrature.end(), finite),
            "QuadratureTrace: non-finite sample");
}

namespace {
template <typename Derived>
void write_matrix(std::ostream& os, const std::string& name, const Eigen::MatrixBase<Derived>& mat)
{
    os << name << ' ' << mat.rows() << 'x' << mat.cols() << '\n';
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
        for (Eigen::Index c = 0; c < mat.cols(); ++c) {
            os << (c ? " " : "") << mat(r, c);
        }
        os << '\n';
    }
}
} // namespace

void write_model(std::ostream& os, const StateSpaceModel& m)
{
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << std::setprecision(17);
    os << "# coupling_o_rad_s " << m.coupling_o << '\n';
    os << "# coupling_e_rad_s " << m.coupling_e << '\n';
    os << "# omega_m_rad_s " << m.omega_m << '\n';
    write_matrix(os, "A_rwa", m.a_rwa);
    write_matrix(os, "B", m.b);
    write_matrix(os, "C", m.c);
    write_matrix(os, "D", m.d);
    write_matrix(os, "input_noise", m.input_noise.transpose());
    os.flags(flags);
    os.precision(precision);
}

void write_traces_csv(std::ostream& os, const std::vector<QuadratureTrace>& traces)
{
    require(!traces.empty(), "write_traces_csv: no traces");
    const double dt = traces.front().dt;
    const std::size_t n = traces.front().size();
    for (const auto& tr : traces) {
        tr.validate();
        require(tr.dt == dt && tr.size() == n, "write_traces_csv: traces must share dt and length");
    }
    os << "t";
    for (const auto& tr : traces) {
        os << ',' << tr.label << "_I," << tr.label << "_Q";
    }
    os << '\n';
    const auto precision = os.precision();
    os << std::setprecision(12);
    for (std::size_t k = 0; k < n; ++k) {
        os << static_cast<double>(k) * dt;
        for (const auto& tr : traces) {
            os << ',' << tr.in_phase[k] << ',' << tr.quadrature[k];
        }
        os << '\n';
    }
    os.precision(precision);
}

} // namespace eoread
