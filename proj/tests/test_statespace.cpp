#include "eoread/errors.hpp"
#include "eoread/statespace.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace eoread;
using doctest::Approx;

namespace {

StateSpaceModel table_model(double ge = 1.1e3, double go = 5.0e3)
{
    const TransducerParams p = table_transducer_params();
    return build_model(p, make_operating_point(p, ge, go));
}

} // namespace

TEST_CASE("model matrices")
{
    const TransducerParams p = table_transducer_params();
    const OperatingPoint op = make_operating_point(p, 1.1e3, 5.0e3);
    const StateSpaceModel m = build_model(p, op);

    CHECK(m.a_rwa(0, 0) == Approx(-kTwoPi * p.kappa_o / 2));
    CHECK(m.a_rwa(1, 1) == Approx(-kTwoPi * op.kappa_e_effective / 2));
    CHECK(m.a_rwa(2, 2) == Approx(-kTwoPi * p.gamma_m / 2));
    // G = g sqrt(n) reproduces the damping rate 4 G^2 / kappa
    CHECK(4 * m.coupling_o * m.coupling_o / (kTwoPi * p.kappa_o) == Approx(kTwoPi * 5.0e3));
    CHECK(4 * m.coupling_e * m.coupling_e / (kTwoPi * op.kappa_e_effective) ==
          Approx(kTwoPi * 1.1e3));
    CHECK(m.a_rwa(0, 5) == Approx(-m.coupling_o));
    CHECK(m.a_rwa(5, 0) == Approx(m.coupling_o));
    CHECK(m.a_rwa(2, 3) == Approx(-m.coupling_o));
    CHECK(m.a_rwa(3, 2) == Approx(m.coupling_o));

    CHECK(m.b(0, 0) == Approx(std::sqrt(kTwoPi * p.kappa_o_ext)));
    CHECK(m.b(3, 5) == Approx(std::sqrt(kTwoPi * p.kappa_o_ext)));
    CHECK(m.b(1, 2) == Approx(std::sqrt(kTwoPi * p.kappa_e_ext)));
    CHECK(m.b(4, 7) == Approx(std::sqrt(kTwoPi * p.kappa_e_ext)));
    CHECK(m.b(2, 4) == Approx(std::sqrt(kTwoPi * p.gamma_m)));
    CHECK(m.d(0, 0) == -1.0);
    CHECK(m.d(2, 5) == -1.0);
    CHECK(m.d.cwiseAbs().sum() == 4.0);

    SUBCASE("counter-rotating part averages to zero over a period")
    {
        Matrix6 sum = Matrix6::Zero();
        const int n = 64;
        for (int k = 0; k < n; ++k) sum += m.a_counter(k * std::numbers::pi / m.omega_m / n);
        CHECK(sum.cwiseAbs().maxCoeff() < 1e-9 * m.coupling_o);
        CHECK(m.a_counter(0.0).isApprox(m.a_counter(0.0).transpose()));
    }
}

TEST_CASE("model is stable and passive")
{
    const StateSpaceModel m = table_model();
    CHECK(spectral_abscissa(m) < 0.0);
    // lossless bookkeeping of every port: H H^dagger = I
    for (double f : {0.0, 1e3, 1.45e3, 1e5, 3e6}) {
        const TransferMatrix h = transfer_matrix(m, f);
        const auto hh = (h * h.adjoint()).eval();
        CHECK((hh - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("transfer function symmetries")
{
    const StateSpaceModel m = table_model();
    const TransferMatrix hp = transfer_matrix(m, 2.3e3);
    const TransferMatrix hm = transfer_matrix(m, -2.3e3);
    CHECK((hp.conjugate() - hm).cwiseAbs().maxCoeff() < 1e-12);
    // quadratures transform alike: X1in -> X1out equals X2in -> X2out
    CHECK(std::abs(hp(port::kOpticalOut[0], port::kMicrowaveIn[0]) -
                   hp(port::kOpticalOut[1], port::kMicrowaveIn[1])) < 1e-12);
}

TEST_CASE("DC transmission matches adiabatic elimination")
{
    const TransducerParams p = oracle::artificial_transducer(1e6, 1e8);
    for (auto [ge, go] : {std::pair{2e3, 2e3}, std::pair{1e3, 3e3}, std::pair{500.0, 4e3}}) {
        const OperatingPoint op = make_operating_point(p, ge, go);
        const StateSpaceModel m = build_model(p, op);
        const auto h = transfer_matrix(m, 0.0);
        const double t = std::norm(h(port::kOpticalOut[0], port::kMicrowaveIn[0]));
        CHECK(t == Approx(oracle::adiabatic_transmission(p, op)).epsilon(1e-9));
    }

    SUBCASE("table parameters: |H(0)|^2 = eta_t / epsilon")
    {
        const TransducerParams tp = table_transducer_params();
        const OperatingPoint op = make_operating_point(tp, 1.1e3, 5.0e3, 2.7e6);
        const auto h = transfer_matrix(build_model(tp, op), 0.0);
        CHECK(std::norm(h(0, 2)) == Approx(eta_transducer(tp, op) / tp.epsilon).epsilon(1e-9));
    }
}

TEST_CASE("transmission is a Lorentzian of width Gamma_T in the adiabatic regime")
{
    const TransducerParams p = oracle::artificial_transducer(1e7, 1e9);
    const OperatingPoint op = make_operating_point(p, 2e3, 3e3);
    const StateSpaceModel m = build_model(p, op);
    const double t0 = std::norm(transfer_matrix(m, 0.0)(0, 2));
    const double th = std::norm(transfer_matrix(m, op.gamma_t / 2)(0, 2));
    CHECK(th / t0 == Approx(0.5).epsilon(1e-3));
}

TEST_CASE("steady-state covariance")
{
    SUBCASE("vacuum inputs give vacuum states")
    {
        const Matrix6 v = steady_state_covariance(table_model());
        CHECK((v - 0.25 * Matrix6::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("thermal bath matches time integration")
    {
        const TransducerParams p = oracle::artificial_transducer(1e5, 1e8);
        const StateSpaceModel m =
            build_model(p, make_operating_point(p, 2e3, 2e3), ModelOptions{10.0});
        const Matrix6 v = steady_state_covariance(m);
        const double slowest = -spectral_abscissa(m);
        const Matrix6 w = oracle::integrate_covariance(
            m, 25.0 / slowest, 0.05 / m.a_rwa.cwiseAbs().maxCoeff());
        CHECK((v - w).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff() < 1e-3);
        CHECK(v(2, 2) > 0.25);
        CHECK(v(2, 2) < 10.5);
    }
    SUBCASE("mechanical occupancy only raises the covariance")
    {
        const TransducerParams p = table_transducer_params();
        const OperatingPoint op = make_operating_point(p, 1.1e3, 5.0e3);
        const Matrix6 a = steady_state_covariance(build_model(p, op, ModelOptions{0.0}));
        const Matrix6 b = steady_state_covariance(build_model(p, op, ModelOptions{100.0}));
        Eigen::SelfAdjointEigenSolver<Matrix6> es(b - a);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("time propagation")
{
    const TransducerParams p = oracle::artificial_transducer(1e5, 1e7);
    const StateSpaceModel m = build_model(p, make_operating_point(p, 2e3, 2e3));
    const double dt = 1.0 / (20.0 * m.rwa_rate_hz());

    SUBCASE("zero input stays at rest")
    {
        const Propagation r = propagate(m, [](double) { return Vector10::Zero().eval(); }, dt,
                                        200 * dt, false);
        CHECK(r.states.size() == 201);
        CHECK(r.outputs.back().norm() == 0.0);
    }
    SUBCASE("constant drive settles on the DC transfer")
    {
        const auto drive = [](double) {
            Vector10 u = Vector10::Zero();
            u(port::kMicrowaveIn[0]) = 1.0;
            return u;
        };
        const double t_end = 30.0 / -spectral_abscissa(m);
        const double step = std::min(dt, t_end / 2e5);
        const Propagation r = propagate(m, drive, step, t_end, false);
        const double dc = transfer_matrix(m, 0.0)(0, 2).real();
        CHECK(r.outputs.back()(0) == Approx(dc).epsilon(1e-6));
    }
    SUBCASE("step-size preconditions")
    {
        const auto zero = [](double) { return Vector10::Zero().eval(); };
        CHECK_THROWS_AS(propagate(m, zero, 2 * dt, 1e-3, false), PreconditionError);
        CHECK_THROWS_AS(propagate(m, zero, dt, 1e-3, true), PreconditionError);
    }
}

TEST_CASE("unstable parameters are rejected")
{
    TransducerParams p = oracle::artificial_transducer(1e5, 1e7);
    OperatingPoint op = make_operating_point(p, 2e3, 2e3);
    StateSpaceModel m = build_model(p, op);
    m.a_rwa(0, 0) = 1e9;
    CHECK(spectral_abscissa(m) > 0.0);
    CHECK_THROWS_AS(steady_state_covariance(m), NumericalError);
}

TEST_CASE("model dump and trace export")
{
    std::ostringstream os;
    write_model(os, table_model());
    const std::string s = os.str();
    CHECK(s.find("A_rwa") != std::string::npos);
    CHECK(s.find("D") != std::string::npos);

    QuadratureTrace a{0.5, {1, 2, 3}, {0, 0, 1}, "g"};
    QuadratureTrace b{0.5, {4, 5, 6}, {1, 1, 1}, "e"};
    std::ostringstream csv;
    write_traces_csv(csv, {a, b});
    CHECK(csv.str().rfind("t,g_I,g_Q,e_I,e_Q\n", 0) == 0);
    b.dt = 0.25;
    CHECK_THROWS_AS(write_traces_csv(csv, {a, b}), PreconditionError);
}
