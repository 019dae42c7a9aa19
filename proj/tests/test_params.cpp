#include "eoread/errors.hpp"
#include "eoread/params.hpp"

#include <doctest.h>

#include <cmath>

using namespace eoread;
using doctest::Approx;

TEST_CASE("dispersive shift from the device couplings")
{
    // 66.4^2 * 228 / (2306 * 2534) MHz, evaluated by hand
    const double chi = dispersive_shift(66.4e6, 5.632e9 - 7.938e9, 228e6);
    CHECK(chi == Approx(172.03e3).epsilon(2e-4));
    CHECK(std::abs(chi - 172e3) / 172e3 < 0.01);

    SUBCASE("homogeneous of degree one")
    {
        CHECK(dispersive_shift(2 * 66.4e6, 2 * -2.306e9, 2 * 228e6) == Approx(2 * chi));
    }
    SUBCASE("singular detunings")
    {
        CHECK_THROWS_AS(dispersive_shift(66.4e6, 0.0, 228e6), SingularityError);
        CHECK_THROWS_AS(dispersive_shift(66.4e6, 228e6, 228e6), SingularityError);
    }
}

TEST_CASE("damping rate and pump photons invert each other")
{
    const double g = 60.0, kappa = 2.68e6;
    for (double gamma : {20.0, 1.1e3, 5e3}) {
        const double n = pump_photons(g, gamma, kappa);
        CHECK(damping_rate(g, n, kappa) == Approx(gamma).epsilon(1e-12));
    }
    CHECK(damping_rate(g, 0.0, kappa) == 0.0);
    CHECK_THROWS_AS(damping_rate(g, 10.0, 0.0), std::domain_error);
}

TEST_CASE("bandwidth factor")
{
    // square pulse through a one-pole filter: 1 - 2(1 - e^{-x/2})/x, x = Gamma T
    const double x = kTwoPi * 6.1e3 * 15e-6;
    const double oracle = 1.0 - 2.0 * (1.0 - std::exp(-x / 2)) / x;
    CHECK(eta_bandwidth(6.1e3, 15e-6) == Approx(oracle).epsilon(1e-12));
    CHECK(eta_bandwidth(6.1e3, 15e-6) == Approx(0.1309).epsilon(1e-3));

    SUBCASE("limits")
    {
        CHECK(eta_bandwidth(1e9, 15e-6) > 0.9999);
        // small x: eta ~ x / 4
        CHECK(eta_bandwidth(1e-3, 1e-3) == Approx(kTwoPi * 1e-6 / 4).epsilon(1e-4));
    }
    SUBCASE("monotone in the bandwidth")
    {
        double prev = 0.0;
        for (double g = 100.0; g < 1e6; g *= 1.7) {
            const double e = eta_bandwidth(g, 15e-6);
            CHECK(e > prev);
            CHECK(e < 1.0);
            prev = e;
        }
    }
}

TEST_CASE("transducer efficiency at the maximum-efficiency point")
{
    const TransducerParams p = table_transducer_params();
    const OperatingPoint op = make_operating_point(p, 1.1e3, 5.0e3, 2.7e6);
    const double gt = 1.1e3 + 5.0e3 + 0.11;
    const double oracle = 0.80 * (2.12 / 2.68) * (1.42 / 2.7) * 4 * 1.1e3 * 5.0e3 / (gt * gt);
    CHECK(eta_transducer(p, op) == Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(eta_transducer(p, op) - 0.19) / 0.19 < 0.05);

    SUBCASE("matched damping maximises the cooperativity factor")
    {
        const OperatingPoint a = make_operating_point(p, 3e3, 3e3, 2.7e6);
        const OperatingPoint b = make_operating_point(p, 2e3, 4e3, 2.7e6);
        CHECK(eta_transducer(p, a) > eta_transducer(p, b));
    }
}

TEST_CASE("gain factor over the LC linewidth range")
{
    const TransducerParams p = table_transducer_params();
    CHECK(eta_gain(2.7e6, p.kappa_o, p.omega_m) == Approx(1.4765).epsilon(1e-3));
    CHECK(eta_gain(1.6e6, p.kappa_o, p.omega_m) == Approx(1.3059).epsilon(1e-3));
    for (double k = 1.6e6; k <= 2.7e6; k += 0.1e6) {
        const double g = eta_gain(k, p.kappa_o, p.omega_m);
        CHECK(g >= 1.3);
        CHECK(g <= 1.5);
    }
    CHECK(eta_gain(0.0, 0.0, 1.0) == 1.0);
}

TEST_CASE("kappa_e follows the pump")
{
    TransducerParams p = table_transducer_params();
    CHECK(p.kappa_e_at(0.0) == Approx(1.6e6));
    CHECK(p.kappa_e_at(1.1e3) == Approx(2.7e6));
    CHECK(p.kappa_e_at(550.0) == Approx(2.15e6));
    CHECK(p.kappa_e_at(5e3) == Approx(2.7e6));

    p.kappa_e_table_gamma_e = {0.0, 100.0, 1000.0};
    p.kappa_e_table_kappa_e = {1.5e6, 2.0e6, 2.5e6};
    CHECK(p.kappa_e_at(50.0) == Approx(1.75e6));
    CHECK(p.kappa_e_at(2000.0) == Approx(2.5e6));

    p.kappa_e_table_gamma_e = {0.0, 0.0};
    p.kappa_e_table_kappa_e = {1.5e6, 2.0e6};
    CHECK_THROWS_AS(p.validate(), PreconditionError);
}

TEST_CASE("budget at the maximum-efficiency point")
{
    const TransducerParams p = table_transducer_params();
    const CircuitQedParams q = table_cqed_params();
    const OperatingPoint op = make_operating_point(p, 1.1e3, 5.0e3);
    CHECK(op.kappa_e_effective == Approx(2.7e6));
    CHECK(eta_cavity(q) == Approx(1.0 - 15.0 / 380.0));

    const EfficiencyBudget b = efficiency_budget(p, q, op, 0.17, 0.28, 1.4, 15e-6);
    CHECK(b.eta_loss ==
          Approx(b.eta_bw * b.eta_t * b.eta_g * b.eta_mic * b.eta_opt * b.eta_cav).epsilon(1e-14));
    CHECK(b.eta_q == Approx(b.eta_loss / 2.4).epsilon(1e-14));
    CHECK(b.n_det == Approx(2.4));
    CHECK(b.n_cqed == Approx(1.4 / b.eta_loss));
    CHECK(std::abs(b.eta_loss - 1.9e-3) / 1.9e-3 < 0.15);
    CHECK(std::abs(b.eta_q - 8e-4) / 8e-4 < 0.15);
    CHECK(std::abs(b.n_cqed - 740) / 740 < 0.15);

    CHECK_THROWS_AS(efficiency_budget(p, q, op, 0.0, 0.28, 1.4, 15e-6), PreconditionError);
    CHECK_THROWS_AS(compose_budget(1, 1, 1, 1, 1, 1, -0.1), PreconditionError);
}

TEST_CASE("ideal chain has unit quantum efficiency")
{
    const EfficiencyBudget b = compose_budget(1, 1, 1, 1, 1, 1, 0);
    CHECK(b.eta_q == 1.0);
    CHECK(b.n_cqed == 0.0);
}

TEST_CASE("photon shot-noise dephasing")
{
    // kappa chi^2 / (kappa^2/4 + chi^2) per photon, Hz
    const double per_photon = 380e3 * 172e3 * 172e3 / (0.25 * 380e3 * 380e3 + 172e3 * 172e3);
    CHECK(dephasing_rate(0.019, 380e3, 172e3) == Approx(0.019 * per_photon).epsilon(1e-12));
    CHECK(dephasing_rate(0.019, 380e3, 172e3) == Approx(3252).epsilon(1e-3));
    CHECK(dephasing_rate(0.0, 380e3, 172e3) == 0.0);
    CHECK(effective_occupancy(dephasing_rate(0.3, 380e3, 172e3), 380e3, 172e3) ==
          Approx(0.3).epsilon(1e-12));
    CHECK_THROWS_AS(effective_occupancy(100.0, 380e3, 0.0), SingularityError);

    SUBCASE("occupancy from the lifetimes")
    {
        const double gphi = dephasing_from_lifetimes(17e-6, 20.4e-6);
        CHECK(gphi == Approx((1 / 20.4e-6 - 1 / 34e-6) / kTwoPi).epsilon(1e-12));
        const double n_eff = effective_occupancy(gphi, 380e3, 172e3);
        CHECK(n_eff == Approx(0.01823).epsilon(1e-3));
        CHECK(std::abs(n_eff - 0.019) / 0.019 < 0.10);
    }
}

TEST_CASE("AC Stark shift")
{
    CHECK(stark_shift(172e3, 1e-3) == Approx(344.0));
    CHECK(stark_shift(172e3, 0.0) == 0.0);
    CHECK_THROWS_AS(stark_shift(172e3, -1.0), PreconditionError);
}

TEST_CASE("parameter validation")
{
    CircuitQedParams q = table_cqed_params();
    CHECK_NOTHROW(q.validate());
    q.kappa_c_ext = 300e3;
    CHECK_THROWS_AS(q.validate(), PreconditionError);

    TransducerParams p = table_transducer_params();
    CHECK_NOTHROW(p.validate());
    p.kappa_o_ext = 3e6;
    CHECK_THROWS_AS(p.validate(), PreconditionError);

    CHECK_THROWS_AS(make_operating_point(table_transducer_params(), -1.0, 1.0), PreconditionError);
}
