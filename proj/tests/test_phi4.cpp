#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kinklat/phi4.hpp"

using namespace kinklat::phi4;

TEST_CASE("normalized parameters have unit mass") {
    const Phi4Params p = Phi4Params::normalized();
    CHECK(p.coupling() == 1.0);
    CHECK(p.vacuum() == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-15));
    CHECK(p.mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Phi4Params(2.0, 3.0).mass() == doctest::Approx(12.0));
}

TEST_CASE("parameters must be positive") {
    CHECK_THROWS_AS(Phi4Params(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Phi4Params(1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(Phi4Params(NAN, 1.0), std::invalid_argument);
}

TEST_CASE("kink profile") {
    const Phi4Params p = Phi4Params::normalized();
    const double v = p.vacuum();
    CHECK(kink_profile(p, 0.0, 0.0) == 0.0);
    // v tanh(x/2) in the normalized theory
    CHECK(kink_profile(p, 0.0, 2.0) == doctest::Approx(v * std::tanh(1.0)).epsilon(1e-15));
    CHECK(kink_profile(p, 1.0, 3.0) == doctest::Approx(kink_profile(p, 0.0, 2.0)).epsilon(1e-15));
    CHECK(kink_profile(p, 0.0, -2.0) == doctest::Approx(-v * std::tanh(1.0)).epsilon(1e-15));
    CHECK(kink_profile(p, 0.0, 80.0) == doctest::Approx(v).epsilon(1e-15));
}

TEST_CASE("vacuum derivatives") {
    const Phi4Params p(1.5, 0.7);
    CHECK(vacuum_derivative(p, 0) == 0.0);
    CHECK(vacuum_derivative(p, 1) == doctest::Approx(0.0));
    CHECK(vacuum_derivative(p, 2) == doctest::Approx(8.0 * 1.5 * 0.49));
    CHECK(vacuum_derivative(p, 3) == doctest::Approx(24.0 * 1.5 * 0.7));
    CHECK(vacuum_derivative(p, 4) == doctest::Approx(24.0 * 1.5));
    CHECK(vacuum_derivative(Phi4Params::normalized(), 2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(vacuum_derivative(p, 5), std::out_of_range);
    CHECK_THROWS_AS(vacuum_derivative(p, -1), std::out_of_range);
}

TEST_CASE("chi tail alternates for a1 = -2v") {
    const Phi4Params p = Phi4Params::normalized();
    const double v = p.vacuum();
    const ChiExpansion chi = chi_coefficients(p, -2.0 * v, 10);
    REQUIRE(chi.order() == 10);
    for (int k = 1; k <= 10; ++k) {
        const double want = (k % 2 == 0 ? 2.0 : -2.0) * v;
        CHECK(std::abs(chi.coefficients[static_cast<std::size_t>(k - 1)] - want) <= 1e-12);
    }
}

TEST_CASE("chi partial sum reproduces the kink tail") {
    const Phi4Params p = Phi4Params::normalized();
    const double v = p.vacuum();
    const ChiExpansion chi = chi_coefficients(p, -2.0 * v, 10);
    const double d = 3.0;
    double sum = 0.0;
    for (int k = 1; k <= 10; ++k) sum += chi.coefficients[static_cast<std::size_t>(k - 1)] * std::exp(-k * d);
    const double tail_bound = 2.0 * v * std::exp(-11.0 * d) / (1.0 - std::exp(-d));
    CHECK(std::abs(sum - (kink_profile(p, 0.0, d) - v)) <= tail_bound + 1e-16);
}

TEST_CASE("chi recursion with unit leading coefficient") {
    // a2 = V3 a1^2 / (6 m^2), a3 = (V3 a1 a2 + V4 a1^3 / 6) / (8 m^2)
    const Phi4Params p = Phi4Params::normalized();
    const ChiExpansion chi = chi_coefficients(p, 1.0, 3);
    CHECK(chi.coefficients[0] == 1.0);
    CHECK(chi.coefficients[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(chi.coefficients[2] == doctest::Approx(2.0).epsilon(1e-14));

    const Phi4Params q(0.8, 1.3);
    const double m2 = q.mass() * q.mass();
    const double v3 = vacuum_derivative(q, 3), v4 = vacuum_derivative(q, 4);
    const ChiExpansion c2 = chi_coefficients(q, 0.4, 3);
    const double a2 = v3 * 0.16 / (6.0 * m2);
    const double a3 = (v3 * 0.4 * a2 + v4 * 0.064 / 6.0) / (8.0 * m2);
    CHECK(c2.coefficients[1] == doctest::Approx(a2).epsilon(1e-14));
    CHECK(c2.coefficients[2] == doctest::Approx(a3).epsilon(1e-14));
}

TEST_CASE("chi with zero leading coefficient vanishes") {
    const ChiExpansion chi = chi_coefficients(Phi4Params::normalized(), 0.0, 6);
    for (double a : chi.coefficients) CHECK(a == 0.0);
    CHECK_THROWS_AS(chi_coefficients(Phi4Params::normalized(), 1.0, 0), std::invalid_argument);
}

TEST_CASE("interaction coefficients: spot values") {
    CHECK(interaction_coefficients(1).alpha == 1.0);
    CHECK(interaction_coefficients(2).alpha == -6.0);
    CHECK(interaction_coefficients(3).alpha == 19.0);
    CHECK(interaction_coefficients(1).beta == -1.0);
    CHECK(interaction_coefficients(2).beta == 4.0);
    CHECK(interaction_coefficients(3).beta == -9.5);
    CHECK_THROWS_AS(interaction_coefficients(0), std::invalid_argument);
}

TEST_CASE("interaction coefficients: closed forms and identity for n = 1..50") {
    for (int n = 1; n <= 50; ++n) {
        const std::int64_t poly = n + 2LL * n * n * n;
        const std::int64_t sign = n % 2 == 0 ? 1 : -1;
        const Rational a = alpha_exact(n);
        const Rational b = beta_exact(n);
        CHECK(a.den > 0);
        CHECK(b.den > 0);
        // alpha = -sign poly / 3
        CHECK(a.num * 3 == -sign * poly * a.den);
        // beta = 2 sign poly / (3 (n + 1))
        CHECK(b.num * 3 * (n + 1) == 2 * sign * poly * b.den);
        // alpha + (n + 1) beta / 2 = 0
        CHECK(2 * a.num * b.den + (n + 1) * b.num * a.den == 0);
        CHECK(std::gcd(a.num, a.den) == 1);
        CHECK(std::gcd(b.num, b.den) == 1);
        const InteractionCoefficients c = interaction_coefficients(n);
        CHECK(c.alpha == a.value());
        CHECK(c.beta == b.value());
    }
}

TEST_CASE("force is the derivative of the potential") {
    for (double r : {3.0, 5.0, 10.0}) {
        const double h = 1e-5;
        const double du =
            (force_and_potential(r + h, 20).potential - force_and_potential(r - h, 20).potential) / (2.0 * h);
        const double f = force_and_potential(r, 20).force;
        CHECK(std::abs(f - du) <= 1e-8 * std::abs(f));
    }
}

TEST_CASE("force and potential leading order") {
    const ForcePotential one = force_and_potential(6.0, 1);
    CHECK(one.force == doctest::Approx(std::exp(-6.0)));
    CHECK(one.potential == doctest::Approx(-std::exp(-6.0)));
    const ForcePotential last = last_term_magnitude(6.0, 3);
    CHECK(last.force == doctest::Approx(19.0 * std::exp(-12.0)));
    CHECK(last.potential == doctest::Approx(9.5 * std::exp(-12.0)));
    CHECK_THROWS_AS(force_and_potential(0.0, 3), std::domain_error);
    CHECK_THROWS_AS(force_and_potential(-1.0, 3), std::domain_error);
    CHECK_THROWS_AS(force_and_potential(1.0, 0), std::invalid_argument);
}
