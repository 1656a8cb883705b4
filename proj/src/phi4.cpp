#include "kinklat/phi4.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kinklat::phi4 {

Phi4Params::Phi4Params(double coupling, double vacuum) : coupling_(coupling), vacuum_(vacuum) {
    if (!(coupling > 0.0) || !(vacuum > 0.0) || !std::isfinite(coupling) || !std::isfinite(vacuum)) {
        throw std::invalid_argument("phi4: coupling and vacuum must be positive and finite");
    }
}

Phi4Params Phi4Params::normalized() { return Phi4Params(1.0, 1.0 / (2.0 * std::sqrt(2.0))); }

double Phi4Params::mass() const noexcept { return 2.0 * std::sqrt(2.0 * coupling_) * vacuum_; }

double kink_profile(const Phi4Params& params, double x0, double x) {
    const double v = params.vacuum();
    return v * std::tanh(std::sqrt(2.0 * params.coupling()) * v * (x - x0));
}

double vacuum_derivative(const Phi4Params& params, int n) {
    const double lam = params.coupling();
    const double v = params.vacuum();
    switch (n) {
        case 0:
        case 1:
            return 0.0;
        case 2:
            return 8.0 * lam * v * v;
        case 3:
            return 24.0 * lam * v;
        case 4:
            return 24.0 * lam;
        default:
            throw std::out_of_range("phi4: vacuum derivative order must lie in 0..4, got " +
                                    std::to_string(n));
    }
}

ChiExpansion chi_coefficients(const Phi4Params& params, double a1, int order) {
    if (order < 1) {
        throw std::invalid_argument("phi4: chi expansion order must be >= 1");
    }
    const double m2 = params.mass() * params.mass();
    const double v3 = vacuum_derivative(params, 3);
    const double v4 = vacuum_derivative(params, 4);

    ChiExpansion out;
    out.a1 = a1;
    // a[k] holds a_k; a[0] is unused padding so indices match the math.
    std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
    a[1] = a1;
    for (int k = 2; k <= order; ++k) {
        double quadratic = 0.0;
        for (int i = 1; i < k; ++i) {
            quadratic += a[i] * a[k - i];
        }
        double cubic = 0.0;
        for (int i = 1; i <= k - 2; ++i) {
            for (int j = 1; i + j <= k - 1; ++j) {
                cubic += a[i] * a[j] * a[k - i - j];
            }
        }
        a[k] = (0.5 * v3 * quadratic + v4 / 6.0 * cubic) / (m2 * (k * k - 1.0));
    }
    out.coefficients.assign(a.begin() + 1, a.end());
    return out;
}

namespace {

void require_order(int n) {
    if (n < 1) {
        throw std::invalid_argument("phi4: interaction order must be >= 1, got " + std::to_string(n));
    }
    // n + 2n^3 must fit comfortably in 64 bits.
    if (n > 100000) {
        throw std::out_of_range("phi4: interaction order too large for exact coefficients");
    }
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b != 0) {
        const std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational reduce(std::int64_t num, std::int64_t den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = gcd64(num, den);
    return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

}  // namespace

Rational alpha_exact(int n) {
    require_order(n);
    const std::int64_t nn = n;
    const std::int64_t sign = (n % 2 == 0) ? 1 : -1;
    return reduce(-sign * (nn + 2 * nn * nn * nn), 3);
}

Rational beta_exact(int n) {
    require_order(n);
    const std::int64_t nn = n;
    const std::int64_t sign = (n % 2 == 0) ? 1 : -1;
    return reduce(sign * 2 * (nn + 2 * nn * nn * nn), 3 * (nn + 1));
}

InteractionCoefficients interaction_coefficients(int n) {
    return {alpha_exact(n).value(), beta_exact(n).value()};
}

ForcePotential force_and_potential(double separation, int terms) {
    if (!(separation > 0.0)) {
        throw std::domain_error("phi4: separation must be positive");
    }
    if (terms < 1) {
        throw std::invalid_argument("phi4: at least one term is required");
    }
    ForcePotential fp{0.0, 0.0};
    // Sum smallest terms first.
    for (int n = terms; n >= 1; --n) {
        const auto c = interaction_coefficients(n);
        const double e = std::exp(-0.5 * (n + 1) * separation);
        fp.force += c.alpha * e;
        fp.potential += c.beta * e;
    }
    return fp;
}

ForcePotential last_term_magnitude(double separation, int terms) {
    if (!(separation > 0.0)) {
        throw std::domain_error("phi4: separation must be positive");
    }
    const auto c = interaction_coefficients(terms);
    const double e = std::exp(-0.5 * (terms + 1) * separation);
    return {std::abs(c.alpha) * e, std::abs(c.beta) * e};
}

}  // namespace kinklat::phi4
