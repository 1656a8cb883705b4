#ifndef KINKLAT_PHI4_HPP
#define KINKLAT_PHI4_HPP

#include <cstdint>
#include <vector>

namespace kinklat::phi4 {

/// Constants of the phi^4 Lagrangian L = 1/2 (d phi)^2 - coupling (phi^2 - vacuum^2)^2.
///
/// The normalized theory (coupling = 1, vacuum = 1/(2 sqrt 2)) has unit mass; the
/// interaction series below are only defined in that normalization.
class Phi4Params {
public:
    Phi4Params(double coupling, double vacuum);

    static Phi4Params normalized();

    double coupling() const noexcept { return coupling_; }
    double vacuum() const noexcept { return vacuum_; }
    /// m = 2 sqrt(2 coupling) vacuum
    double mass() const noexcept;

private:
    double coupling_;
    double vacuum_;
};

/// v tanh(sqrt(2 lambda) v (x - x0)). Antikink: pass the mirrored coordinate.
double kink_profile(const Phi4Params& params, double x0, double x);

/// n-th derivative of V(phi) = lambda (phi^2 - v^2)^2 at phi = v, 0 <= n <= 4.
double vacuum_derivative(const Phi4Params& params, int n);

struct ChiExpansion {
    double a1 = 0.0;
    std::vector<double> coefficients;  // a_1 .. a_K
    int order() const noexcept { return static_cast<int>(coefficients.size()); }
};

/// Coefficients of chi(u) = sum_k a_k exp(-k m u), the vacuum fluctuation tail.
///
/// Order matching in chi'' - m^2 chi = V3/2 chi^2 + V4/6 chi^3 gives
///   m^2 (k^2 - 1) a_k = V3/2 sum_{i+j=k} a_i a_j + V4/6 sum_{i+j+l=k} a_i a_j a_l
/// with every index >= 1, so a_k only depends on lower coefficients.
ChiExpansion chi_coefficients(const Phi4Params& params, double a1, int order);

/// Exact rational value num/den (den > 0).
struct Rational {
    std::int64_t num;
    std::int64_t den;
    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

struct InteractionCoefficients {
    double alpha;
    double beta;
};

/// Force and potential coefficients of the n-th exponential order, n >= 1:
///   alpha_n = -(-1)^n (n + 2n^3) / 3,  beta_n = (-1)^n 2 (n + 2n^3) / (3 (n + 1)).
InteractionCoefficients interaction_coefficients(int n);
Rational alpha_exact(int n);
Rational beta_exact(int n);

struct ForcePotential {
    double force;
    double potential;
};

/// Partial sums of F = sum alpha_n e^{-(n+1)R/2} and U = sum beta_n e^{-(n+1)R/2},
/// n = 1..terms, in the normalized theory (where F = dU/dR).
///
/// Any R > 0 is accepted since the series converges there, but the expansion is only
/// physically meaningful for well separated pairs (R much larger than 1/m).
ForcePotential force_and_potential(double separation, int terms);

/// Magnitude of the last included force and potential terms, for picking `terms`.
ForcePotential last_term_magnitude(double separation, int terms);

}  // namespace kinklat::phi4

#endif  // KINKLAT_PHI4_HPP
