#ifndef KINKLAT_MOSER_HPP
#define KINKLAT_MOSER_HPP

#include <cstddef>
#include <vector>

#include "kinklat/dynamics.hpp"
#include "kinklat/flaschka.hpp"
#include "kinklat/lattice.hpp"

namespace kinklat::moser {

/// Spectral data of the two-site Jacobi matrix [[b1, a1], [a1, b2]].
///
/// r1, r2 are normalized to r1^2 + r2^2 = 1. Following the inverse relations
/// b1 = (r1^2 lambda2 + r2^2 lambda1) / (r1^2 + r2^2), r1 weights lambda2 in b1.
struct MoserVars {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
};

/// Requires two sites and w1 > 0.
MoserVars to_moser(const FlaschkaState& fs);

struct MoserInverse {
    FlaschkaState state;  // w = (a1^2), b = (b1, b2), rho empty
    bool degenerate = false;  // lambda1 == lambda2 or some r == 0: decoupled, w1 = 0
};

MoserInverse from_moser(const MoserVars& mv);

/// ln(r1 / r2) computed without cancellation, valid for w1 > 0.
double log_norming_ratio(const FlaschkaState& fs);

/// f(lambda) = 1 / (lambda - b2 - w1 / (lambda - b1)).
double resolvent(const FlaschkaState& fs, double lambda);

/// sum_i r_i^2 / (lambda - lambda_i) with the same pairing as the inverse relations.
double resolvent_partial_fractions(const MoserVars& mv, double lambda);

/// c_j = sum_i r_i^2 lambda_i^j / sum_i r_i^2 (coefficient of lambda^{-(j+1)} in f).
double resolvent_moment(const MoserVars& mv, int j);

struct ProbeReport {
    std::vector<double> times;
    std::vector<MoserVars> samples;
    /// max_t max_i |lambda_i(t) - lambda_i(0)|
    double max_eigenvalue_deviation = 0.0;
    /// Rate of ln(r1/r2) predicted by the integrable flow, rho(0) (lambda1 - lambda2).
    double predicted_log_ratio_rate = 0.0;
    /// max_t |ratio(t) / (ratio(0) exp(rate t)) - 1|
    double max_ratio_deviation = 0.0;
};

/// Follows Moser's variables along the canonical flow of a two-site model.
///
/// In the integrable case the norming-constant ratio obeys
///   d/dt ln(r1/r2) = rho (lambda1 - lambda2),  rho = c1/a1,
/// which is r_i' = -lambda_i r_i when c1 = -a1. A deformed bond has a state-dependent rho,
/// so the law with the initial rate breaks while the eigenvalues stay fixed.
ProbeReport moser_flow_probe(const LatticeModel& model, const PhaseState& state0, double dt,
                             std::size_t steps, Scheme scheme = Scheme::yoshida4, std::size_t sample_every = 1);

}  // namespace kinklat::moser

#endif  // KINKLAT_MOSER_HPP
