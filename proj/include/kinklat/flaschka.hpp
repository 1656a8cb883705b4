#ifndef KINKLAT_FLASCHKA_HPP
#define KINKLAT_FLASCHKA_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kinklat/lattice.hpp"

namespace kinklat {

/// Flaschka variables of a deformed Toda state.
///
/// w_i = a_i^2 is the signed bond potential; it is negative wherever the bond
/// potential is (the kink lattice, at large separation). Everything exposed as a
/// real number is a function of (w, b, rho) only; complex a_i = sqrt(w_i) appears
/// only inside LaxMatrices.
///
/// rho_i = c_i / a_i. It is NaN for bonds with w_i = 0 and empty when the state did
/// not come from a model (e.g. built from Moser variables).
struct FlaschkaState {
    std::vector<double> w;
    std::vector<double> b;
    std::vector<double> rho;
};

using ComplexMatrix = Eigen::MatrixXcd;

struct LaxMatrices {
    ComplexMatrix L;
    ComplexMatrix M;
    std::optional<double> lambda;
};

FlaschkaState to_flaschka(const LatticeModel& model, const PhaseState& state);

/// rho_i = c_i / a_i = -(sum_n k_n beta_n e^{-k_n x_i}) / (2 w_i), i.e. c_i = da_i/dq_i.
/// Throws SingularBondError where w_i = 0.
std::vector<double> c_ratios(const LatticeModel& model, const PhaseState& state);

/// Principal square root of a signed w.
std::complex<double> bond_amplitude(double w);

/// L and M with a_i = sqrt(w_i), c_i = rho_i a_i. Periodic models need a nonzero lambda
/// (corner entries lambda^{-1} a_N / lambda a_N and lambda^{-1} c_N / -lambda c_N).
LaxMatrices lax_matrices(const FlaschkaState& fs, Boundary boundary, std::optional<double> lambda);
LaxMatrices lax_matrices(const LatticeModel& model, const PhaseState& state,
                         std::optional<double> lambda);

/// Delta = Ldot - [M, L] with Ldot taken from the canonical Hamiltonian flow.
/// Nonzero only at distance-2 positions (and wrap positions for periodic models):
/// Delta_{i,i+2} = -(a_i c_{i+1} - a_{i+1} c_i).
ComplexMatrix lax_residual(const LatticeModel& model, const PhaseState& state,
                           std::optional<double> lambda);

/// s_i = w_i w_{i+1} (rho_{i+1} - rho_i)^2 = (a_i c_{i+1} - a_{i+1} c_i)^2, real for signed w.
/// Open chains give N-2 values, periodic chains with N >= 3 give N (bond pairs wrap).
std::vector<double> constraint_residuals(const LatticeModel& model, const PhaseState& state);

inline constexpr int max_trace_power = 8;

/// H_k = Tr(L^k) / k by closed-walk summation over the band (+corner) structure.
///
/// Non-winding walks only see integer powers of w_i. For periodic chains and k >= N the
/// walks that wind around the ring contribute c_m P^m (lambda^m + lambda^-m), P = prod a_i;
/// if that term is imaginary (odd number of negative w_i) ComplexValueError is thrown.
double trace_invariant(const FlaschkaState& fs, int k, Boundary boundary,
                       std::optional<double> lambda = std::nullopt);

/// H_k together with dH_k/dw_i and dH_k/db_i.
struct TraceGradient {
    double value = 0.0;
    std::vector<double> d_w;
    std::vector<double> d_b;
};

TraceGradient trace_invariant_gradient(const FlaschkaState& fs, int k, Boundary boundary,
                                       std::optional<double> lambda = std::nullopt);

/// dH_k/dt along the canonical flow computed as Re Tr(L^{k-1} Delta).
double trace_rate(const LatticeModel& model, const PhaseState& state, int k,
                  std::optional<double> lambda = std::nullopt);

/// Right-hand side of the H3 flow in (a, b):
///   adot_i = -a_{i-1} c_{i-1} a_i + c_i (a_{i+1}^2 - b_i^2 + b_{i+1}^2)
///   bdot_i = -2 a_{i-1} c_{i-1} (b_{i-1} + b_i) + 2 a_i c_i (b_i + b_{i+1})
/// with out-of-range a, b, c taken as zero. Open chains only.
struct H3Rate {
    std::vector<double> adot;
    std::vector<double> bdot;
};

H3Rate h3_rhs(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c);

/// Skew pentadiagonal M3: zeta_i = c_i (b_i + b_{i+1}) on the first off-diagonal,
/// eta_i = c_i a_{i+1} on the second. Requires every w_i > 0.
Eigen::MatrixXd m3_matrix(const FlaschkaState& fs);

struct MatrixEntry {
    std::size_t row;
    std::size_t col;
    double value;
};

struct M3Residual {
    /// Upper-triangle entries of [M3, L] at distance 2 and 3 from the diagonal.
    std::vector<MatrixEntry> out_of_pattern;
    /// max |[M3, L] - Ldot_H3| over the tridiagonal band; zero up to rounding.
    double in_pattern_max = 0.0;
};

M3Residual m3_residual(const FlaschkaState& fs);

}  // namespace kinklat

#endif  // KINKLAT_FLASCHKA_HPP
