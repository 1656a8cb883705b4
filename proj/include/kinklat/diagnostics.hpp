#ifndef KINKLAT_DIAGNOSTICS_HPP
#define KINKLAT_DIAGNOSTICS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kinklat/dynamics.hpp"
#include "kinklat/lattice.hpp"

namespace kinklat {

struct DriftSample {
    double time;
    double value;
};

struct DriftReport {
    int k = 1;
    std::vector<DriftSample> samples;
    double max_abs_drift = 0.0;
    /// max_abs_drift / max(|value(0)|, 1e-30)
    double relative_drift = 0.0;
    /// Least-squares slope of value against time.
    double secular_slope = 0.0;
};

DriftReport summarize_drift(int k, const std::vector<double>& times, const std::vector<double>& values);

/// H_k evaluated on every sample of the trajectory.
DriftReport drift_report(const LatticeModel& model, const Trajectory& traj, int k,
                         std::optional<double> lambda = std::nullopt);

/// d/dt Tr L^k from sample differences against k Tr(L^{k-1} Delta) averaged over each interval.
struct BridgeCheck {
    int k = 1;
    double max_abs_mismatch = 0.0;
    double max_abs_rate = 0.0;
};

BridgeCheck bridge_check(const LatticeModel& model, const Trajectory& traj, int k,
                         std::optional<double> lambda = std::nullopt);

namespace verdict {
inline const std::string integrable = "integrable-consistent";
inline const std::string near_integrable = "near-integrable";
}  // namespace verdict

/// Relative c-ratio mismatch below which a bond pair counts as satisfying the Lax constraint.
inline constexpr double residual_noise_level = 1e-9;
/// k >= 3 drift is at noise level when below this multiple of the baseline drift.
inline constexpr double drift_noise_factor = 10.0;
inline constexpr double drift_noise_floor = 1e-12;

struct IntegrabilityReport {
    std::size_t sites = 0;
    std::string boundary;
    double final_time = 0.0;
    double dt = 0.0;
    Scheme scheme = Scheme::yoshida4;
    std::optional<double> lambda;

    std::vector<DriftReport> drifts;           // k = 1..min(N, 5)
    std::vector<DriftReport> baseline_drifts;  // same k, homogeneous leading-term model
    std::vector<int> skipped_k;                // invariants with imaginary winding terms
    std::vector<bool> secular;                 // per drifts entry: |slope| T > 10x baseline

    std::vector<double> times;
    std::vector<double> residual_sum;          // sum_i s_i per sample
    double max_abs_residual = 0.0;             // max over t, i of |s_i|
    double max_ratio_mismatch = 0.0;           // max relative |rho_{i+1} - rho_i|
    std::optional<std::size_t> dominant_pair;  // i: bonds (i, i+1), 0-based

    std::vector<BridgeCheck> bridge;
    std::string verdict;
};

/// The homogeneous single-exponential model built from bond 1's leading term.
LatticeModel toda_baseline(const LatticeModel& model);

/// Analyses a finished trajectory; runs the baseline model from the same initial state
/// with the same integrator budget.
IntegrabilityReport analyze_trajectory(const LatticeModel& model, const Trajectory& traj,
                                       std::optional<double> lambda = std::nullopt);

IntegrabilityReport integrability_report(const LatticeModel& model, const PhaseState& state0, double final_time,
                                         double dt, Scheme scheme = Scheme::yoshida4,
                                         std::optional<double> lambda = std::nullopt);

struct SweepPoint {
    double lambda = 1.0;
    DriftReport drift;         // k = 3
    double max_abs_rate = 0.0;  // max_t |3 Tr(L^2 Delta)|
};

std::vector<SweepPoint> spectral_sweep(const LatticeModel& model, const PhaseState& state0, double final_time,
                                       double dt, const std::vector<double>& lambdas,
                                       Scheme scheme = Scheme::yoshida4);

struct OrderFit {
    Scheme scheme;
    std::vector<double> dts;
    std::vector<double> errors;
    double slope = 0.0;
};

/// Global error at final_time against yoshida4 with min(dts)/100, and the fitted log-log slope.
std::vector<OrderFit> order_check(const LatticeModel& model, const PhaseState& state0,
                                  const std::vector<Scheme>& schemes, const std::vector<double>& dts,
                                  double final_time);

/// Number of steps covering final_time exactly with dt (throws when dt does not divide it).
std::size_t steps_for(double final_time, double dt);

}  // namespace kinklat

#endif  // KINKLAT_DIAGNOSTICS_HPP
