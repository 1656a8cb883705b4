#ifndef KINKLAT_DYNAMICS_HPP
#define KINKLAT_DYNAMICS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kinklat/flaschka.hpp"
#include "kinklat/lattice.hpp"

namespace kinklat {

enum class Scheme { verlet, yoshida4, rk4 };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

/// |q|, |p| beyond this (or any non-finite value) aborts an integration.
inline constexpr double blow_up_threshold = 1e12;

/// Kick-drift-kick Stormer-Verlet. Negative dt steps backwards.
PhaseState step_verlet(const LatticeModel& model, const PhaseState& state, double dt);

/// Verlet composed as (w1, w0, w1) dt with w1 = 1/(2 - 2^{1/3}), w0 = 1 - 2 w1.
PhaseState step_yoshida4(const LatticeModel& model, const PhaseState& state, double dt);

/// Classical Runge-Kutta on the canonical flow (not symplectic; for comparison only).
PhaseState step_rk4(const LatticeModel& model, const PhaseState& state, double dt);

PhaseState step(const LatticeModel& model, const PhaseState& state, double dt, Scheme scheme);

struct Trajectory {
    std::vector<double> times;
    std::vector<PhaseState> states;
    double step = 0.0;
    std::size_t sample_every = 1;
    Scheme scheme = Scheme::verlet;
};

/// Runs `steps` steps, recording the initial state and every `sample_every`-th state after it.
/// Throws BlowUpError naming the offending step.
Trajectory integrate(const LatticeModel& model, const PhaseState& state0, double dt, std::size_t steps,
                     std::size_t sample_every, Scheme scheme);

/// Where c_i comes from during the H3 flow.
///   model:  c_i = rho(x_i) a_i with x_i recovered from w_i on the monotone tail of the bond potential
///   frozen: c_i held at its initial value (quick residual demos only)
enum class CMode { model, frozen };

/// Separation x on the monotone large-x tail of `spec` with spec.potential(x) = w.
/// Throws std::domain_error if w is not attained there.
double tail_separation(const InteractionSpec& spec, double w);

/// One RK4 step of the H3 flow in (a, b), open chains with all w_i > 0.
FlaschkaState h3_flow_step(const LatticeModel& model, const FlaschkaState& fs, double dt,
                           CMode mode = CMode::model);

struct PhaseGradient {
    std::vector<double> dq;
    std::vector<double> dp;
};

/// Gradient of H_k(w(q), b(p)) in (q, p), by the chain rule through w_i(q), b_i = p_i.
PhaseGradient invariant_gradient(const LatticeModel& model, const PhaseState& state, int k,
                                 std::optional<double> lambda = std::nullopt);

/// {F, G} = sum_i (dF/dp_i dG/dq_i - dF/dq_i dG/dp_i), so that dG/dt = {H, G}.
double poisson_bracket(const PhaseGradient& f, const PhaseGradient& g);

/// {H_k1, H_k2} on the given state.
double poisson_bracket(const LatticeModel& model, int k1, int k2, const PhaseState& state,
                       std::optional<double> lambda = std::nullopt);

}  // namespace kinklat

#endif  // KINKLAT_DYNAMICS_HPP
