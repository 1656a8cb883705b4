#ifndef KINKLAT_LATTICE_HPP
#define KINKLAT_LATTICE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace kinklat {

/// One exponential bond term beta * exp(-k x).
struct ExpTerm {
    double beta = 0.0;
    double k = 0.0;
};

/// A bond potential V(x) = sum_n beta_n exp(-k_n x), x = q_i - q_{i+1}.
///
/// `canonical` sorts by rate, merges equal rates by summing couplings and drops
/// terms that cancel. Non-canonical specs can still be held (validate() reports them).
struct InteractionSpec {
    std::vector<ExpTerm> terms;

    static InteractionSpec canonical(std::vector<ExpTerm> terms);
    static InteractionSpec toda(double beta = 1.0, double k = 1.0);

    double potential(double x) const;
    /// dV/dx = -sum k beta e^{-k x}
    double slope(double x) const;
    /// sum_n k_n beta_n e^{-k_n x}, i.e. -dV/dx
    double rate_sum(double x) const;
    /// Returns the spec keeping only the slowest-decaying term.
    InteractionSpec leading() const;

    std::vector<std::string> violations() const;
};

/// (beta_n, (n+1)/2) for n = 1..n_max.
InteractionSpec kink_interaction_spec(int n_max);

enum class Boundary { open, periodic };

std::string to_string(Boundary b);

/// Deformed Toda chain. Bond j couples sites j and j+1 (wrapping to 0 when periodic).
struct LatticeModel {
    std::size_t sites = 2;
    Boundary boundary = Boundary::open;
    InteractionSpec interaction;
    std::optional<std::vector<InteractionSpec>> per_bond;
    bool kink_mode = false;

    std::size_t bond_count() const noexcept {
        return boundary == Boundary::open ? sites - 1 : sites;
    }
    const InteractionSpec& bond_spec(std::size_t bond) const;
    /// Sites joined by `bond`: (left, right), argument q_left - q_right.
    std::size_t bond_left(std::size_t bond) const noexcept { return bond; }
    std::size_t bond_right(std::size_t bond) const noexcept { return (bond + 1) % sites; }
    /// True when every bond shares one single-term spec (textbook Toda, any sign or rate).
    bool is_homogeneous_single_term() const;
};

/// Readable list of violated invariants; empty means the model is usable.
std::vector<std::string> validate(const LatticeModel& model);

/// Throws std::invalid_argument listing the violations, if any.
void require_valid(const LatticeModel& model);

struct PhaseState {
    std::vector<double> q;
    std::vector<double> p;
};

void require_dimensions(const LatticeModel& model, const PhaseState& state);

/// Bond argument q_i - q_{i+1} (periodic wrap for the last bond).
double bond_separation(const LatticeModel& model, const std::vector<double>& q, std::size_t bond);

double kinetic_energy(const PhaseState& state);
double potential_energy(const LatticeModel& model, const std::vector<double>& q);
double hamiltonian(const LatticeModel& model, const PhaseState& state);

/// -dH/dq. Each bond adds equal and opposite contributions to its two sites.
std::vector<double> forces(const LatticeModel& model, const std::vector<double>& q);

struct Derivative {
    std::vector<double> qdot;
    std::vector<double> pdot;
};

/// Canonical flow qdot = dH/dp, pdot = -dH/dq.
Derivative equations_of_motion(const LatticeModel& model, const PhaseState& state);

}  // namespace kinklat

#endif  // KINKLAT_LATTICE_HPP
