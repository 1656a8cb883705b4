#ifndef KINKLAT_TEST_SUPPORT_HPP
#define KINKLAT_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kinklat/lattice.hpp"

namespace testing {

inline bool close_rel(double got, double want, double tol) {
    return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

inline kinklat::LatticeModel toda(std::size_t n, kinklat::Boundary b = kinklat::Boundary::open) {
    kinklat::LatticeModel m;
    m.sites = n;
    m.boundary = b;
    m.interaction = kinklat::InteractionSpec::toda();
    return m;
}

/// Open or periodic chain whose bonds are single exponentials with the given rates.
inline kinklat::LatticeModel rated(const std::vector<double>& rates, kinklat::Boundary b = kinklat::Boundary::open) {
    kinklat::LatticeModel m;
    m.sites = b == kinklat::Boundary::open ? rates.size() + 1 : rates.size();
    m.boundary = b;
    std::vector<kinklat::InteractionSpec> bonds;
    for (double k : rates) bonds.push_back(kinklat::InteractionSpec::toda(1.0, k));
    m.interaction = bonds.front();
    m.per_bond = bonds;
    return m;
}

inline kinklat::LatticeModel kink(std::size_t n, int n_max, kinklat::Boundary b = kinklat::Boundary::open) {
    kinklat::LatticeModel m;
    m.sites = n;
    m.boundary = b;
    m.interaction = kinklat::kink_interaction_spec(n_max);
    m.kink_mode = true;
    return m;
}

/// Two-term repulsive bond e^{-x} + 0.3 e^{-2x}: positive w everywhere, non-constant c/a.
inline kinklat::InteractionSpec mixed_spec() {
    return kinklat::InteractionSpec::canonical({{1.0, 1.0}, {0.3, 2.0}});
}

inline kinklat::LatticeModel mixed(std::size_t n, kinklat::Boundary b = kinklat::Boundary::open) {
    kinklat::LatticeModel m;
    m.sites = n;
    m.boundary = b;
    m.interaction = mixed_spec();
    return m;
}

inline kinklat::PhaseState random_phase(std::mt19937_64& rng, std::size_t n, double q_scale = 1.0,
                                        double p_scale = 1.0, double spacing = 0.0) {
    std::uniform_real_distribution<double> uq(-q_scale, q_scale);
    std::normal_distribution<double> np(0.0, p_scale);
    kinklat::PhaseState s;
    for (std::size_t i = 0; i < n; ++i) s.q.push_back(-spacing * static_cast<double>(i) + uq(rng));
    for (std::size_t i = 0; i < n; ++i) s.p.push_back(np(rng));
    return s;
}

}  // namespace testing

#endif
