#include "kinklat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kinklat/phi4.hpp"

namespace kinklat {

InteractionSpec InteractionSpec::canonical(std::vector<ExpTerm> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const ExpTerm& a, const ExpTerm& b) { return a.k < b.k; });
    InteractionSpec out;
    for (const auto& t : terms) {
        if (!out.terms.empty() && out.terms.back().k == t.k) {
            out.terms.back().beta += t.beta;
        } else {
            out.terms.push_back(t);
        }
    }
    std::erase_if(out.terms, [](const ExpTerm& t) { return t.beta == 0.0; });
    return out;
}

InteractionSpec InteractionSpec::toda(double beta, double k) { return InteractionSpec{{{beta, k}}}; }

double InteractionSpec::potential(double x) const {
    double v = 0.0;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        v += it->beta * std::exp(-it->k * x);
    }
    return v;
}

double InteractionSpec::rate_sum(double x) const {
    double s = 0.0;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        s += it->k * it->beta * std::exp(-it->k * x);
    }
    return s;
}

double InteractionSpec::slope(double x) const { return -rate_sum(x); }

InteractionSpec InteractionSpec::leading() const {
    if (terms.empty()) {
        return {};
    }
    const auto it = std::min_element(terms.begin(), terms.end(),
                                     [](const ExpTerm& a, const ExpTerm& b) { return a.k < b.k; });
    return InteractionSpec{{*it}};
}

std::vector<std::string> InteractionSpec::violations() const {
    std::vector<std::string> out;
    if (terms.empty()) {
        out.emplace_back("interaction needs at least one term");
        return out;
    }
    bool bad_rate = false;
    bool bad_beta = false;
    for (const auto& t : terms) {
        if (!(t.k > 0.0) || !std::isfinite(t.k)) bad_rate = true;
        if (t.beta == 0.0 || !std::isfinite(t.beta)) bad_beta = true;
    }
    if (bad_rate) out.emplace_back("decay rate must be positive");
    if (bad_beta) out.emplace_back("coupling must be nonzero and finite");
    for (std::size_t i = 1; i < terms.size(); ++i) {
        if (!(terms[i].k > terms[i - 1].k)) {
            out.emplace_back("decay rates must be strictly increasing");
            break;
        }
    }
    return out;
}

InteractionSpec kink_interaction_spec(int n_max) {
    if (n_max < 1) {
        throw std::invalid_argument("kink_interaction_spec: n_max must be >= 1");
    }
    InteractionSpec spec;
    spec.terms.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        spec.terms.push_back({phi4::interaction_coefficients(n).beta, 0.5 * (n + 1)});
    }
    return spec;
}

std::string to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

const InteractionSpec& LatticeModel::bond_spec(std::size_t bond) const {
    if (per_bond) {
        return per_bond->at(bond);
    }
    return interaction;
}

bool LatticeModel::is_homogeneous_single_term() const {
    const auto& first = bond_spec(0);
    if (first.terms.size() != 1) return false;
    for (std::size_t b = 1; b < bond_count(); ++b) {
        const auto& s = bond_spec(b);
        if (s.terms.size() != 1 || s.terms[0].beta != first.terms[0].beta ||
            s.terms[0].k != first.terms[0].k) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> validate(const LatticeModel& model) {
    std::vector<std::string> out;
    if (model.sites < 2) {
        out.emplace_back("lattice needs at least 2 sites");
    }
    if (model.kink_mode && model.boundary == Boundary::periodic && model.sites % 2 != 0) {
        out.emplace_back("periodic kink lattice requires even N");
    }
    auto append = [&out](const InteractionSpec& spec, const std::string& where) {
        for (const auto& v : spec.violations()) {
            out.push_back(where.empty() ? v : where + ": " + v);
        }
    };
    if (model.per_bond) {
        const std::size_t expected = model.sites >= 2 ? model.bond_count() : 0;
        if (model.per_bond->size() != expected) {
            std::ostringstream msg;
            msg << "per-bond interaction list has length " << model.per_bond->size() << ", expected "
                << expected;
            out.push_back(msg.str());
        }
        for (std::size_t b = 0; b < model.per_bond->size(); ++b) {
            append((*model.per_bond)[b], "bond " + std::to_string(b + 1));
        }
    } else {
        append(model.interaction, "");
    }
    return out;
}

void require_valid(const LatticeModel& model) {
    const auto v = validate(model);
    if (!v.empty()) {
        std::string msg = "invalid lattice model:";
        for (const auto& s : v) msg += " [" + s + "]";
        throw std::invalid_argument(msg);
    }
}

void require_dimensions(const LatticeModel& model, const PhaseState& state) {
    if (state.q.size() != model.sites || state.p.size() != model.sites) {
        std::ostringstream msg;
        msg << "phase state has |q|=" << state.q.size() << ", |p|=" << state.p.size() << " but the model has "
            << model.sites << " sites";
        throw std::invalid_argument(msg.str());
    }
}

double bond_separation(const LatticeModel& model, const std::vector<double>& q, std::size_t bond) {
    return q[model.bond_left(bond)] - q[model.bond_right(bond)];
}

double kinetic_energy(const PhaseState& state) {
    double t = 0.0;
    for (double p : state.p) t += 0.5 * p * p;
    return t;
}

double potential_energy(const LatticeModel& model, const std::vector<double>& q) {
    double u = 0.0;
    for (std::size_t b = 0; b < model.bond_count(); ++b) {
        u += model.bond_spec(b).potential(bond_separation(model, q, b));
    }
    return u;
}

double hamiltonian(const LatticeModel& model, const PhaseState& state) {
    require_dimensions(model, state);
    return kinetic_energy(state) + potential_energy(model, state.q);
}

std::vector<double> forces(const LatticeModel& model, const std::vector<double>& q) {
    std::vector<double> f(model.sites, 0.0);
    for (std::size_t b = 0; b < model.bond_count(); ++b) {
        const double g = model.bond_spec(b).rate_sum(bond_separation(model, q, b));
        f[model.bond_left(b)] += g;
        f[model.bond_right(b)] -= g;
    }
    return f;
}

Derivative equations_of_motion(const LatticeModel& model, const PhaseState& state) {
    require_dimensions(model, state);
    return {state.p, forces(model, state.q)};
}

}  // namespace kinklat
