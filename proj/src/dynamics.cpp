#include "kinklat/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/toms748_solve.hpp>

#include "kinklat/errors.hpp"

namespace kinklat {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::verlet:
            return "verlet";
        case Scheme::yoshida4:
            return "yoshida4";
        case Scheme::rk4:
            return "rk4";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "verlet") return Scheme::verlet;
    if (name == "yoshida4") return Scheme::yoshida4;
    if (name == "rk4") return Scheme::rk4;
    throw std::invalid_argument("unknown integration scheme '" + name + "'");
}

namespace {

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void verlet_in_place(const LatticeModel& model, PhaseState& s, double dt) {
    axpy(s.p, 0.5 * dt, forces(model, s.q));
    axpy(s.q, dt, s.p);
    axpy(s.p, 0.5 * dt, forces(model, s.q));
}

// 2^{1/3}
const double cbrt2 = std::cbrt(2.0);
const double yoshida_outer = 1.0 / (2.0 - cbrt2);
const double yoshida_inner = 1.0 - 2.0 * yoshida_outer;

}  // namespace

PhaseState step_verlet(const LatticeModel& model, const PhaseState& state, double dt) {
    require_dimensions(model, state);
    PhaseState s = state;
    verlet_in_place(model, s, dt);
    return s;
}

PhaseState step_yoshida4(const LatticeModel& model, const PhaseState& state, double dt) {
    require_dimensions(model, state);
    PhaseState s = state;
    verlet_in_place(model, s, yoshida_outer * dt);
    verlet_in_place(model, s, yoshida_inner * dt);
    verlet_in_place(model, s, yoshida_outer * dt);
    return s;
}

PhaseState step_rk4(const LatticeModel& model, const PhaseState& state, double dt) {
    require_dimensions(model, state);
    auto stage = [&](const PhaseState& base, const Derivative& d, double h) {
        PhaseState s = base;
        axpy(s.q, h, d.qdot);
        axpy(s.p, h, d.pdot);
        return s;
    };
    const Derivative k1 = equations_of_motion(model, state);
    const Derivative k2 = equations_of_motion(model, stage(state, k1, 0.5 * dt));
    const Derivative k3 = equations_of_motion(model, stage(state, k2, 0.5 * dt));
    const Derivative k4 = equations_of_motion(model, stage(state, k3, dt));
    PhaseState s = state;
    for (std::size_t i = 0; i < s.q.size(); ++i) {
        s.q[i] += dt / 6.0 * (k1.qdot[i] + 2.0 * k2.qdot[i] + 2.0 * k3.qdot[i] + k4.qdot[i]);
        s.p[i] += dt / 6.0 * (k1.pdot[i] + 2.0 * k2.pdot[i] + 2.0 * k3.pdot[i] + k4.pdot[i]);
    }
    return s;
}

PhaseState step(const LatticeModel& model, const PhaseState& state, double dt, Scheme scheme) {
    switch (scheme) {
        case Scheme::verlet:
            return step_verlet(model, state, dt);
        case Scheme::yoshida4:
            return step_yoshida4(model, state, dt);
        case Scheme::rk4:
            return step_rk4(model, state, dt);
    }
    throw std::invalid_argument("unknown scheme");
}

namespace {

bool blown_up(const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(),
                       [](double x) { return !std::isfinite(x) || std::abs(x) > blow_up_threshold; });
}

}  // namespace

Trajectory integrate(const LatticeModel& model, const PhaseState& state0, double dt, std::size_t steps,
                     std::size_t sample_every, Scheme scheme) {
    require_dimensions(model, state0);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("integrate: dt must be positive");
    if (steps < 1) throw std::invalid_argument("integrate: steps must be >= 1");
    if (sample_every < 1) throw std::invalid_argument("integrate: sample_every must be >= 1");

    Trajectory traj;
    traj.step = dt;
    traj.sample_every = sample_every;
    traj.scheme = scheme;
    traj.times.reserve(steps / sample_every + 1);
    traj.states.reserve(steps / sample_every + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(state0);

    PhaseState s = state0;
    for (std::size_t n = 1; n <= steps; ++n) {
        s = step(model, s, dt, scheme);
        if (blown_up(s.q) || blown_up(s.p)) {
            std::ostringstream msg;
            msg << "integration blew up at step " << n << " (t = " << static_cast<double>(n) * dt << ")";
            throw BlowUpError(n, msg.str());
        }
        if (n % sample_every == 0) {
            traj.times.push_back(static_cast<double>(n) * dt);
            traj.states.push_back(s);
        }
    }
    return traj;
}

double tail_separation(const InteractionSpec& spec, double w) {
    if (spec.terms.empty()) throw std::invalid_argument("tail_separation: empty interaction");
    std::vector<ExpTerm> terms = spec.terms;
    std::sort(terms.begin(), terms.end(), [](const ExpTerm& a, const ExpTerm& b) { return a.k < b.k; });
    const ExpTerm lead = terms.front();

    if (w == 0.0 || (w > 0.0) != (lead.beta > 0.0)) {
        throw std::domain_error("tail_separation: w is not attained on the monotone tail");
    }
    if (terms.size() == 1) {
        return -std::log(w / lead.beta) / lead.k;
    }

    // Beyond x_tail the leading exponential dominates both V and V' term by term, so
    // V keeps the sign of beta_1 and |V| decreases monotonically to zero.
    const double count = static_cast<double>(terms.size());
    double x_tail = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < terms.size(); ++n) {
        const double gap = terms[n].k - lead.k;
        if (!(gap > 0.0)) throw std::invalid_argument("tail_separation: rates must be distinct");
        const double ratio_v = count * std::abs(terms[n].beta / lead.beta);
        const double ratio_d = count * std::abs(terms[n].k * terms[n].beta / (lead.k * lead.beta));
        x_tail = std::max({x_tail, std::log(ratio_v) / gap, std::log(ratio_d) / gap});
    }
    const bool same_sign = std::all_of(terms.begin(), terms.end(),
                                       [&](const ExpTerm& t) { return (t.beta > 0.0) == (lead.beta > 0.0); });
    if (same_sign) {
        // every term has the sign of the leading one: monotone on the whole line
        double step = 1.0;
        while ((spec.potential(x_tail) - w > 0.0) != (w > 0.0) && step < 1e6) {
            x_tail -= step;
            step *= 2.0;
        }
    }
    const double f_tail = spec.potential(x_tail) - w;
    if (f_tail == 0.0) return x_tail;
    if ((f_tail > 0.0) != (w > 0.0)) {
        throw std::domain_error("tail_separation: |w| exceeds the potential at the start of the monotone tail");
    }
    double x_hi = x_tail + 1.0;
    double f_hi = spec.potential(x_hi) - w;
    while ((f_hi > 0.0) == (f_tail > 0.0) && f_hi != 0.0) {
        x_hi = x_tail + 2.0 * (x_hi - x_tail);
        f_hi = spec.potential(x_hi) - w;
        if (x_hi - x_tail > 1e6) throw std::domain_error("tail_separation: no bracket found");
    }
    if (f_hi == 0.0) return x_hi;
    boost::uintmax_t iterations = 200;
    const auto root = boost::math::tools::toms748_solve(
        [&](double x) { return spec.potential(x) - w; }, x_tail, x_hi, f_tail, f_hi,
        boost::math::tools::eps_tolerance<double>(52), iterations);
    return 0.5 * (root.first + root.second);
}

namespace {

struct AB {
    std::vector<double> a;
    std::vector<double> b;
};

std::vector<double> c_from_model(const LatticeModel& model, const std::vector<double>& a) {
    std::vector<double> c(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        const auto& spec = model.bond_spec(j);
        const double w = a[j] * a[j];
        const double x = tail_separation(spec, w);
        c[j] = -spec.rate_sum(x) / (2.0 * w) * a[j];
    }
    return c;
}

}  // namespace

FlaschkaState h3_flow_step(const LatticeModel& model, const FlaschkaState& fs, double dt, CMode mode) {
    if (model.boundary != Boundary::open) throw std::invalid_argument("h3_flow_step: open chains only");
    if (fs.b.size() != model.sites || fs.w.size() != model.bond_count()) {
        throw std::invalid_argument("h3_flow_step: state does not match the model");
    }
    AB y;
    for (std::size_t j = 0; j < fs.w.size(); ++j) {
        if (!(fs.w[j] > 0.0)) {
            throw std::domain_error("h3_flow_step requires w_i > 0 (bond " + std::to_string(j + 1) + ")");
        }
        y.a.push_back(std::sqrt(fs.w[j]));
    }
    y.b = fs.b;

    std::vector<double> frozen_c;
    if (mode == CMode::frozen) {
        if (fs.rho.size() != fs.w.size()) throw std::invalid_argument("h3_flow_step: frozen mode needs rho");
        for (std::size_t j = 0; j < y.a.size(); ++j) frozen_c.push_back(fs.rho[j] * y.a[j]);
    }
    auto rate = [&](const AB& s) {
        const auto c = mode == CMode::frozen ? frozen_c : c_from_model(model, s.a);
        return h3_rhs(s.a, s.b, c);
    };
    auto shifted = [](const AB& s, const H3Rate& r, double h) {
        AB o = s;
        axpy(o.a, h, r.adot);
        axpy(o.b, h, r.bdot);
        return o;
    };
    const H3Rate k1 = rate(y);
    const H3Rate k2 = rate(shifted(y, k1, 0.5 * dt));
    const H3Rate k3 = rate(shifted(y, k2, 0.5 * dt));
    const H3Rate k4 = rate(shifted(y, k3, dt));
    for (std::size_t j = 0; j < y.a.size(); ++j) {
        y.a[j] += dt / 6.0 * (k1.adot[j] + 2.0 * k2.adot[j] + 2.0 * k3.adot[j] + k4.adot[j]);
    }
    for (std::size_t i = 0; i < y.b.size(); ++i) {
        y.b[i] += dt / 6.0 * (k1.bdot[i] + 2.0 * k2.bdot[i] + 2.0 * k3.bdot[i] + k4.bdot[i]);
    }
    if (blown_up(y.a) || blown_up(y.b)) throw BlowUpError(1, "h3 flow step produced non-finite values");

    FlaschkaState out;
    out.b = y.b;
    const auto c = mode == CMode::frozen ? frozen_c : c_from_model(model, y.a);
    for (std::size_t j = 0; j < y.a.size(); ++j) {
        out.w.push_back(y.a[j] * y.a[j]);
        out.rho.push_back(c[j] / y.a[j]);
    }
    return out;
}

PhaseGradient invariant_gradient(const LatticeModel& model, const PhaseState& state, int k,
                                 std::optional<double> lambda) {
    const FlaschkaState fs = to_flaschka(model, state);
    const TraceGradient tg = trace_invariant_gradient(fs, k, model.boundary, lambda);
    PhaseGradient g{std::vector<double>(model.sites, 0.0), tg.d_b};
    for (std::size_t j = 0; j < model.bond_count(); ++j) {
        // dw_j/dq_left = -sum k beta e^{-k x}, dw_j/dq_right = +sum k beta e^{-k x}
        const double r = model.bond_spec(j).rate_sum(bond_separation(model, state.q, j));
        g.dq[model.bond_left(j)] -= tg.d_w[j] * r;
        g.dq[model.bond_right(j)] += tg.d_w[j] * r;
    }
    return g;
}

double poisson_bracket(const PhaseGradient& f, const PhaseGradient& g) {
    if (f.dq.size() != g.dq.size() || f.dp.size() != g.dp.size()) {
        throw std::invalid_argument("poisson_bracket: gradient sizes differ");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.dq.size(); ++i) {
        s += f.dp[i] * g.dq[i] - f.dq[i] * g.dp[i];
    }
    return s;
}

double poisson_bracket(const LatticeModel& model, int k1, int k2, const PhaseState& state,
                       std::optional<double> lambda) {
    return poisson_bracket(invariant_gradient(model, state, k1, lambda),
                           invariant_gradient(model, state, k2, lambda));
}

}  // namespace kinklat
