#include "kinklat/moser.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kinklat::moser {

namespace {

struct Split {
    double mean;  // (b1 + b2) / 2
    double half;  // s = sqrt(d^2 + w)
    double up;    // d + s
    double down;  // s - d
};

// d = (b1 - b2)/2; whichever of d + s, s - d cancels is rebuilt from (d + s)(s - d) = w.
Split split(const FlaschkaState& fs) {
    if (fs.b.size() != 2 || fs.w.size() != 1) {
        throw std::invalid_argument("moser: expected a two-site open state");
    }
    const double w = fs.w[0];
    if (!(w > 0.0)) {
        throw std::domain_error("moser: variables need w1 > 0 (real simple spectrum)");
    }
    const double d = 0.5 * (fs.b[0] - fs.b[1]);
    const double s = std::sqrt(d * d + w);
    Split out{0.5 * (fs.b[0] + fs.b[1]), s, 0.0, 0.0};
    if (d >= 0.0) {
        out.up = d + s;
        out.down = w / out.up;
    } else {
        out.down = s - d;
        out.up = w / out.down;
    }
    return out;
}

}  // namespace

MoserVars to_moser(const FlaschkaState& fs) {
    const Split sp = split(fs);
    MoserVars mv;
    mv.lambda1 = sp.mean - sp.half;
    mv.lambda2 = sp.mean + sp.half;
    mv.r1 = std::sqrt(sp.up / (2.0 * sp.half));
    mv.r2 = std::sqrt(sp.down / (2.0 * sp.half));
    return mv;
}

double log_norming_ratio(const FlaschkaState& fs) {
    const Split sp = split(fs);
    return 0.5 * (std::log(sp.up) - std::log(sp.down));
}

MoserInverse from_moser(const MoserVars& mv) {
    const double r1s = mv.r1 * mv.r1;
    const double r2s = mv.r2 * mv.r2;
    const double norm = r1s + r2s;
    if (!(norm > 0.0)) {
        throw std::invalid_argument("from_moser: norming constants must not both vanish");
    }
    MoserInverse out;
    const double gap = mv.lambda2 - mv.lambda1;
    out.state.w = {r1s * r2s * gap * gap / (norm * norm)};
    out.state.b = {(r1s * mv.lambda2 + r2s * mv.lambda1) / norm, (r1s * mv.lambda1 + r2s * mv.lambda2) / norm};
    out.degenerate = gap == 0.0 || r1s == 0.0 || r2s == 0.0;
    if (out.degenerate) out.state.w[0] = 0.0;
    return out;
}

double resolvent(const FlaschkaState& fs, double lambda) {
    if (fs.b.size() != 2 || fs.w.size() != 1) {
        throw std::invalid_argument("resolvent: expected a two-site open state");
    }
    constexpr double pole_tol = 1e-12;
    const double inner = lambda - fs.b[0];
    if (std::abs(inner) < pole_tol) {
        throw std::domain_error("resolvent: lambda is at the pole lambda = b1");
    }
    const double denom = lambda - fs.b[1] - fs.w[0] / inner;
    if (std::abs(denom) < pole_tol) {
        throw std::domain_error("resolvent: lambda is at an eigenvalue");
    }
    return 1.0 / denom;
}

double resolvent_partial_fractions(const MoserVars& mv, double lambda) {
    const double norm = mv.r1 * mv.r1 + mv.r2 * mv.r2;
    return (mv.r1 * mv.r1 / (lambda - mv.lambda1) + mv.r2 * mv.r2 / (lambda - mv.lambda2)) / norm;
}

double resolvent_moment(const MoserVars& mv, int j) {
    const double norm = mv.r1 * mv.r1 + mv.r2 * mv.r2;
    return (mv.r1 * mv.r1 * std::pow(mv.lambda1, j) + mv.r2 * mv.r2 * std::pow(mv.lambda2, j)) / norm;
}

ProbeReport moser_flow_probe(const LatticeModel& model, const PhaseState& state0, double dt, std::size_t steps,
                             Scheme scheme, std::size_t sample_every) {
    if (model.sites != 2 || model.boundary != Boundary::open) {
        throw std::invalid_argument("moser_flow_probe: needs an open two-site model");
    }
    const Trajectory traj = integrate(model, state0, dt, steps, sample_every, scheme);

    ProbeReport rep;
    const FlaschkaState fs0 = to_flaschka(model, state0);
    const MoserVars mv0 = to_moser(fs0);
    const double lr0 = log_norming_ratio(fs0);
    rep.predicted_log_ratio_rate = fs0.rho[0] * (mv0.lambda1 - mv0.lambda2);

    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const FlaschkaState fs = to_flaschka(model, traj.states[i]);
        if (!(fs.w[0] > 0.0)) {
            throw std::domain_error("moser_flow_probe: w1 left the positive region at t = " +
                                    std::to_string(traj.times[i]));
        }
        const MoserVars mv = to_moser(fs);
        if (!(mv.lambda2 - mv.lambda1 > 1e-12)) {
            throw std::domain_error("moser_flow_probe: eigenvalues collided at t = " + std::to_string(traj.times[i]));
        }
        rep.times.push_back(traj.times[i]);
        rep.samples.push_back(mv);
        rep.max_eigenvalue_deviation =
            std::max({rep.max_eigenvalue_deviation, std::abs(mv.lambda1 - mv0.lambda1),
                      std::abs(mv.lambda2 - mv0.lambda2)});
        const double excess = log_norming_ratio(fs) - lr0 - rep.predicted_log_ratio_rate * traj.times[i];
        rep.max_ratio_deviation = std::max(rep.max_ratio_deviation, std::abs(std::expm1(excess)));
    }
    return rep;
}

}  // namespace kinklat::moser
