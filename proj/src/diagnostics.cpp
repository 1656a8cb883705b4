#include "kinklat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "kinklat/errors.hpp"
#include "kinklat/flaschka.hpp"

namespace kinklat {

namespace {

std::optional<double> effective_lambda(const LatticeModel& model, std::optional<double> lambda) {
    if (model.boundary == Boundary::periodic && !lambda) return 1.0;
    return lambda;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

// Bond pairs that share a distance-2 position of L.
std::vector<std::pair<std::size_t, std::size_t>> coupled_pairs(const LatticeModel& model) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t nb = model.bond_count();
    if (model.boundary == Boundary::open) {
        for (std::size_t i = 0; i + 1 < nb; ++i) out.emplace_back(i, i + 1);
    } else if (model.sites >= 3) {
        for (std::size_t i = 0; i < nb; ++i) out.emplace_back(i, (i + 1) % nb);
    }
    return out;
}

double relative_slope(const DriftReport& d, double span) {
    const double ref = std::max(std::abs(d.samples.front().value), 1e-30);
    return std::abs(d.secular_slope) * span / ref;
}

}  // namespace

std::size_t steps_for(double final_time, double dt) {
    if (!(dt > 0.0) || !(final_time > 0.0) || !std::isfinite(final_time)) {
        throw std::invalid_argument("steps_for: need T > 0 and dt > 0");
    }
    const double n = std::round(final_time / dt);
    if (n < 1.0 || std::abs(n * dt - final_time) > 1e-9 * final_time) {
        throw std::invalid_argument("steps_for: dt must divide T");
    }
    return static_cast<std::size_t>(n);
}

DriftReport summarize_drift(int k, const std::vector<double>& times, const std::vector<double>& values) {
    if (values.empty() || times.size() != values.size()) {
        throw std::invalid_argument("summarize_drift: need matching, nonempty samples");
    }
    DriftReport rep;
    rep.k = k;
    rep.samples.reserve(values.size());
    const double v0 = values.front();
    for (std::size_t i = 0; i < values.size(); ++i) {
        rep.samples.push_back({times[i], values[i]});
        rep.max_abs_drift = std::max(rep.max_abs_drift, std::abs(values[i] - v0));
    }
    rep.relative_drift = rep.max_abs_drift / std::max(std::abs(v0), 1e-30);
    rep.secular_slope = ls_slope(times, values);
    return rep;
}

DriftReport drift_report(const LatticeModel& model, const Trajectory& traj, int k, std::optional<double> lambda) {
    if (traj.states.empty()) throw std::invalid_argument("drift_report: empty trajectory");
    const auto lam = effective_lambda(model, lambda);
    std::vector<double> values;
    values.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        values.push_back(trace_invariant(to_flaschka(model, s), k, model.boundary, lam));
    }
    return summarize_drift(k, traj.times, values);
}

BridgeCheck bridge_check(const LatticeModel& model, const Trajectory& traj, int k, std::optional<double> lambda) {
    const auto lam = effective_lambda(model, lambda);
    const std::size_t n = traj.states.size();
    std::vector<double> h(n), rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = trace_invariant(to_flaschka(model, traj.states[i]), k, model.boundary, lam);
        rate[i] = trace_rate(model, traj.states[i], k, lam);
    }
    BridgeCheck out;
    out.k = k;
    const double kk = static_cast<double>(k);
    for (double r : rate) out.max_abs_rate = std::max(out.max_abs_rate, kk * std::abs(r));
    if (n < 2) return out;
    const double step = traj.times[1] - traj.times[0];
    if (n >= 5) {
        for (std::size_t i = 2; i + 2 < n; ++i) {
            const double fd = (h[i - 2] - 8.0 * h[i - 1] + 8.0 * h[i + 1] - h[i + 2]) / (12.0 * step);
            out.max_abs_mismatch = std::max(out.max_abs_mismatch, kk * std::abs(fd - rate[i]));
        }
    } else {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double fd = (h[i + 1] - h[i]) / step;
            const double avg = 0.5 * (rate[i] + rate[i + 1]);
            out.max_abs_mismatch = std::max(out.max_abs_mismatch, kk * std::abs(fd - avg));
        }
    }
    return out;
}

LatticeModel toda_baseline(const LatticeModel& model) {
    LatticeModel base;
    base.sites = model.sites;
    base.boundary = model.boundary;
    base.interaction = model.bond_spec(0).leading();
    return base;
}

IntegrabilityReport analyze_trajectory(const LatticeModel& model, const Trajectory& traj,
                                       std::optional<double> lambda) {
    if (traj.states.empty()) throw std::invalid_argument("analyze_trajectory: empty trajectory");
    const auto lam = effective_lambda(model, lambda);

    IntegrabilityReport rep;
    rep.sites = model.sites;
    rep.boundary = to_string(model.boundary);
    rep.final_time = traj.times.back();
    rep.dt = traj.step;
    rep.scheme = traj.scheme;
    rep.lambda = lam;
    rep.times = traj.times;

    const LatticeModel base = toda_baseline(model);
    const std::size_t steps = static_cast<std::size_t>(
        std::llround((traj.times.back() - traj.times.front()) / traj.step));
    std::optional<Trajectory> base_traj;
    if (steps > 0) {
        base_traj = integrate(base, traj.states.front(), traj.step, steps, traj.sample_every, traj.scheme);
    } else {
        base_traj = traj;
    }

    const int kmax = static_cast<int>(std::min<std::size_t>(model.sites, 5));
    const double span = std::max(rep.final_time - traj.times.front(), 0.0);
    for (int k = 1; k <= kmax; ++k) {
        try {
            DriftReport d = drift_report(model, traj, k, lam);
            DriftReport b = drift_report(base, *base_traj, k, lam);
            const double limit = std::max(drift_noise_factor * relative_slope(b, span), drift_noise_floor);
            rep.secular.push_back(relative_slope(d, span) > limit);
            rep.drifts.push_back(std::move(d));
            rep.baseline_drifts.push_back(std::move(b));
            rep.bridge.push_back(bridge_check(model, traj, k, lam));
        } catch (const ComplexValueError&) {
            rep.skipped_k.push_back(k);
        }
    }

    const auto pairs = coupled_pairs(model);
    std::vector<double> pair_worst(pairs.size(), 0.0);
    for (const auto& s : traj.states) {
        const FlaschkaState fs = to_flaschka(model, s);
        double total = 0.0;
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            const auto [l, r] = pairs[j];
            const double rl = fs.rho[l];
            const double rr = fs.rho[r];
            if (!std::isfinite(rl) || !std::isfinite(rr)) continue;
            const double d = rr - rl;
            const double si = fs.w[l] * fs.w[r] * d * d;
            total += si;
            rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(si));
            const double scale = std::max({std::abs(rl), std::abs(rr), 1e-300});
            const double mismatch = std::abs(d) / scale;
            pair_worst[j] = std::max(pair_worst[j], mismatch);
            rep.max_ratio_mismatch = std::max(rep.max_ratio_mismatch, mismatch);
        }
        rep.residual_sum.push_back(total);
    }

    bool quiet = rep.max_ratio_mismatch <= residual_noise_level;
    for (std::size_t i = 0; i < rep.drifts.size(); ++i) {
        if (rep.drifts[i].k < 3) continue;
        const double limit =
            std::max(drift_noise_factor * rep.baseline_drifts[i].relative_drift, drift_noise_floor);
        if (rep.drifts[i].relative_drift > limit) quiet = false;
    }
    rep.verdict = quiet ? verdict::integrable : verdict::near_integrable;
    if (!quiet && !pairs.empty()) {
        const auto it = std::max_element(pair_worst.begin(), pair_worst.end());
        if (*it > residual_noise_level) {
            rep.dominant_pair = pairs[static_cast<std::size_t>(it - pair_worst.begin())].first;
        }
    }
    return rep;
}

IntegrabilityReport integrability_report(const LatticeModel& model, const PhaseState& state0, double final_time,
                                         double dt, Scheme scheme, std::optional<double> lambda) {
    require_valid(model);
    require_dimensions(model, state0);
    const Trajectory traj = integrate(model, state0, dt, steps_for(final_time, dt), 1, scheme);
    return analyze_trajectory(model, traj, lambda);
}

std::vector<SweepPoint> spectral_sweep(const LatticeModel& model, const PhaseState& state0, double final_time,
                                       double dt, const std::vector<double>& lambdas, Scheme scheme) {
    if (model.boundary != Boundary::periodic) {
        throw std::invalid_argument("spectral_sweep: needs a periodic model");
    }
    for (double lam : lambdas) {
        if (lam == 0.0 || !std::isfinite(lam)) {
            throw std::invalid_argument("spectral_sweep: lambda must be nonzero and finite");
        }
    }
    require_valid(model);
    const Trajectory traj = integrate(model, state0, dt, steps_for(final_time, dt), 1, scheme);
    std::vector<SweepPoint> out;
    out.reserve(lambdas.size());
    for (double lam : lambdas) {
        SweepPoint pt;
        pt.lambda = lam;
        pt.drift = drift_report(model, traj, 3, lam);
        for (const auto& s : traj.states) {
            pt.max_abs_rate = std::max(pt.max_abs_rate, 3.0 * std::abs(trace_rate(model, s, 3, lam)));
        }
        out.push_back(std::move(pt));
    }
    return out;
}

std::vector<OrderFit> order_check(const LatticeModel& model, const PhaseState& state0,
                                  const std::vector<Scheme>& schemes, const std::vector<double>& dts,
                                  double final_time) {
    const std::set<double> distinct(dts.begin(), dts.end());
    if (distinct.size() != dts.size()) throw std::invalid_argument("order_check: dt values must be distinct");
    if (distinct.size() < 3) throw std::invalid_argument("order_check: need at least three dt values");
    require_valid(model);

    const double fine = *distinct.begin() / 100.0;
    const Trajectory ref = integrate(model, state0, fine, steps_for(final_time, fine),
                                     steps_for(final_time, fine), Scheme::yoshida4);
    const PhaseState& exact = ref.states.back();

    std::vector<OrderFit> out;
    for (Scheme sc : schemes) {
        OrderFit fit;
        fit.scheme = sc;
        fit.dts = dts;
        std::vector<double> lx, ly;
        for (double dt : dts) {
            const std::size_t n = steps_for(final_time, dt);
            const PhaseState end = integrate(model, state0, dt, n, n, sc).states.back();
            double err = 0.0;
            for (std::size_t i = 0; i < end.q.size(); ++i) {
                err = std::max({err, std::abs(end.q[i] - exact.q[i]), std::abs(end.p[i] - exact.p[i])});
            }
            fit.errors.push_back(err);
            lx.push_back(std::log(dt));
            ly.push_back(std::log(std::max(err, std::numeric_limits<double>::min())));
        }
        fit.slope = ls_slope(lx, ly);
        out.push_back(std::move(fit));
    }
    return out;
}

}  // namespace kinklat
