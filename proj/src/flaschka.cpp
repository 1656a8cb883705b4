#include "kinklat/flaschka.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kinklat/errors.hpp"

namespace kinklat {

namespace {

using cd = std::complex<double>;

[[noreturn]] void throw_singular(std::size_t bond) {
    std::ostringstream msg;
    msg << "bond " << bond + 1 << " has w = 0; c/a is undefined there";
    throw SingularBondError(bond, msg.str());
}

double rho_from(const InteractionSpec& spec, double x, double w) {
    return -spec.rate_sum(x) / (2.0 * w);
}

std::size_t bond_count_for(const FlaschkaState& fs, Boundary boundary) {
    const std::size_t n = fs.b.size();
    return boundary == Boundary::open ? (n == 0 ? 0 : n - 1) : n;
}

void require_shape(const FlaschkaState& fs, Boundary boundary) {
    if (fs.b.size() < 2) {
        throw std::invalid_argument("flaschka: need at least two sites");
    }
    if (fs.w.size() != bond_count_for(fs, boundary)) {
        std::ostringstream msg;
        msg << "flaschka: " << to_string(boundary) << " chain with " << fs.b.size() << " sites needs "
            << bond_count_for(fs, boundary) << " bond variables, got " << fs.w.size();
        throw std::invalid_argument(msg.str());
    }
}

double require_lambda(Boundary boundary, std::optional<double> lambda) {
    if (boundary == Boundary::open) {
        return 1.0;
    }
    if (!lambda || *lambda == 0.0 || !std::isfinite(*lambda)) {
        throw std::invalid_argument("periodic Lax matrices need a finite nonzero spectral parameter");
    }
    return *lambda;
}

// Adds a bond-valued quantity x to the (left, right) / (right, left) entries, with the
// spectral factors lambda / lambda^{-1} on the wrap bond. `sign_lr` applies to the
// (left, right) entry (+1 for L, -1 for M), `sign_rl` to (right, left).
void place_bond(ComplexMatrix& m, std::size_t left, std::size_t right, cd x, double sign_lr,
                double sign_rl, double lambda) {
    const bool wraps = right < left;
    const double f_lr = wraps ? lambda : 1.0;
    const double f_rl = wraps ? 1.0 / lambda : 1.0;
    m(static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(right)) += sign_lr * f_lr * x;
    m(static_cast<Eigen::Index>(right), static_cast<Eigen::Index>(left)) += sign_rl * f_rl * x;
}

// Closed-walk sums of the Lax matrix with bond weights split as 1 (forward) / w (backward).
// c[m] collects walks with net winding m >= 0 around the ring; negative windings mirror
// them by walk reversal. Optional forward-mode gradients with respect to (w, b).
struct WalkSums {
    std::vector<double> c;
    std::vector<std::vector<double>> grad;  // per m: [dw_0..dw_{nb-1}, db_0..db_{n-1}]
};

WalkSums closed_walks(const FlaschkaState& fs, int k, bool periodic, bool with_grad) {
    const std::size_t n = fs.b.size();
    const std::size_t nb = fs.w.size();
    const int span = periodic ? k : 0;
    const std::size_t nwind = static_cast<std::size_t>(2 * span + 1);
    const std::size_t g = with_grad ? nb + n : 0;

    WalkSums out;
    out.c.assign(static_cast<std::size_t>(span) + 1, 0.0);
    if (with_grad) out.grad.assign(out.c.size(), std::vector<double>(g, 0.0));

    std::vector<double> val(n * nwind), next_val(n * nwind);
    std::vector<double> grad(n * nwind * g), next_grad(n * nwind * g);
    auto at = [nwind](std::size_t site, std::size_t wind) { return site * nwind + wind; };

    for (std::size_t start = 0; start < n; ++start) {
        std::fill(val.begin(), val.end(), 0.0);
        std::fill(grad.begin(), grad.end(), 0.0);
        val[at(start, static_cast<std::size_t>(span))] = 1.0;

        for (int step = 0; step < k; ++step) {
            std::fill(next_val.begin(), next_val.end(), 0.0);
            std::fill(next_grad.begin(), next_grad.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t m = 0; m < nwind; ++m) {
                    const std::size_t src = at(i, m);
                    const double v = val[src];
                    const double* gs = with_grad ? &grad[src * g] : nullptr;

                    auto push = [&](std::size_t site, std::size_t wind, double weight,
                                    std::size_t dvar) {
                        if (wind >= nwind) return;
                        const std::size_t dst = at(site, wind);
                        next_val[dst] += v * weight;
                        if (with_grad) {
                            double* gd = &next_grad[dst * g];
                            for (std::size_t t = 0; t < g; ++t) gd[t] += gs[t] * weight;
                            if (dvar < g) gd[dvar] += v;
                        }
                    };

                    push(i, m, fs.b[i], nb + i);
                    if (periodic || i + 1 < n) {
                        const std::size_t wind = (periodic && i == n - 1) ? m + 1 : m;
                        push((i + 1) % n, wind, 1.0, g);
                    }
                    if (periodic || i > 0) {
                        const std::size_t bond = (i + n - 1) % n;
                        const std::size_t wind = (periodic && i == 0) ? m - 1 : m;
                        push((i + n - 1) % n, wind, fs.w[bond], bond);
                    }
                }
            }
            val.swap(next_val);
            grad.swap(next_grad);
        }
        for (std::size_t m = 0; m < out.c.size(); ++m) {
            const std::size_t idx = at(start, static_cast<std::size_t>(span) + m);
            out.c[m] += val[idx];
            if (with_grad) {
                for (std::size_t t = 0; t < g; ++t) out.grad[m][t] += grad[idx * g + t];
            }
        }
    }
    return out;
}

// Powers of P = prod_i sqrt(w_i) (principal roots) that are needed by the winding terms.
class RingProduct {
public:
    explicit RingProduct(const std::vector<double>& w) : w_(w) {
        double abs_prod = 1.0;
        for (double x : w) {
            if (x < 0.0) ++negatives_;
            abs_prod *= std::abs(x);
        }
        prod_ = 1.0;
        for (double x : w) prod_ *= x;
        // i^{negatives} is real only for an even count.
        root_ = ((negatives_ / 2) % 2 == 0 ? 1.0 : -1.0) * std::sqrt(abs_prod);
    }

    bool odd_powers_real() const noexcept { return negatives_ % 2 == 0; }

    double pow(int m) const {
        if (m % 2 == 0) return std::pow(prod_, m / 2);
        return root_ * std::pow(prod_, (m - 1) / 2);
    }

    /// P^m / w_i
    double pow_over(int m, std::size_t i) const {
        if (m >= 2) {
            double rest = 1.0;
            for (std::size_t j = 0; j < w_.size(); ++j) {
                if (j != i) rest *= w_[j];
            }
            return pow(m - 2) * rest;
        }
        if (w_[i] == 0.0) throw_singular(i);
        return pow(m) / w_[i];
    }

private:
    const std::vector<double>& w_;
    int negatives_ = 0;
    double prod_ = 1.0;
    double root_ = 1.0;
};

void require_power(int k) {
    if (k < 1 || k > max_trace_power) {
        throw std::out_of_range("trace invariant power must lie in 1.." + std::to_string(max_trace_power));
    }
}

TraceGradient trace_impl(const FlaschkaState& fs, int k, Boundary boundary,
                         std::optional<double> lambda, bool with_grad) {
    require_power(k);
    require_shape(fs, boundary);
    const bool periodic = boundary == Boundary::periodic;
    const double lam = require_lambda(boundary, lambda);
    const WalkSums walks = closed_walks(fs, k, periodic, with_grad);
    const std::size_t nb = fs.w.size();
    const std::size_t n = fs.b.size();

    TraceGradient out;
    out.value = walks.c[0];
    if (with_grad) {
        out.d_w.assign(walks.grad[0].begin(), walks.grad[0].begin() + static_cast<long>(nb));
        out.d_b.assign(walks.grad[0].begin() + static_cast<long>(nb), walks.grad[0].end());
    }
    if (periodic) {
        const RingProduct ring(fs.w);
        for (std::size_t mm = 1; mm < walks.c.size(); ++mm) {
            const int m = static_cast<int>(mm);
            const double cm = walks.c[mm];
            const bool touches = cm != 0.0 ||
                                 (with_grad && std::any_of(walks.grad[mm].begin(), walks.grad[mm].end(),
                                                           [](double x) { return x != 0.0; }));
            if (!touches) continue;
            if (m % 2 == 1 && !ring.odd_powers_real()) {
                throw ComplexValueError(
                    "trace invariant has an imaginary winding term (odd number of negative bonds)");
            }
            const double spectral = std::pow(lam, m) + std::pow(lam, -m);
            const double pm = ring.pow(m);
            out.value += cm * pm * spectral;
            if (with_grad) {
                for (std::size_t i = 0; i < nb; ++i) {
                    double d = walks.grad[mm][i] * pm;
                    if (cm != 0.0) d += cm * 0.5 * m * ring.pow_over(m, i);
                    out.d_w[i] += d * spectral;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    out.d_b[i] += walks.grad[mm][nb + i] * pm * spectral;
                }
            }
        }
    }
    const double inv_k = 1.0 / k;
    out.value *= inv_k;
    for (double& x : out.d_w) x *= inv_k;
    for (double& x : out.d_b) x *= inv_k;
    return out;
}

}  // namespace

FlaschkaState to_flaschka(const LatticeModel& model, const PhaseState& state) {
    require_dimensions(model, state);
    FlaschkaState fs;
    const std::size_t nb = model.bond_count();
    fs.w.resize(nb);
    fs.rho.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        const auto& spec = model.bond_spec(j);
        const double x = bond_separation(model, state.q, j);
        fs.w[j] = spec.potential(x);
        fs.rho[j] = fs.w[j] == 0.0 ? std::numeric_limits<double>::quiet_NaN() : rho_from(spec, x, fs.w[j]);
    }
    fs.b = state.p;
    return fs;
}

std::vector<double> c_ratios(const LatticeModel& model, const PhaseState& state) {
    require_dimensions(model, state);
    std::vector<double> rho(model.bond_count());
    for (std::size_t j = 0; j < rho.size(); ++j) {
        const auto& spec = model.bond_spec(j);
        const double x = bond_separation(model, state.q, j);
        const double w = spec.potential(x);
        if (w == 0.0) throw_singular(j);
        rho[j] = rho_from(spec, x, w);
    }
    return rho;
}

std::complex<double> bond_amplitude(double w) {
    return w >= 0.0 ? cd(std::sqrt(w), 0.0) : cd(0.0, std::sqrt(-w));
}

LaxMatrices lax_matrices(const FlaschkaState& fs, Boundary boundary, std::optional<double> lambda) {
    require_shape(fs, boundary);
    const double lam = require_lambda(boundary, lambda);
    if (fs.rho.size() != fs.w.size()) {
        throw std::invalid_argument("lax_matrices: c ratios are required");
    }
    const std::size_t n = fs.b.size();
    const auto dim = static_cast<Eigen::Index>(n);
    LaxMatrices out{ComplexMatrix::Zero(dim, dim), ComplexMatrix::Zero(dim, dim),
                    boundary == Boundary::periodic ? lambda : std::nullopt};
    for (std::size_t i = 0; i < n; ++i) {
        out.L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = fs.b[i];
    }
    for (std::size_t j = 0; j < fs.w.size(); ++j) {
        if (std::isnan(fs.rho[j])) throw_singular(j);
        const cd a = bond_amplitude(fs.w[j]);
        const cd c = fs.rho[j] * a;
        const std::size_t right = (j + 1) % n;
        place_bond(out.L, j, right, a, 1.0, 1.0, lam);
        place_bond(out.M, j, right, c, -1.0, 1.0, lam);
    }
    return out;
}

LaxMatrices lax_matrices(const LatticeModel& model, const PhaseState& state, std::optional<double> lambda) {
    return lax_matrices(to_flaschka(model, state), model.boundary, lambda);
}

ComplexMatrix lax_residual(const LatticeModel& model, const PhaseState& state,
                           std::optional<double> lambda) {
    const FlaschkaState fs = to_flaschka(model, state);
    const LaxMatrices lax = lax_matrices(fs, model.boundary, lambda);
    const double lam = require_lambda(model.boundary, lambda);
    const Derivative flow = equations_of_motion(model, state);

    const std::size_t n = model.sites;
    const auto dim = static_cast<Eigen::Index>(n);
    ComplexMatrix ldot = ComplexMatrix::Zero(dim, dim);
    for (std::size_t i = 0; i < n; ++i) {
        ldot(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = flow.pdot[i];
    }
    for (std::size_t j = 0; j < fs.w.size(); ++j) {
        const std::size_t right = (j + 1) % n;
        const cd c = fs.rho[j] * bond_amplitude(fs.w[j]);
        place_bond(ldot, j, right, c * (fs.b[j] - fs.b[right]), 1.0, 1.0, lam);
    }
    return ldot - (lax.M * lax.L - lax.L * lax.M);
}

std::vector<double> constraint_residuals(const LatticeModel& model, const PhaseState& state) {
    const auto rho = c_ratios(model, state);
    const FlaschkaState fs = to_flaschka(model, state);
    std::vector<double> s;
    const std::size_t nb = fs.w.size();
    std::size_t pairs = 0;
    if (model.boundary == Boundary::open) {
        pairs = model.sites >= 3 ? model.sites - 2 : 0;
    } else {
        pairs = model.sites >= 3 ? model.sites : 0;
    }
    s.reserve(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        const std::size_t j = (i + 1) % nb;
        const double d = rho[j] - rho[i];
        s.push_back(fs.w[i] * fs.w[j] * d * d);
    }
    return s;
}

double trace_invariant(const FlaschkaState& fs, int k, Boundary boundary, std::optional<double> lambda) {
    return trace_impl(fs, k, boundary, lambda, false).value;
}

TraceGradient trace_invariant_gradient(const FlaschkaState& fs, int k, Boundary boundary,
                                       std::optional<double> lambda) {
    return trace_impl(fs, k, boundary, lambda, true);
}

double trace_rate(const LatticeModel& model, const PhaseState& state, int k, std::optional<double> lambda) {
    require_power(k);
    const ComplexMatrix delta = lax_residual(model, state, lambda);
    const ComplexMatrix L = lax_matrices(model, state, lambda).L;
    ComplexMatrix power = ComplexMatrix::Identity(L.rows(), L.cols());
    for (int i = 1; i < k; ++i) power = power * L;
    return (power * delta).trace().real();
}

H3Rate h3_rhs(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c) {
    const std::size_t n = b.size();
    if (a.size() + 1 != n || c.size() != a.size()) {
        throw std::invalid_argument("h3_rhs: expected N sites and N-1 bonds");
    }
    auto A = [&](std::ptrdiff_t i) { return (i >= 0 && i < static_cast<std::ptrdiff_t>(a.size())) ? a[i] : 0.0; };
    auto C = [&](std::ptrdiff_t i) { return (i >= 0 && i < static_cast<std::ptrdiff_t>(c.size())) ? c[i] : 0.0; };
    auto B = [&](std::ptrdiff_t i) { return (i >= 0 && i < static_cast<std::ptrdiff_t>(n)) ? b[i] : 0.0; };

    H3Rate r;
    r.adot.resize(a.size());
    r.bdot.resize(n);
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(a.size()); ++i) {
        const double ai1 = A(i + 1);
        r.adot[i] = -A(i - 1) * C(i - 1) * A(i) + C(i) * (ai1 * ai1 - B(i) * B(i) + B(i + 1) * B(i + 1));
    }
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        r.bdot[i] = -2.0 * A(i - 1) * C(i - 1) * (B(i - 1) + B(i)) + 2.0 * A(i) * C(i) * (B(i) + B(i + 1));
    }
    return r;
}

namespace {

struct RealFlaschka {
    std::vector<double> a;
    std::vector<double> c;
};

RealFlaschka require_positive_open(const FlaschkaState& fs) {
    require_shape(fs, Boundary::open);
    if (fs.rho.size() != fs.w.size()) {
        throw std::invalid_argument("M3: c ratios are required");
    }
    RealFlaschka out;
    for (std::size_t j = 0; j < fs.w.size(); ++j) {
        if (!(fs.w[j] > 0.0)) {
            throw std::domain_error("M3 requires every w_i > 0 (bond " + std::to_string(j + 1) + ")");
        }
        out.a.push_back(std::sqrt(fs.w[j]));
        out.c.push_back(fs.rho[j] * out.a.back());
    }
    return out;
}

}  // namespace

Eigen::MatrixXd m3_matrix(const FlaschkaState& fs) {
    const RealFlaschka r = require_positive_open(fs);
    const auto n = static_cast<Eigen::Index>(fs.b.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double zeta = r.c[i] * (fs.b[i] + fs.b[i + 1]);
        m(i, i + 1) = zeta;
        m(i + 1, i) = -zeta;
    }
    for (Eigen::Index i = 0; i + 2 < n; ++i) {
        const double eta = r.c[i] * r.a[i + 1];
        m(i, i + 2) = eta;
        m(i + 2, i) = -eta;
    }
    return m;
}

M3Residual m3_residual(const FlaschkaState& fs) {
    const RealFlaschka r = require_positive_open(fs);
    const Eigen::MatrixXd m3 = m3_matrix(fs);
    const auto n = static_cast<Eigen::Index>(fs.b.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) L(i, i) = fs.b[i];
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        L(i, i + 1) = r.a[i];
        L(i + 1, i) = r.a[i];
    }
    const Eigen::MatrixXd comm = m3 * L - L * m3;
    const H3Rate flow = h3_rhs(r.a, fs.b, r.c);

    M3Residual out;
    for (Eigen::Index i = 0; i < n; ++i) {
        out.in_pattern_max = std::max(out.in_pattern_max, std::abs(comm(i, i) - flow.bdot[i]));
        if (i + 1 < n) {
            out.in_pattern_max = std::max(out.in_pattern_max, std::abs(comm(i, i + 1) - flow.adot[i]));
            out.in_pattern_max = std::max(out.in_pattern_max, std::abs(comm(i + 1, i) - flow.adot[i]));
        }
    }
    for (Eigen::Index d = 2; d <= 3; ++d) {
        for (Eigen::Index i = 0; i + d < n; ++i) {
            out.out_of_pattern.push_back(
                {static_cast<std::size_t>(i), static_cast<std::size_t>(i + d), comm(i, i + d)});
        }
    }
    return out;
}

}  // namespace kinklat
