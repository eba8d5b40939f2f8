#include "kroneig/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "kroneig/error.hpp"

namespace kroneig {
namespace {

// Squared projected data plus spectra; everything nll needs.
struct Spectrum {
    Eigen::VectorXd lambda_x_unit;
    Eigen::VectorXd lambda_t;
    Eigen::MatrixXd y2;  // (V_x^T B V_t)^2, n_n x n_t
};

Spectrum spectrum(const SolverState& state, const Eigen::MatrixXd& data) {
    if (data.rows() != state.n_sensors() || data.cols() != state.n_data_columns()) {
        throw DimensionError("evidence: data is " + std::to_string(data.rows()) + "x" + std::to_string(data.cols()) +
                             ", state expects " + std::to_string(state.n_sensors()) + "x" +
                             std::to_string(state.n_data_columns()));
    }
    Spectrum s{state.lambda_x_unit(), state.lambda_t(), {}};
    const Eigen::MatrixXd y = state.spatial().vx.transpose() * data * state.vt();
    s.y2 = y.cwiseProduct(y);
    return s;
}

EvidenceResult evaluate(const Spectrum& s, double gamma2) {
    if (!(gamma2 > 0.0) || !std::isfinite(gamma2)) throw PreconditionError("gamma2 must be finite and > 0");
    EvidenceResult r;
    r.gamma2 = gamma2;
    const Eigen::Index nn = s.lambda_x_unit.size();
    const Eigen::Index nt = s.lambda_t.size();
    double logdet = 0.0;
    double quad = 0.0;
    for (Eigen::Index i = 0; i < nt; ++i) {
        for (Eigen::Index j = 0; j < nn; ++j) {
            const double lam = gamma2 * s.lambda_x_unit[j] * s.lambda_t[i];
            logdet += std::log1p(lam);
            quad += s.y2(j, i) / (lam + 1.0);
        }
    }
    r.logdet = 0.5 * logdet;
    r.quadratic = 0.5 * quad;
    r.constant = 0.5 * static_cast<double>(nn * nt) * std::log(2.0 * std::numbers::pi);
    r.nll = r.logdet + r.quadratic + r.constant;
    return r;
}

double gradient(const Spectrum& s, double gamma2) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < s.lambda_t.size(); ++i) {
        for (Eigen::Index j = 0; j < s.lambda_x_unit.size(); ++j) {
            const double lam = gamma2 * s.lambda_x_unit[j] * s.lambda_t[i];
            const double pi = 1.0 / (lam + 1.0);
            const double one_minus_pi = lam * pi;
            g += one_minus_pi - pi * one_minus_pi * s.y2(j, i);
        }
    }
    return 0.5 * g;
}

class LogGammaObjective {
public:
    explicit LogGammaObjective(const Spectrum& s) : s_(s) {}

    double operator()(double u) {
        ++evaluations;
        const double v = evaluate(s_, std::exp(u)).nll;
        if (!std::isfinite(v)) throw NumericalError("non-finite marginal likelihood at log gamma2 = " + std::to_string(u));
        return v;
    }

    int evaluations = 0;

private:
    const Spectrum& s_;
};

struct Interval {
    double lo;
    double hi;
};

constexpr double kInvPhi = 0.6180339887498949;  // 1 / golden ratio

bool converged(const Interval& iv) {
    const double mid = 0.5 * (iv.lo + iv.hi);
    return iv.hi - iv.lo <= 1e-6 * std::max(1.0, std::abs(mid));
}

struct GoldenResult {
    double u;
    double f;
    bool unimodal;
};

GoldenResult golden(LogGammaObjective& f, Interval iv) {
    double f_lo = f(iv.lo);
    double f_hi = f(iv.hi);
    double x1 = iv.hi - kInvPhi * (iv.hi - iv.lo);
    double x2 = iv.lo + kInvPhi * (iv.hi - iv.lo);
    double f1 = f(x1);
    double f2 = f(x2);
    int violations = 0;
    auto check = [&](double fx) {
        if (fx > f_lo && fx > f_hi) ++violations;
    };
    check(f1);
    check(f2);
    while (!converged(iv) && violations < 2) {
        if (f1 <= f2) {
            iv.hi = x2;
            f_hi = f2;
            x2 = x1;
            f2 = f1;
            x1 = iv.hi - kInvPhi * (iv.hi - iv.lo);
            f1 = f(x1);
            check(f1);
        } else {
            iv.lo = x1;
            f_lo = f1;
            x1 = x2;
            f1 = f2;
            x2 = iv.lo + kInvPhi * (iv.hi - iv.lo);
            f2 = f(x2);
            check(f2);
        }
    }
    GoldenResult best{x1, f1, violations < 2};
    if (f2 < best.f) best = {x2, f2, best.unimodal};
    if (f_lo < best.f) best = {iv.lo, f_lo, best.unimodal};
    if (f_hi < best.f) best = {iv.hi, f_hi, best.unimodal};
    return best;
}

// Expands downhill from log gamma2 = 0 until the objective turns up or a bound is hit.
Interval bracket(LogGammaObjective& f, double start, double lo, double hi) {
    constexpr double kGrow = 1.6180339887498949;
    double a = std::clamp(start, lo, hi);
    double b = std::clamp(a + 1.0, lo, hi);
    if (b == a) b = std::clamp(a - 1.0, lo, hi);
    double fa = f(a);
    double fb = f(b);
    if (fb > fa) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    for (int iter = 0; iter < 200; ++iter) {
        if (b == lo || b == hi) return {std::min(a, b), std::max(a, b)};
        const double c = std::clamp(b + kGrow * (b - a), lo, hi);
        const double fc = f(c);
        if (fc >= fb) return {std::min(a, c), std::max(a, c)};
        a = b;
        fa = fb;
        b = c;
        fb = fc;
    }
    return {lo, hi};
}

}  // namespace

EvidenceResult nll(const SolverState& state, const Eigen::MatrixXd& data) {
    return nll_gamma_scaled(state, state.gamma2(), data);
}

EvidenceResult nll_gamma_scaled(const SolverState& state, double gamma2, const Eigen::MatrixXd& data) {
    if (gamma2 < 0.0 || !std::isfinite(gamma2)) throw PreconditionError("gamma2 must be finite and >= 0");
    if (gamma2 == 0.0) {
        // Pure-noise limit; evaluate() rejects zero only because the
        // optimizer works in log space.
        const Spectrum s = spectrum(state, data);
        EvidenceResult r;
        r.quadratic = 0.5 * s.y2.sum();
        r.constant = 0.5 * static_cast<double>(s.y2.size()) * std::log(2.0 * std::numbers::pi);
        r.nll = r.quadratic + r.constant;
        return r;
    }
    return evaluate(spectrum(state, data), gamma2);
}

double nll_gradient_log_gamma2(const SolverState& state, double gamma2, const Eigen::MatrixXd& data) {
    if (!(gamma2 > 0.0) || !std::isfinite(gamma2)) throw PreconditionError("gamma2 must be finite and > 0");
    return gradient(spectrum(state, data), gamma2);
}

double gamma2_reference(const SolverState& state) {
    const double sx = state.lambda_x_unit().sum();
    const double st = state.lambda_t().sum();
    const double n = static_cast<double>(state.n_sensors()) * static_cast<double>(state.n_data_columns());
    if (!(sx > 0.0) || !(st > 0.0) || !std::isfinite(sx * st)) return 1.0;
    return n / (sx * st);
}

GammaOptimum optimize_gamma(const SolverState& state, const Eigen::MatrixXd& data, GammaBounds bounds) {
    if (!(bounds.lower > 0.0) || !(bounds.upper > bounds.lower)) throw PreconditionError("invalid gamma2 bounds");
    const Spectrum s = spectrum(state, data);
    LogGammaObjective f(s);
    const double centre = bounds.relative ? std::log(gamma2_reference(state)) : 0.0;
    const double lo = centre + std::log(bounds.lower);
    const double hi = centre + std::log(bounds.upper);

    GoldenResult best = golden(f, bracket(f, centre, lo, hi));
    bool fallback = false;
    if (!best.unimodal) {
        fallback = true;
        constexpr int kGrid = 64;
        int arg = 0;
        double f_arg = std::numeric_limits<double>::infinity();
        for (int k = 0; k < kGrid; ++k) {
            const double u = lo + (hi - lo) * k / (kGrid - 1);
            const double v = f(u);
            if (v < f_arg) {
                f_arg = v;
                arg = k;
            }
        }
        const double step = (hi - lo) / (kGrid - 1);
        const GoldenResult refined =
            golden(f, {std::max(lo, lo + step * (arg - 1)), std::min(hi, lo + step * (arg + 1))});
        best = refined.f <= f_arg ? refined : GoldenResult{lo + step * arg, f_arg, false};
    }

    // A boundary optimum is confirmed by the derivative pointing outward;
    // either way the returned point must not lose to the bounds themselves.
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo <= best.f && gradient(s, std::exp(lo)) >= 0.0) best = {lo, f_lo, best.unimodal};
    if (f_lo < best.f) best = {lo, f_lo, best.unimodal};
    if (f_hi < best.f) best = {hi, f_hi, best.unimodal};

    GammaOptimum out;
    out.gamma2 = std::exp(best.u);
    out.evidence = evaluate(s, out.gamma2);
    out.evaluations = f.evaluations;
    out.grid_fallback = fallback;
    return out;
}

std::vector<EvidenceRow> evidence_grid(const ForwardProblem& whitened, const KernelSpec& spatial,
                                       const KernelSpec& temporal, const std::vector<double>& spatial_lengths,
                                       const std::vector<double>& temporal_lengths, GammaBounds bounds) {
    const bool sx = has_length_scale(spatial.kind);
    const bool st = has_length_scale(temporal.kind);
    const std::vector<double> lxs = sx ? spatial_lengths : std::vector<double>{0.0};
    const std::vector<double> lts = st ? temporal_lengths : std::vector<double>{0.0};
    if (lxs.empty() || lts.empty()) throw PreconditionError("evidence grid needs at least one length-scale per axis");

    // Each decomposition depends on one axis only, so compute it once per value.
    std::vector<std::shared_ptr<const SpatialFactor>> spatial_factors;
    for (double lx : lxs) {
        KernelSpec k = with_gamma2(spatial, 1.0);
        if (sx) k.length_scale = lx;
        spatial_factors.push_back(std::make_shared<const SpatialFactor>(factor_spatial(whitened, k)));
    }
    std::vector<std::shared_ptr<const TemporalFactor>> temporal_factors;
    for (double lt : lts) {
        KernelSpec k = temporal;
        if (st) k.length_scale = lt;
        temporal_factors.push_back(std::make_shared<const TemporalFactor>(factor_temporal(whitened, k)));
    }

    std::vector<EvidenceRow> rows(lxs.size() * lts.size());
#pragma omp parallel for collapse(2) schedule(dynamic)
    for (std::size_t a = 0; a < lxs.size(); ++a) {
        for (std::size_t b = 0; b < lts.size(); ++b) {
            const SolverState state(spatial_factors[a], temporal_factors[b], 1.0, whitened.sensor_data);
            const GammaOptimum opt = optimize_gamma(state, whitened.sensor_data, bounds);
            rows[a * lts.size() + b] = {lxs[a],         lts[b],
                                        opt.gamma2,     opt.evidence.nll,
                                        opt.evidence.logdet, opt.evidence.quadratic};
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const EvidenceRow& x, const EvidenceRow& y) { return x.nll < y.nll; });
    return rows;
}

std::string evidence_csv(const std::vector<EvidenceRow>& rows) {
    std::string out = "lx,lt,gamma2_opt,nll,logdet,quad\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.length_x, r.length_t, r.gamma2_opt,
                      r.nll, r.logdet, r.quadratic);
        out += buf;
    }
    return out;
}

}  // namespace kroneig
