#include "kroneig/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kroneig/error.hpp"

namespace kroneig {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Eigen::MatrixXd positivity(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& variance) {
    if (mean.rows() != variance.rows() || mean.cols() != variance.cols()) {
        throw DimensionError("positivity: mean and variance shapes differ");
    }
    Eigen::MatrixXd p(mean.rows(), mean.cols());
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        const double m = mean.data()[i];
        const double v = variance.data()[i];
        if (v < 0.0) throw PreconditionError("positivity: negative variance");
        if (v > 0.0) {
            p.data()[i] = normal_cdf(m / std::sqrt(v));
        } else {
            p.data()[i] = m > 0.0 ? 1.0 : (m < 0.0 ? 0.0 : 0.5);
        }
    }
    return p;
}

Eigen::Index top_fraction_count(Eigen::Index n, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw PreconditionError("fraction must lie in (0, 1]");
    // The small slack keeps e.g. 0.025 * 40 from rounding up to 2.
    const auto k = static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    return std::clamp<Eigen::Index>(k, 0, n);
}

namespace {

void select_top(const double* values, Eigen::Index n, Eigen::Index stride, double fraction, double* mask) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::Index keep = top_fraction_count(n, fraction);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(values[a * stride]) > std::abs(values[b * stride]);
    });
    for (Eigen::Index k = 0; k < keep; ++k) mask[order[static_cast<std::size_t>(k)] * stride] = 1.0;
}

}  // namespace

Eigen::MatrixXd threshold_top_fraction(const Eigen::MatrixXd& mean, double fraction, ThresholdScope scope) {
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
    if (scope == ThresholdScope::Global) {
        select_top(mean.data(), mean.size(), 1, fraction, mask.data());
    } else {
        for (Eigen::Index c = 0; c < mean.cols(); ++c) {
            select_top(mean.col(c).data(), mean.rows(), 1, fraction, mask.col(c).data());
        }
    }
    return mask;
}

Peak peak_extract(std::span<const double> series, std::span<const double> times, double t_a, double t_b,
                  Polarity polarity) {
    if (series.size() != times.size()) throw DimensionError("peak_extract: series and times differ in length");
    if (times.empty() || t_a > t_b || t_a < times.front() || t_b > times.back()) {
        throw PreconditionError("peak_extract: window must lie within the time range");
    }
    Peak best;
    bool found = false;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (times[i] < t_a || times[i] > t_b) continue;
        const double v = polarity == Polarity::Absolute ? std::abs(series[i]) : series[i];
        if (!found || v > best.amplitude) {
            best = {times[i], v, static_cast<Eigen::Index>(i)};
            found = true;
        }
    }
    if (!found) throw PreconditionError("peak_extract: no samples inside the window");
    return best;
}

GrandAverage grand_average(const std::vector<Eigen::VectorXd>& series,
                           std::optional<std::span<const double>> reference_peaks) {
    if (series.size() < 2) throw PreconditionError("grand_average needs at least two series");
    const Eigen::Index n = series.front().size();
    for (const auto& s : series) {
        if (s.size() != n) throw DimensionError("grand_average: series lengths differ");
    }
    if (reference_peaks && reference_peaks->size() != series.size()) {
        throw DimensionError("grand_average: one reference peak per series required");
    }
    std::vector<Eigen::VectorXd> scaled = series;
    if (reference_peaks) {
        for (std::size_t k = 0; k < scaled.size(); ++k) {
            const double ref = (*reference_peaks)[k];
            if (ref == 0.0 || !std::isfinite(ref)) throw PreconditionError("grand_average: reference peak must be nonzero");
            scaled[k] /= ref;
        }
    }
    const double count = static_cast<double>(scaled.size());
    GrandAverage out;
    out.mean = Eigen::VectorXd::Zero(n);
    for (const auto& s : scaled) out.mean += s;
    out.mean /= count;
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(n);
    for (const auto& s : scaled) ss += (s - out.mean).array().square().matrix();
    out.sem = (ss / (count - 1.0)).cwiseSqrt() / std::sqrt(count);
    return out;
}

}  // namespace kroneig
