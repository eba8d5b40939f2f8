#include "kroneig/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "kroneig/error.hpp"
#include "kroneig/evidence.hpp"
#include "kroneig/simulate.hpp"
#include "kroneig/solver.hpp"
#include "kroneig/whiten.hpp"

namespace kroneig {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

BenchRow bench_once(const BenchConfig& config, Eigen::Index n_times) {
    BenchRow row;
    row.n_times = n_times;

    SimConfig sim;
    sim.seed = config.seed;
    sim.n_sensors = config.n_sensors;
    sim.n_sources = config.n_sources;
    sim.n_times = n_times;
    sim.sample_interval = config.sample_interval;
    sim.bump_center = 0.5 * config.sample_interval * static_cast<double>(n_times - 1);
    sim.noise.kind = NoiseKind::Identity;

    auto t0 = Clock::now();
    const Simulation s = simulate(sim);
    row.simulate = seconds_since(t0);

    t0 = Clock::now();
    const WhitenResult w = whiten(s.problem);
    row.whiten = seconds_since(t0);

    auto spatial = std::make_shared<const SpatialFactor>(factor_spatial(w.problem, config.spatial));
    row.spatial_gram = spatial->gram_seconds;
    row.spatial_project = spatial->project_seconds;
    row.spatial_eigen = spatial->eigen_seconds;
    auto temporal = std::make_shared<const TemporalFactor>(factor_temporal(w.problem, config.temporal));
    row.temporal_gram = temporal->gram_seconds;
    row.temporal_eigen = temporal->eigen_seconds;

    t0 = Clock::now();
    SolverState state(spatial, temporal, config.spatial.gamma2, w.problem.sensor_data);
    row.transform = seconds_since(t0);

    if (config.optimize_gamma) {
        t0 = Clock::now();
        const GammaOptimum opt = optimize_gamma(state, w.problem.sensor_data);
        row.evidence = seconds_since(t0);
        state = state.with_gamma2(opt.gamma2);
    }

    t0 = Clock::now();
    const PosteriorGrid grid = posterior_grid(state);
    row.posterior = seconds_since(t0);
    if (!grid.mean.allFinite()) throw NumericalError("bench: non-finite posterior");
    return row;
}

}  // namespace

double BenchRow::total() const {
    return whiten + spatial_gram + spatial_project + spatial_eigen + temporal_gram + temporal_eigen + transform +
           evidence + posterior;
}

BenchReport run_bench(const BenchConfig& config) {
    if (config.time_ladder.empty()) throw ConfigError("bench ladder is empty");
    if (config.repeats < 1) throw ConfigError("bench repeats must be >= 1");
    validate(config.spatial);
    validate(config.temporal);
    BenchReport report;
    std::vector<double> ns;
    std::vector<double> eig;
    for (const Eigen::Index nt : config.time_ladder) {
        if (nt < 1) throw ConfigError("bench ladder entries must be positive");
        BenchRow best = bench_once(config, nt);
        for (int r = 1; r < config.repeats; ++r) {
            const BenchRow next = bench_once(config, nt);
            best.simulate = std::min(best.simulate, next.simulate);
            best.whiten = std::min(best.whiten, next.whiten);
            best.spatial_gram = std::min(best.spatial_gram, next.spatial_gram);
            best.spatial_project = std::min(best.spatial_project, next.spatial_project);
            best.spatial_eigen = std::min(best.spatial_eigen, next.spatial_eigen);
            best.temporal_gram = std::min(best.temporal_gram, next.temporal_gram);
            best.temporal_eigen = std::min(best.temporal_eigen, next.temporal_eigen);
            best.transform = std::min(best.transform, next.transform);
            best.evidence = std::min(best.evidence, next.evidence);
            best.posterior = std::min(best.posterior, next.posterior);
        }
        report.rows.push_back(best);
        ns.push_back(static_cast<double>(nt));
        eig.push_back(best.eigen());
    }
    report.eigen_slope = loglog_slope(ns, eig);
    return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / sxx;
}

std::string bench_csv(const BenchReport& report) {
    std::string out =
        "n_t,simulate_s,whiten_s,spatial_gram_s,spatial_project_s,spatial_eigen_s,temporal_gram_s,"
        "temporal_eigen_s,transform_s,evidence_s,posterior_s,eigen_s,total_s\n";
    char buf[512];
    for (const BenchRow& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%lld,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                      static_cast<long long>(r.n_times), r.simulate, r.whiten, r.spatial_gram, r.spatial_project,
                      r.spatial_eigen, r.temporal_gram, r.temporal_eigen, r.transform, r.evidence, r.posterior,
                      r.eigen(), r.total());
        out += buf;
    }
    return out;
}

}  // namespace kroneig
