#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kroneig/kernels.hpp"

namespace kroneig {

struct BenchConfig {
    Eigen::Index n_sensors = 50;
    Eigen::Index n_sources = 1000;
    std::vector<Eigen::Index> time_ladder = {125, 250, 500, 1000};
    double sample_interval = 0.001;
    KernelSpec spatial = KernelSpec::exponential(1.0, 0.262);
    KernelSpec temporal = KernelSpec::temporal_exponential(0.05);
    std::uint64_t seed = 1;
    int repeats = 1;              // each phase keeps its fastest repeat
    bool optimize_gamma = true;   // include the evidence phase
};

/// Wall-clock seconds per phase for one n_t.
struct BenchRow {
    Eigen::Index n_times = 0;
    double simulate = 0.0;
    double whiten = 0.0;
    double spatial_gram = 0.0;
    double spatial_project = 0.0;
    double spatial_eigen = 0.0;
    double temporal_gram = 0.0;
    double temporal_eigen = 0.0;
    double transform = 0.0;  // Pi and V_x^T B V_t
    double evidence = 0.0;   // gamma2 optimization
    double posterior = 0.0;  // full mean/variance grid
    /// Everything after simulation.
    [[nodiscard]] double total() const;
    /// Both eigendecompositions.
    [[nodiscard]] double eigen() const { return spatial_eigen + temporal_eigen; }
};

struct BenchReport {
    std::vector<BenchRow> rows;
    /// Least-squares slope of log(eigen seconds) against log(n_t); NaN with
    /// fewer than two rows.
    double eigen_slope = 0.0;
};

BenchReport run_bench(const BenchConfig& config);

/// Log-log least-squares slope; NaN unless at least two positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Header `n_t,simulate_s,whiten_s,...,total_s`, LF line endings.
std::string bench_csv(const BenchReport& report);

}  // namespace kroneig
