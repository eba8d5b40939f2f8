#include <cmath>
#include <sstream>

#include <doctest.h>

#include "kroneig/bench.hpp"

using namespace kroneig;

TEST_CASE("log-log slope of exact power laws") {
    const std::vector<double> x = {10, 20, 40, 80};
    std::vector<double> y;
    for (double v : x) y.push_back(0.3 * v * v * v);
    CHECK(loglog_slope(x, y) == doctest::Approx(3.0).epsilon(1e-12));
    y.clear();
    for (double v : x) y.push_back(5.0 / v);
    CHECK(loglog_slope(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::isnan(loglog_slope({1.0}, {2.0})));
    CHECK(std::isnan(loglog_slope({1.0, 2.0}, {0.0, 0.0})));
}

TEST_CASE("a one-rung ladder gives one row and a NaN slope") {
    BenchConfig c;
    c.n_sensors = 10;
    c.n_sources = 60;
    c.time_ladder = {20};
    const BenchReport r = run_bench(c);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].n_times == 20);
    CHECK(std::isnan(r.eigen_slope));
    CHECK(r.rows[0].total() >= r.rows[0].eigen());
    CHECK(r.rows[0].evidence >= 0.0);
}

TEST_CASE("bench CSV has a header and one line per row") {
    BenchConfig c;
    c.n_sensors = 8;
    c.n_sources = 40;
    c.time_ladder = {10, 20, 30};
    c.optimize_gamma = false;
    const BenchReport r = run_bench(c);
    CHECK(r.rows.size() == 3);
    CHECK(r.rows[1].evidence == 0.0);
    const std::string csv = bench_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("n_t,simulate_s,", 0) == 0);
    CHECK(line.ends_with(",eigen_s,total_s"));
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        CHECK(std::count(line.begin(), line.end(), ',') == 12);
    }
    CHECK(n == 3);
    CHECK(csv.find('\r') == std::string::npos);
}
