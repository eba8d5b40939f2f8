#include "kroneig/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kroneig/bench.hpp"
#include "kroneig/error.hpp"
#include "kroneig/evidence.hpp"
#include "kroneig/kernel_json.hpp"
#include "kroneig/matrix_file.hpp"
#include "kroneig/problem_io.hpp"
#include "kroneig/simulate.hpp"
#include "kroneig/solver.hpp"
#include "kroneig/summarize.hpp"
#include "kroneig/whiten.hpp"

namespace kroneig {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Common {
    std::string config;
    std::string out;
    bool force = false;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool out_required = true) {
    cmd->add_option("--config", c.config, "JSON configuration file");
    auto* o = cmd->add_option("--out", c.out, "output directory");
    if (out_required) o->required();
    cmd->add_flag("--force", c.force, "overwrite existing outputs");
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--threads", c.threads, "worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw ConfigError("config " + path + " must hold a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse config " + path + ": " + e.what());
    }
}

template <class T>
T config_value(const json& cfg, const char* key, T fallback) {
    if (!cfg.contains(key)) return fallback;
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

/// Every output of a command is checked before the first one is written.
class OutputSet {
public:
    OutputSet(fs::path dir, bool force) : dir_(std::move(dir)), force_(force) {}

    fs::path add(const std::string& name) {
        names_.push_back(name);
        return dir_ / name;
    }

    void prepare() const {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) {
            throw IoError("cannot create output directory " + dir_.string() + (ec ? ": " + ec.message() : ""));
        }
        for (const auto& n : names_) check_overwrite(dir_ / n, force_);
    }

    [[nodiscard]] json listing() const {
        json j = json::array();
        for (const auto& n : names_) j.push_back((dir_ / n).string());
        return j;
    }

private:
    fs::path dir_;
    bool force_;
    std::vector<std::string> names_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw IoError("cannot write " + path.string());
}

struct Manifest {
    std::string command;
    json config = json::object();
    json inputs = json::array();
    json outputs = json::array();
    json results = json::object();
    std::map<std::string, double> timings;
    std::optional<std::uint64_t> seed;

    void write(const fs::path& path) const {
        json j = {
            {"command", command},   {"version", kVersion}, {"config", config},
            {"inputs", inputs},     {"outputs", outputs},  {"timings_s", timings},
            {"results", results},
        };
        j["seed"] = seed ? json(*seed) : json(nullptr);
        write_text(path, j.dump(2) + "\n");
    }
};

class Stopwatch {
public:
    Stopwatch(Manifest& m, std::string phase) : m_(m), phase_(std::move(phase)), start_(Clock::now()) {}
    ~Stopwatch() { m_.timings[phase_] += std::chrono::duration<double>(Clock::now() - start_).count(); }
    Stopwatch(const Stopwatch&) = delete;
    Stopwatch& operator=(const Stopwatch&) = delete;

private:
    Manifest& m_;
    std::string phase_;
    Clock::time_point start_;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(std::string("bad number in ") + what + ": '" + item + "'");
        }
    }
    if (v.empty()) throw ConfigError(std::string(what) + " is empty");
    return v;
}

// ---------------------------------------------------------------- kernels

struct KernelArgs {
    std::string spatial = "EXP";
    std::optional<double> length_x;
    std::string temporal = "TemporalExponential";
    std::optional<double> length_t;
    std::string metric;
};

void add_kernel_options(CLI::App* cmd, KernelArgs& k) {
    cmd->add_option("--spatial", k.spatial, "spatial kernel: MNE EXP MAT RBF RQ HRM SPL or a full name");
    cmd->add_option("--length-x", k.length_x, "spatial length-scale");
    cmd->add_option("--temporal", k.temporal, "TemporalDelta or TemporalExponential");
    cmd->add_option("--length-t", k.length_t, "temporal length-scale in seconds");
    cmd->add_option("--metric", k.metric, "chordal or geodesic");
}

KernelSpec kernel_from_flags(const std::string& name, std::optional<double> length, double default_length,
                             const std::string& metric) {
    KernelSpec s;
    s.kind = parse_kernel_kind(name);
    if (s.kind == KernelKind::Product) throw ConfigError("give spatial and temporal kernels separately");
    if (has_length_scale(s.kind)) s.length_scale = length.value_or(default_length);
    if (!metric.empty()) s.metric = parse_metric(metric);
    validate(s);
    return s;
}

/// Kernels from the config's "spatial"/"temporal" objects unless the flags name them.
SeparableKernel resolve_kernels(const json& cfg, const KernelArgs& k, const CLI::App* cmd) {
    const bool spatial_flag = cmd->count("--spatial") > 0 || cmd->count("--length-x") > 0 || cmd->count("--metric") > 0;
    const bool temporal_flag = cmd->count("--temporal") > 0 || cmd->count("--length-t") > 0;
    KernelSpec spatial = cfg.contains("spatial") && !spatial_flag
                             ? kernel_from_json(cfg.at("spatial"))
                             : kernel_from_flags(k.spatial, k.length_x, 0.262, k.metric);
    KernelSpec temporal = cfg.contains("temporal") && !temporal_flag
                              ? kernel_from_json(cfg.at("temporal"))
                              : kernel_from_flags(k.temporal, k.length_t, 0.05, "");
    return make_separable(with_gamma2(spatial, 1.0), temporal);
}

// --------------------------------------------------------------- simulate

int cmd_simulate(const Common& c, std::ostream& out) {
    Manifest m;
    m.command = "simulate";
    const json cfg = load_config(c.config);
    SimConfig sim = sim_config_from_json(cfg);
    if (c.seed) sim.seed = *c.seed;
    m.seed = sim.seed;
    m.config = sim_config_to_json(sim);
    if (!c.config.empty()) m.inputs.push_back(c.config);

    OutputSet outputs(c.out, c.force);
    for (const char* n : {"G.kmat", "B.kmat", "sigma_x.kmat", "sources.kmat", "times.kmat", "problem.json",
                          "J_true.kmat", "sim.json"}) {
        outputs.add(n);
    }
    outputs.prepare();

    Simulation s;
    {
        Stopwatch w(m, "simulate");
        s = simulate(sim);
    }
    {
        Stopwatch w(m, "write");
        write_problem(c.out, s.problem, c.force);
        write_matrix(fs::path(c.out) / "J_true.kmat", s.truth);
    }
    m.outputs = outputs.listing();
    m.results = {{"n_sensors", sim.n_sensors},
                 {"n_sources", sim.n_sources},
                 {"n_times", sim.n_times},
                 {"support_fraction", score(s.truth, s.truth).support_fraction}};
    m.write(fs::path(c.out) / "sim.json");
    out << "simulated " << sim.n_sensors << " sensors x " << sim.n_sources << " sources x " << sim.n_times
        << " times into " << c.out << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------ solve

struct SolveArgs {
    std::string problem;
    std::optional<double> gamma2;
    bool optimize = false;
    bool oracle = false;
    KernelArgs kernels;
};

double max_relative_deviation(const Eigen::MatrixXd& fast, const Eigen::MatrixXd& reference) {
    const double scale = reference.cwiseAbs().maxCoeff();
    const double diff = (fast - reference).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
}

int cmd_solve(const Common& c, const SolveArgs& a, const CLI::App* cmd, std::ostream& out) {
    Manifest m;
    m.command = "solve";
    m.seed = c.seed;
    const json cfg = load_config(c.config);
    const std::string problem_dir = a.problem.empty() ? config_value<std::string>(cfg, "problem", "") : a.problem;
    if (problem_dir.empty()) throw ConfigError("solve needs --problem");
    const SeparableKernel kernel = resolve_kernels(cfg, a.kernels, cmd);
    const bool optimize = a.optimize || (!a.gamma2 && config_value<bool>(cfg, "optimize_gamma", false));
    const double gamma2 = a.gamma2.value_or(config_value<double>(cfg, "gamma2", 1.0));
    if (!(gamma2 >= 0.0) || !std::isfinite(gamma2)) throw ConfigError("gamma2 must be finite and >= 0");
    const bool oracle = a.oracle || config_value<bool>(cfg, "oracle", false);

    OutputSet outputs(c.out, c.force);
    const fs::path mean_path = outputs.add("mean.kmat");
    const fs::path var_path = outputs.add("variance.kmat");
    std::optional<fs::path> naive_mean_path;
    std::optional<fs::path> naive_var_path;
    if (oracle) {
        naive_mean_path = outputs.add("naive_mean.kmat");
        naive_var_path = outputs.add("naive_variance.kmat");
    }
    const fs::path manifest_path = outputs.add("solve.json");

    ForwardProblem problem;
    {
        Stopwatch w(m, "read");
        problem = read_problem(problem_dir);
    }
    m.inputs.push_back(problem_dir);
    if (!c.config.empty()) m.inputs.push_back(c.config);

    // Refuse an oversized oracle before any expensive work.
    if (oracle) {
        const Eigen::Index obs = problem.n_sensors() * problem.n_times();
        const Eigen::Index src = problem.n_sources() * problem.n_times();
        if (obs > kNaiveObservationGuard || src > kNaiveSourceGuard) {
            throw DimensionError("--oracle refused: n_n*n_t = " + std::to_string(obs) + " (limit " +
                                 std::to_string(kNaiveObservationGuard) + "), n_m*n_t = " + std::to_string(src) +
                                 " (limit " + std::to_string(kNaiveSourceGuard) + ")");
        }
    }
    outputs.prepare();

    ForwardProblem whitened = problem;
    if (!problem.whitened) {
        Stopwatch w(m, "whiten");
        whitened = whiten(problem).problem;
    }

    std::shared_ptr<const SpatialFactor> spatial;
    std::shared_ptr<const TemporalFactor> temporal;
    {
        Stopwatch w(m, "precompute");
        spatial = std::make_shared<const SpatialFactor>(factor_spatial(whitened, kernel.spatial));
        temporal = std::make_shared<const TemporalFactor>(factor_temporal(whitened, kernel.temporal));
    }
    m.timings["spatial_eigen"] = spatial->eigen_seconds;
    m.timings["temporal_eigen"] = temporal->eigen_seconds;
    SolverState state(spatial, temporal, gamma2, whitened.sensor_data);

    json result;
    if (optimize) {
        Stopwatch w(m, "evidence");
        const GammaOptimum opt = optimize_gamma(state, whitened.sensor_data);
        state = state.with_gamma2(opt.gamma2);
        result["evaluations"] = opt.evaluations;
        result["grid_fallback"] = opt.grid_fallback;
    }
    const EvidenceResult ev = nll(state, whitened.sensor_data);
    result["gamma2"] = state.gamma2();
    result["nll"] = ev.nll;

    PosteriorGrid grid;
    {
        Stopwatch w(m, "posterior");
        grid = posterior_grid(state);
    }

    if (oracle) {
        Stopwatch w(m, "oracle");
        const KernelSpec spatial_g = with_gamma2(kernel.spatial, state.gamma2());
        // The unwhitened problem goes to the oracle so whitening is checked too.
        const PosteriorGrid naive = naive_posterior_grid(problem, spatial_g, kernel.temporal);
        const double dm = max_relative_deviation(grid.mean, naive.mean);
        const double dv = max_relative_deviation(grid.variance, naive.variance);
        result["oracle_mean_deviation"] = dm;
        result["oracle_variance_deviation"] = dv;
        result["oracle_max_deviation"] = std::max(dm, dv);
        write_matrix(*naive_mean_path, naive.mean);
        write_matrix(*naive_var_path, naive.variance);
    }
    {
        Stopwatch w(m, "write");
        write_matrix(mean_path, grid.mean);
        write_matrix(var_path, grid.variance);
    }

    m.config = {{"problem", problem_dir},
                {"spatial", kernel_to_json(kernel.spatial)},
                {"temporal", kernel_to_json(kernel.temporal)},
                {"gamma2", gamma2},
                {"optimize_gamma", optimize},
                {"oracle", oracle}};
    m.outputs = outputs.listing();
    m.results = result;
    m.write(manifest_path);
    out << "gamma2 " << state.gamma2() << ", nll " << ev.nll;
    if (oracle) out << ", oracle deviation " << result["oracle_max_deviation"].get<double>();
    out << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- evidence

struct EvidenceArgs {
    std::string problem;
    std::string lx;
    std::string lt;
    KernelArgs kernels;
};

int cmd_evidence(const Common& c, const EvidenceArgs& a, const CLI::App* cmd, std::ostream& out) {
    Manifest m;
    m.command = "evidence";
    m.seed = c.seed;
    const json cfg = load_config(c.config);
    const std::string problem_dir = a.problem.empty() ? config_value<std::string>(cfg, "problem", "") : a.problem;
    if (problem_dir.empty()) throw ConfigError("evidence needs --problem");
    const SeparableKernel kernel = resolve_kernels(cfg, a.kernels, cmd);

    std::vector<double> lx = kDefaultSpatialLengths;
    std::vector<double> lt = kDefaultTemporalLengths;
    if (!a.lx.empty()) {
        lx = parse_list(a.lx, "--lx");
    } else if (cfg.contains("spatial_lengths")) {
        lx = config_value<std::vector<double>>(cfg, "spatial_lengths", lx);
    }
    if (!a.lt.empty()) {
        lt = parse_list(a.lt, "--lt");
    } else if (cfg.contains("temporal_lengths")) {
        lt = config_value<std::vector<double>>(cfg, "temporal_lengths", lt);
    }

    OutputSet outputs(c.out, c.force);
    const fs::path csv_path = outputs.add("evidence.csv");
    const fs::path manifest_path = outputs.add("evidence.json");

    ForwardProblem problem;
    {
        Stopwatch w(m, "read");
        problem = read_problem(problem_dir);
    }
    outputs.prepare();
    m.inputs.push_back(problem_dir);
    if (!c.config.empty()) m.inputs.push_back(c.config);

    ForwardProblem whitened = problem;
    if (!problem.whitened) {
        Stopwatch w(m, "whiten");
        whitened = whiten(problem).problem;
    }
    std::vector<EvidenceRow> rows;
    {
        Stopwatch w(m, "grid");
        rows = evidence_grid(whitened, kernel.spatial, kernel.temporal, lx, lt);
    }
    write_text(csv_path, evidence_csv(rows));

    m.config = {{"problem", problem_dir},
                {"spatial", kernel_to_json(kernel.spatial)},
                {"temporal", kernel_to_json(kernel.temporal)},
                {"spatial_lengths", lx},
                {"temporal_lengths", lt}};
    m.outputs = outputs.listing();
    m.results = {{"rows", rows.size()},
                 {"best", {{"lx", rows.front().length_x},
                           {"lt", rows.front().length_t},
                           {"gamma2_opt", rows.front().gamma2_opt},
                           {"nll", rows.front().nll}}}};
    m.write(manifest_path);
    out << rows.size() << " evidence rows; best lx " << rows.front().length_x << ", lt " << rows.front().length_t
        << ", gamma2 " << rows.front().gamma2_opt << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- summarize

struct SummarizeArgs {
    std::string solution;
    std::string mean;
    std::string variance;
    std::string times;
    std::optional<double> fraction;
    std::string scope;
    std::vector<long long> sources;
    std::optional<int> top_sources;
    std::vector<double> window;
    std::string polarity;
};

Eigen::VectorXd read_times(const std::string& path, Eigen::Index n_times) {
    if (path.empty()) {
        return Eigen::VectorXd::LinSpaced(n_times, 0.0, static_cast<double>(n_times - 1));
    }
    fs::path p(path);
    if (fs::is_directory(p)) p /= "times.kmat";
    const Eigen::MatrixXd t = read_matrix(p);
    if (t.cols() != 1 || t.rows() != n_times) throw DimensionError("times do not match the mean matrix");
    return t.col(0);
}

int cmd_summarize(const Common& c, const SummarizeArgs& a, std::ostream& out) {
    Manifest m;
    m.command = "summarize";
    m.seed = c.seed;
    const json cfg = load_config(c.config);

    std::string mean_path = a.mean;
    std::string var_path = a.variance;
    if (!a.solution.empty()) {
        if (mean_path.empty()) mean_path = (fs::path(a.solution) / "mean.kmat").string();
        if (var_path.empty()) var_path = (fs::path(a.solution) / "variance.kmat").string();
    }
    if (mean_path.empty() || var_path.empty()) throw ConfigError("summarize needs --solution or --mean and --variance");
    const double fraction = a.fraction.value_or(config_value<double>(cfg, "fraction", 0.025));
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must lie in (0, 1]");
    const std::string scope_name = !a.scope.empty() ? a.scope : config_value<std::string>(cfg, "scope", "global");
    ThresholdScope scope;
    if (scope_name == "global") {
        scope = ThresholdScope::Global;
    } else if (scope_name == "per-time") {
        scope = ThresholdScope::PerTimeSlice;
    } else {
        throw ConfigError("scope must be global or per-time");
    }
    const std::string polarity_name =
        !a.polarity.empty() ? a.polarity : config_value<std::string>(cfg, "polarity", "absolute");
    Polarity polarity;
    if (polarity_name == "absolute") {
        polarity = Polarity::Absolute;
    } else if (polarity_name == "signed") {
        polarity = Polarity::Signed;
    } else {
        throw ConfigError("polarity must be absolute or signed");
    }

    OutputSet outputs(c.out, c.force);
    const fs::path pos_path = outputs.add("positivity.kmat");
    const fs::path mask_path = outputs.add("mask.kmat");
    const fs::path peaks_path = outputs.add("peaks.csv");
    const fs::path manifest_path = outputs.add("summarize.json");

    const Eigen::MatrixXd mean = read_matrix(mean_path);
    const Eigen::MatrixXd variance = read_matrix(var_path);
    if (mean.rows() != variance.rows() || mean.cols() != variance.cols()) {
        throw DimensionError("mean and variance shapes differ");
    }
    if (mean.size() == 0) throw DimensionError("empty mean matrix");
    const Eigen::VectorXd times = read_times(a.times, mean.cols());
    m.inputs = {mean_path, var_path};
    if (!a.times.empty()) m.inputs.push_back(a.times);

    std::vector<Eigen::Index> sources;
    for (long long s : a.sources) {
        if (s < 0 || s >= mean.rows()) throw DimensionError("source index " + std::to_string(s) + " out of range");
        sources.push_back(static_cast<Eigen::Index>(s));
    }
    if (sources.empty()) {
        // Strongest sources by peak |mean| across time; lower index wins ties.
        const int count = a.top_sources.value_or(config_value<int>(cfg, "top_sources", 10));
        if (count < 1) throw ConfigError("top-sources must be >= 1");
        const Eigen::VectorXd strength = mean.cwiseAbs().rowwise().maxCoeff();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(mean.rows()));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index x, Eigen::Index y) { return strength[x] > strength[y]; });
        order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(count)));
        sources = order;
    }
    double t_a = times[0];
    double t_b = times[times.size() - 1];
    if (!a.window.empty()) {
        if (a.window.size() != 2) throw ConfigError("--window takes two values");
        t_a = a.window[0];
        t_b = a.window[1];
    }

    outputs.prepare();
    Eigen::MatrixXd pos;
    Eigen::MatrixXd mask;
    std::string peaks = "source_index,latency_s,amplitude\n";
    {
        Stopwatch w(m, "summarize");
        pos = positivity(mean, variance);
        mask = threshold_top_fraction(mean, fraction, scope);
        char buf[128];
        for (Eigen::Index s : sources) {
            const Eigen::VectorXd row = mean.row(s).transpose();
            const Peak p = peak_extract(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                                        std::span<const double>(times.data(), static_cast<std::size_t>(times.size())),
                                        t_a, t_b, polarity);
            std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(s), p.latency, p.amplitude);
            peaks += buf;
        }
    }
    write_matrix(pos_path, pos);
    write_matrix(mask_path, mask);
    write_text(peaks_path, peaks);

    m.config = {{"fraction", fraction}, {"scope", scope_name}, {"polarity", polarity_name},
                {"window", {t_a, t_b}}};
    m.outputs = outputs.listing();
    m.results = {{"selected", static_cast<double>(mask.sum())}, {"peaks", sources.size()}};
    m.write(manifest_path);
    out << "selected " << static_cast<long long>(mask.sum()) << " of " << mean.size() << " entries, " << sources.size()
        << " peaks\n";
    return kExitOk;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
    std::string ladder;
    std::optional<long long> n_sensors;
    std::optional<long long> n_sources;
    std::optional<int> repeats;
    KernelArgs kernels;
};

int cmd_bench(const Common& c, const BenchArgs& a, const CLI::App* cmd, std::ostream& out) {
    Manifest m;
    m.command = "bench";
    const json cfg = load_config(c.config);
    BenchConfig b;
    b.n_sensors = a.n_sensors.value_or(config_value<long long>(cfg, "n_sensors", b.n_sensors));
    b.n_sources = a.n_sources.value_or(config_value<long long>(cfg, "n_sources", b.n_sources));
    b.repeats = a.repeats.value_or(config_value<int>(cfg, "repeats", b.repeats));
    b.seed = c.seed.value_or(config_value<std::uint64_t>(cfg, "seed", b.seed));
    m.seed = b.seed;
    if (!a.ladder.empty()) {
        b.time_ladder.clear();
        for (double v : parse_list(a.ladder, "--ladder")) {
            if (v < 1.0 || v != std::floor(v)) throw ConfigError("ladder entries must be positive integers");
            b.time_ladder.push_back(static_cast<Eigen::Index>(v));
        }
    } else if (cfg.contains("ladder")) {
        b.time_ladder = config_value<std::vector<Eigen::Index>>(cfg, "ladder", b.time_ladder);
    }
    const SeparableKernel kernel = resolve_kernels(cfg, a.kernels, cmd);
    b.spatial = kernel.spatial;
    b.temporal = kernel.temporal;

    OutputSet outputs(c.out, c.force);
    const fs::path csv_path = outputs.add("bench.csv");
    const fs::path manifest_path = outputs.add("bench.json");
    outputs.prepare();

    BenchReport report;
    {
        Stopwatch w(m, "bench");
        report = run_bench(b);
    }
    write_text(csv_path, bench_csv(report));
    m.config = {{"n_sensors", b.n_sensors},
                {"n_sources", b.n_sources},
                {"ladder", b.time_ladder},
                {"repeats", b.repeats},
                {"spatial", kernel_to_json(b.spatial)},
                {"temporal", kernel_to_json(b.temporal)}};
    m.outputs = outputs.listing();
    m.results = {{"eigen_slope", std::isfinite(report.eigen_slope) ? json(report.eigen_slope) : json(nullptr)}};
    m.write(manifest_path);
    for (const BenchRow& r : report.rows) {
        out << "n_t " << r.n_times << ": eigen " << r.eigen() << " s, total " << r.total() << " s\n";
    }
    if (std::isfinite(report.eigen_slope)) out << "eigendecomposition log-log slope " << report.eigen_slope << "\n";
    return kExitOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) return kExitDimension;
    if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
    return kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fast spatio-temporal Gaussian-process source reconstruction", "kroneig"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;

    auto* sim = app.add_subcommand("simulate", "write a synthetic two-patch problem directory");
    add_common(sim, common);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "posterior mean and variance on the source grid");
    add_common(solve, common);
    solve->add_option("--problem", solve_args.problem, "problem directory");
    auto* g2 = solve->add_option("--gamma2", solve_args.gamma2, "prior magnitude");
    solve->add_flag("--optimize-gamma", solve_args.optimize, "choose gamma2 by maximum evidence")->excludes(g2);
    solve->add_flag("--oracle", solve_args.oracle, "also run the dense reference solver");
    add_kernel_options(solve, solve_args.kernels);

    EvidenceArgs ev_args;
    auto* ev = app.add_subcommand("evidence", "evidence over a length-scale grid");
    add_common(ev, common);
    ev->add_option("--problem", ev_args.problem, "problem directory");
    ev->add_option("--lx", ev_args.lx, "comma-separated spatial length-scales");
    ev->add_option("--lt", ev_args.lt, "comma-separated temporal length-scales");
    add_kernel_options(ev, ev_args.kernels);

    SummarizeArgs sum_args;
    auto* sum = app.add_subcommand("summarize", "positivity map, top-fraction mask and peak table");
    add_common(sum, common);
    sum->add_option("--solution", sum_args.solution, "directory holding mean.kmat and variance.kmat");
    sum->add_option("--mean", sum_args.mean, "mean matrix file");
    sum->add_option("--variance", sum_args.variance, "variance matrix file");
    sum->add_option("--times", sum_args.times, "times.kmat or a problem directory");
    sum->add_option("--fraction", sum_args.fraction, "fraction of entries kept by the mask (default 0.025)");
    sum->add_option("--scope", sum_args.scope, "global or per-time");
    sum->add_option("--sources", sum_args.sources, "source indices for the peak table")->delimiter(',');
    sum->add_option("--top-sources", sum_args.top_sources, "number of strongest sources in the peak table");
    sum->add_option("--window", sum_args.window, "peak search window t_a t_b in seconds")->expected(2);
    sum->add_option("--polarity", sum_args.polarity, "absolute or signed");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "phase timings across an n_t ladder");
    add_common(bench, common);
    bench->add_option("--ladder", bench_args.ladder, "comma-separated n_t values");
    bench->add_option("--n-sensors", bench_args.n_sensors, "number of sensors");
    bench->add_option("--n-sources", bench_args.n_sources, "number of sources");
    bench->add_option("--repeats", bench_args.repeats, "repeats per size; fastest kept");
    add_kernel_options(bench, bench_args.kernels);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    try {
        apply_threads(common.threads);
        if (sim->parsed()) return cmd_simulate(common, out);
        if (solve->parsed()) return cmd_solve(common, solve_args, solve, out);
        if (ev->parsed()) return cmd_evidence(common, ev_args, ev, out);
        if (sum->parsed()) return cmd_summarize(common, sum_args, out);
        if (bench->parsed()) return cmd_bench(common, bench_args, bench, out);
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        err << "kroneig: " << e.what() << "\n";
        return code;
    }
    return kExitFailure;
}

}  // namespace kroneig
