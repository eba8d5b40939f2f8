#include "kroneig/problem_io.hpp"

#include <fstream>
#include <string>

#include "kroneig/error.hpp"
#include "kroneig/matrix_file.hpp"

namespace kroneig {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kProblemFiles[] = {"G.kmat", "B.kmat", "sigma_x.kmat", "sigma_t.kmat",
                                         "sources.kmat", "times.kmat", "problem.json"};

Eigen::MatrixXd read_required(const fs::path& dir, const char* name) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) throw IoError("problem directory is missing " + p.string());
    return read_matrix(p);
}

std::string noise_kind_name(NoiseKind k) {
    switch (k) {
        case NoiseKind::None: return "none";
        case NoiseKind::Identity: return "identity";
        case NoiseKind::RandomSpd: return "random_spd";
        case NoiseKind::File: return "file";
    }
    return "random_spd";
}

NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "none") return NoiseKind::None;
    if (s == "identity") return NoiseKind::Identity;
    if (s == "random_spd") return NoiseKind::RandomSpd;
    if (s == "file") return NoiseKind::File;
    throw ConfigError("unknown noise kind '" + s + "'");
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void check_overwrite(const fs::path& path, bool force) {
    if (!force && fs::exists(path)) {
        throw IoError("refusing to overwrite " + path.string() + " (pass --force)");
    }
}

void write_problem(const fs::path& dir, const ForwardProblem& problem, bool force) {
    if (problem.temporal_transform) {
        throw PreconditionError("a temporally whitened problem cannot be written as a problem directory");
    }
    require_valid(problem);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (const char* name : kProblemFiles) check_overwrite(dir / name, force);

    write_matrix(dir / "G.kmat", problem.lead_field);
    write_matrix(dir / "B.kmat", problem.sensor_data);
    write_matrix(dir / "sigma_x.kmat", problem.noise_cov_spatial);
    if (problem.noise_cov_temporal) {
        write_matrix(dir / "sigma_t.kmat", *problem.noise_cov_temporal);
    } else if (force) {
        fs::remove(dir / "sigma_t.kmat", ec);
    }
    write_matrix(dir / "sources.kmat", problem.source_points);
    write_matrix(dir / "times.kmat", problem.time_points);

    const json manifest = {
        {"n_sensors", problem.n_sensors()},
        {"n_sources", problem.n_sources()},
        {"n_times", problem.n_times()},
        {"whitened", problem.whitened},
        {"has_sigma_t", problem.noise_cov_temporal.has_value()},
    };
    std::ofstream out(dir / "problem.json", std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + (dir / "problem.json").string());
}

ForwardProblem read_problem(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a problem directory: " + dir.string());
    json manifest;
    {
        std::ifstream in(dir / "problem.json");
        if (!in) throw IoError("cannot read " + (dir / "problem.json").string());
        try {
            manifest = json::parse(in);
        } catch (const json::exception& e) {
            throw IoError("malformed problem.json: " + std::string(e.what()));
        }
    }
    ForwardProblem p;
    p.lead_field = read_required(dir, "G.kmat");
    p.sensor_data = read_required(dir, "B.kmat");
    p.noise_cov_spatial = read_required(dir, "sigma_x.kmat");
    p.source_points = read_required(dir, "sources.kmat");
    const Eigen::MatrixXd times = read_required(dir, "times.kmat");
    if (times.cols() != 1) throw DimensionError("times.kmat must be a single column");
    p.time_points = times.col(0);
    if (fs::exists(dir / "sigma_t.kmat")) p.noise_cov_temporal = read_matrix(dir / "sigma_t.kmat");
    try {
        p.whitened = manifest.value("whitened", false);
        if (manifest.value("n_sensors", p.n_sensors()) != p.n_sensors() ||
            manifest.value("n_sources", p.n_sources()) != p.n_sources() ||
            manifest.value("n_times", p.n_times()) != p.n_times()) {
            throw DimensionError("problem.json dimensions disagree with the stored matrices");
        }
        if (manifest.value("has_sigma_t", false) != p.noise_cov_temporal.has_value()) {
            throw DimensionError("problem.json has_sigma_t disagrees with sigma_t.kmat");
        }
    } catch (const json::exception& e) {
        throw IoError("malformed problem.json: " + std::string(e.what()));
    }
    require_valid(p);
    return p;
}

json sim_config_to_json(const SimConfig& c) {
    json noise = {{"kind", noise_kind_name(c.noise.kind)}, {"condition_number", c.noise.condition_number}};
    if (c.noise.kind == NoiseKind::File) noise["path"] = c.noise.path;
    return {
        {"seed", c.seed},
        {"n_sensors", c.n_sensors},
        {"n_sources", c.n_sources},
        {"n_times", c.n_times},
        {"sample_interval", c.sample_interval},
        {"patch_count", c.patch_count},
        {"patch_area_cm2", c.patch_area_cm2},
        {"cortex_radius_cm", c.cortex_radius_cm},
        {"patch_radius", c.effective_patch_radius()},
        {"amplitude", c.amplitude},
        {"bump_center", c.bump_center},
        {"bump_width", c.bump_width},
        {"sensor_radius", c.sensor_radius},
        {"lead_field_falloff", c.lead_field_falloff},
        {"noise", noise},
        {"snr", c.snr},
    };
}

SimConfig sim_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("simulation config must be a JSON object");
    SimConfig c;
    try {
        read_opt(j, "seed", c.seed);
        read_opt(j, "n_sensors", c.n_sensors);
        read_opt(j, "n_sources", c.n_sources);
        read_opt(j, "n_times", c.n_times);
        read_opt(j, "sample_interval", c.sample_interval);
        read_opt(j, "patch_count", c.patch_count);
        read_opt(j, "patch_area_cm2", c.patch_area_cm2);
        read_opt(j, "cortex_radius_cm", c.cortex_radius_cm);
        read_opt(j, "patch_radius", c.patch_radius);
        read_opt(j, "amplitude", c.amplitude);
        read_opt(j, "bump_center", c.bump_center);
        read_opt(j, "bump_width", c.bump_width);
        read_opt(j, "sensor_radius", c.sensor_radius);
        read_opt(j, "lead_field_falloff", c.lead_field_falloff);
        read_opt(j, "snr", c.snr);
        if (j.contains("noise")) {
            const json& n = j.at("noise");
            if (n.is_string()) {
                c.noise.kind = parse_noise_kind(n.get<std::string>());
            } else {
                if (n.contains("kind")) c.noise.kind = parse_noise_kind(n.at("kind").get<std::string>());
                read_opt(n, "condition_number", c.noise.condition_number);
                read_opt(n, "path", c.noise.path);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError("bad simulation config: " + std::string(e.what()));
    }
    validate(c);
    return c;
}

}  // namespace kroneig
