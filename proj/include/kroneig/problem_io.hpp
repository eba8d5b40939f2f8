#pragma once

#include <filesystem>

#include <json.hpp>

#include "kroneig/model.hpp"
#include "kroneig/simulate.hpp"

namespace kroneig {

/// Refuses to replace an existing file unless `force`; throws IoError.
void check_overwrite(const std::filesystem::path& path, bool force);

/// Writes G.kmat, B.kmat, sigma_x.kmat, optional sigma_t.kmat, sources.kmat,
/// times.kmat and problem.json into `dir`, creating it if needed. A problem
/// carrying a temporal whitening operator cannot be stored.
void write_problem(const std::filesystem::path& dir, const ForwardProblem& problem, bool force);

/// Reads and validates a problem directory. Throws IoError on missing files,
/// DimensionError when the manifest disagrees with the matrices.
ForwardProblem read_problem(const std::filesystem::path& dir);

nlohmann::json sim_config_to_json(const SimConfig& config);
/// Missing keys keep their defaults; throws ConfigError on bad values or types.
SimConfig sim_config_from_json(const nlohmann::json& j);

}  // namespace kroneig
