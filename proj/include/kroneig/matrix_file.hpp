#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>

namespace kroneig {

/// Magic prefix of the dense matrix container.
inline constexpr char kMatrixMagic[8] = {'K', 'R', 'O', 'N', 'M', 'A', 'T', '1'};

/// Serializes a dense matrix: 8 magic bytes, u32 rows, u32 cols, then
/// rows*cols little-endian f64 values in column-major order.
std::string encode_matrix(const Eigen::MatrixXd& m);

/// Inverse of encode_matrix. Throws IoError on a bad magic, truncated or
/// oversized payload.
Eigen::MatrixXd decode_matrix(const std::string& bytes);

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

}  // namespace kroneig
