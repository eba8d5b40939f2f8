#include "kroneig/matrix_file.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "kroneig/error.hpp"

namespace kroneig {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint64_t get_le(const std::string& in, std::size_t offset, int width) {
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    }
    return v;
}

constexpr std::size_t kHeaderSize = 16;

}  // namespace

std::string encode_matrix(const Eigen::MatrixXd& m) {
    constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
    if (static_cast<std::uint64_t>(m.rows()) > kMax || static_cast<std::uint64_t>(m.cols()) > kMax) {
        throw DimensionError("matrix too large for KRONMAT1 container");
    }
    std::string out;
    out.reserve(kHeaderSize + 8 * static_cast<std::size_t>(m.size()));
    out.append(kMatrixMagic, sizeof(kMatrixMagic));
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    // Eigen's default storage is column-major, matching the file order.
    for (Eigen::Index i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
    return out;
}

Eigen::MatrixXd decode_matrix(const std::string& bytes) {
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMatrixMagic, sizeof(kMatrixMagic)) != 0) {
        throw IoError("not a KRONMAT1 matrix file");
    }
    const auto rows = get_le(bytes, 8, 4);
    const auto cols = get_le(bytes, 12, 4);
    const std::uint64_t payload = rows * cols * 8;
    if (bytes.size() - kHeaderSize != payload) {
        throw IoError("KRONMAT1 payload size " + std::to_string(bytes.size() - kHeaderSize) + " does not match header " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = std::bit_cast<double>(get_le(bytes, kHeaderSize + 8 * static_cast<std::size_t>(i), 8));
    }
    return m;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    const std::string bytes = encode_matrix(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_matrix(bytes);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace kroneig
