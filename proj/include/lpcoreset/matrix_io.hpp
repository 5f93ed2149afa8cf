#ifndef LPCORESET_MATRIX_IO_HPP
#define LPCORESET_MATRIX_IO_HPP

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lpcoreset/errors.hpp"
#include "lpcoreset/tensor_core.hpp"

namespace lpcoreset {

/// Binary layout: "LPCM1", rows and cols as u64 little-endian, then
/// row-major f64 little-endian.
inline constexpr char kBinaryMagic[] = "LPCM1";
inline constexpr std::size_t kBinaryMagicLen = 5;
inline constexpr std::size_t kBinaryHeaderLen = kBinaryMagicLen + 16;

enum class MatrixFormat { Csv, Binary };

inline MatrixFormat parse_matrix_format(const std::string& s) {
    if (s == "csv") return MatrixFormat::Csv;
    if (s == "bin") return MatrixFormat::Binary;
    throw UsageError("unknown matrix format '" + s + "' (expected csv or bin)");
}

namespace detail {

inline std::uint64_t load_u64_le(const unsigned char* b) {
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
    return v;
}

inline void store_u64_le(std::uint64_t v, std::string& out) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffU));
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline DenseMatrix parse_binary(const std::string& bytes, const std::string& where) {
    if (bytes.size() < kBinaryHeaderLen)
        throw ParseError(where + ": offset " + std::to_string(bytes.size()) + ": truncated binary header");
    const auto* u = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint64_t rows = load_u64_le(u + kBinaryMagicLen);
    const std::uint64_t cols = load_u64_le(u + kBinaryMagicLen + 8);
    if (cols != 0 && rows > (bytes.size() / 8) / cols + 1)
        throw ParseError(where + ": offset " + std::to_string(kBinaryMagicLen) + ": implausible shape " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    const std::uint64_t count = rows * cols;
    const std::size_t expected = kBinaryHeaderLen + static_cast<std::size_t>(count) * 8;
    if (bytes.size() != expected)
        throw ParseError(where + ": offset " + std::to_string(std::min(bytes.size(), expected)) + ": expected " +
                         std::to_string(expected) + " bytes for a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " matrix, file has " + std::to_string(bytes.size()));
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    double* out = m.data();
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::size_t off = kBinaryHeaderLen + static_cast<std::size_t>(k) * 8;
        const std::uint64_t bits = load_u64_le(u + off);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v))
            throw ParseError(where + ": offset " + std::to_string(off) + ": non-finite value");
        out[k] = v;
    }
    return DenseMatrix(std::move(m));
}

inline DenseMatrix parse_csv(const std::string& text, const std::string& where) {
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    std::istringstream is(text);
    std::string line;
    bool blank_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) {
            blank_seen = true;
            continue;
        }
        if (blank_seen) throw ParseError(where + ": line " + std::to_string(line_no) + ": data after blank line");
        std::size_t fields = 0, pos = 0;
        for (;;) {
            const auto comma = t.find(',', pos);
            const std::string field = trim(t.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            ++fields;
            if (field.empty())
                throw ParseError(where + ": line " + std::to_string(line_no) + ": empty field " +
                                 std::to_string(fields));
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(field.c_str(), &end);
            if (end != field.c_str() + field.size() || errno == ERANGE || !std::isfinite(v))
                throw ParseError(where + ": line " + std::to_string(line_no) + ": field " + std::to_string(fields) +
                                 " is not a finite real: '" + field + "'");
            values.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (rows == 0)
            cols = fields;
        else if (fields != cols)
            throw ParseError(where + ": line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                             " fields, got " + std::to_string(fields));
        ++rows;
    }
    if (rows == 0) return DenseMatrix();
    return DenseMatrix(rows, cols, values);
}

} // namespace detail

/// Parses a matrix from raw bytes: binary if the magic is present, CSV
/// otherwise. Empty input gives 0x0 and sets *warning.
inline DenseMatrix parse_matrix(const std::string& bytes, const std::string& where = "<input>",
                                std::string* warning = nullptr) {
    if (bytes.empty()) {
        if (warning) *warning = where + ": empty file, read as a 0x0 matrix";
        return DenseMatrix();
    }
    if (bytes.compare(0, kBinaryMagicLen, kBinaryMagic, kBinaryMagicLen) == 0) return detail::parse_binary(bytes, where);
    return detail::parse_csv(bytes, where);
}

inline DenseMatrix load_matrix(const std::string& path, std::string* warning = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open matrix file '" + path + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_matrix(bytes, path, warning);
}

inline std::string format_csv(const DenseMatrix& m) {
    std::string out;
    char buf[40];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out.push_back(',');
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out += buf;
        }
        out.push_back('\n');
    }
    return out;
}

inline std::string format_binary(const DenseMatrix& m) {
    std::string out(kBinaryMagic, kBinaryMagicLen);
    detail::store_u64_le(m.rows(), out);
    detail::store_u64_le(m.cols(), out);
    out.reserve(kBinaryHeaderLen + 8 * m.rows() * m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            detail::store_u64_le(bits, out);
        }
    return out;
}

inline void write_matrix(std::ostream& os, const DenseMatrix& m, MatrixFormat fmt) {
    const std::string s = fmt == MatrixFormat::Csv ? format_csv(m) : format_binary(m);
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void save_matrix(const std::string& path, const DenseMatrix& m, MatrixFormat fmt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write matrix file '" + path + "'");
    write_matrix(out, m, fmt);
    if (!out) throw UsageError("write failed for '" + path + "'");
}

} // namespace lpcoreset

#endif
