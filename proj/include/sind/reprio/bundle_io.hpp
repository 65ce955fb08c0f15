#pragma once

// Binary representation-bundle files. All integers and floats little-endian.
//
//   offset  size  field
//   0       4     magic "SIND"
//   4       4     format version (u32, currently 1)
//   8       1     template order (u8: 0 = QA, 1 = AQ)
//   9       4     layer (u32)
//   13      4     N, problem token rows (u32)
//   17      4     M, solution token rows (u32)
//   21      4     d, representation dimension (u32)
//   25      4     model tag length L (u32)
//   29      L     model tag, UTF-8
//   29+L    4Nd   problem rows, f32, row-major
//   ...     4Md   solution rows, f32, row-major

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "sind/bundle.hpp"
#include "sind/error.hpp"

namespace sind::reprio {

inline constexpr std::array<char, 4> kBundleMagic = {'S', 'I', 'N', 'D'};
inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr std::size_t kBundleHeaderFixed = 29;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_rows(std::vector<std::uint8_t>& out, const RepMatrix& rows, const char* what) {
    for (double v : rows.values()) {
        const auto f = static_cast<float>(v);
        if (!std::isfinite(f))
            throw invalid_input(std::string("bundle ") + what + " value " + std::to_string(v) +
                                " is not representable as a finite 32-bit float");
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
}

inline std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > std::numeric_limits<std::uint32_t>::max())
        throw invalid_input(std::string("bundle ") + what + " does not fit in 32 bits");
    return static_cast<std::uint32_t>(v);
}

} // namespace detail

/// Serialized bytes of a bundle.
inline std::vector<std::uint8_t> encode_bundle(const RepresentationBundle& b) {
    b.validate();
    std::vector<std::uint8_t> out;
    out.reserve(kBundleHeaderFixed + b.model.size() + 4 * (b.n() + b.m()) * b.dim());
    out.insert(out.end(), kBundleMagic.begin(), kBundleMagic.end());
    detail::put_u32(out, kBundleVersion);
    out.push_back(static_cast<std::uint8_t>(b.order));
    detail::put_u32(out, b.layer);
    detail::put_u32(out, detail::checked_u32(b.n(), "N"));
    detail::put_u32(out, detail::checked_u32(b.m(), "M"));
    detail::put_u32(out, detail::checked_u32(b.dim(), "d"));
    detail::put_u32(out, detail::checked_u32(b.model.size(), "model tag length"));
    out.insert(out.end(), b.model.begin(), b.model.end());
    detail::put_rows(out, b.problem, "problem");
    detail::put_rows(out, b.solution, "solution");
    return out;
}

inline RepresentationBundle decode_bundle(const std::vector<std::uint8_t>& bytes, std::string candidate_id = {}) {
    using kind = bundle_format_error::kind;
    const std::size_t size = bytes.size();
    if (size < 4 || std::memcmp(bytes.data(), kBundleMagic.data(), 4) != 0)
        throw bundle_format_error(kind::bad_magic, 0, "not a bundle file: bad magic, expected \"SIND\"");
    if (size < 8) throw bundle_format_error(kind::truncated_payload, size, "bundle header truncated before version");
    const auto version = detail::get_u32(bytes.data() + 4);
    if (version != kBundleVersion)
        throw bundle_format_error(kind::version_mismatch, 4,
                                  "bundle format version " + std::to_string(version) + " not supported (expected " +
                                      std::to_string(kBundleVersion) + ")");
    if (size < kBundleHeaderFixed)
        throw bundle_format_error(kind::truncated_payload, size,
                                  "bundle header truncated: expected at least " + std::to_string(kBundleHeaderFixed) +
                                      " bytes, got " + std::to_string(size));
    const std::uint8_t order = bytes[8];
    if (order > 1) throw bundle_format_error(kind::bad_header, 8, "unknown template order code " + std::to_string(order));
    const auto layer = detail::get_u32(bytes.data() + 9);
    const auto n = detail::get_u32(bytes.data() + 13);
    const auto m = detail::get_u32(bytes.data() + 17);
    const auto d = detail::get_u32(bytes.data() + 21);
    const auto tag_len = detail::get_u32(bytes.data() + 25);
    if (n == 0) throw bundle_format_error(kind::bad_header, 13, "bundle has N = 0 problem rows");
    if (m == 0) throw bundle_format_error(kind::bad_header, 17, "bundle has M = 0 solution rows");
    if (d == 0) throw bundle_format_error(kind::bad_header, 21, "bundle has d = 0");

    const std::uint64_t payload_start = kBundleHeaderFixed + static_cast<std::uint64_t>(tag_len);
    const std::uint64_t expected = payload_start + 4ULL * (static_cast<std::uint64_t>(n) + m) * d;
    if (size < payload_start)
        throw bundle_format_error(kind::truncated_payload, size,
                                  "bundle model tag truncated: expected " + std::to_string(payload_start) +
                                      " header bytes, got " + std::to_string(size));
    if (size < expected)
        throw bundle_format_error(kind::truncated_payload, size,
                                  "bundle payload truncated: expected " + std::to_string(expected) + " bytes, got " +
                                      std::to_string(size));
    if (size > expected)
        throw bundle_format_error(kind::bad_header, expected,
                                  "bundle has " + std::to_string(size - expected) + " trailing bytes after payload of " +
                                      std::to_string(expected) + " bytes");

    RepresentationBundle b;
    b.candidate_id = std::move(candidate_id);
    b.order = static_cast<TemplateOrder>(order);
    b.layer = layer;
    b.model.assign(reinterpret_cast<const char*>(bytes.data()) + kBundleHeaderFixed, tag_len);

    std::size_t offset = static_cast<std::size_t>(payload_start);
    auto read_rows = [&](std::uint32_t rows) {
        RowMatrix mat(rows, d);
        for (Eigen::Index i = 0; i < mat.size(); ++i, offset += 4) {
            const float f = std::bit_cast<float>(detail::get_u32(bytes.data() + offset));
            if (!std::isfinite(f))
                throw bundle_format_error(kind::non_finite, offset, "non-finite float in bundle payload");
            mat.data()[i] = static_cast<double>(f);
        }
        return RepMatrix(std::move(mat));
    };
    b.problem = read_rows(n);
    b.solution = read_rows(m);
    return b;
}

inline void write_bundle(const RepresentationBundle& b, const std::filesystem::path& path) {
    const auto bytes = encode_bundle(b);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open bundle for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw error("failed writing bundle: " + path.string());
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw bundle_format_error(bundle_format_error::kind::io, 0, "cannot open bundle: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline RepresentationBundle read_bundle(const std::filesystem::path& path, std::string candidate_id = {}) {
    try {
        return decode_bundle(read_file_bytes(path), std::move(candidate_id));
    } catch (const bundle_format_error& e) {
        throw bundle_format_error(e.failure(), e.offset(), path.string() + ": " + e.detail());
    }
}

} // namespace sind::reprio
