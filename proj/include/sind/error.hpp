#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sind {

/// Base for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad shapes, empty inputs, non-finite values, out-of-range parameters.
class invalid_input : public error {
public:
    using error::error;
};

/// SVD failed to converge or produced non-finite values.
class numerical_failure : public error {
public:
    using error::error;
};

/// Malformed bundle file. Carries the failure kind and the byte offset
/// at which reading stopped.
class bundle_format_error : public error {
public:
    enum class kind { bad_magic, version_mismatch, truncated_payload, non_finite, bad_header, io };

    bundle_format_error(kind k, std::size_t offset, const std::string& what)
        : error(what + " (at byte offset " + std::to_string(offset) + ")"), kind_(k), offset_(offset), detail_(what) {}

    kind failure() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }
    /// Message without the offset suffix.
    const std::string& detail() const noexcept { return detail_; }

private:
    kind kind_;
    std::size_t offset_;
    std::string detail_;
};

/// Manifest schema violations (missing field, duplicate id, dangling path).
class manifest_error : public error {
public:
    using error::error;
};

/// Answer text with nothing extractable.
class no_answer_error : public error {
public:
    using error::error;
};

/// A filtered evaluation subset with no pairs left in it.
class empty_subset_error : public error {
public:
    using error::error;
};

/// Oracle trial loop gave up after too many degenerate draws.
class resample_limit_error : public error {
public:
    using error::error;
};

} // namespace sind
