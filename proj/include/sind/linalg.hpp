#pragma once

// Dense correlation matrices between token representations, their singular
// value spectra, and thresholded numerical ranks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sind/error.hpp"

namespace sind {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Singular values at or below this fraction of the largest one are treated
/// as exact zeros before any thresholding.
inline constexpr double kZeroCutoff = 1e-10;

enum class NormMode { raw, unit_rows, spectral };

inline std::string_view to_string(NormMode mode) {
    switch (mode) {
    case NormMode::raw: return "raw";
    case NormMode::unit_rows: return "unit-rows";
    case NormMode::spectral: return "spectral";
    }
    return "raw";
}

inline NormMode parse_norm_mode(std::string_view s) {
    if (s == "raw") return NormMode::raw;
    if (s == "unit-rows") return NormMode::unit_rows;
    if (s == "spectral") return NormMode::spectral;
    throw invalid_input("unknown normalization mode '" + std::string(s) + "' (expected raw, unit-rows or spectral)");
}

/// Token representations, one row per token. Always non-empty and finite.
class RepMatrix {
public:
    RepMatrix() = default;

    explicit RepMatrix(RowMatrix data) : data_(std::move(data)) { validate(); }

    RepMatrix(std::size_t rows, std::size_t dim, std::span<const double> values) {
        if (values.size() != rows * dim)
            throw invalid_input("representation data has " + std::to_string(values.size()) +
                                " values, expected " + std::to_string(rows) + " x " + std::to_string(dim));
        data_.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
        std::copy(values.begin(), values.end(), data_.data());
        validate();
    }

    std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.cols()); }
    const RowMatrix& matrix() const noexcept { return data_; }
    std::span<const double> values() const noexcept { return {data_.data(), static_cast<std::size_t>(data_.size())}; }

    /// First `count` rows.
    RepMatrix head(std::size_t count) const {
        if (count == 0 || count > rows())
            throw invalid_input("cannot take " + std::to_string(count) + " of " + std::to_string(rows()) + " rows");
        return RepMatrix(RowMatrix(data_.topRows(static_cast<Eigen::Index>(count))));
    }

    bool operator==(const RepMatrix& other) const {
        return data_.rows() == other.data_.rows() && data_.cols() == other.data_.cols() && data_ == other.data_;
    }

private:
    void validate() const {
        if (data_.rows() < 1 || data_.cols() < 1)
            throw invalid_input("representation matrix must have at least one row and one column, got " +
                                std::to_string(data_.rows()) + " x " + std::to_string(data_.cols()));
        for (Eigen::Index i = 0; i < data_.rows(); ++i)
            if (!data_.row(i).allFinite())
                throw invalid_input("non-finite entry in representation row " + std::to_string(i));
    }

    RowMatrix data_;
};

/// R with R(i, j) = <solution_i, problem_j>; rows are solution tokens.
struct CorrelationMatrix {
    Eigen::MatrixXd entries;
    NormMode mode = NormMode::raw;

    std::size_t m() const noexcept { return static_cast<std::size_t>(entries.rows()); }
    std::size_t n() const noexcept { return static_cast<std::size_t>(entries.cols()); }
};

struct RankEstimate {
    std::size_t raw_rank = 0;
    double normalized_rank = 0.0;
    double delta = 0.0;
    NormMode mode = NormMode::raw;
};

namespace detail {

inline RowMatrix unit_rows(const RowMatrix& x) {
    RowMatrix out = x;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm > 0.0) out.row(i) /= norm;
    }
    return out;
}

} // namespace detail

inline CorrelationMatrix correlation_matrix(const RepMatrix& solution, const RepMatrix& problem,
                                            NormMode mode = NormMode::raw) {
    if (solution.dim() != problem.dim())
        throw invalid_input("dimension mismatch: solution representations have d=" + std::to_string(solution.dim()) +
                            ", problem representations have d=" + std::to_string(problem.dim()));
    CorrelationMatrix r;
    r.mode = mode;
    if (mode == NormMode::unit_rows)
        r.entries = detail::unit_rows(solution.matrix()) * detail::unit_rows(problem.matrix()).transpose();
    else
        r.entries = solution.matrix() * problem.matrix().transpose();
    return r;
}

/// Singular values of an arbitrary dense matrix, non-increasing.
inline std::vector<double> singular_values(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return {};
    if (!a.allFinite()) throw invalid_input("matrix has non-finite entries");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    if (svd.info() != Eigen::Success)
        throw numerical_failure("SVD did not converge on a " + std::to_string(a.rows()) + " x " +
                                std::to_string(a.cols()) + " matrix");
    const Eigen::VectorXd& s = svd.singularValues();
    std::vector<double> out(s.data(), s.data() + s.size());
    for (double v : out)
        if (!std::isfinite(v)) throw numerical_failure("SVD produced a non-finite singular value");
    // Eigen already sorts; enforce it anyway against ties in the last ulp.
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

inline std::vector<double> singular_values(const CorrelationMatrix& r) { return singular_values(r.entries); }

/// Count of singular values above `delta` (raw, unit-rows) or whose ratio to
/// `sigma_max_ref` is above `delta` (spectral). Values under the zero cutoff
/// never count.
inline std::size_t thresholded_rank(std::span<const double> spectrum, double delta, NormMode mode,
                                    double sigma_max_ref) {
    if (!(delta >= 0.0)) throw invalid_input("delta must be non-negative, got " + std::to_string(delta));
    if (spectrum.empty() || !(sigma_max_ref > 0.0)) return 0;
    const double floor = kZeroCutoff * sigma_max_ref;
    std::size_t count = 0;
    for (double s : spectrum) {
        if (s <= floor) continue;
        const double v = mode == NormMode::spectral ? s / sigma_max_ref : s;
        if (v > delta) ++count;
    }
    return count;
}

inline std::size_t thresholded_rank(std::span<const double> spectrum, double delta, NormMode mode) {
    const double smax = spectrum.empty() ? 0.0 : *std::max_element(spectrum.begin(), spectrum.end());
    return thresholded_rank(spectrum, delta, mode, smax);
}

inline RankEstimate normalized_rank(const CorrelationMatrix& r, double delta) {
    if (r.m() == 0) throw invalid_input("correlation matrix has no solution rows");
    const auto spectrum = singular_values(r);
    RankEstimate est;
    est.raw_rank = thresholded_rank(spectrum, delta, r.mode);
    est.normalized_rank = static_cast<double>(est.raw_rank) / static_cast<double>(r.m());
    est.delta = delta;
    est.mode = r.mode;
    return est;
}

/// Rank under the shared zero cutoff, with the gap between the smallest kept
/// and the largest dropped singular value (ratio, or +inf when nothing dropped).
struct NumericalRank {
    std::size_t rank = 0;
    double gap = 0.0;
};

inline NumericalRank numerical_rank(const Eigen::MatrixXd& a) {
    const auto s = singular_values(a);
    NumericalRank out;
    if (s.empty() || !(s.front() > 0.0)) return out;
    const double floor = kZeroCutoff * s.front();
    while (out.rank < s.size() && s[out.rank] > floor) ++out.rank;
    if (out.rank == s.size())
        out.gap = std::numeric_limits<double>::infinity();
    else if (s[out.rank] == 0.0)
        out.gap = std::numeric_limits<double>::infinity();
    else
        out.gap = s[out.rank - 1] / s[out.rank];
    return out;
}

} // namespace sind
