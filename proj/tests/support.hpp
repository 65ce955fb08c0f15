#pragma once

// Independent reference implementations used as test oracles. None of them
// share code with the library.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

namespace oracle_ref {

using Mat = std::vector<std::vector<double>>;

inline Mat random_mat(std::size_t rows, std::size_t cols, std::mt19937_64& gen, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Mat m(rows, std::vector<double>(cols));
    for (auto& r : m)
        for (auto& v : r) v = nd(gen);
    return m;
}

/// entries[i][j] = <h_i, n_j>, optionally with every nonzero row scaled to unit norm.
inline Mat correlation(const Mat& h, const Mat& n, bool unit_rows) {
    auto unit = [&](std::vector<double> r) {
        double s = 0.0;
        for (double v : r) s += v * v;
        s = std::sqrt(s);
        if (unit_rows && s > 0.0)
            for (double& v : r) v /= s;
        return r;
    };
    Mat out(h.size(), std::vector<double>(n.size(), 0.0));
    for (std::size_t i = 0; i < h.size(); ++i) {
        const auto hi = unit(h[i]);
        for (std::size_t j = 0; j < n.size(); ++j) {
            const auto nj = unit(n[j]);
            double acc = 0.0;
            for (std::size_t k = 0; k < hi.size(); ++k) acc += hi[k] * nj[k];
            out[i][j] = acc;
        }
    }
    return out;
}

/// One-sided (Hestenes) Jacobi SVD. Returns min(rows, cols) singular values, descending.
inline std::vector<double> jacobi_singular_values(Mat a) {
    if (a.empty()) return {};
    std::size_t rows = a.size(), cols = a[0].size();
    if (rows < cols) {
        Mat t(cols, std::vector<double>(rows));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t[j][i] = a[i][j];
        a = std::move(t);
        std::swap(rows, cols);
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                double alpha = 0, beta = 0, gamma = 0;
                for (std::size_t i = 0; i < rows; ++i) {
                    alpha += a[i][p] * a[i][p];
                    beta += a[i][q] * a[i][q];
                    gamma += a[i][p] * a[i][q];
                }
                if (gamma == 0.0) continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double x = a[i][p], y = a[i][q];
                    a[i][p] = c * x - s * y;
                    a[i][q] = s * x + c * y;
                }
            }
        }
        if (off < 1e-15) break;
    }
    std::vector<double> sv(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < rows; ++i) s += a[i][j] * a[i][j];
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

/// Rank by direct counting against the cutoff rule.
inline std::size_t count_rank(const std::vector<double>& sv, double delta, bool spectral) {
    if (sv.empty() || sv[0] == 0.0) return 0;
    std::size_t r = 0;
    for (double s : sv) {
        if (s <= 1e-10 * sv[0]) continue;
        if ((spectral ? s / sv[0] : s) > delta) ++r;
    }
    return r;
}

/// 1-based positions by counting: strictly smaller scores, plus equal scores earlier in input.
inline std::vector<std::size_t> positions(const std::vector<double>& s) {
    std::vector<std::size_t> pos(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t p = 1;
        for (std::size_t j = 0; j < s.size(); ++j) p += (s[j] < s[i]) || (s[j] == s[i] && j < i);
        pos[i] = p;
    }
    return pos;
}

/// Exhaustive tally: for every distinct answer, sum the weights of every candidate carrying it.
/// Winner: maximal tally, then smallest best position, then smallest string.
inline std::string brute_force_winner(const std::vector<std::string>& answers, const std::vector<double>& weights,
                                      const std::vector<std::size_t>& pos) {
    std::set<std::string> distinct(answers.begin(), answers.end());
    std::string best;
    double best_tally = -1.0;
    std::size_t best_pos = 0;
    for (const auto& a : distinct) {
        double tally = 0.0;
        std::size_t min_pos = answers.size() + 1;
        for (std::size_t i = 0; i < answers.size(); ++i) {
            if (answers[i] != a) continue;
            tally += weights[i];
            min_pos = std::min(min_pos, pos[i]);
        }
        const bool better = tally > best_tally || (tally == best_tally && min_pos < best_pos) ||
                            (tally == best_tally && min_pos == best_pos && a < best);
        if (better) {
            best = a;
            best_tally = tally;
            best_pos = min_pos;
        }
    }
    return best;
}

} // namespace oracle_ref

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("sind-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace testing_support
