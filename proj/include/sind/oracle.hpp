#pragma once

// Synthetic single-layer linear-attention model. Generates problem tokens,
// a low-rank key-query product W, "correct" solution representations that
// follow the attention recursion exactly (up to per-token scalars), and
// "incorrect" ones that share a correct prefix and then drift into noise.
// run_trials() checks the rank predictions numerically:
//
//   rank(R_correct)   == v                      with v = rank(W_*)
//   rank(R_incorrect) == v + min(N, noise_len)
//   dim span{n_N^T W_*^k, k = 1..M} == v        when M >= v
//
// where W_* = sum_r (W n_r) n_r^T.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "sind/error.hpp"
#include "sind/linalg.hpp"
#include "sind/rng.hpp"

namespace sind::oracle {

/// Relative size below which an attention denominator counts as cancelled.
inline constexpr double kDegenerateDenominator = 1e-12;

struct OracleConfig {
    std::size_t n = 16;         // problem tokens N
    std::size_t d = 64;         // representation dimension
    std::size_t r = 6;          // rank of W
    std::size_t m = 30;         // correct solution length M
    std::size_t eta = 10;       // shared correct prefix of the incorrect solution
    std::size_t noise_len = 8;  // noise tokens after the prefix (M' - eta)
    double scalar_lo = 0.5;     // c_i ~ U[scalar_lo, scalar_hi]
    double scalar_hi = 2.0;
    std::size_t trials = 200;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const {
        if (n < 1 || d < 1 || m < 1) throw invalid_input("oracle: n, d and m must all be at least 1");
        if (r < 1) throw invalid_input("oracle: r must be at least 1");
        if (r >= std::min({m, n, d}))
            throw invalid_input("oracle: low-rank assumption violated, need r < min(m, n, d) but r=" +
                                std::to_string(r) + ", min(m, n, d)=" + std::to_string(std::min({m, n, d})));
        if (eta < 1 || eta > m)
            throw invalid_input("oracle: eta must lie in [1, m], got eta=" + std::to_string(eta) +
                                " with m=" + std::to_string(m));
        if (!(scalar_lo <= scalar_hi) || !std::isfinite(scalar_lo) || !std::isfinite(scalar_hi))
            throw invalid_input("oracle: scalar range must be a finite interval");
        if (trials < 1) throw invalid_input("oracle: trials must be at least 1");
        if (threads < 1) throw invalid_input("oracle: threads must be at least 1");
    }
};

struct TrialRecord {
    std::size_t trial = 0;
    std::size_t attempts = 1;  // 1 + number of degenerate draws resampled
    std::size_t rank_w_star = 0;  // v
    std::size_t rank_r_correct = 0;
    std::size_t rank_r_incorrect = 0;
    std::size_t predicted_incorrect = 0;
    std::size_t krylov_dim = 0;
    double gap_correct = 0.0;  // sigma_kept_min / sigma_dropped_max
    double gap_incorrect = 0.0;
    double gap_krylov = 0.0;
};

struct OracleReport {
    OracleConfig config;
    std::vector<TrialRecord> trials;
    std::size_t resamples = 0;
    double frac_correct_match = 0.0;
    double frac_incorrect_match = 0.0;
    double frac_incorrect_above = 0.0;  // rank_R_incorrect > rank_R_correct
    double frac_krylov_match = 0.0;
    double mean_rank_gap = 0.0;  // mean(rank_R_incorrect - rank_R_correct)
};

/// Predicted rank of the incorrect correlation matrix. The structural bound
/// min(N, M', d) caps the additive prediction once the noise saturates it.
inline std::size_t predicted_incorrect_rank(std::size_t v, const OracleConfig& c) {
    const std::size_t additive = v + std::min(c.n, c.noise_len);
    const std::size_t rows = std::min(c.eta, c.m) + c.noise_len;
    return std::min({additive, c.n, c.d, rows});
}

inline RowMatrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
    RowMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = rng.normal();
    return out;
}

/// n i.i.d. standard Gaussian rows in R^d. When n > d the rows can no longer
/// be linearly independent; a warning is appended to `warnings` if given.
inline RepMatrix sample_problem_tokens(std::size_t n, std::size_t d, Rng& rng,
                                       std::vector<std::string>* warnings = nullptr) {
    if (n > d && warnings)
        warnings->push_back("sample_problem_tokens: n=" + std::to_string(n) + " > d=" + std::to_string(d) +
                            ", problem tokens cannot be linearly independent");
    return RepMatrix(gaussian(n, d, rng));
}

inline RepMatrix sample_problem_tokens(std::size_t n, std::size_t d, std::uint64_t seed,
                                       std::vector<std::string>* warnings = nullptr) {
    Rng rng(seed);
    return sample_problem_tokens(n, d, rng, warnings);
}

/// W = A B^T with A, B Gaussian d x r.
inline Eigen::MatrixXd make_low_rank_w(std::size_t d, std::size_t r, Rng& rng) {
    if (r < 1 || r > d)
        throw invalid_input("make_low_rank_w: need 1 <= r <= d, got r=" + std::to_string(r) +
                            ", d=" + std::to_string(d));
    const Eigen::MatrixXd a = gaussian(d, r, rng);
    const Eigen::MatrixXd b = gaussian(d, r, rng);
    return a * b.transpose();
}

inline Eigen::MatrixXd make_low_rank_w(std::size_t d, std::size_t r, std::uint64_t seed) {
    Rng rng(seed);
    return make_low_rank_w(d, r, rng);
}

/// W_* = sum_r (W n_r) n_r^T.
inline Eigen::MatrixXd w_star(const Eigen::MatrixXd& w, const RepMatrix& problem) {
    if (w.rows() != w.cols() || static_cast<std::size_t>(w.cols()) != problem.dim())
        throw invalid_input("w_star: W is " + std::to_string(w.rows()) + " x " + std::to_string(w.cols()) +
                            " but problem tokens have d=" + std::to_string(problem.dim()));
    const auto& p = problem.matrix();
    return w * p.transpose() * p;
}

/// Linear attention: sum_j (q^T W k_j / sum_j' q^T W k_j') k_j over the rows
/// of `context`. Returns nullopt when the denominator cancels.
inline std::optional<Eigen::VectorXd> attention_step(const Eigen::Ref<const Eigen::VectorXd>& query,
                                                     const Eigen::Ref<const RowMatrix>& context,
                                                     const Eigen::MatrixXd& w) {
    if (context.rows() < 1) throw invalid_input("attention_step: empty context");
    if (query.size() != context.cols() || w.rows() != query.size() || w.cols() != context.cols())
        throw invalid_input("attention_step: dimension mismatch");
    const Eigen::VectorXd wq = w.transpose() * query;
    const Eigen::VectorXd scores = context * wq;  // scores(j) = q^T W k_j
    const double denom = scores.sum();
    const double scale = scores.cwiseAbs().sum();
    if (!(std::abs(denom) >= kDegenerateDenominator * scale) || scale == 0.0) return std::nullopt;
    return context.transpose() * (scores / denom);
}

/// Correct-solution recursion: h_1 = c_1 attn(n_N | n_1..n_N),
/// h_{i+1} = c_{i+1} attn(h_i | n_1..n_N, h_1..h_i). nullopt on a cancelled
/// attention denominator.
inline std::optional<RepMatrix> generate_correct_solution(const RepMatrix& problem, const Eigen::MatrixXd& w,
                                                          std::size_t m, double scalar_lo, double scalar_hi,
                                                          Rng& rng) {
    if (m < 1) throw invalid_input("generate_correct_solution: m must be at least 1");
    const auto n = static_cast<Eigen::Index>(problem.rows());
    const auto d = static_cast<Eigen::Index>(problem.dim());
    RowMatrix context(n + static_cast<Eigen::Index>(m), d);
    context.topRows(n) = problem.matrix();

    Eigen::VectorXd query = problem.matrix().row(n - 1).transpose();
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
        auto out = attention_step(query, context.topRows(n + i), w);
        if (!out) return std::nullopt;
        const double c = rng.uniform(scalar_lo, scalar_hi);
        context.row(n + i) = c * out->transpose();
        query = context.row(n + i).transpose();
    }
    if (!context.allFinite()) return std::nullopt;
    return RepMatrix(RowMatrix(context.bottomRows(static_cast<Eigen::Index>(m))));
}

/// First `eta` rows of `correct`, then `noise_len` standard Gaussian rows.
/// noise_len == 0 yields the bare prefix and appends a warning.
inline RepMatrix generate_incorrect_solution(const RepMatrix& correct, std::size_t eta, std::size_t noise_len,
                                             Rng& rng, std::vector<std::string>* warnings = nullptr) {
    if (eta < 1 || eta > correct.rows())
        throw invalid_input("generate_incorrect_solution: eta=" + std::to_string(eta) + " outside [1, " +
                            std::to_string(correct.rows()) + "]");
    if (noise_len == 0) {
        if (warnings) warnings->push_back("generate_incorrect_solution: noise_len=0, incorrect equals correct prefix");
        return correct.head(eta);
    }
    const auto d = static_cast<Eigen::Index>(correct.dim());
    RowMatrix out(static_cast<Eigen::Index>(eta + noise_len), d);
    out.topRows(static_cast<Eigen::Index>(eta)) = correct.matrix().topRows(static_cast<Eigen::Index>(eta));
    out.bottomRows(static_cast<Eigen::Index>(noise_len)) = gaussian(noise_len, correct.dim(), rng);
    return RepMatrix(std::move(out));
}

struct KrylovCheck {
    std::size_t dim_a = 0;  // numerical rank of the stacked rows n_N^T W_*^k
    std::size_t v = 0;      // rank(W_*)
    double gap = 0.0;
};

/// Rank of the stack n_N^T W_*, n_N^T W_*^2, ..., n_N^T W_*^m. Each row is
/// rescaled to unit length before the next multiplication; row scaling
/// leaves the rank unchanged and keeps high powers representable.
inline KrylovCheck krylov_rank_check(const RepMatrix& problem, const Eigen::MatrixXd& w, std::size_t m) {
    const Eigen::MatrixXd ws = w_star(w, problem);
    const auto d = ws.cols();
    Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), d);
    Eigen::RowVectorXd row = problem.matrix().row(problem.matrix().rows() - 1);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(m); ++k) {
        row = row * ws;
        const double norm = row.norm();
        if (!(norm > 0.0)) break;
        row /= norm;
        stacked.row(k) = row;
    }
    KrylovCheck out;
    const auto kr = numerical_rank(stacked);
    out.dim_a = kr.rank;
    out.gap = kr.gap;
    out.v = numerical_rank(ws).rank;
    return out;
}

/// One synthetic instance: problem tokens, W, correct and incorrect solutions.
struct Instance {
    RepMatrix problem;
    Eigen::MatrixXd w;
    RepMatrix correct;
    RepMatrix incorrect;
    std::size_t attempts = 1;
};

/// Draws an instance from the stream keyed by (seed, index, attempt),
/// retrying on cancelled attention denominators up to `max_attempts`.
inline std::optional<Instance> draw_instance(const OracleConfig& c, std::uint64_t index, std::size_t max_attempts) {
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng({c.seed, index, attempt});
        Instance inst;
        inst.problem = sample_problem_tokens(c.n, c.d, rng);
        inst.w = make_low_rank_w(c.d, c.r, rng);
        auto correct = generate_correct_solution(inst.problem, inst.w, c.m, c.scalar_lo, c.scalar_hi, rng);
        if (!correct) continue;
        inst.correct = std::move(*correct);
        inst.incorrect = generate_incorrect_solution(inst.correct, c.eta, c.noise_len, rng);
        inst.attempts = attempt + 1;
        return inst;
    }
    return std::nullopt;
}

namespace detail {

inline TrialRecord evaluate_instance(const OracleConfig& c, std::size_t index, const Instance& inst) {
    TrialRecord rec;
    rec.trial = index;
    rec.attempts = inst.attempts;
    const auto kry = krylov_rank_check(inst.problem, inst.w, c.m);
    rec.rank_w_star = kry.v;
    rec.krylov_dim = kry.dim_a;
    rec.gap_krylov = kry.gap;
    const auto rc = numerical_rank(correlation_matrix(inst.correct, inst.problem).entries);
    const auto ri = numerical_rank(correlation_matrix(inst.incorrect, inst.problem).entries);
    rec.rank_r_correct = rc.rank;
    rec.gap_correct = rc.gap;
    rec.rank_r_incorrect = ri.rank;
    rec.gap_incorrect = ri.gap;
    rec.predicted_incorrect = predicted_incorrect_rank(rec.rank_w_star, c);
    return rec;
}

} // namespace detail

/// Runs `config.trials` independent trials. Each trial owns its random
/// stream, so the report is identical for any thread count.
inline OracleReport run_trials(const OracleConfig& config) {
    config.validate();
    const std::size_t budget = 10 * config.trials;  // total degenerate draws tolerated
    OracleReport report;
    report.config = config;
    report.trials.resize(config.trials);

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            auto inst = draw_instance(config, t, budget + 1);
            if (!inst) {
                report.trials[t].attempts = budget + 1;
                continue;
            }
            report.trials[t] = detail::evaluate_instance(config, t, *inst);
        }
    };

    const std::size_t workers = std::min(config.threads, config.trials);
    if (workers <= 1) {
        run_range(0, config.trials);
    } else {
        std::vector<std::future<void>> jobs;
        const std::size_t chunk = (config.trials + workers - 1) / workers;
        for (std::size_t begin = 0; begin < config.trials; begin += chunk)
            jobs.push_back(std::async(std::launch::async, run_range, begin, std::min(begin + chunk, config.trials)));
        for (auto& j : jobs) j.get();
    }

    for (const auto& rec : report.trials) report.resamples += rec.attempts - 1;
    if (report.resamples > budget)
        throw resample_limit_error("oracle: " + std::to_string(report.resamples) +
                                   " degenerate attention draws exceeded the limit of " + std::to_string(budget) +
                                   " (10 x trials); check W rank and scalar range");

    std::size_t correct_match = 0, incorrect_match = 0, above = 0, krylov_match = 0, krylov_eligible = 0;
    double gap_sum = 0.0;
    for (const auto& rec : report.trials) {
        correct_match += rec.rank_r_correct == rec.rank_w_star;
        incorrect_match += rec.rank_r_incorrect == rec.predicted_incorrect;
        above += rec.rank_r_incorrect > rec.rank_r_correct;
        if (config.m >= rec.rank_w_star) {
            ++krylov_eligible;
            krylov_match += rec.krylov_dim == rec.rank_w_star;
        }
        gap_sum += static_cast<double>(rec.rank_r_incorrect) - static_cast<double>(rec.rank_r_correct);
    }
    const auto total = static_cast<double>(report.trials.size());
    report.frac_correct_match = correct_match / total;
    report.frac_incorrect_match = incorrect_match / total;
    report.frac_incorrect_above = above / total;
    report.frac_krylov_match = krylov_eligible ? static_cast<double>(krylov_match) / krylov_eligible : 0.0;
    report.mean_rank_gap = gap_sum / total;
    return report;
}

} // namespace sind::oracle
