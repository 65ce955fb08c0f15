#pragma once

// Synthetic candidate and pair sets drawn from the linear-attention oracle,
// written as ordinary bundles and manifests so the whole file pipeline can
// run without a language model.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sind/bundle.hpp"
#include "sind/error.hpp"
#include "sind/oracle.hpp"
#include "sind/reprio/bundle_io.hpp"
#include "sind/reprio/manifest.hpp"
#include "sind/rng.hpp"

namespace sind::synth {

namespace fs = std::filesystem;

inline constexpr const char* kSynthModel = "oracle-linear-attention";

struct SynthConfig {
    oracle::OracleConfig oracle;
    std::string model = kSynthModel;
    std::uint32_t layer = 26;
    std::size_t max_attempts = 50;
};

/// One candidate to generate: its raw answer text, whether it follows the
/// attention recursion, and the noise length used when it does not.
struct CandidateSpec {
    std::string candidate_id;
    std::string answer_raw;
    bool correct = true;
    std::size_t noise_len = 8;
};

struct CandidateBundles {
    RepresentationBundle qa;
    RepresentationBundle aq;
};

inline RepresentationBundle make_bundle(const RepMatrix& problem, const RepMatrix& solution, TemplateOrder order,
                                        const SynthConfig& cfg, const std::string& id) {
    RepresentationBundle b;
    b.candidate_id = id;
    b.order = order;
    b.model = cfg.model;
    b.layer = cfg.layer;
    b.problem = problem;
    b.solution = solution;
    return b;
}

/// QA and AQ bundles for one candidate. The two templates share the problem
/// tokens and W but draw their own attention scalars and noise.
inline std::optional<CandidateBundles> draw_candidate(const RepMatrix& problem, const Eigen::MatrixXd& w,
                                                      const CandidateSpec& spec, const SynthConfig& cfg, Rng& rng) {
    const auto& c = cfg.oracle;
    auto one = [&](TemplateOrder order) -> std::optional<RepresentationBundle> {
        auto sol = oracle::generate_correct_solution(problem, w, c.m, c.scalar_lo, c.scalar_hi, rng);
        if (!sol) return std::nullopt;
        if (!spec.correct) *sol = oracle::generate_incorrect_solution(*sol, c.eta, spec.noise_len, rng);
        return make_bundle(problem, *sol, order, cfg, spec.candidate_id);
    };
    auto qa = one(TemplateOrder::qa);
    if (!qa) return std::nullopt;
    auto aq = one(TemplateOrder::aq);
    if (!aq) return std::nullopt;
    return CandidateBundles{std::move(*qa), std::move(*aq)};
}

namespace detail {

struct Problem {
    RepMatrix problem;
    Eigen::MatrixXd w;
};

inline Problem draw_problem(const SynthConfig& cfg, Rng& rng) {
    return {oracle::sample_problem_tokens(cfg.oracle.n, cfg.oracle.d, rng), oracle::make_low_rank_w(cfg.oracle.d, cfg.oracle.r, rng)};
}

inline reprio::CandidateEntry write_candidate(const CandidateBundles& b, const std::string& answer_raw,
                                              const fs::path& dir, const std::string& stem) {
    fs::create_directories(dir);
    reprio::CandidateEntry e;
    e.candidate_id = b.qa.candidate_id;
    e.answer_raw = answer_raw;
    e.bundle_qa = dir / (stem + ".qa.bin");
    e.bundle_aq = dir / (stem + ".aq.bin");
    reprio::write_bundle(b.qa, e.bundle_qa);
    reprio::write_bundle(b.aq, e.bundle_aq);
    return e;
}

template <class Draw>
auto with_retries(const SynthConfig& cfg, Rng& rng, Draw&& draw) {
    for (std::size_t attempt = 0; attempt < cfg.max_attempts; ++attempt)
        if (auto out = draw(rng)) return std::move(*out);
    throw resample_limit_error("synthetic draw degenerate " + std::to_string(cfg.max_attempts) + " times in a row");
}

} // namespace detail

/// Writes one problem's manifest (`<out_dir>/<problem_id>.json`) and bundles.
inline fs::path write_problem(const SynthConfig& cfg, const std::string& problem_id, const std::vector<CandidateSpec>& specs,
                              const std::string& ground_truth_raw, const fs::path& out_dir, std::uint64_t seed) {
    cfg.oracle.validate();
    if (specs.empty()) throw invalid_input("synthetic problem needs at least one candidate");
    Rng rng({seed, 0x5eed});
    const auto prob = detail::draw_problem(cfg, rng);
    reprio::CandidateManifest m;
    m.problem_id = problem_id;
    m.problem_text = "Synthetic problem " + problem_id;
    m.ground_truth_raw = ground_truth_raw;
    for (const auto& spec : specs) {
        const auto bundles = detail::with_retries(cfg, rng, [&](Rng& r) { return draw_candidate(prob.problem, prob.w, spec, cfg, r); });
        m.candidates.push_back(
            detail::write_candidate(bundles, spec.answer_raw, out_dir / "bundles", problem_id + "." + spec.candidate_id));
    }
    const auto path = out_dir / (problem_id + ".json");
    reprio::write_manifest(m, path);
    return path;
}

/// Problem sets for voting: each candidate is correct with probability
/// `p_correct` and then carries the true answer; wrong candidates pick one of
/// `wrong_answers` distinct wrong values, so wrong majorities happen.
struct CandidateSetConfig {
    SynthConfig synth;
    std::size_t problems = 20;
    std::size_t k = 5;
    double p_correct = 0.4;
    std::size_t wrong_answers = 2;
    std::size_t noise_min = 4;
    std::size_t noise_max = 12;
    std::uint64_t seed = 0;
};

inline std::vector<fs::path> write_candidate_set(const CandidateSetConfig& c, const fs::path& out_dir) {
    if (c.k < 1) throw invalid_input("k must be at least 1");
    if (c.wrong_answers < 1) throw invalid_input("wrong_answers must be at least 1");
    if (c.noise_min > c.noise_max) throw invalid_input("noise_min exceeds noise_max");
    if (!(c.p_correct >= 0.0 && c.p_correct <= 1.0)) throw invalid_input("p_correct must lie in [0, 1]");
    std::vector<fs::path> out;
    for (std::size_t p = 0; p < c.problems; ++p) {
        Rng rng({c.seed, 0xa115, p});
        const auto truth = 10 + static_cast<long>(rng.uniform() * 990);
        std::vector<CandidateSpec> specs;
        for (std::size_t i = 0; i < c.k; ++i) {
            CandidateSpec s;
            s.candidate_id = "c" + std::to_string(i);
            s.correct = rng.uniform() < c.p_correct;
            long answer = truth;
            if (!s.correct) {
                answer = truth + 1 + static_cast<long>(rng.uniform() * static_cast<double>(c.wrong_answers));
                s.noise_len = c.noise_min + static_cast<std::size_t>(rng.uniform() * static_cast<double>(c.noise_max - c.noise_min + 1));
            }
            s.answer_raw = "So the answer is \\boxed{" + std::to_string(answer) + "}.";
            specs.push_back(std::move(s));
        }
        char id[32];
        std::snprintf(id, sizeof id, "p%03zu", p);
        out.push_back(write_problem(c.synth, id, specs, std::to_string(truth), out_dir, c.seed * 1000003 + p));
    }
    return out;
}

/// Labelled correct/incorrect pairs, one per synthetic problem.
inline reprio::PairManifest pair_set(const SynthConfig& cfg, std::size_t count, const fs::path& out_dir, std::uint64_t seed) {
    cfg.oracle.validate();
    reprio::PairManifest pm;
    for (std::size_t p = 0; p < count; ++p) {
        Rng rng({seed, 0x9a1, p});
        const auto prob = detail::draw_problem(cfg, rng);
        char id[32];
        std::snprintf(id, sizeof id, "q%04zu", p);
        CandidateSpec good{"good", "\\boxed{1}", true, cfg.oracle.noise_len};
        CandidateSpec bad{"bad", "\\boxed{2}", false, cfg.oracle.noise_len};
        const auto g = detail::with_retries(cfg, rng, [&](Rng& r) { return draw_candidate(prob.problem, prob.w, good, cfg, r); });
        const auto b = detail::with_retries(cfg, rng, [&](Rng& r) { return draw_candidate(prob.problem, prob.w, bad, cfg, r); });
        reprio::PairEntry e;
        e.problem_id = id;
        e.correct = detail::write_candidate(g, good.answer_raw, out_dir / "bundles", std::string(id) + ".good");
        e.incorrect = detail::write_candidate(b, bad.answer_raw, out_dir / "bundles", std::string(id) + ".bad");
        e.len_correct = g.qa.m();
        e.len_incorrect = b.qa.m();
        pm.pairs.push_back(std::move(e));
    }
    const auto path = out_dir / "pairs.json";
    reprio::write_pair_manifest(pm, path);
    pm.source = path;
    return pm;
}

} // namespace sind::synth
