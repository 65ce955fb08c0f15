#pragma once

// Self-indicator score of a candidate solution: normalized thresholded ranks
// of its solution x problem correlation matrix under the QA and AQ template
// orders, combined by sum (default) or product.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sind/bundle.hpp"
#include "sind/error.hpp"
#include "sind/linalg.hpp"

namespace sind {

inline constexpr double kDefaultDelta = 1.75;
inline constexpr std::uint32_t kDefaultLayer = 26;

inline constexpr std::string_view kQuestionLiteral = "Question: ";
inline constexpr std::string_view kAnswerLiteral = "Answer: ";

inline std::string build_template_text(std::string_view problem, std::string_view solution, TemplateOrder order) {
    if (problem.empty()) throw invalid_input("template: problem text is empty");
    if (solution.empty()) throw invalid_input("template: solution text is empty");
    std::string out;
    out.reserve(problem.size() + solution.size() + 20);
    if (order == TemplateOrder::qa) {
        out.append(kQuestionLiteral).append(problem).append(" ").append(kAnswerLiteral).append(solution);
    } else {
        out.append(kAnswerLiteral).append(solution).append(" ").append(kQuestionLiteral).append(problem);
    }
    return out;
}

/// Inverse of build_template_text, splitting at the first inner separator.
/// Ambiguous when the leading field itself contains that separator.
inline std::pair<std::string, std::string> split_template_text(std::string_view text, TemplateOrder order) {
    const std::string_view head = order == TemplateOrder::qa ? kQuestionLiteral : kAnswerLiteral;
    const std::string sep = std::string(" ") + std::string(order == TemplateOrder::qa ? kAnswerLiteral : kQuestionLiteral);
    if (text.substr(0, head.size()) != head) throw invalid_input("template text does not start with '" + std::string(head) + "'");
    const auto body = text.substr(head.size());
    const auto cut = body.find(sep);
    if (cut == std::string_view::npos) throw invalid_input("template text is missing the '" + sep + "' separator");
    std::string first(body.substr(0, cut));
    std::string second(body.substr(cut + sep.size()));
    if (order == TemplateOrder::qa) return {std::move(first), std::move(second)};
    return {std::move(second), std::move(first)};
}

enum class CombineMode { add, mul };

inline std::string_view to_string(CombineMode mode) { return mode == CombineMode::add ? "add" : "mul"; }

inline CombineMode parse_combine_mode(std::string_view s) {
    if (s == "add") return CombineMode::add;
    if (s == "mul") return CombineMode::mul;
    throw invalid_input("unknown combine mode '" + std::string(s) + "' (expected add or mul)");
}

inline double combine_ranks(double rank_qa, double rank_aq, CombineMode mode) {
    if (!(rank_qa >= 0.0) || !(rank_aq >= 0.0))
        throw invalid_input("combine_ranks: ranks must be non-negative");
    switch (mode) {
    case CombineMode::add: return rank_qa + rank_aq;
    case CombineMode::mul: return rank_qa * rank_aq;
    }
    throw invalid_input("combine_ranks: unknown mode");
}

struct ScoreConfig {
    double delta = kDefaultDelta;
    CombineMode combine = CombineMode::add;
    NormMode mode = NormMode::raw;
};

struct IndicatorScore {
    std::string candidate_id;
    double rank_qa = 0.0;
    double rank_aq = 0.0;
    std::size_t raw_rank_qa = 0;
    std::size_t raw_rank_aq = 0;
    std::size_t tokens_qa = 0;  // M under the QA template
    std::size_t tokens_aq = 0;
    double score = 0.0;
    CombineMode combine = CombineMode::add;
    double delta = kDefaultDelta;
    NormMode mode = NormMode::raw;
};

/// Singular values of one bundle's correlation matrix. Kept separately so a
/// delta sweep only pays for the SVD once.
struct BundleSpectrum {
    std::vector<double> values;
    std::size_t m = 0;
    NormMode mode = NormMode::raw;

    RankEstimate rank_at(double delta) const {
        if (m == 0) throw invalid_input("spectrum has no solution rows");
        RankEstimate est;
        est.raw_rank = thresholded_rank(values, delta, mode);
        est.normalized_rank = static_cast<double>(est.raw_rank) / static_cast<double>(m);
        est.delta = delta;
        est.mode = mode;
        return est;
    }
};

inline BundleSpectrum bundle_spectrum(const RepresentationBundle& b, NormMode mode) {
    b.validate();
    const auto r = correlation_matrix(b.solution, b.problem, mode);
    return {singular_values(r), r.m(), mode};
}

/// QA and AQ spectra of one candidate.
struct CandidateSpectra {
    std::string candidate_id;
    BundleSpectrum qa;
    BundleSpectrum aq;

    IndicatorScore score_at(double delta, CombineMode combine) const {
        IndicatorScore s;
        s.candidate_id = candidate_id;
        const auto rq = qa.rank_at(delta);
        const auto ra = aq.rank_at(delta);
        s.rank_qa = rq.normalized_rank;
        s.rank_aq = ra.normalized_rank;
        s.raw_rank_qa = rq.raw_rank;
        s.raw_rank_aq = ra.raw_rank;
        s.tokens_qa = qa.m;
        s.tokens_aq = aq.m;
        s.score = combine_ranks(s.rank_qa, s.rank_aq, combine);
        s.combine = combine;
        s.delta = delta;
        s.mode = qa.mode;
        return s;
    }
};

inline void check_bundle_pair(const RepresentationBundle& qa, const RepresentationBundle& aq) {
    if (qa.candidate_id != aq.candidate_id)
        throw invalid_input("bundle candidate mismatch: QA bundle is for '" + qa.candidate_id + "', AQ bundle is for '" +
                            aq.candidate_id + "'");
    if (qa.order != TemplateOrder::qa) throw invalid_input("bundle for '" + qa.candidate_id + "' passed as QA is " + std::string(to_string(qa.order)));
    if (aq.order != TemplateOrder::aq) throw invalid_input("bundle for '" + aq.candidate_id + "' passed as AQ is " + std::string(to_string(aq.order)));
    if (qa.model != aq.model)
        throw invalid_input("representation model mismatch for '" + qa.candidate_id + "': QA '" + qa.model + "', AQ '" +
                            aq.model + "'");
}

inline CandidateSpectra candidate_spectra(const RepresentationBundle& qa, const RepresentationBundle& aq, NormMode mode) {
    check_bundle_pair(qa, aq);
    return {qa.candidate_id, bundle_spectrum(qa, mode), bundle_spectrum(aq, mode)};
}

inline IndicatorScore score_candidate(const RepresentationBundle& qa, const RepresentationBundle& aq,
                                      const ScoreConfig& config = {}) {
    if (!(config.delta >= 0.0)) throw invalid_input("delta must be non-negative");
    return candidate_spectra(qa, aq, config.mode).score_at(config.delta, config.combine);
}

} // namespace sind
