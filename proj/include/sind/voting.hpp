#pragma once

// Position weights, weighted majority voting over canonical answers, and the
// pairwise decision rule with its accuracy evaluation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sind/error.hpp"

namespace sind {

inline constexpr std::size_t kDefaultK = 5;

struct Candidate {
    std::string candidate_id;
    std::string answer;           // canonical
    std::optional<double> score;  // indicator score, lower is better
};

struct VoteResult {
    std::string winner;
    std::map<std::string, double> tally;
    std::vector<std::size_t> positions;  // per candidate, 1-based ascending score
    std::vector<double> weights;         // per candidate
};

/// 1-based positions in ascending score order; equal scores keep input order.
inline std::vector<std::size_t> rank_candidates(std::span<const double> scores,
                                                std::span<const std::string> ids = {}) {
    if (scores.empty()) throw invalid_input("rank_candidates: no scores");
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (!std::isfinite(scores[i]))
            throw invalid_input("rank_candidates: non-finite score for candidate " +
                                (i < ids.size() ? "'" + ids[i] + "'" : std::to_string(i)));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<std::size_t> pos(scores.size());
    for (std::size_t p = 0; p < order.size(); ++p) pos[order[p]] = p + 1;
    return pos;
}

/// w = 1 + 0.5 (K - pos).
inline std::vector<double> assign_weights(std::span<const std::size_t> positions) {
    const std::size_t k = positions.size();
    std::vector<bool> seen(k + 1, false);
    for (std::size_t p : positions) {
        if (p < 1 || p > k || seen[p]) throw invalid_input("assign_weights: positions are not a permutation of 1..K");
        seen[p] = true;
    }
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = 1.0 + 0.5 * static_cast<double>(k - positions[i]);
    return w;
}

namespace detail {

inline std::vector<std::size_t> positions_of(std::span<const Candidate> candidates) {
    const bool all_scored =
        std::all_of(candidates.begin(), candidates.end(), [](const Candidate& c) { return c.score.has_value(); });
    if (!all_scored) {
        std::vector<std::size_t> pos(candidates.size());
        std::iota(pos.begin(), pos.end(), 1);
        return pos;
    }
    std::vector<double> scores;
    std::vector<std::string> ids;
    for (const auto& c : candidates) {
        scores.push_back(*c.score);
        ids.push_back(c.candidate_id);
    }
    return rank_candidates(scores, ids);
}

} // namespace detail

/// Sums weights per canonical answer. Tied tallies go to the answer holding
/// the best-positioned candidate (lowest score, or earliest when unscored),
/// then to the lexicographically smaller answer.
inline VoteResult weighted_majority_vote(std::span<const Candidate> candidates, std::span<const double> weights) {
    if (candidates.empty()) throw invalid_input("vote: no candidates");
    if (candidates.size() != weights.size())
        throw invalid_input("vote: " + std::to_string(candidates.size()) + " candidates but " +
                            std::to_string(weights.size()) + " weights");
    VoteResult out;
    out.positions = detail::positions_of(candidates);
    out.weights.assign(weights.begin(), weights.end());

    std::map<std::string, std::size_t> best_position;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& a = candidates[i].answer;
        if (a.empty()) throw invalid_input("vote: candidate '" + candidates[i].candidate_id + "' has an empty answer");
        out.tally[a] += weights[i];
        auto [it, inserted] = best_position.try_emplace(a, out.positions[i]);
        if (!inserted) it->second = std::min(it->second, out.positions[i]);
    }

    const std::string* best = nullptr;
    for (const auto& [answer, total] : out.tally) {
        if (!best) {
            best = &answer;
            continue;
        }
        const double lead = out.tally[*best];
        if (total > lead || (total == lead && best_position[answer] < best_position[*best])) best = &answer;
    }
    out.winner = *best;
    return out;
}

/// Self-indicator vote: rank by score, weight by position, vote.
inline VoteResult self_indicator_vote(std::span<const Candidate> candidates) {
    if (candidates.empty()) throw invalid_input("vote: no candidates");
    for (const auto& c : candidates)
        if (!c.score) throw invalid_input("vote: candidate '" + c.candidate_id + "' has no score");
    const auto positions = detail::positions_of(candidates);
    const auto weights = assign_weights(positions);
    return weighted_majority_vote(candidates, weights);
}

/// Plain majority vote (uniform weights) with the same tie rules.
inline VoteResult self_consistency_vote(std::span<const Candidate> candidates) {
    const std::vector<double> ones(candidates.size(), 1.0);
    return weighted_majority_vote(candidates, ones);
}

enum class PairChoice { first, second };

struct PairDecision {
    PairChoice choice = PairChoice::first;
    bool tie = false;
};

/// The lower score is judged correct; an exact tie picks the first and is flagged.
inline PairDecision pairwise_decision(double score_first, double score_second) {
    if (score_first == score_second) return {PairChoice::first, true};
    return {score_first < score_second ? PairChoice::first : PairChoice::second, false};
}

struct SolutionPair {
    std::string problem_id;
    double score_correct = 0.0;
    double score_incorrect = 0.0;
    std::size_t len_correct = 1;
    std::size_t len_incorrect = 1;
};

struct AccuracyReport {
    double accuracy = 0.0;
    std::size_t n_used = 0;      // decisive pairs in the denominator
    std::size_t n_ties = 0;      // retained pairs with equal scores, excluded
    std::size_t n_correct = 0;
    std::size_t n_filtered = 0;  // dropped by the length filter
};

/// Fraction of pairs where the correct member has the strictly lower score.
/// With `max_len_diff`, pairs whose token lengths differ by that much or more
/// are dropped first. Ties are counted and excluded.
inline AccuracyReport decision_accuracy(std::span<const SolutionPair> pairs,
                                        std::optional<std::size_t> max_len_diff = std::nullopt) {
    AccuracyReport rep;
    for (const auto& p : pairs) {
        if (p.len_correct < 1 || p.len_incorrect < 1)
            throw invalid_input("pair '" + p.problem_id + "' has a zero token count");
        if (!std::isfinite(p.score_correct) || !std::isfinite(p.score_incorrect))
            throw invalid_input("pair '" + p.problem_id + "' has a non-finite score");
        const std::size_t diff =
            p.len_correct > p.len_incorrect ? p.len_correct - p.len_incorrect : p.len_incorrect - p.len_correct;
        if (max_len_diff && diff >= *max_len_diff) {
            ++rep.n_filtered;
            continue;
        }
        const auto d = pairwise_decision(p.score_correct, p.score_incorrect);
        if (d.tie) {
            ++rep.n_ties;
            continue;
        }
        ++rep.n_used;
        rep.n_correct += d.choice == PairChoice::first;
    }
    if (rep.n_used == 0)
        throw empty_subset_error("decision accuracy: no decisive pairs left (" + std::to_string(pairs.size()) +
                                 " given, " + std::to_string(rep.n_filtered) + " filtered by length, " +
                                 std::to_string(rep.n_ties) + " ties)");
    rep.accuracy = static_cast<double>(rep.n_correct) / static_cast<double>(rep.n_used);
    return rep;
}

} // namespace sind
