#pragma once

// Manifest-level operations shared by the command-line tool and the tests:
// score every candidate of a problem, vote, evaluate labelled pairs, and run
// delta / K sweeps.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sind/error.hpp"
#include "sind/indicator.hpp"
#include "sind/reprio/bundle_io.hpp"
#include "sind/reprio/manifest.hpp"
#include "sind/reprio/report.hpp"
#include "sind/voting.hpp"

namespace sind {

enum class VoteMethod { self_indicator, self_consistency };

inline std::string_view to_string(VoteMethod m) {
    return m == VoteMethod::self_indicator ? "self-indicator" : "self-consistency";
}

/// Spectra of every candidate of one manifest, plus the bundle metadata
/// needed for the configuration echo.
struct ProblemSpectra {
    const reprio::CandidateManifest* manifest = nullptr;
    std::vector<CandidateSpectra> spectra;  // manifest order
    std::string model;
    std::uint32_t layer = kDefaultLayer;
    std::vector<std::string> warnings;
};

inline CandidateSpectra load_candidate(const reprio::CandidateEntry& c, NormMode mode, std::string* model,
                                       std::uint32_t* layer, std::optional<std::uint32_t> required_layer = std::nullopt) {
    const auto qa = reprio::read_bundle(c.bundle_qa, c.candidate_id);
    const auto aq = reprio::read_bundle(c.bundle_aq, c.candidate_id);
    if (qa.layer != aq.layer)
        throw invalid_input("candidate '" + c.candidate_id + "': QA bundle layer " + std::to_string(qa.layer) +
                            " differs from AQ bundle layer " + std::to_string(aq.layer));
    if (required_layer && qa.layer != *required_layer)
        throw invalid_input("candidate '" + c.candidate_id + "': bundles come from layer " + std::to_string(qa.layer) +
                            ", expected layer " + std::to_string(*required_layer));
    if (model) *model = qa.model;
    if (layer) *layer = qa.layer;
    return candidate_spectra(qa, aq, mode);
}

inline ProblemSpectra load_problem(const reprio::CandidateManifest& m, NormMode mode,
                                   std::optional<std::uint32_t> required_layer = std::nullopt) {
    ProblemSpectra p;
    p.manifest = &m;
    p.warnings = m.warnings;
    for (std::size_t i = 0; i < m.candidates.size(); ++i) {
        std::string model;
        std::uint32_t layer = 0;
        p.spectra.push_back(load_candidate(m.candidates[i], mode, &model, &layer, required_layer));
        if (i == 0) {
            p.model = model;
            p.layer = layer;
        } else if (model != p.model || layer != p.layer) {
            p.warnings.push_back("candidate '" + m.candidates[i].candidate_id + "' uses model '" + model + "' layer " +
                                 std::to_string(layer) + ", first candidate uses '" + p.model + "' layer " +
                                 std::to_string(p.layer));
        }
    }
    return p;
}

/// Scores the first `k` candidates (all when k is unset) at one delta and votes.
inline reprio::ScoreReport score_problem(const ProblemSpectra& p, const ScoreConfig& cfg, VoteMethod method,
                                         std::optional<std::size_t> k = std::nullopt) {
    const auto& m = *p.manifest;
    const std::size_t take = k.value_or(p.spectra.size());
    if (take < 1 || take > p.spectra.size())
        throw invalid_input("manifest " + m.source.string() + " has K=" + std::to_string(p.spectra.size()) +
                            " candidates, cannot take " + std::to_string(take));

    reprio::ScoreReport r;
    r.config = reprio::RunEcho{cfg.delta, cfg.combine, cfg.mode, p.layer, p.model, m.source.filename().string()};
    r.problem_id = m.problem_id;
    r.ground_truth = m.ground_truth;
    r.warnings = p.warnings;

    std::vector<Candidate> voters;
    std::vector<std::string> excluded;
    for (std::size_t i = 0; i < take; ++i) {
        auto s = p.spectra[i].score_at(cfg.delta, cfg.combine);
        const auto& entry = m.candidates[i];
        if (entry.answer)
            voters.push_back({entry.candidate_id, *entry.answer, s.score});
        else
            excluded.push_back(entry.candidate_id);
        r.candidates.push_back({std::move(s), entry.answer});
    }
    if (!voters.empty()) {
        const auto result = method == VoteMethod::self_indicator ? self_indicator_vote(voters) : self_consistency_vote(voters);
        r.vote = reprio::summarize_vote(std::string(to_string(method)), voters, result, std::move(excluded));
    } else {
        r.warnings.push_back("no candidate has an extractable answer; no vote");
    }
    return r;
}

inline reprio::ScoreReport score_manifest(const reprio::CandidateManifest& m, const ScoreConfig& cfg,
                                          VoteMethod method = VoteMethod::self_indicator,
                                          std::optional<std::uint32_t> required_layer = std::nullopt) {
    return score_problem(load_problem(m, cfg.mode, required_layer), cfg, method);
}

/// Spectra of both members of each labelled pair.
struct PairSpectra {
    std::string problem_id;
    CandidateSpectra correct;
    CandidateSpectra incorrect;
    std::size_t len_correct = 1;
    std::size_t len_incorrect = 1;
};

inline std::vector<PairSpectra> load_pairs(const reprio::PairManifest& pm, NormMode mode) {
    std::vector<PairSpectra> out;
    out.reserve(pm.pairs.size());
    for (const auto& p : pm.pairs) {
        PairSpectra ps;
        ps.problem_id = p.problem_id;
        ps.correct = load_candidate(p.correct, mode, nullptr, nullptr);
        ps.incorrect = load_candidate(p.incorrect, mode, nullptr, nullptr);
        ps.len_correct = p.len_correct.value_or(ps.correct.qa.m);
        ps.len_incorrect = p.len_incorrect.value_or(ps.incorrect.qa.m);
        out.push_back(std::move(ps));
    }
    return out;
}

inline std::vector<SolutionPair> score_pairs(const std::vector<PairSpectra>& pairs, double delta, CombineMode combine) {
    std::vector<SolutionPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs)
        out.push_back({p.problem_id, p.correct.score_at(delta, combine).score, p.incorrect.score_at(delta, combine).score,
                       p.len_correct, p.len_incorrect});
    return out;
}

/// One cell of a delta x length-filter accuracy table. `error` is set when the
/// filtered subset was empty.
struct AccuracyCell {
    double delta = 0.0;
    std::optional<std::size_t> max_len_diff;
    std::optional<AccuracyReport> report;
    std::string error;
};

inline AccuracyCell evaluate_pairs(const std::vector<PairSpectra>& pairs, double delta, CombineMode combine,
                                   std::optional<std::size_t> max_len_diff) {
    AccuracyCell cell{delta, max_len_diff, std::nullopt, {}};
    const auto scored = score_pairs(pairs, delta, combine);
    try {
        cell.report = decision_accuracy(scored, max_len_diff);
    } catch (const empty_subset_error& e) {
        cell.error = e.what();
    }
    return cell;
}

/// Final-answer accuracy over a set of problems with ground truth.
struct SweepCell {
    std::string parameter;  // "delta" or "k"
    double value = 0.0;
    std::size_t problems = 0;
    std::size_t correct_indicator = 0;
    std::size_t correct_consistency = 0;

    double accuracy_indicator() const { return problems ? static_cast<double>(correct_indicator) / problems : 0.0; }
    double accuracy_consistency() const { return problems ? static_cast<double>(correct_consistency) / problems : 0.0; }
};

inline bool winner_matches(const reprio::ScoreReport& r) {
    return r.vote && r.ground_truth && r.vote->winner == *r.ground_truth;
}

inline SweepCell sweep_cell(const std::vector<ProblemSpectra>& problems, const ScoreConfig& cfg,
                            std::optional<std::size_t> k) {
    SweepCell cell;
    cell.parameter = k ? "k" : "delta";
    cell.value = k ? static_cast<double>(*k) : cfg.delta;
    for (const auto& p : problems) {
        if (!p.manifest->ground_truth)
            throw manifest_error("manifest " + p.manifest->source.string() + " has no ground_truth; sweeps need one");
        if (k && *k > p.spectra.size())
            throw invalid_input("manifest " + p.manifest->source.string() + " has K=" + std::to_string(p.spectra.size()) +
                                ", fewer than k=" + std::to_string(*k));
        ++cell.problems;
        cell.correct_indicator += winner_matches(score_problem(p, cfg, VoteMethod::self_indicator, k));
        cell.correct_consistency += winner_matches(score_problem(p, cfg, VoteMethod::self_consistency, k));
    }
    return cell;
}

} // namespace sind
