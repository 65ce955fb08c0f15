#pragma once

// Score, vote and oracle reports as JSON documents. Key order and number
// formatting are fixed so the same run always yields the same bytes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sind/error.hpp"
#include "sind/indicator.hpp"
#include "sind/oracle.hpp"
#include "sind/voting.hpp"

namespace sind::reprio {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kScoreSchema = "sind.scores/1";
inline constexpr const char* kVoteSchema = "sind.vote/1";
inline constexpr const char* kOracleSchema = "sind.oracle/1";

/// Everything needed to re-run a scoring command.
struct RunEcho {
    double delta = kDefaultDelta;
    CombineMode combine = CombineMode::add;
    NormMode mode = NormMode::raw;
    std::uint32_t layer = kDefaultLayer;
    std::string representation_model;
    std::string manifest;  // file name as given
};

struct ScoredCandidate {
    IndicatorScore score;
    std::optional<std::string> answer;
};

struct Ballot {
    std::string candidate_id;
    std::string answer;
    std::size_t position = 0;
    double weight = 0.0;
};

struct VoteSummary {
    std::string method;  // "self-indicator" or "self-consistency"
    std::string winner;
    std::vector<std::pair<std::string, double>> tally;  // sorted by answer
    std::vector<Ballot> ballots;
    std::vector<std::string> excluded;  // candidates without an extractable answer
};

struct ScoreReport {
    std::optional<RunEcho> config;
    std::string problem_id;
    std::optional<std::string> ground_truth;
    std::vector<ScoredCandidate> candidates;
    std::optional<VoteSummary> vote;
    std::vector<std::string> warnings;
    std::optional<double> elapsed_ms;  // only written when requested
};

inline VoteSummary summarize_vote(std::string method, const std::vector<Candidate>& voters, const VoteResult& r,
                                  std::vector<std::string> excluded) {
    VoteSummary s;
    s.method = std::move(method);
    s.winner = r.winner;
    for (const auto& [answer, weight] : r.tally) s.tally.emplace_back(answer, weight);
    for (std::size_t i = 0; i < voters.size(); ++i)
        s.ballots.push_back({voters[i].candidate_id, voters[i].answer, r.positions[i], r.weights[i]});
    s.excluded = std::move(excluded);
    return s;
}

namespace detail {

inline ojson echo_json(const RunEcho& e) {
    ojson j;
    j["delta"] = e.delta;
    j["combine"] = std::string(to_string(e.combine));
    j["mode"] = std::string(to_string(e.mode));
    j["layer"] = e.layer;
    j["representation_model"] = e.representation_model;
    j["manifest"] = e.manifest;
    return j;
}

inline RunEcho echo_from_json(const nlohmann::json& j) {
    RunEcho e;
    e.delta = j.at("delta").get<double>();
    e.combine = parse_combine_mode(j.at("combine").get<std::string>());
    e.mode = parse_norm_mode(j.at("mode").get<std::string>());
    e.layer = j.at("layer").get<std::uint32_t>();
    e.representation_model = j.at("representation_model").get<std::string>();
    e.manifest = j.at("manifest").get<std::string>();
    return e;
}

inline ojson vote_json(const VoteSummary& v) {
    ojson j;
    j["method"] = v.method;
    j["winner"] = v.winner;
    ojson tally = ojson::object();
    for (const auto& [a, w] : v.tally) tally[a] = w;
    j["tally"] = tally;
    j["ballots"] = ojson::array();
    for (const auto& b : v.ballots) {
        ojson e;
        e["candidate_id"] = b.candidate_id;
        e["answer"] = b.answer;
        e["position"] = b.position;
        e["weight"] = b.weight;
        j["ballots"].push_back(e);
    }
    j["excluded"] = v.excluded;
    return j;
}

inline VoteSummary vote_from_json(const nlohmann::json& j) {
    VoteSummary v;
    v.method = j.at("method").get<std::string>();
    v.winner = j.at("winner").get<std::string>();
    for (auto it = j.at("tally").begin(); it != j.at("tally").end(); ++it) v.tally.emplace_back(it.key(), it->get<double>());
    for (const auto& b : j.at("ballots"))
        v.ballots.push_back({b.at("candidate_id").get<std::string>(), b.at("answer").get<std::string>(),
                             b.at("position").get<std::size_t>(), b.at("weight").get<double>()});
    v.excluded = j.at("excluded").get<std::vector<std::string>>();
    return v;
}

inline void check_complete(const ScoreReport& r) {
    if (!r.config) throw invalid_input("report has no configuration echo; refusing to write an unreproducible report");
}

inline ojson header(const char* schema, const ScoreReport& r) {
    ojson doc;
    doc["schema"] = schema;
    doc["config"] = echo_json(*r.config);
    doc["problem_id"] = r.problem_id;
    doc["ground_truth"] = r.ground_truth ? ojson(*r.ground_truth) : ojson(nullptr);
    return doc;
}

inline void trailer(ojson& doc, const ScoreReport& r) {
    doc["warnings"] = r.warnings;
    if (r.elapsed_ms) doc["elapsed_ms"] = *r.elapsed_ms;
}

inline void write_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw error("failed writing " + path.string());
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw error(path.string() + " is not valid JSON: " + e.what());
    }
}

} // namespace detail

inline std::string score_report_text(const ScoreReport& r) {
    detail::check_complete(r);
    auto doc = detail::header(kScoreSchema, r);
    doc["candidates"] = ojson::array();
    for (const auto& c : r.candidates) {
        ojson e;
        e["candidate_id"] = c.score.candidate_id;
        e["answer"] = c.answer ? ojson(*c.answer) : ojson(nullptr);
        e["rank_qa"] = c.score.rank_qa;
        e["rank_aq"] = c.score.rank_aq;
        e["raw_rank_qa"] = c.score.raw_rank_qa;
        e["raw_rank_aq"] = c.score.raw_rank_aq;
        e["tokens_qa"] = c.score.tokens_qa;
        e["tokens_aq"] = c.score.tokens_aq;
        e["score"] = c.score.score;
        doc["candidates"].push_back(e);
    }
    doc["vote"] = r.vote ? detail::vote_json(*r.vote) : ojson(nullptr);
    detail::trailer(doc, r);
    return doc.dump(2) + "\n";
}

inline std::string vote_report_text(const ScoreReport& r) {
    detail::check_complete(r);
    if (!r.vote) throw invalid_input("vote report has no vote result");
    auto doc = detail::header(kVoteSchema, r);
    doc["vote"] = detail::vote_json(*r.vote);
    detail::trailer(doc, r);
    return doc.dump(2) + "\n";
}

inline void write_scores(const ScoreReport& r, const std::filesystem::path& path) {
    detail::write_text(score_report_text(r), path);
}

inline void write_vote(const ScoreReport& r, const std::filesystem::path& path) {
    detail::write_text(vote_report_text(r), path);
}

/// Reads a score or vote report back.
inline ScoreReport read_scores(const std::filesystem::path& path) {
    const auto doc = detail::read_json(path);
    try {
        const auto schema = doc.at("schema").get<std::string>();
        if (schema != kScoreSchema && schema != kVoteSchema)
            throw error(path.string() + ": unexpected schema '" + schema + "'");
        ScoreReport r;
        r.config = detail::echo_from_json(doc.at("config"));
        r.problem_id = doc.at("problem_id").get<std::string>();
        if (!doc.at("ground_truth").is_null()) r.ground_truth = doc.at("ground_truth").get<std::string>();
        if (auto it = doc.find("candidates"); it != doc.end()) {
            for (const auto& e : *it) {
                ScoredCandidate c;
                c.score.candidate_id = e.at("candidate_id").get<std::string>();
                if (!e.at("answer").is_null()) c.answer = e.at("answer").get<std::string>();
                c.score.rank_qa = e.at("rank_qa").get<double>();
                c.score.rank_aq = e.at("rank_aq").get<double>();
                c.score.raw_rank_qa = e.at("raw_rank_qa").get<std::size_t>();
                c.score.raw_rank_aq = e.at("raw_rank_aq").get<std::size_t>();
                c.score.tokens_qa = e.at("tokens_qa").get<std::size_t>();
                c.score.tokens_aq = e.at("tokens_aq").get<std::size_t>();
                c.score.score = e.at("score").get<double>();
                c.score.combine = r.config->combine;
                c.score.delta = r.config->delta;
                c.score.mode = r.config->mode;
                r.candidates.push_back(std::move(c));
            }
        }
        if (!doc.at("vote").is_null()) r.vote = detail::vote_from_json(doc.at("vote"));
        r.warnings = doc.at("warnings").get<std::vector<std::string>>();
        if (auto it = doc.find("elapsed_ms"); it != doc.end()) r.elapsed_ms = it->get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw error(path.string() + ": malformed report: " + e.what());
    }
}

namespace detail {

inline ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

} // namespace detail

inline std::string oracle_report_text(const oracle::OracleReport& r) {
    const auto& c = r.config;
    ojson doc;
    doc["schema"] = kOracleSchema;
    ojson cfg;
    cfg["n"] = c.n;
    cfg["d"] = c.d;
    cfg["r"] = c.r;
    cfg["m"] = c.m;
    cfg["eta"] = c.eta;
    cfg["noise_len"] = c.noise_len;
    cfg["scalar_lo"] = c.scalar_lo;
    cfg["scalar_hi"] = c.scalar_hi;
    cfg["trials"] = c.trials;
    cfg["seed"] = c.seed;
    cfg["zero_cutoff"] = kZeroCutoff;
    doc["config"] = cfg;
    ojson summary;
    summary["frac_correct_match"] = r.frac_correct_match;
    summary["frac_incorrect_match"] = r.frac_incorrect_match;
    summary["frac_incorrect_above"] = r.frac_incorrect_above;
    summary["frac_krylov_match"] = r.frac_krylov_match;
    summary["mean_rank_gap"] = r.mean_rank_gap;
    summary["resamples"] = r.resamples;
    doc["summary"] = summary;
    doc["trials"] = ojson::array();
    for (const auto& t : r.trials) {
        ojson e;
        e["trial"] = t.trial;
        e["attempts"] = t.attempts;
        e["rank_w_star"] = t.rank_w_star;
        e["rank_r_correct"] = t.rank_r_correct;
        e["rank_r_incorrect"] = t.rank_r_incorrect;
        e["predicted_incorrect"] = t.predicted_incorrect;
        e["krylov_dim"] = t.krylov_dim;
        e["gap_correct"] = detail::finite_or_null(t.gap_correct);
        e["gap_incorrect"] = detail::finite_or_null(t.gap_incorrect);
        e["gap_krylov"] = detail::finite_or_null(t.gap_krylov);
        doc["trials"].push_back(e);
    }
    return doc.dump(2) + "\n";
}

inline void write_oracle_report(const oracle::OracleReport& r, const std::filesystem::path& path) {
    detail::write_text(oracle_report_text(r), path);
}

} // namespace sind::reprio
