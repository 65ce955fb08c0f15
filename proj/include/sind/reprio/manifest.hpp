#pragma once

// Candidate and pair manifests: JSON documents naming each candidate's raw
// answer and its QA/AQ bundle files. Bundle paths are resolved against the
// manifest's own directory. See docs/formats.md for the schemas.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sind/error.hpp"
#include "sind/reprio/answer.hpp"

namespace sind::reprio {

namespace fs = std::filesystem;

inline constexpr const char* kCandidateSchema = "sind.candidates/1";
inline constexpr const char* kPairSchema = "sind.pairs/1";

struct CandidateEntry {
    std::string candidate_id;
    std::string answer_raw;
    std::optional<std::string> answer;  // canonical; empty when nothing extractable
    fs::path bundle_qa;                 // resolved
    fs::path bundle_aq;
};

struct CandidateManifest {
    std::string problem_id;
    std::string problem_text;
    std::vector<CandidateEntry> candidates;
    std::optional<std::string> ground_truth_raw;
    std::optional<std::string> ground_truth;
    fs::path source;
    std::vector<std::string> warnings;

    std::size_t k() const noexcept { return candidates.size(); }
};

struct PairEntry {
    std::string problem_id;
    CandidateEntry correct;
    CandidateEntry incorrect;
    std::optional<std::size_t> len_correct;  // defaults to the QA bundle's M
    std::optional<std::size_t> len_incorrect;
};

struct PairManifest {
    std::vector<PairEntry> pairs;
    fs::path source;
};

namespace detail {

using json = nlohmann::json;

class Context {
public:
    explicit Context(fs::path file) : file_(std::move(file)) {}

    [[noreturn]] void fail(const std::string& where, const std::string& what) const {
        throw manifest_error("manifest " + file_.string() + (where.empty() ? "" : ": " + where) + ": " + what);
    }

    const json& field(const json& obj, const std::string& where, const char* key) const {
        if (!obj.is_object()) fail(where, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
        return *it;
    }

    std::string string_field(const json& obj, const std::string& where, const char* key) const {
        const auto& v = field(obj, where, key);
        if (!v.is_string()) fail(where, std::string("field '") + key + "' must be a string");
        return v.get<std::string>();
    }

    std::optional<std::size_t> optional_count(const json& obj, const std::string& where, const char* key) const {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (!it->is_number_unsigned() || it->get<std::size_t>() < 1)
            fail(where, std::string("field '") + key + "' must be a positive integer");
        return it->get<std::size_t>();
    }

    fs::path bundle_path(const json& obj, const std::string& where, const char* key) const {
        fs::path p = string_field(obj, where, key);
        if (p.is_relative()) p = file_.parent_path() / p;
        if (!fs::exists(p)) fail(where, std::string("dangling ") + key + " path '" + p.string() + "'");
        return p;
    }

    CandidateEntry candidate(const json& obj, const std::string& where, std::vector<std::string>* warnings) const {
        CandidateEntry c;
        c.candidate_id = string_field(obj, where, "candidate_id");
        if (c.candidate_id.empty()) fail(where, "empty candidate_id");
        c.answer_raw = string_field(obj, where, "answer_raw");
        c.answer = try_normalize_answer(c.answer_raw);
        if (!c.answer && warnings)
            warnings->push_back("candidate '" + c.candidate_id + "' has no extractable answer; excluded from voting");
        c.bundle_qa = bundle_path(obj, where, "bundle_qa");
        c.bundle_aq = bundle_path(obj, where, "bundle_aq");
        return c;
    }

    const fs::path& file() const noexcept { return file_; }

private:
    fs::path file_;
};

inline json parse_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw manifest_error("cannot open manifest " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw manifest_error("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
}

} // namespace detail

inline CandidateManifest load_manifest(const fs::path& path) {
    const auto doc = detail::parse_json_file(path);
    const detail::Context ctx(path);
    CandidateManifest m;
    m.source = path;
    m.problem_id = ctx.string_field(doc, "", "problem_id");
    m.problem_text = ctx.string_field(doc, "", "problem_text");
    if (auto it = doc.find("ground_truth"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) ctx.fail("", "field 'ground_truth' must be a string");
        m.ground_truth_raw = it->get<std::string>();
        m.ground_truth = try_normalize_answer(*m.ground_truth_raw);
        if (!m.ground_truth) ctx.fail("ground_truth", "no extractable answer");
    }
    const auto& cands = ctx.field(doc, "", "candidates");
    if (!cands.is_array() || cands.empty()) ctx.fail("", "'candidates' must be a non-empty array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const std::string where = "candidates[" + std::to_string(i) + "]";
        auto c = ctx.candidate(cands[i], where, &m.warnings);
        if (!seen.insert(c.candidate_id).second) ctx.fail(where, "duplicate candidate_id '" + c.candidate_id + "'");
        m.candidates.push_back(std::move(c));
    }
    return m;
}

inline PairManifest load_pair_manifest(const fs::path& path) {
    const auto doc = detail::parse_json_file(path);
    const detail::Context ctx(path);
    PairManifest pm;
    pm.source = path;
    const auto& pairs = ctx.field(doc, "", "pairs");
    if (!pairs.is_array() || pairs.empty()) ctx.fail("", "'pairs' must be a non-empty array");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string where = "pairs[" + std::to_string(i) + "]";
        PairEntry p;
        p.problem_id = ctx.string_field(pairs[i], where, "problem_id");
        p.correct = ctx.candidate(ctx.field(pairs[i], where, "correct"), where + ".correct", nullptr);
        p.incorrect = ctx.candidate(ctx.field(pairs[i], where, "incorrect"), where + ".incorrect", nullptr);
        if (p.correct.candidate_id == p.incorrect.candidate_id)
            ctx.fail(where, "duplicate candidate_id '" + p.correct.candidate_id + "'");
        p.len_correct = ctx.optional_count(pairs[i], where, "len_correct");
        p.len_incorrect = ctx.optional_count(pairs[i], where, "len_incorrect");
        pm.pairs.push_back(std::move(p));
    }
    return pm;
}

namespace detail {

inline nlohmann::ordered_json candidate_json(const CandidateEntry& c, const fs::path& base) {
    auto rel = [&](const fs::path& p) {
        return fs::absolute(p).lexically_normal().lexically_relative(base).generic_string();
    };
    nlohmann::ordered_json e;
    e["candidate_id"] = c.candidate_id;
    e["answer_raw"] = c.answer_raw;
    e["bundle_qa"] = rel(c.bundle_qa);
    e["bundle_aq"] = rel(c.bundle_aq);
    return e;
}

template <class Json>
void write_json_file(const Json& doc, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw error("cannot open for writing: " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw error("failed writing " + path.string());
}

} // namespace detail

/// Writes a candidate manifest. Bundle paths are stored relative to the
/// manifest directory.
inline void write_manifest(const CandidateManifest& m, const fs::path& path) {
    const auto base = fs::absolute(path).lexically_normal().parent_path();
    nlohmann::ordered_json doc;
    doc["schema"] = kCandidateSchema;
    doc["problem_id"] = m.problem_id;
    doc["problem_text"] = m.problem_text;
    if (m.ground_truth_raw) doc["ground_truth"] = *m.ground_truth_raw;
    doc["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : m.candidates) doc["candidates"].push_back(detail::candidate_json(c, base));
    detail::write_json_file(doc, path);
}

inline void write_pair_manifest(const PairManifest& pm, const fs::path& path) {
    const auto base = fs::absolute(path).lexically_normal().parent_path();
    nlohmann::ordered_json doc;
    doc["schema"] = kPairSchema;
    doc["pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : pm.pairs) {
        nlohmann::ordered_json e;
        e["problem_id"] = p.problem_id;
        e["correct"] = detail::candidate_json(p.correct, base);
        e["incorrect"] = detail::candidate_json(p.incorrect, base);
        if (p.len_correct) e["len_correct"] = *p.len_correct;
        if (p.len_incorrect) e["len_incorrect"] = *p.len_incorrect;
        doc["pairs"].push_back(std::move(e));
    }
    detail::write_json_file(doc, path);
}

} // namespace sind::reprio
