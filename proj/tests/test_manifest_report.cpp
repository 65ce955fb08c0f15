#include <fstream>
#include <limits>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "sind/pipeline.hpp"
#include "sind/reprio.hpp"
#include "support.hpp"

using namespace sind;
using namespace sind::reprio;
using testing_support::TempDir;

namespace {

const fs::path kVote5 = fs::path(SIND_FIXTURES) / "vote5" / "vote5.json";

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

/// A manifest document pointing at the vote5 fixture bundles.
nlohmann::json base_doc() {
    nlohmann::json j;
    j["schema"] = kCandidateSchema;
    j["problem_id"] = "p";
    j["problem_text"] = "What?";
    j["ground_truth"] = "\\boxed{42}";
    const auto bundles = (fs::path(SIND_FIXTURES) / "vote5" / "bundles").string();
    for (int i = 0; i < 2; ++i) {
        nlohmann::json c;
        c["candidate_id"] = "c" + std::to_string(i);
        c["answer_raw"] = "answer \\boxed{" + std::to_string(40 + i) + "}";
        c["bundle_qa"] = bundles + "/vote5.c" + std::to_string(i) + ".qa.bin";
        c["bundle_aq"] = bundles + "/vote5.c" + std::to_string(i) + ".aq.bin";
        j["candidates"].push_back(c);
    }
    return j;
}

std::string load_error(const nlohmann::json& doc) {
    TempDir dir;
    write(dir / "m.json", doc.dump());
    try {
        load_manifest(dir / "m.json");
    } catch (const manifest_error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Manifest, LoadsFixtureInOrder) {
    const auto m = load_manifest(kVote5);
    EXPECT_EQ(m.problem_id, "vote5");
    ASSERT_EQ(m.k(), 5u);
    const char* ids[] = {"c0", "c1", "c2", "c3", "c4"};
    const char* answers[] = {"42", "23", "31", "17", "17"};
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(m.candidates[i].candidate_id, ids[i]);
        EXPECT_EQ(m.candidates[i].answer.value(), answers[i]);
        EXPECT_TRUE(fs::exists(m.candidates[i].bundle_qa));
    }
    EXPECT_EQ(m.ground_truth.value(), "42");
    EXPECT_TRUE(m.warnings.empty());
}

TEST(Manifest, PreciseErrors) {
    auto missing = base_doc();
    missing["candidates"][1].erase("bundle_aq");
    const auto e1 = load_error(missing);
    EXPECT_NE(e1.find("candidates[1]"), std::string::npos) << e1;
    EXPECT_NE(e1.find("missing field 'bundle_aq'"), std::string::npos) << e1;

    auto dup = base_doc();
    dup["candidates"][1]["candidate_id"] = "c0";
    EXPECT_NE(load_error(dup).find("duplicate candidate_id 'c0'"), std::string::npos);

    auto dangling = base_doc();
    dangling["candidates"][0]["bundle_qa"] = "nowhere.bin";
    const auto e3 = load_error(dangling);
    EXPECT_NE(e3.find("dangling bundle_qa path"), std::string::npos) << e3;
    EXPECT_NE(e3.find("nowhere.bin"), std::string::npos) << e3;

    auto empty = base_doc();
    empty["candidates"] = nlohmann::json::array();
    EXPECT_NE(load_error(empty).find("non-empty"), std::string::npos);

    auto no_id = base_doc();
    no_id.erase("problem_id");
    EXPECT_NE(load_error(no_id).find("missing field 'problem_id'"), std::string::npos);

    TempDir dir;
    write(dir / "bad.json", "{not json");
    EXPECT_THROW(load_manifest(dir / "bad.json"), manifest_error);
    EXPECT_THROW(load_manifest(dir / "absent.json"), manifest_error);
}

TEST(Manifest, UnextractableAnswerIsExcludedWithWarning) {
    auto doc = base_doc();
    doc["candidates"][1]["answer_raw"] = "I am not sure";
    TempDir dir;
    write(dir / "m.json", doc.dump());
    const auto m = load_manifest(dir / "m.json");
    EXPECT_FALSE(m.candidates[1].answer.has_value());
    ASSERT_EQ(m.warnings.size(), 1u);
    EXPECT_NE(m.warnings[0].find("'c1'"), std::string::npos);

    const auto r = score_manifest(m, ScoreConfig{});
    ASSERT_TRUE(r.vote.has_value());
    EXPECT_EQ(r.vote->excluded, std::vector<std::string>{"c1"});
    EXPECT_EQ(r.vote->winner, "40");
}

TEST(Manifest, WriteThenLoad) {
    const auto m = load_manifest(kVote5);
    TempDir dir;
    fs::create_directories(dir / "sub");
    write_manifest(m, dir / "sub" / "copy.json");
    const auto back = load_manifest(dir / "sub" / "copy.json");
    ASSERT_EQ(back.k(), m.k());
    for (std::size_t i = 0; i < m.k(); ++i) {
        EXPECT_EQ(back.candidates[i].candidate_id, m.candidates[i].candidate_id);
        EXPECT_EQ(back.candidates[i].answer_raw, m.candidates[i].answer_raw);
        EXPECT_TRUE(fs::equivalent(back.candidates[i].bundle_qa, m.candidates[i].bundle_qa));
    }
    EXPECT_EQ(back.ground_truth_raw, m.ground_truth_raw);
}

TEST(PairManifest, LoadsFixtureAndRejectsDuplicates) {
    const auto pm = load_pair_manifest(fs::path(SIND_FIXTURES) / "pairs" / "pairs.json");
    ASSERT_EQ(pm.pairs.size(), 8u);
    EXPECT_EQ(pm.pairs[0].correct.candidate_id, "good");
    EXPECT_TRUE(pm.pairs[0].len_correct.has_value());

    nlohmann::json doc = nlohmann::json::parse(testing_support::read_text(fs::path(SIND_FIXTURES) / "pairs" / "pairs.json"));
    doc["pairs"][0]["incorrect"]["candidate_id"] = "good";
    TempDir dir;
    fs::copy(fs::path(SIND_FIXTURES) / "pairs" / "bundles", dir / "bundles");
    write(dir / "p.json", doc.dump());
    EXPECT_THROW(load_pair_manifest(dir / "p.json"), manifest_error);
    doc["pairs"][0].erase("incorrect");
    write(dir / "p.json", doc.dump());
    try {
        load_pair_manifest(dir / "p.json");
        FAIL();
    } catch (const manifest_error& e) {
        EXPECT_NE(std::string(e.what()).find("pairs[0]: missing field 'incorrect'"), std::string::npos) << e.what();
    }
}

TEST(Report, RoundTrip) {
    const auto r = score_manifest(load_manifest(kVote5), ScoreConfig{});
    TempDir dir;
    write_scores(r, dir / "s.json");
    const auto back = read_scores(dir / "s.json");
    EXPECT_EQ(back.problem_id, r.problem_id);
    EXPECT_EQ(back.ground_truth, r.ground_truth);
    ASSERT_EQ(back.candidates.size(), r.candidates.size());
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        EXPECT_EQ(back.candidates[i].score.score, r.candidates[i].score.score);
        EXPECT_EQ(back.candidates[i].score.raw_rank_qa, r.candidates[i].score.raw_rank_qa);
        EXPECT_EQ(back.candidates[i].answer, r.candidates[i].answer);
    }
    ASSERT_TRUE(back.vote);
    EXPECT_EQ(back.vote->winner, r.vote->winner);
    EXPECT_EQ(back.vote->tally, r.vote->tally);
    EXPECT_EQ(back.config->delta, 1.75);
    EXPECT_EQ(back.config->representation_model, "oracle-linear-attention");
    EXPECT_EQ(score_report_text(back), score_report_text(r));
}

TEST(Report, ConfigEchoReproducesScores) {
    const auto m = load_manifest(kVote5);
    const auto r = score_manifest(m, {0.5, CombineMode::mul, NormMode::unit_rows});
    TempDir dir;
    write_scores(r, dir / "s.json");
    const auto echo = *read_scores(dir / "s.json").config;
    const auto again = score_manifest(m, {echo.delta, echo.combine, echo.mode});
    EXPECT_EQ(score_report_text(again), score_report_text(r));
}

TEST(Report, RejectsMissingConfig) {
    ScoreReport r;
    r.problem_id = "x";
    EXPECT_THROW(score_report_text(r), invalid_input);
    TempDir dir;
    EXPECT_THROW(write_scores(r, dir / "x.json"), invalid_input);
    EXPECT_FALSE(fs::exists(dir / "x.json"));
}

TEST(Report, UnwritablePath) {
    const auto r = score_manifest(load_manifest(kVote5), ScoreConfig{});
    EXPECT_THROW(write_scores(r, "/nonexistent-dir/s.json"), error);
}

TEST(Report, OracleReportWritesNullForInfiniteGaps) {
    oracle::OracleReport rep;
    rep.config.trials = 1;
    oracle::TrialRecord t;
    t.gap_correct = std::numeric_limits<double>::infinity();
    t.gap_incorrect = 3.0;
    rep.trials.push_back(t);
    const auto doc = nlohmann::json::parse(oracle_report_text(rep));
    EXPECT_EQ(doc["schema"], kOracleSchema);
    EXPECT_TRUE(doc["trials"][0]["gap_correct"].is_null());
    EXPECT_EQ(doc["trials"][0]["gap_incorrect"], 3.0);
    EXPECT_EQ(doc["config"]["zero_cutoff"], 1e-10);
}
