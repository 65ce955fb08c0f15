// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "properties.hpp"
#include "sind/sind.hpp"
#include "support.hpp"

using namespace sind;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    failures += !ok;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

oracle::OracleConfig oracle_config(std::size_t trials) {
    oracle::OracleConfig c;
    c.trials = trials;
    c.threads = 1;
    return c;
}

void oracle_ranks() {
    const auto t0 = Clock::now();
    const auto rep = oracle::run_trials(oracle_config(200));
    const double secs = seconds_since(t0);
    report("oracle-correct-rank", rep.frac_correct_match >= 0.99 && secs < 10,
           "match " + fmt("%.3f", rep.frac_correct_match) + " (>= 0.99), " + fmt("%.2f", secs) + " s (< 10)");
    report("oracle-incorrect-rank",
           rep.frac_incorrect_match >= 0.95 && rep.frac_incorrect_above == 1.0 && secs < 10,
           "match v+8 " + fmt("%.3f", rep.frac_incorrect_match) + " (>= 0.95), above " +
               fmt("%.3f", rep.frac_incorrect_above) + " (= 1), " + fmt("%.2f", secs) + " s (< 10)");
}

void krylov() {
    const auto t0 = Clock::now();
    const auto rep = oracle::run_trials(oracle_config(100));
    const double secs = seconds_since(t0);
    report("krylov-dimension", rep.frac_krylov_match >= 0.99 && secs < 5,
           "match " + fmt("%.3f", rep.frac_krylov_match) + " (>= 0.99), " + fmt("%.2f", secs) + " s (< 5)");
}

void synthetic_pairs() {
    TempDir dir;
    synth::pair_set(synth::SynthConfig{}, 100, dir.path(), 2024);
    const auto pairs = load_pairs(reprio::load_pair_manifest(dir / "pairs.json"), NormMode::spectral);
    const auto cell = evaluate_pairs(pairs, 0.0, CombineMode::add, std::nullopt);
    if (!cell.report) {
        report("synthetic-pairwise", false, cell.error);
        return;
    }
    const auto& r = *cell.report;
    report("synthetic-pairwise", pairs.size() == 100 && r.accuracy >= 0.99,
           "accuracy " + fmt("%.3f", r.accuracy) + " over " + std::to_string(r.n_used) + " pairs, " +
               std::to_string(r.n_ties) + " ties (>= 0.99)");
}

void votes() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(613);
    const std::vector<std::string> pool = {"a", "b", "c"};
    std::size_t brute_ok = 0, uniform_ok = 0;
    const std::size_t total = 1000;
    for (std::size_t t = 0; t < total; ++t) {
        const std::size_t k = 1 + gen() % 5;
        std::vector<Candidate> cands(k);
        std::vector<std::string> answers(k);
        std::vector<double> scores(k);
        for (std::size_t i = 0; i < k; ++i) {
            answers[i] = pool[gen() % pool.size()];
            scores[i] = std::uniform_real_distribution<double>(0, 2)(gen);
            cands[i] = {"c" + std::to_string(i), answers[i], scores[i]};
        }
        const auto pos = oracle_ref::positions(scores);
        std::vector<double> w(k);
        for (std::size_t i = 0; i < k; ++i) w[i] = 1.0 + 0.5 * static_cast<double>(k - pos[i]);
        brute_ok += weighted_majority_vote(cands, w).winner == oracle_ref::brute_force_winner(answers, w, pos);
        const std::vector<double> ones(k, 1.0);
        uniform_ok += weighted_majority_vote(cands, ones).winner == self_consistency_vote(cands).winner;
    }
    const double secs = seconds_since(t0);
    report("vote-correctness", brute_ok == total && uniform_ok == total && secs < 2,
           "brute force " + std::to_string(brute_ok) + "/" + std::to_string(total) + ", uniform " +
               std::to_string(uniform_ok) + "/" + std::to_string(total) + ", " + fmt("%.3f", secs) + " s (< 2)");
}

void weights() {
    bool ok = true;
    for (std::size_t k = 1; k <= 10; ++k) {
        std::vector<std::size_t> pos(k);
        for (std::size_t i = 0; i < k; ++i) pos[i] = i + 1;
        const auto w = assign_weights(pos);
        for (std::size_t i = 0; i < k; ++i) ok = ok && w[i] == 1.0 + 0.5 * static_cast<double>(k - pos[i]);
    }
    const std::vector<std::size_t> five = {1, 2, 3, 4, 5};
    const bool k5 = assign_weights(five) == std::vector<double>{3.0, 2.5, 2.0, 1.5, 1.0};
    report("weight-formula", ok && k5, std::string("K=1..10 ") + (ok ? "exact" : "mismatch") + ", K=5 " +
                                           (k5 ? "[3, 2.5, 2, 1.5, 1]" : "mismatch"));
}

void linalg_properties() {
    using Check = std::string (*)(std::uint64_t);
    const std::pair<const char*, Check> checks[] = {
        {"delta-monotonic", props::delta_monotonic},     {"permutation", props::permutation_invariance},
        {"row-duplication", props::row_duplication},     {"frobenius", props::frobenius_identity},
        {"rank-bound", props::rank_bound},               {"spectral-scale", props::spectral_scale_invariance}};
    const std::uint64_t instances = 250;
    const auto t0 = Clock::now();
    std::string first_error;
    std::size_t failed = 0;
    for (const auto& [name, check] : checks)
        for (std::uint64_t s = 0; s < instances; ++s) {
            const auto err = check(s);
            if (err.empty()) continue;
            ++failed;
            if (first_error.empty()) first_error = std::string(name) + ": " + err;
        }
    const double secs = seconds_since(t0);
    report("linalg-properties", failed == 0 && secs < 5,
           std::to_string(std::size(checks)) + " properties x " + std::to_string(instances) + " instances, " +
               std::to_string(failed) + " failures, " + fmt("%.2f", secs) + " s (< 5)" +
               (first_error.empty() ? "" : "; " + first_error));
}

int run_cli(const std::string& args) {
    const std::string cmd = "'" + std::string(SIND_CLI) + "' " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void end_to_end() {
    const fs::path fixtures = SIND_FIXTURES;
    const std::string manifest = "'" + (fixtures / "vote5" / "vote5.json").string() + "'";
    TempDir dir;
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 2; ++i) {
        const auto s = dir / ("run" + std::to_string(i) + ".scores.json");
        const auto v = dir / ("run" + std::to_string(i) + ".vote.json");
        const int rs = run_cli("score " + manifest + " --out '" + s.string() + "'");
        const int rv = run_cli("vote " + manifest + " --out '" + v.string() + "'");
        if (rs != 0 || rv != 0) {
            ok = false;
            detail = "run " + std::to_string(i) + " exited nonzero";
            break;
        }
        if (testing_support::read_text(s) != testing_support::read_text(fixtures / "golden" / "vote5.scores.json")) {
            ok = false;
            detail = "scores differ from golden on run " + std::to_string(i);
        }
        if (testing_support::read_text(v) != testing_support::read_text(fixtures / "golden" / "vote5.vote.json")) {
            ok = false;
            detail = "vote differs from golden on run " + std::to_string(i);
        }
    }
    report("end-to-end-determinism", ok, ok ? "score and vote byte-identical to golden over 2 runs" : detail);
}

RepresentationBundle random_bundle(std::mt19937_64& gen) {
    std::normal_distribution<float> nd(0.0f, 10.0f);
    const auto n = 1 + gen() % 7, m = 1 + gen() % 7, d = 1 + gen() % 9;
    RepresentationBundle b;
    b.order = gen() % 2 ? TemplateOrder::aq : TemplateOrder::qa;
    b.layer = static_cast<std::uint32_t>(gen() % 80);
    b.model = std::string(gen() % 12, 'm');
    RowMatrix p(n, d), s(m, d);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = nd(gen);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = nd(gen);
    b.problem = RepMatrix(p);
    b.solution = RepMatrix(s);
    return b;
}

bool rejects(std::vector<std::uint8_t> bytes, bundle_format_error::kind expect, const std::string& message) {
    try {
        reprio::decode_bundle(bytes);
    } catch (const bundle_format_error& e) {
        return e.failure() == expect && std::string(e.what()).find(message) != std::string::npos;
    }
    return false;
}

void bundle_format() {
    TempDir dir;
    std::mt19937_64 gen(617);
    std::size_t exact = 0;
    const std::size_t total = 100;
    for (std::size_t t = 0; t < total; ++t) {
        const auto b = random_bundle(gen);
        const auto path = dir / ("b" + std::to_string(t) + ".bin");
        reprio::write_bundle(b, path);
        const auto back = reprio::read_bundle(path);
        exact += back.order == b.order && back.layer == b.layer && back.model == b.model && back.problem == b.problem &&
                 back.solution == b.solution;
    }
    const auto good = reprio::encode_bundle(random_bundle(gen));
    using kind = bundle_format_error::kind;
    auto magic = good;
    magic[0] = 'X';
    auto version = good;
    version[4] = 9;
    auto truncated = good;
    truncated.pop_back();
    const bool m = rejects(magic, kind::bad_magic, "bad magic");
    const bool v = rejects(version, kind::version_mismatch, "version 9");
    const bool tr = rejects(truncated, kind::truncated_payload,
                            "expected " + std::to_string(good.size()) + " bytes, got " + std::to_string(truncated.size()));
    std::ostringstream detail;
    detail << exact << "/" << total << " round-trips bit-exact, bad magic " << (m ? "rejected" : "NOT rejected")
           << ", version mismatch " << (v ? "rejected" : "NOT rejected") << ", truncation "
           << (tr ? "rejected" : "NOT rejected");
    report("bundle-format", exact == total && m && v && tr, detail.str());
}

} // namespace

int main() {
    const std::array<void (*)(), 8> steps = {oracle_ranks, krylov,           synthetic_pairs, votes,
                                             weights,      linalg_properties, end_to_end,      bundle_format};
    for (auto step : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            report("unexpected-error", false, e.what());
        }
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << '\n';
    return failures ? 1 : 0;
}
