#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sind/sind.hpp"

namespace fs = std::filesystem;
using namespace sind;

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string join(const std::vector<double>& xs, const char* spec = "%g") {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(spec, xs[i]);
    return out;
}

void print_table(std::ostream& os, const std::vector<std::string>& head, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(head.size());
    for (std::size_t c = 0; c < head.size(); ++c) {
        width[c] = head[c].size();
        for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            os << cells[c] << std::string(width[c] - cells[c].size(), ' ');
            os << (c + 1 < cells.size() ? "  " : "\n");
        }
    };
    line(head);
    std::vector<std::string> rule;
    for (auto w : width) rule.emplace_back(w, '-');
    line(rule);
    for (const auto& r : rows) line(r);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

/// CSV with `#` comment lines carrying the configuration echo.
void write_csv(const fs::path& path, const std::vector<std::string>& echo, const std::vector<std::string>& head,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw error("cannot open for writing: " + path.string());
    for (const auto& e : echo) out << "# " << e << '\n';
    for (std::size_t c = 0; c < head.size(); ++c) out << head[c] << (c + 1 < head.size() ? "," : "\n");
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) out << csv_field(r[c]) << (c + 1 < r.size() ? "," : "\n");
    if (!out) throw error("failed writing " + path.string());
}

fs::path default_output_dir() {
    if (const char* env = std::getenv("SIND_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

fs::path prepare_out(const fs::path& dir, const std::string& explicit_out, const std::string& name) {
    fs::path p = explicit_out.empty() ? dir / name : fs::path(explicit_out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

std::vector<fs::path> expand_manifests(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
            std::sort(found.begin(), found.end());
            if (found.empty()) throw manifest_error("no *.json manifests in directory " + in);
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.emplace_back(in);
        }
    }
    return out;
}

struct Common {
    std::string output_dir;
};

struct ScoreOpts {
    std::string manifest;
    double delta = kDefaultDelta;
    std::string combine = "add";
    std::string mode = "raw";
    std::optional<std::uint32_t> layer;
    std::string out;
    bool timing = false;
    std::string method = "self-indicator";
};

void add_score_flags(CLI::App* cmd, ScoreOpts& o) {
    cmd->add_option("manifest", o.manifest, "Candidate manifest (JSON)")->required();
    cmd->add_option("--delta", o.delta, "Singular-value threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--combine", o.combine, "Combine QA/AQ ranks: add or mul")
        ->check(CLI::IsMember({"add", "mul"}))
        ->capture_default_str();
    cmd->add_option("--mode", o.mode, "Normalization: raw, unit-rows or spectral")
        ->check(CLI::IsMember({"raw", "unit-rows", "spectral"}))
        ->capture_default_str();
    cmd->add_option("--layer", o.layer, "Require bundles from this layer");
    cmd->add_option("--out", o.out, "Output file (default: <output-dir>/<problem_id>.<kind>.json)");
    cmd->add_flag("--timing", o.timing, "Record elapsed time in the report");
}

ScoreConfig score_config(const ScoreOpts& o) {
    return {o.delta, parse_combine_mode(o.combine), parse_norm_mode(o.mode)};
}

reprio::ScoreReport run_scoring(const ScoreOpts& o, VoteMethod method) {
    const auto start = std::chrono::steady_clock::now();
    const auto manifest = reprio::load_manifest(o.manifest);
    auto report = score_manifest(manifest, score_config(o), method, o.layer);
    if (o.timing)
        report.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    return report;
}

int cmd_score(const Common& g, const ScoreOpts& o) {
    const auto report = run_scoring(o, VoteMethod::self_indicator);
    const auto path = prepare_out(g.output_dir, o.out, report.problem_id + ".scores.json");
    reprio::write_scores(report, path);

    std::vector<std::vector<std::string>> rows;
    for (const auto& c : report.candidates) {
        const auto& s = c.score;
        rows.push_back({s.candidate_id, c.answer.value_or("-"), std::to_string(s.raw_rank_qa) + "/" + std::to_string(s.tokens_qa),
                        std::to_string(s.raw_rank_aq) + "/" + std::to_string(s.tokens_aq), fmt("%.6f", s.score)});
    }
    std::cout << "problem " << report.problem_id << "  delta=" << fmt("%g", o.delta) << " combine=" << o.combine
              << " mode=" << o.mode << '\n';
    print_table(std::cout, {"candidate", "answer", "rank_qa", "rank_aq", "score"}, rows);
    if (report.vote) std::cout << "self-indicator answer: " << report.vote->winner << '\n';
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_vote(const Common& g, const ScoreOpts& o) {
    const auto method = o.method == "self-consistency" ? VoteMethod::self_consistency : VoteMethod::self_indicator;
    const auto report = run_scoring(o, method);
    if (!report.vote) throw no_answer_error("manifest " + o.manifest + ": no candidate has an extractable answer");
    const auto path = prepare_out(g.output_dir, o.out, report.problem_id + ".vote.json");
    reprio::write_vote(report, path);

    std::vector<std::vector<std::string>> rows;
    for (const auto& [answer, weight] : report.vote->tally) rows.push_back({answer, fmt("%g", weight)});
    print_table(std::cout, {"answer", "weight"}, rows);
    std::cout << "winner: " << report.vote->winner << '\n';
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

struct EvalOpts {
    std::string pairs;
    std::vector<double> delta_grid = {0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    std::vector<std::size_t> max_len_diff;
    std::string combine = "add";
    std::string mode = "raw";
    std::string out;
};

int cmd_eval_pairs(const Common& g, const EvalOpts& o) {
    const auto manifest = reprio::load_pair_manifest(o.pairs);
    const auto pairs = load_pairs(manifest, parse_norm_mode(o.mode));
    const auto combine = parse_combine_mode(o.combine);

    std::vector<std::optional<std::size_t>> filters = {std::nullopt};
    for (auto f : o.max_len_diff) filters.emplace_back(f);

    std::vector<std::vector<std::string>> rows;
    for (const auto& f : filters) {
        for (double delta : o.delta_grid) {
            const auto cell = evaluate_pairs(pairs, delta, combine, f);
            std::vector<std::string> row{fmt("%g", delta), f ? std::to_string(*f) : "none"};
            if (cell.report) {
                const auto& r = *cell.report;
                row.insert(row.end(), {fmt("%.6f", r.accuracy), std::to_string(r.n_used), std::to_string(r.n_ties),
                                       std::to_string(r.n_correct), std::to_string(r.n_filtered), ""});
            } else {
                row.insert(row.end(), {"", "0", "0", "0", std::to_string(pairs.size()), cell.error});
                std::cerr << "error: delta=" << fmt("%g", delta) << " max_len_diff=" << row[1] << ": " << cell.error << '\n';
            }
            rows.push_back(std::move(row));
        }
    }
    const std::vector<std::string> head = {"delta", "max_len_diff", "accuracy", "n_used", "n_ties", "n_correct", "n_filtered", "error"};
    const auto path = prepare_out(g.output_dir, o.out, "eval_pairs.csv");
    std::string filters_echo;
    for (auto f : o.max_len_diff) filters_echo += (filters_echo.empty() ? "" : ",") + std::to_string(f);
    write_csv(path,
              {"selfind eval-pairs", "pairs=" + fs::path(o.pairs).filename().string(), "pairs_count=" + std::to_string(pairs.size()),
               "combine=" + o.combine, "mode=" + o.mode, "delta_grid=" + join(o.delta_grid),
               "max_len_diff=" + (filters_echo.empty() ? std::string("none") : filters_echo)},
              head, rows);
    print_table(std::cout, head, rows);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

struct OracleOpts {
    oracle::OracleConfig cfg;
    std::string out;
};

void add_oracle_flags(CLI::App* cmd, oracle::OracleConfig& c) {
    cmd->add_option("--n", c.n, "Problem tokens N")->capture_default_str();
    cmd->add_option("--d", c.d, "Representation dimension")->capture_default_str();
    cmd->add_option("--r", c.r, "Rank of W")->capture_default_str();
    cmd->add_option("--m", c.m, "Correct solution length")->capture_default_str();
    cmd->add_option("--eta", c.eta, "Correct prefix length of the incorrect solution")->capture_default_str();
    cmd->add_option("--noise-len", c.noise_len, "Noise tokens after the prefix")->capture_default_str();
    cmd->add_option("--scalar-lo", c.scalar_lo, "Lower bound of the attention scalar")->capture_default_str();
    cmd->add_option("--scalar-hi", c.scalar_hi, "Upper bound of the attention scalar")->capture_default_str();
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

int cmd_oracle(const Common& g, OracleOpts& o) {
    const auto report = oracle::run_trials(o.cfg);
    const auto path = prepare_out(g.output_dir, o.out, "oracle.json");
    reprio::write_oracle_report(report, path);

    const auto& c = o.cfg;
    std::cout << "oracle  N=" << c.n << " d=" << c.d << " r=" << c.r << " m=" << c.m << " eta=" << c.eta
              << " noise_len=" << c.noise_len << " c~U[" << fmt("%g", c.scalar_lo) << "," << fmt("%g", c.scalar_hi)
              << "] trials=" << c.trials << " seed=" << c.seed << '\n';
    print_table(std::cout, {"metric", "value"},
                {{"frac_correct_match", fmt("%.4f", report.frac_correct_match)},
                 {"frac_incorrect_match", fmt("%.4f", report.frac_incorrect_match)},
                 {"frac_incorrect_above", fmt("%.4f", report.frac_incorrect_above)},
                 {"frac_krylov_match", fmt("%.4f", report.frac_krylov_match)},
                 {"mean_rank_gap", fmt("%.4f", report.mean_rank_gap)},
                 {"resamples", std::to_string(report.resamples)}});

    std::map<std::size_t, std::array<std::size_t, 3>> dist;  // rank -> counts of v, R_correct, R_incorrect
    for (const auto& t : report.trials) {
        ++dist[t.rank_w_star][0];
        ++dist[t.rank_r_correct][1];
        ++dist[t.rank_r_incorrect][2];
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& [rank, n] : dist)
        rows.push_back({std::to_string(rank), std::to_string(n[0]), std::to_string(n[1]), std::to_string(n[2])});
    std::cout << '\n';
    print_table(std::cout, {"rank", "W_star", "R_correct", "R_incorrect"}, rows);

    if (c.trials <= 20) {
        std::vector<std::vector<std::string>> per;
        for (const auto& t : report.trials)
            per.push_back({std::to_string(t.trial), std::to_string(t.rank_w_star), std::to_string(t.rank_r_correct),
                           std::to_string(t.rank_r_incorrect), std::to_string(t.predicted_incorrect),
                           std::to_string(static_cast<long>(t.rank_r_incorrect) - static_cast<long>(t.rank_r_correct))});
        std::cout << '\n';
        print_table(std::cout, {"trial", "v", "R_correct", "R_incorrect", "predicted", "rank_gap"}, per);
    }
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

struct SweepOpts {
    std::vector<std::string> manifests;
    std::vector<double> delta_grid;
    std::vector<std::size_t> k_grid;
    double delta = kDefaultDelta;
    std::string combine = "add";
    std::string mode = "raw";
    std::string out;
};

int cmd_sweep(const Common& g, const SweepOpts& o) {
    if (o.delta_grid.empty() == o.k_grid.empty()) throw invalid_input("sweep needs exactly one of --delta-grid or --k-grid");
    const auto paths = expand_manifests(o.manifests);
    std::vector<reprio::CandidateManifest> manifests;
    manifests.reserve(paths.size());
    for (const auto& p : paths) manifests.push_back(reprio::load_manifest(p));
    std::vector<ProblemSpectra> problems;
    for (const auto& m : manifests) problems.push_back(load_problem(m, parse_norm_mode(o.mode)));

    const bool by_k = !o.k_grid.empty();
    const auto combine = parse_combine_mode(o.combine);
    std::vector<std::vector<std::string>> rows;
    auto add_row = [&](const SweepCell& cell) {
        rows.push_back({fmt("%g", cell.value), std::to_string(cell.problems), fmt("%.6f", cell.accuracy_indicator()),
                        fmt("%.6f", cell.accuracy_consistency())});
    };
    if (by_k) {
        for (auto k : o.k_grid) add_row(sweep_cell(problems, {o.delta, combine, parse_norm_mode(o.mode)}, k));
    } else {
        for (double d : o.delta_grid) add_row(sweep_cell(problems, {d, combine, parse_norm_mode(o.mode)}, std::nullopt));
    }

    std::vector<std::string> echo = {by_k ? "selfind sweep k" : "selfind sweep delta", "manifests=" + std::to_string(paths.size()),
                                     "combine=" + o.combine, "mode=" + o.mode};
    if (by_k) {
        std::string ks;
        for (auto k : o.k_grid) ks += (ks.empty() ? "" : ",") + std::to_string(k);
        echo.push_back("delta=" + fmt("%g", o.delta));
        echo.push_back("k_grid=" + ks);
    } else {
        echo.push_back("delta_grid=" + join(o.delta_grid));
    }
    for (const auto& p : paths) echo.push_back("manifest=" + p.filename().string());

    const std::vector<std::string> head = {by_k ? "k" : "delta", "problems", "self_indicator", "self_consistency"};
    const auto path = prepare_out(g.output_dir, o.out, by_k ? "sweep_k.csv" : "sweep_delta.csv");
    write_csv(path, echo, head, rows);
    print_table(std::cout, head, rows);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

struct SynthOpts {
    synth::CandidateSetConfig set;
    std::size_t pairs = 100;
    std::string dir;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-indicator scoring, voting and verification"};
    app.require_subcommand(1);
    Common g;
    g.output_dir = default_output_dir().string();
    app.add_option("--output-dir", g.output_dir, "Default output directory (env SIND_OUTPUT_DIR)")->capture_default_str();

    ScoreOpts score_o;
    auto* score = app.add_subcommand("score", "Score every candidate of a manifest");
    add_score_flags(score, score_o);

    ScoreOpts vote_o;
    auto* vote = app.add_subcommand("vote", "Weighted majority vote over a manifest");
    add_score_flags(vote, vote_o);
    vote->add_option("--baseline", vote_o.method, "Use uniform weights instead (self-consistency)")
        ->check(CLI::IsMember({"self-indicator", "self-consistency"}));

    EvalOpts eval_o;
    auto* eval = app.add_subcommand("eval-pairs", "Pairwise decision accuracy over a delta grid");
    eval->add_option("pairs", eval_o.pairs, "Pair manifest (JSON)")->required();
    eval->add_option("--delta-grid", eval_o.delta_grid, "Comma-separated delta values")->delimiter(',')->capture_default_str();
    eval->add_option("--max-len-diff", eval_o.max_len_diff, "Length filters, comma-separated (e.g. 50,75)")->delimiter(',');
    eval->add_option("--combine", eval_o.combine)->check(CLI::IsMember({"add", "mul"}))->capture_default_str();
    eval->add_option("--mode", eval_o.mode)->check(CLI::IsMember({"raw", "unit-rows", "spectral"}))->capture_default_str();
    eval->add_option("--out", eval_o.out, "Output CSV (default: <output-dir>/eval_pairs.csv)");

    OracleOpts oracle_o;
    auto* orc = app.add_subcommand("oracle", "Run the linear-attention rank experiment");
    add_oracle_flags(orc, oracle_o.cfg);
    orc->add_option("--trials", oracle_o.cfg.trials, "Number of trials")->capture_default_str();
    orc->add_option("--threads", oracle_o.cfg.threads, "Worker threads")->capture_default_str();
    orc->add_option("--out", oracle_o.out, "Output JSON (default: <output-dir>/oracle.json)");

    SweepOpts sweep_o;
    auto* sweep = app.add_subcommand("sweep", "Final-answer accuracy versus delta or K");
    sweep->add_option("manifests", sweep_o.manifests, "Manifests or directories of manifests")->required();
    auto* dg = sweep->add_option("--delta-grid", sweep_o.delta_grid, "Comma-separated delta values")->delimiter(',');
    auto* kg = sweep->add_option("--k-grid", sweep_o.k_grid, "Comma-separated K values")->delimiter(',');
    dg->excludes(kg);
    sweep->add_option("--delta", sweep_o.delta, "Delta used by K sweeps")->capture_default_str();
    sweep->add_option("--combine", sweep_o.combine)->check(CLI::IsMember({"add", "mul"}))->capture_default_str();
    sweep->add_option("--mode", sweep_o.mode)->check(CLI::IsMember({"raw", "unit-rows", "spectral"}))->capture_default_str();
    sweep->add_option("--out", sweep_o.out, "Output CSV (default: <output-dir>/sweep_<delta|k>.csv)");

    SynthOpts synth_o;
    auto* syn = app.add_subcommand("synth", "Write oracle-generated bundles and manifests");
    syn->require_subcommand(1);
    auto* syn_pairs = syn->add_subcommand("pairs", "Labelled correct/incorrect pair set");
    auto* syn_cands = syn->add_subcommand("candidates", "Per-problem candidate manifests");
    for (auto* s : {syn_pairs, syn_cands}) {
        s->add_option("dir", synth_o.dir, "Output directory")->required();
        add_oracle_flags(s, synth_o.set.synth.oracle);
    }
    syn_pairs->add_option("--count", synth_o.pairs, "Number of pairs")->capture_default_str();
    syn_cands->add_option("--problems", synth_o.set.problems, "Number of problems")->capture_default_str();
    syn_cands->add_option("--k", synth_o.set.k, "Candidates per problem")->capture_default_str();
    syn_cands->add_option("--p-correct", synth_o.set.p_correct, "Probability a candidate is correct")->capture_default_str();
    syn_cands->add_option("--wrong-answers", synth_o.set.wrong_answers, "Distinct wrong answers")->capture_default_str();
    syn_cands->add_option("--noise-min", synth_o.set.noise_min)->capture_default_str();
    syn_cands->add_option("--noise-max", synth_o.set.noise_max)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*score) return cmd_score(g, score_o);
        if (*vote) return cmd_vote(g, vote_o);
        if (*eval) return cmd_eval_pairs(g, eval_o);
        if (*orc) return cmd_oracle(g, oracle_o);
        if (*sweep) return cmd_sweep(g, sweep_o);
        if (*syn_pairs) {
            const auto pm = synth::pair_set(synth_o.set.synth, synth_o.pairs, synth_o.dir, synth_o.set.synth.oracle.seed);
            std::cout << "wrote " << pm.pairs.size() << " pairs to " << pm.source.string() << '\n';
            return 0;
        }
        if (*syn_cands) {
            synth_o.set.seed = synth_o.set.synth.oracle.seed;
            const auto paths = synth::write_candidate_set(synth_o.set, synth_o.dir);
            std::cout << "wrote " << paths.size() << " manifests to " << synth_o.dir << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
