// Regenerates the shipped test fixtures under the given directory.

#include <filesystem>
#include <iostream>

#include "sind/synth.hpp"

namespace fs = std::filesystem;
using namespace sind;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <fixtures-dir>\n";
        return 2;
    }
    const fs::path root = argv[1];
    synth::SynthConfig cfg;

    // 42 is right; 17 is the wrong majority carried by the two noisiest candidates.
    const std::vector<synth::CandidateSpec> five = {
        {"c0", "Adding the parts gives \\boxed{42}.", true, 0},
        {"c1", "The result is \\boxed{23}.", false, 3},
        {"c2", "So the answer is \\boxed{31}.", false, 5},
        {"c3", "Therefore \\boxed{17}.", false, 10},
        {"c4", "The final answer is 17", false, 12},
    };
    synth::write_problem(cfg, "vote5", five, "42", root / "vote5", 5);
    synth::write_problem(cfg, "single", {{"c0", "\\boxed{7}", true, 0}}, "7", root / "single", 1);
    synth::pair_set(cfg, 8, root / "pairs", 3);
    std::cout << "fixtures written to " << root.string() << '\n';
    return 0;
}
