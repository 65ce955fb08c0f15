#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "sind/error.hpp"
#include "sind/linalg.hpp"

namespace sind {

/// Which prompt template produced a bundle's representations.
enum class TemplateOrder : std::uint8_t { qa = 0, aq = 1 };

inline std::string_view to_string(TemplateOrder order) { return order == TemplateOrder::qa ? "QA" : "AQ"; }

inline TemplateOrder parse_template_order(std::string_view s) {
    if (s == "QA" || s == "qa") return TemplateOrder::qa;
    if (s == "AQ" || s == "aq") return TemplateOrder::aq;
    throw invalid_input("unknown template order '" + std::string(s) + "' (expected QA or AQ)");
}

/// Hidden states of one (problem, solution, template order) forward pass,
/// split into problem-token rows and solution-token rows. Scaffolding tokens
/// ("Question:", "Answer:") belong to neither.
struct RepresentationBundle {
    std::string candidate_id;  // not persisted; assigned from the manifest
    TemplateOrder order = TemplateOrder::qa;
    std::string model;         // representation-model tag
    std::uint32_t layer = 26;
    RepMatrix problem;         // N x d
    RepMatrix solution;        // M x d

    std::size_t n() const noexcept { return problem.rows(); }
    std::size_t m() const noexcept { return solution.rows(); }
    std::size_t dim() const noexcept { return problem.dim(); }

    void validate() const {
        if (problem.rows() == 0 || solution.rows() == 0)
            throw invalid_input("bundle '" + candidate_id + "' needs at least one problem and one solution token");
        if (problem.dim() != solution.dim())
            throw invalid_input("bundle '" + candidate_id + "': problem rows have d=" + std::to_string(problem.dim()) +
                                " but solution rows have d=" + std::to_string(solution.dim()));
    }
};

} // namespace sind
