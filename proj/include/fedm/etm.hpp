#pragma once

#include "fedm/inference.hpp"
#include "fedm/model.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace fedm {

struct TracedRule {
    std::string name;
    RuleKind kind = RuleKind::ferd;
    double activation = 0.0;
    double cf = 1.0;
    std::vector<std::string> principles;

    double strength() const noexcept { return activation * cf; }
    bool operator==(const TracedRule&) const = default;
};

using PrincipleScores = std::vector<std::pair<std::string, double>>;

struct ExplanationTrace {
    std::string action;
    double crisp_risk = 0.0;
    double risk_value = 0.0;
    std::string risk_term; // strongest risk term at the crisp risk
    /// Score(p, action) for every principle, in principle declaration order.
    PrincipleScores contributions;
    /// contributions divided by their sum (all zero when the sum is zero).
    PrincipleScores normalized;
    /// Decision rules concluding `action` that fired; they make up the scores.
    std::vector<TracedRule> fired;
    /// Risk rules that fired on the way to the risk level (audit only).
    std::vector<TracedRule> risk_path;
    /// Principles by descending score; ties keep declaration order.
    std::vector<std::string> dominant;

    double score(std::string_view principle) const noexcept;
    /// Every principle sharing the top score (empty when all scores are zero).
    std::vector<std::string> dominant_principles() const;

    bool operator==(const ExplanationTrace&) const = default;
};

/// Throws ExplanationError("unexplainable decision") when no decision rule fired.
ExplanationTrace build_trace(const EdmModel& model, const InferenceResult& result);

std::string render_explanation(const ExplanationTrace& trace);

nlohmann::ordered_json to_json(const ExplanationTrace& trace);

} // namespace fedm
