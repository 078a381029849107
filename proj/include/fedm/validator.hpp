#pragma once

#include "fedm/etm.hpp"
#include "fedm/fpn.hpp"
#include "fedm/inference.hpp"
#include "fedm/model.hpp"
#include "fedm/referent.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fedm {

constexpr double kDefaultEpsilon = 0.02;

/// S_A = min(1, sum_a mu_S(a) mu_R(a) / max(max mu_S, max mu_R)) over the union of
/// action names. Throws ValidationError if both distributions are all zero.
double action_similarity(const TermDegrees& system, const TermDegrees& expected);

/// Mean of sat(u, v) = [score(u) >= score(v) - epsilon] over the priority pairs.
/// Throws ValidationError on an empty pair list or an unscored principle.
double principle_order_consistency(
    const PrincipleScores& scores, const std::vector<PrinciplePair>& priority, double epsilon = kDefaultEpsilon);

/// mu_R: 1 for each action acceptable at `crisp_risk`, 0 for the model's other actions.
TermDegrees expected_distribution(const Referent& referent, const EdmModel& model, double crisp_risk);

struct ReferentVerdict {
    std::string referent;
    double tau = 0.0;
    double rho = 0.0;
    std::vector<std::string> expected_actions;
    double action_similarity = 0.0;
    /// Empty when the referent has no priority pairs (principle test not applicable).
    std::optional<double> principle_consistency;
    bool action_pass = false;
    bool principle_pass = false;

    double threshold() const noexcept { return 1.0 - tau; }
    bool passes() const noexcept { return action_pass && principle_pass; }
};

struct SemanticResult {
    CrispInput input;
    InferenceResult inference;
    ExplanationTrace trace;
    std::vector<ReferentVerdict> verdicts;
    bool valid = false; // some referent passes both tests
};

SemanticResult semantic_validity(const EdmModel& model, const CrispInput& input, const std::vector<Referent>& referents,
    double epsilon = kDefaultEpsilon, const InferenceOptions& options = {});

struct StaticFindings {
    std::string referent;
    std::vector<std::string> missing_variables;
    /// Terms of variables the model has, absent from the net.
    std::vector<Atom> missing_terms;
    /// Expected rules with no counterpart transition.
    std::vector<std::string> missing_rules;
    /// Expected rules matched by some but not all of their conjunctive paths.
    std::vector<std::string> partial_rules;

    bool empty() const noexcept { return missing_variables.empty() && missing_rules.empty(); }
};

/// Diffs each referent's variables and expected rules against the places and
/// transitions of the model's net.
std::vector<StaticFindings> static_validation(const FuzzyPetriNet& net, const std::vector<Referent>& referents);

/// How certainty factors enter propagation.
enum class CfMode {
    /// beta discounts risk-rule transitions only; decision transitions pass the
    /// min of their premises through. Reproduces the published worked values.
    risk_rules,
    /// beta discounts every transition.
    all_rules,
};

std::string_view to_string(CfMode mode) noexcept;

/// Forward propagation to a fixpoint. A transition fires once every input place
/// holds a degree; it writes min(inputs) * beta, and several writers to one
/// place combine by max. Throws ValidationError if a premise is not a place.
std::map<Atom, double> propagate_uncertainty(
    const FuzzyPetriNet& net, const std::vector<std::pair<Atom, double>>& premises, CfMode mode = CfMode::risk_rules);

enum class CheckStatus { pass, fail, not_derivable };

std::string_view to_string(CheckStatus status) noexcept;

struct RepairSuggestion {
    std::string rule;
    double from = 0.0;
    double to = 0.0;
    double alpha = 0.0; // conclusion degree after the change
};

struct CheckResult {
    std::string referent;
    ReasoningCheck check;
    std::optional<double> alpha;
    CheckStatus status = CheckStatus::fail;
    std::string note; // why a check is not derivable
    std::optional<RepairSuggestion> repair;
};

struct DynamicOptions {
    CfMode mode = CfMode::risk_rules;
    /// Candidate cf values are k / grid for k = 0..grid.
    int grid = 20;
    bool suggest_repairs = true;
};

/// Runs every reasoning check of every referent over the model's net. For a
/// failing check, suggests the smallest single-rule cf change on the grid that
/// makes it pass (never applied).
std::vector<CheckResult> dynamic_validation(
    const EdmModel& model, const std::vector<Referent>& referents, const DynamicOptions& options = {});

struct ValidationReport {
    std::vector<StaticFindings> static_findings;
    std::vector<SemanticResult> scenarios;
    std::vector<CheckResult> checks;

    bool semantically_valid() const noexcept;
    bool checks_pass() const noexcept;
    bool ok() const noexcept { return semantically_valid() && checks_pass(); }
};

nlohmann::ordered_json to_json(const StaticFindings& findings);
nlohmann::ordered_json to_json(const SemanticResult& result);
nlohmann::ordered_json to_json(const CheckResult& result);
nlohmann::ordered_json to_json(const ValidationReport& report);

std::string render_static(const std::vector<StaticFindings>& findings);
std::string render_semantic(const SemanticResult& result, std::size_t index);
std::string render_checks(const std::vector<CheckResult>& checks);
std::string render_report(const ValidationReport& report);

} // namespace fedm
