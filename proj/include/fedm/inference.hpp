#pragma once

#include "fedm/model.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fedm {

struct InferenceOptions {
    /// Samples of the risk universe used by the centroid.
    std::size_t resolution = 1001;
    /// Multiply each rule activation by its certainty factor.
    bool apply_cf = true;
};

using CrispInput = std::map<std::string, double>;
using FuzzifiedState = std::map<Atom, double>;

/// Degrees of one variable's terms, in term declaration order.
struct TermDegrees {
    std::vector<std::pair<std::string, double>> entries;

    double operator[](std::string_view term) const noexcept;
    bool operator==(const TermDegrees&) const = default;
};

TermDegrees fuzzify(const LinguisticVariable& variable, double x);

/// Fuzzifies every input variable. Throws InferenceError on missing or
/// out-of-universe values and on values for unknown or non-input variables.
FuzzifiedState fuzzify_input(const EdmModel& model, const CrispInput& input);

/// max over disjuncts of min over atoms. Throws InferenceError(unresolved_atom)
/// if an atom has no degree in the state.
double rule_activation(const FuzzyRule& rule, const FuzzifiedState& state);

/// Discrete centroid of samples taken uniformly over `universe` (first sample at
/// lo, last at hi). Throws InferenceError(empty_surface) if all samples are zero.
double defuzzify_centroid(std::span<const double> surface, const Universe& universe);

struct FiredRule {
    std::string name;
    RuleKind kind = RuleKind::ferr;
    double activation = 0.0; // mu_r, before the certainty factor
    double cf = 1.0;

    bool operator==(const FiredRule&) const = default;
};

struct InferenceResult {
    double crisp_risk = 0.0; // normalized to [0,1]
    double risk_value = 0.0; // in the risk universe
    TermDegrees risk_memberships; // clip level per risk term (aggregated rule strength)
    TermDegrees risk_degrees;     // crisp risk fuzzified back through the risk variable
    TermDegrees action_distribution;
    std::string recommended_action;
    std::vector<FiredRule> fired_rules; // model rule order, activation > 0 only

    bool operator==(const InferenceResult&) const = default;
};

InferenceResult infer(const EdmModel& model, const CrispInput& input, const InferenceOptions& options = {});

/// Keys in fixed order: crisp_risk, risk_memberships, action_distribution,
/// recommended_action, fired_rules.
nlohmann::ordered_json to_json(const InferenceResult& result);

} // namespace fedm
