#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fedm {

/// Trapezoidal membership function: 1 on [b,c], 0 outside [a,d], linear on the flanks.
/// A triangle is the special case b == c.
struct TrapezoidMF {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    double operator()(double x) const noexcept;

    bool well_ordered() const noexcept { return a <= b && b <= c && c <= d; }

    bool operator==(const TrapezoidMF&) const = default;
};

struct Universe {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    double width() const noexcept { return hi - lo; }

    bool operator==(const Universe&) const = default;
};

enum class VariableKind { input, internal, output };

std::string_view to_string(VariableKind kind) noexcept;
std::optional<VariableKind> parse_variable_kind(std::string_view text) noexcept;

struct Term {
    std::string name;
    std::optional<TrapezoidMF> mf;

    bool operator==(const Term&) const = default;
};

struct LinguisticVariable {
    std::string name;
    VariableKind kind = VariableKind::input;
    std::optional<Universe> universe;
    std::vector<Term> terms;

    std::optional<std::size_t> term_index(std::string_view term) const noexcept;
    bool has_term(std::string_view term) const noexcept { return term_index(term).has_value(); }

    bool operator==(const LinguisticVariable&) const = default;
};

/// A fuzzy proposition `Variable(term)`.
struct Atom {
    std::string variable;
    std::string term;

    auto operator<=>(const Atom&) const = default;
};

std::string to_string(const Atom& atom);

using Conjunction = std::vector<Atom>;
/// Disjunction of conjunctions; the only antecedent shape a rule may have.
using Dnf = std::vector<Conjunction>;

enum class RuleKind { ferr, ferd };

std::string_view to_string(RuleKind kind) noexcept;
std::optional<RuleKind> parse_rule_kind(std::string_view text) noexcept;

struct FuzzyRule {
    std::string name;
    RuleKind kind = RuleKind::ferr;
    Dnf antecedent;
    std::vector<Atom> consequents;
    double cf = 1.0;
    std::vector<std::string> principles;

    bool has_principle(std::string_view p) const noexcept;
    bool concludes(const Atom& atom) const noexcept;

    bool operator==(const FuzzyRule&) const = default;
};

using PrinciplePair = std::pair<std::string, std::string>;

/// The decision model: name, variables (inputs, the risk level, the action), rule
/// base, principle universe and the traceability map (derived from rule tags).
struct EdmModel {
    std::string name;
    std::vector<LinguisticVariable> variables;
    std::vector<std::string> principles;
    std::vector<FuzzyRule> rules;
    /// Incompatible principle pairs used by cross-principle verification.
    std::vector<PrinciplePair> incompatible;

    const LinguisticVariable* find_variable(std::string_view name) const noexcept;
    const FuzzyRule* find_rule(std::string_view name) const noexcept;
    FuzzyRule* find_rule(std::string_view name) noexcept;
    bool has_principle(std::string_view p) const noexcept;

    std::vector<const LinguisticVariable*> variables_of(VariableKind kind) const;
    /// The single internal variable. Requires a well-formed model.
    const LinguisticVariable& risk_variable() const;
    /// The single output variable. Requires a well-formed model.
    const LinguisticVariable& action_variable() const;

    /// T : rule name -> principle set.
    std::map<std::string, std::vector<std::string>> traceability() const;

    bool operator==(const EdmModel&) const = default;
};

/// Throws ModelError on the first violated invariant.
void validate_model(const EdmModel& model);

/// Checks one variable in isolation (ordering, bounds, coverage of the universe).
void validate_variable(const LinguisticVariable& variable, bool require_membership);

/// Conjunctive rule with a single consequent, derived from one disjunct and one
/// consequent atom of a parent rule.
struct NormalizedRule {
    std::string name;   // "<parent>#<k>"
    std::string parent;
    RuleKind kind = RuleKind::ferr;
    Conjunction antecedent;
    Atom consequent;
    double cf = 1.0;
    std::vector<std::string> principles;

    bool operator==(const NormalizedRule&) const = default;
};

/// Expands each rule into disjuncts x consequents, in parent order then disjunct order.
std::vector<NormalizedRule> normalize_rules(const EdmModel& model);

/// Same model with the rule base replaced by its normalized form (one rule per
/// normalized rule, single disjunct, single consequent).
EdmModel normalized_model(const EdmModel& model);

/// `(A(x) & B(y)) => C(z)`; a single antecedent atom is written without parentheses.
std::string to_string(const NormalizedRule& rule);

/// Conjunction rendered with ` & `, parenthesized when it has more than one atom.
std::string to_string(const Conjunction& conjunction);
std::string to_string(const Dnf& antecedent);

} // namespace fedm
