#include "fedm/model.hpp"

#include "fedm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace fedm {

double TrapezoidMF::operator()(double x) const noexcept
{
    if (x < a || x > d)
        return 0.0;
    if (x >= b && x <= c)
        return 1.0;
    if (x < b)
        return (x - a) / (b - a);
    return (d - x) / (d - c);
}

std::string_view to_string(VariableKind kind) noexcept
{
    switch (kind) {
    case VariableKind::input:
        return "input";
    case VariableKind::internal:
        return "internal";
    case VariableKind::output:
        return "output";
    }
    return "?";
}

std::optional<VariableKind> parse_variable_kind(std::string_view text) noexcept
{
    if (text == "input")
        return VariableKind::input;
    if (text == "internal")
        return VariableKind::internal;
    if (text == "output")
        return VariableKind::output;
    return std::nullopt;
}

std::string_view to_string(RuleKind kind) noexcept
{
    return kind == RuleKind::ferr ? "FERR" : "FERD";
}

std::optional<RuleKind> parse_rule_kind(std::string_view text) noexcept
{
    if (text == "FERR")
        return RuleKind::ferr;
    if (text == "FERD")
        return RuleKind::ferd;
    return std::nullopt;
}

std::optional<std::size_t> LinguisticVariable::term_index(std::string_view term) const noexcept
{
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (terms[i].name == term)
            return i;
    return std::nullopt;
}

std::string to_string(const Atom& atom)
{
    return atom.variable + "(" + atom.term + ")";
}

bool FuzzyRule::has_principle(std::string_view p) const noexcept
{
    return std::find(principles.begin(), principles.end(), p) != principles.end();
}

bool FuzzyRule::concludes(const Atom& atom) const noexcept
{
    return std::find(consequents.begin(), consequents.end(), atom) != consequents.end();
}

const LinguisticVariable* EdmModel::find_variable(std::string_view n) const noexcept
{
    for (const auto& v : variables)
        if (v.name == n)
            return &v;
    return nullptr;
}

const FuzzyRule* EdmModel::find_rule(std::string_view n) const noexcept
{
    for (const auto& r : rules)
        if (r.name == n)
            return &r;
    return nullptr;
}

FuzzyRule* EdmModel::find_rule(std::string_view n) noexcept
{
    for (auto& r : rules)
        if (r.name == n)
            return &r;
    return nullptr;
}

bool EdmModel::has_principle(std::string_view p) const noexcept
{
    return std::find(principles.begin(), principles.end(), p) != principles.end();
}

std::vector<const LinguisticVariable*> EdmModel::variables_of(VariableKind kind) const
{
    std::vector<const LinguisticVariable*> out;
    for (const auto& v : variables)
        if (v.kind == kind)
            out.push_back(&v);
    return out;
}

namespace {

const LinguisticVariable& single_of(const EdmModel& model, VariableKind kind)
{
    auto vars = model.variables_of(kind);
    if (vars.size() != 1)
        throw ModelError(ModelErrorKind::invalid_structure,
            fmt::format("model '{}' must declare exactly one {} variable (found {})", model.name, to_string(kind),
                vars.size()));
    return *vars.front();
}

} // namespace

const LinguisticVariable& EdmModel::risk_variable() const
{
    return single_of(*this, VariableKind::internal);
}

const LinguisticVariable& EdmModel::action_variable() const
{
    return single_of(*this, VariableKind::output);
}

std::map<std::string, std::vector<std::string>> EdmModel::traceability() const
{
    std::map<std::string, std::vector<std::string>> t;
    for (const auto& r : rules)
        t[r.name] = r.principles;
    return t;
}

void validate_variable(const LinguisticVariable& v, bool require_membership)
{
    if (v.name.empty())
        throw ModelError(ModelErrorKind::invalid_structure, "variable with empty name");
    if (v.terms.empty())
        throw ModelError(ModelErrorKind::invalid_structure, fmt::format("variable '{}' declares no terms", v.name));

    std::set<std::string> seen;
    for (const auto& t : v.terms)
        if (!seen.insert(t.name).second)
            throw ModelError(ModelErrorKind::duplicate_name,
                fmt::format("variable '{}': duplicate term '{}'", v.name, t.name));

    if (v.universe && !(v.universe->lo < v.universe->hi))
        throw ModelError(ModelErrorKind::invalid_membership,
            fmt::format("variable '{}': universe [{}, {}] is empty", v.name, v.universe->lo, v.universe->hi));

    const bool any_mf = std::any_of(v.terms.begin(), v.terms.end(), [](const Term& t) { return t.mf.has_value(); });
    if (!require_membership && !any_mf)
        return;

    if (!v.universe)
        throw ModelError(ModelErrorKind::invalid_membership, fmt::format("variable '{}' needs a universe", v.name));
    const Universe u = *v.universe;

    std::vector<double> points{u.lo, u.hi};
    for (const auto& t : v.terms) {
        if (!t.mf)
            throw ModelError(ModelErrorKind::invalid_membership,
                fmt::format("variable '{}': term '{}' has no membership function", v.name, t.name));
        const auto& mf = *t.mf;
        if (!std::isfinite(mf.a) || !std::isfinite(mf.d) || !mf.well_ordered())
            throw ModelError(ModelErrorKind::invalid_membership,
                fmt::format("variable '{}': term '{}' breakpoints must satisfy a <= b <= c <= d", v.name, t.name));
        if (mf.a < u.lo || mf.d > u.hi)
            throw ModelError(ModelErrorKind::invalid_membership,
                fmt::format("variable '{}': term '{}' support [{}, {}] leaves the universe", v.name, t.name, mf.a,
                    mf.d));
        for (double p : {mf.a, mf.b, mf.c, mf.d})
            points.push_back(p);
    }

    // Membership > 0 is piecewise constant between consecutive breakpoints, so
    // checking every breakpoint and every midpoint decides coverage exactly.
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<double> probes;
    for (std::size_t i = 0; i < points.size(); ++i) {
        probes.push_back(points[i]);
        if (i + 1 < points.size())
            probes.push_back(0.5 * (points[i] + points[i + 1]));
    }
    for (double x : probes) {
        if (!u.contains(x))
            continue;
        const bool covered = std::any_of(v.terms.begin(), v.terms.end(), [x](const Term& t) { return (*t.mf)(x) > 0.0; });
        if (!covered)
            throw ModelError(ModelErrorKind::coverage_gap,
                fmt::format("variable '{}': no term has positive membership at {}", v.name, x));
    }
}

namespace {

const LinguisticVariable& resolve(const EdmModel& model, const FuzzyRule& rule, const Atom& atom)
{
    const auto* var = model.find_variable(atom.variable);
    if (!var)
        throw ModelError(ModelErrorKind::unresolved_identifier,
            fmt::format("rule '{}': unknown variable '{}'", rule.name, atom.variable));
    if (!var->has_term(atom.term))
        throw ModelError(ModelErrorKind::unresolved_identifier,
            fmt::format("rule '{}': variable '{}' has no term '{}'", rule.name, atom.variable, atom.term));
    return *var;
}

void validate_rule(const EdmModel& model, const FuzzyRule& rule)
{
    if (rule.antecedent.empty())
        throw ModelError(ModelErrorKind::invalid_structure, fmt::format("rule '{}' has no antecedent", rule.name));
    for (const auto& conj : rule.antecedent) {
        if (conj.empty())
            throw ModelError(ModelErrorKind::invalid_structure,
                fmt::format("rule '{}' has an empty conjunction", rule.name));
        std::set<std::string> vars;
        for (const auto& atom : conj) {
            const auto& var = resolve(model, rule, atom);
            if (var.kind == VariableKind::output)
                throw ModelError(ModelErrorKind::kind_mismatch,
                    fmt::format("rule '{}': antecedent uses output variable '{}'", rule.name, var.name));
            if (!vars.insert(atom.variable).second)
                throw ModelError(ModelErrorKind::invalid_structure,
                    fmt::format("rule '{}': variable '{}' appears twice in one conjunction", rule.name, atom.variable));
        }
    }

    if (rule.consequents.empty())
        throw ModelError(ModelErrorKind::invalid_structure, fmt::format("rule '{}' has no consequent", rule.name));
    const auto wanted = rule.kind == RuleKind::ferr ? VariableKind::internal : VariableKind::output;
    for (const auto& atom : rule.consequents) {
        const auto& var = resolve(model, rule, atom);
        if (var.kind != wanted)
            throw ModelError(ModelErrorKind::kind_mismatch,
                fmt::format("rule '{}': {} consequent must be an {} variable, '{}' is {}", rule.name,
                    to_string(rule.kind), to_string(wanted), var.name, to_string(var.kind)));
    }

    if (!(rule.cf >= 0.0 && rule.cf <= 1.0))
        throw ModelError(ModelErrorKind::cf_out_of_range,
            fmt::format("rule '{}': cf {} outside [0,1]", rule.name, rule.cf));

    if (rule.principles.empty())
        throw ModelError(ModelErrorKind::empty_principles, fmt::format("rule '{}' has no principle", rule.name));
    std::set<std::string> seen;
    for (const auto& p : rule.principles) {
        if (!model.has_principle(p))
            throw ModelError(ModelErrorKind::unresolved_identifier,
                fmt::format("rule '{}': unknown principle '{}'", rule.name, p));
        if (!seen.insert(p).second)
            throw ModelError(ModelErrorKind::duplicate_name,
                fmt::format("rule '{}': principle '{}' listed twice", rule.name, p));
    }
}

} // namespace

void validate_model(const EdmModel& model)
{
    if (model.name.empty())
        throw ModelError(ModelErrorKind::invalid_structure, "model has no name");

    std::set<std::string> names;
    for (const auto& v : model.variables) {
        if (!names.insert(v.name).second)
            throw ModelError(ModelErrorKind::duplicate_name, fmt::format("duplicate variable '{}'", v.name));
        validate_variable(v, v.kind != VariableKind::output);
    }
    if (model.variables_of(VariableKind::input).empty())
        throw ModelError(ModelErrorKind::invalid_structure, "model declares no input variable");
    (void)model.risk_variable();
    (void)model.action_variable();

    std::set<std::string> principles;
    for (const auto& p : model.principles)
        if (!principles.insert(p).second)
            throw ModelError(ModelErrorKind::duplicate_name, fmt::format("duplicate principle '{}'", p));

    std::set<std::string> rule_names;
    bool has_ferr = false;
    bool has_ferd = false;
    for (const auto& rule : model.rules) {
        if (!rule_names.insert(rule.name).second)
            throw ModelError(ModelErrorKind::duplicate_name, fmt::format("duplicate rule name '{}'", rule.name));
        validate_rule(model, rule);
        has_ferr = has_ferr || rule.kind == RuleKind::ferr;
        has_ferd = has_ferd || rule.kind == RuleKind::ferd;
    }
    if (!has_ferr || !has_ferd)
        throw ModelError(ModelErrorKind::missing_rule_kinds, "at least one FERR and one FERD required");

    for (const auto& [a, b] : model.incompatible)
        for (const auto& p : {a, b})
            if (!model.has_principle(p))
                throw ModelError(ModelErrorKind::unresolved_identifier,
                    fmt::format("incompatible pair ({}, {}): unknown principle '{}'", a, b, p));
}

std::vector<NormalizedRule> normalize_rules(const EdmModel& model)
{
    std::vector<NormalizedRule> out;
    for (const auto& rule : model.rules) {
        std::size_t k = 0;
        for (const auto& conj : rule.antecedent)
            for (const auto& cons : rule.consequents)
                out.push_back(NormalizedRule{
                    .name = fmt::format("{}#{}", rule.name, ++k),
                    .parent = rule.name,
                    .kind = rule.kind,
                    .antecedent = conj,
                    .consequent = cons,
                    .cf = rule.cf,
                    .principles = rule.principles,
                });
    }
    return out;
}

EdmModel normalized_model(const EdmModel& model)
{
    EdmModel out = model;
    out.rules.clear();
    for (auto& n : normalize_rules(model))
        out.rules.push_back(FuzzyRule{
            .name = std::move(n.name),
            .kind = n.kind,
            .antecedent = {std::move(n.antecedent)},
            .consequents = {std::move(n.consequent)},
            .cf = n.cf,
            .principles = std::move(n.principles),
        });
    return out;
}

std::string to_string(const Conjunction& conjunction)
{
    std::string body;
    for (std::size_t i = 0; i < conjunction.size(); ++i) {
        if (i)
            body += " & ";
        body += to_string(conjunction[i]);
    }
    return conjunction.size() > 1 ? "(" + body + ")" : body;
}

std::string to_string(const Dnf& antecedent)
{
    std::string out;
    for (std::size_t i = 0; i < antecedent.size(); ++i) {
        if (i)
            out += " | ";
        out += to_string(antecedent[i]);
    }
    return out;
}

std::string to_string(const NormalizedRule& rule)
{
    return to_string(rule.antecedent) + " => " + to_string(rule.consequent);
}

} // namespace fedm
