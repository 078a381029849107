#include "fedm/inference.hpp"

#include "fedm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace fedm {

double TermDegrees::operator[](std::string_view term) const noexcept
{
    for (const auto& [name, degree] : entries)
        if (name == term)
            return degree;
    return 0.0;
}

TermDegrees fuzzify(const LinguisticVariable& variable, double x)
{
    if (!variable.universe || !variable.universe->contains(x))
        throw InferenceError(InferenceErrorKind::out_of_range,
            variable.universe ? fmt::format("{} = {} lies outside [{}, {}]", variable.name, x, variable.universe->lo,
                                    variable.universe->hi)
                              : fmt::format("variable '{}' has no universe", variable.name));
    TermDegrees out;
    for (const auto& t : variable.terms) {
        if (!t.mf)
            throw InferenceError(InferenceErrorKind::unsupported,
                fmt::format("{}({}) has no membership function", variable.name, t.name));
        out.entries.emplace_back(t.name, std::clamp((*t.mf)(x), 0.0, 1.0));
    }
    return out;
}

FuzzifiedState fuzzify_input(const EdmModel& model, const CrispInput& input)
{
    for (const auto& [name, value] : input) {
        const auto* var = model.find_variable(name);
        if (!var || var->kind != VariableKind::input)
            throw InferenceError(InferenceErrorKind::missing_input, fmt::format("'{}' is not an input variable", name));
    }
    FuzzifiedState state;
    for (const auto* var : model.variables_of(VariableKind::input)) {
        auto it = input.find(var->name);
        if (it == input.end())
            throw InferenceError(InferenceErrorKind::missing_input, fmt::format("no value for input '{}'", var->name));
        for (const auto& [term, degree] : fuzzify(*var, it->second).entries)
            state[Atom{var->name, term}] = degree;
    }
    return state;
}

double rule_activation(const FuzzyRule& rule, const FuzzifiedState& state)
{
    double best = 0.0;
    for (const auto& conj : rule.antecedent) {
        double m = 1.0;
        for (const auto& atom : conj) {
            auto it = state.find(atom);
            if (it == state.end())
                throw InferenceError(InferenceErrorKind::unresolved_atom,
                    fmt::format("rule '{}': no degree for {}", rule.name, to_string(atom)));
            m = std::min(m, it->second);
        }
        best = std::max(best, m);
    }
    return best;
}

double defuzzify_centroid(std::span<const double> surface, const Universe& universe)
{
    if (surface.size() < 2)
        throw InferenceError(InferenceErrorKind::empty_surface, "output surface needs at least two samples");
    const double step = universe.width() / static_cast<double>(surface.size() - 1);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < surface.size(); ++i) {
        const double x = universe.lo + step * static_cast<double>(i);
        num += x * surface[i];
        den += surface[i];
    }
    if (den <= 0.0)
        throw InferenceError(InferenceErrorKind::empty_surface, "empty output surface");
    return num / den;
}

namespace {

std::string describe_input(const CrispInput& input)
{
    std::string out;
    for (const auto& [name, value] : input)
        out += fmt::format("{}{}={}", out.empty() ? "" : " ", name, value);
    return out;
}

bool mentions(const FuzzyRule& rule, VariableKind kind, const EdmModel& model)
{
    for (const auto& conj : rule.antecedent)
        for (const auto& atom : conj)
            if (const auto* v = model.find_variable(atom.variable); v && v->kind == kind)
                return true;
    return false;
}

// Fires every rule of `kind`, recording activations, and returns the max
// aggregated strength per term of `target`.
TermDegrees fire(const EdmModel& model, RuleKind kind, const LinguisticVariable& target, const FuzzifiedState& state,
    const InferenceOptions& options, std::vector<FiredRule>& fired)
{
    TermDegrees out;
    for (const auto& t : target.terms)
        out.entries.emplace_back(t.name, 0.0);
    for (const auto& rule : model.rules) {
        if (rule.kind != kind)
            continue;
        const double mu = rule_activation(rule, state);
        if (mu <= 0.0)
            continue;
        fired.push_back(FiredRule{rule.name, rule.kind, mu, rule.cf});
        const double strength = options.apply_cf ? mu * rule.cf : mu;
        for (const auto& c : rule.consequents)
            for (auto& [term, degree] : out.entries)
                if (term == c.term)
                    degree = std::max(degree, strength);
    }
    return out;
}

bool all_zero(const TermDegrees& d)
{
    return std::all_of(d.entries.begin(), d.entries.end(), [](const auto& e) { return e.second <= 0.0; });
}

} // namespace

InferenceResult infer(const EdmModel& model, const CrispInput& input, const InferenceOptions& options)
{
    if (options.resolution < 2)
        throw InferenceError(InferenceErrorKind::unsupported, "centroid resolution must be at least 2");
    for (const auto& rule : model.rules)
        if (rule.kind == RuleKind::ferr && mentions(rule, VariableKind::internal, model))
            throw InferenceError(InferenceErrorKind::unsupported,
                fmt::format("rule '{}': risk rules chained on risk levels are not supported by inference", rule.name));

    const auto& risk = model.risk_variable();
    const auto& action = model.action_variable();
    FuzzifiedState state = fuzzify_input(model, input);

    InferenceResult result;
    result.risk_memberships = fire(model, RuleKind::ferr, risk, state, options, result.fired_rules);
    if (all_zero(result.risk_memberships))
        throw InferenceError(InferenceErrorKind::uncovered_risk,
            fmt::format("input not covered by risk rules: {}", describe_input(input)));

    // Mamdani: clip each risk term at its rule strength, aggregate by max.
    const Universe u = *risk.universe;
    std::vector<double> surface(options.resolution, 0.0);
    const double step = u.width() / static_cast<double>(options.resolution - 1);
    for (std::size_t i = 0; i < surface.size(); ++i) {
        const double x = u.lo + step * static_cast<double>(i);
        double m = 0.0;
        for (std::size_t k = 0; k < risk.terms.size(); ++k)
            m = std::max(m, std::min(result.risk_memberships.entries[k].second, (*risk.terms[k].mf)(x)));
        surface[i] = m;
    }
    result.risk_value = defuzzify_centroid(surface, u);
    result.crisp_risk = (result.risk_value - u.lo) / u.width();

    result.risk_degrees = fuzzify(risk, std::clamp(result.risk_value, u.lo, u.hi));
    for (const auto& [term, degree] : result.risk_degrees.entries)
        state[Atom{risk.name, term}] = degree;

    result.action_distribution = fire(model, RuleKind::ferd, action, state, options, result.fired_rules);
    if (all_zero(result.action_distribution))
        throw InferenceError(InferenceErrorKind::uncovered_decision,
            fmt::format("input not covered by decision rules: {}", describe_input(input)));

    // First maximum in declaration order wins ties.
    const auto& entries = result.action_distribution.entries;
    auto best = entries.begin();
    for (auto it = entries.begin(); it != entries.end(); ++it)
        if (it->second > best->second)
            best = it;
    result.recommended_action = best->first;

    // fired_rules is collected FERRs first; restore model order.
    std::vector<FiredRule> ordered;
    for (const auto& rule : model.rules)
        for (const auto& f : result.fired_rules)
            if (f.name == rule.name)
                ordered.push_back(f);
    result.fired_rules = std::move(ordered);
    return result;
}

nlohmann::ordered_json to_json(const InferenceResult& r)
{
    nlohmann::ordered_json j;
    auto degrees = [](const TermDegrees& d) {
        nlohmann::ordered_json o = nlohmann::ordered_json::object();
        for (const auto& [term, degree] : d.entries)
            o[term] = degree;
        return o;
    };
    j["crisp_risk"] = r.crisp_risk;
    j["risk_memberships"] = degrees(r.risk_memberships);
    j["action_distribution"] = degrees(r.action_distribution);
    j["recommended_action"] = r.recommended_action;
    auto fired = nlohmann::ordered_json::array();
    for (const auto& f : r.fired_rules) {
        nlohmann::ordered_json fj;
        fj["name"] = f.name;
        fj["kind"] = std::string(to_string(f.kind));
        fj["activation"] = f.activation;
        fj["cf"] = f.cf;
        fired.push_back(std::move(fj));
    }
    j["fired_rules"] = std::move(fired);
    return j;
}

} // namespace fedm
