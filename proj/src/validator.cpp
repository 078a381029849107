#include "fedm/validator.hpp"

#include "fedm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace fedm {

double action_similarity(const TermDegrees& system, const TermDegrees& expected)
{
    std::vector<std::string> actions;
    for (const auto& [a, d] : system.entries)
        actions.push_back(a);
    for (const auto& [a, d] : expected.entries)
        if (std::find(actions.begin(), actions.end(), a) == actions.end())
            actions.push_back(a);

    double dot = 0.0;
    double max_s = 0.0;
    double max_r = 0.0;
    for (const auto& a : actions) {
        const double s = system[a];
        const double r = expected[a];
        dot += s * r;
        max_s = std::max(max_s, s);
        max_r = std::max(max_r, r);
    }
    const double norm = std::max(max_s, max_r);
    if (norm <= 0.0)
        throw ValidationError("action similarity undefined: both distributions are zero");
    return std::min(1.0, dot / norm);
}

double principle_order_consistency(
    const PrincipleScores& scores, const std::vector<PrinciplePair>& priority, double epsilon)
{
    if (priority.empty())
        throw ValidationError("principle-order consistency undefined: no priority pairs");
    auto score = [&](const std::string& p) {
        for (const auto& [name, s] : scores)
            if (name == p)
                return s;
        throw ValidationError(fmt::format("no score for principle '{}'", p));
    };
    std::size_t sat = 0;
    for (const auto& [u, v] : priority)
        if (score(u) >= score(v) - epsilon)
            ++sat;
    return static_cast<double>(sat) / static_cast<double>(priority.size());
}

TermDegrees expected_distribution(const Referent& referent, const EdmModel& model, double crisp_risk)
{
    const auto& action = model.action_variable();
    const auto& ok = referent.acceptable_actions(crisp_risk);
    for (const auto& a : ok)
        if (!action.has_term(a))
            throw ValidationError(
                fmt::format("referent '{}' expects action '{}' the model does not declare", referent.name, a));
    TermDegrees out;
    for (const auto& t : action.terms)
        out.entries.emplace_back(t.name, std::find(ok.begin(), ok.end(), t.name) != ok.end() ? 1.0 : 0.0);
    return out;
}

SemanticResult semantic_validity(const EdmModel& model, const CrispInput& input, const std::vector<Referent>& referents,
    double epsilon, const InferenceOptions& options)
{
    SemanticResult out;
    out.input = input;
    out.inference = infer(model, input, options);
    out.trace = build_trace(model, out.inference);
    for (const auto& ref : referents) {
        ReferentVerdict v;
        v.referent = ref.name;
        v.tau = ref.tau;
        v.rho = ref.rho;
        v.expected_actions = ref.acceptable_actions(out.inference.crisp_risk);
        v.action_similarity = action_similarity(
            out.inference.action_distribution, expected_distribution(ref, model, out.inference.crisp_risk));
        v.action_pass = v.action_similarity >= v.threshold();
        if (ref.priority.empty()) {
            v.principle_pass = true;
        }
        else {
            v.principle_consistency = principle_order_consistency(out.trace.contributions, ref.priority, epsilon);
            v.principle_pass = *v.principle_consistency >= v.threshold();
        }
        out.valid = out.valid || v.passes();
        out.verdicts.push_back(std::move(v));
    }
    return out;
}

std::vector<StaticFindings> static_validation(const FuzzyPetriNet& net, const std::vector<Referent>& referents)
{
    std::set<std::string> model_vars;
    for (const auto& p : net.places)
        model_vars.insert(p.variable);

    // Conjunctive paths of the net: (input atoms, output atom).
    std::set<std::pair<std::set<Atom>, Atom>> paths;
    for (const auto& t : net.transitions)
        for (auto o : t.outputs) {
            std::set<Atom> in;
            for (auto i : t.inputs)
                in.insert(net.places[i]);
            paths.emplace(std::move(in), net.places[o]);
        }

    std::vector<StaticFindings> out;
    for (const auto& ref : referents) {
        StaticFindings f;
        f.referent = ref.name;
        for (const auto& v : ref.variables) {
            if (!model_vars.count(v.name)) {
                f.missing_variables.push_back(v.name);
                continue;
            }
            for (const auto& t : v.terms)
                if (!net.place_index(Atom{v.name, t.name}))
                    f.missing_terms.push_back(Atom{v.name, t.name});
        }
        for (const auto& rule : ref.rules) {
            bool atoms_present = true;
            std::size_t matched = 0;
            std::size_t total = 0;
            for (const auto& conj : rule.antecedent)
                for (const auto& cons : rule.consequents) {
                    ++total;
                    std::set<Atom> in(conj.begin(), conj.end());
                    for (const auto& a : in)
                        atoms_present = atoms_present && net.place_index(a).has_value();
                    atoms_present = atoms_present && net.place_index(cons).has_value();
                    if (paths.count({in, cons}))
                        ++matched;
                }
            if (!atoms_present || matched == 0)
                f.missing_rules.push_back(rule.name);
            else if (matched < total)
                f.partial_rules.push_back(rule.name);
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::string_view to_string(CfMode mode) noexcept
{
    return mode == CfMode::risk_rules ? "risk_rules" : "all_rules";
}

std::map<Atom, double> propagate_uncertainty(
    const FuzzyPetriNet& net, const std::vector<std::pair<Atom, double>>& premises, CfMode mode)
{
    std::vector<std::optional<double>> alpha(net.places.size());
    for (const auto& [atom, a] : premises) {
        const auto p = net.place_index(atom);
        if (!p)
            throw ValidationError(fmt::format("premise {} is not a place of the net", to_string(atom)));
        alpha[*p] = std::max(alpha[*p].value_or(0.0), a);
    }

    // Degrees only grow and are bounded by the premises, so this terminates;
    // the pass cap is a guard against floating-point ping-pong.
    const std::size_t max_passes = net.transitions.size() * net.places.size() + 2;
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
        bool changed = false;
        for (const auto& t : net.transitions) {
            double in = 1.0;
            bool ready = true;
            for (auto p : t.inputs) {
                if (!alpha[p]) {
                    ready = false;
                    break;
                }
                in = std::min(in, *alpha[p]);
            }
            if (!ready)
                continue;
            const bool discount = mode == CfMode::all_rules || t.kind == RuleKind::ferr;
            const double value = discount ? in * t.beta : in;
            for (auto o : t.outputs)
                if (!alpha[o] || value > *alpha[o]) {
                    alpha[o] = value;
                    changed = true;
                }
        }
        if (!changed)
            break;
    }

    std::map<Atom, double> out;
    for (std::size_t p = 0; p < alpha.size(); ++p)
        if (alpha[p])
            out[net.places[p]] = *alpha[p];
    return out;
}

std::string_view to_string(CheckStatus status) noexcept
{
    switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_derivable: return "not derivable";
    }
    return "?";
}

namespace {

// Status and degree of one check over one net.
std::pair<CheckStatus, std::optional<double>> run_check(
    const FuzzyPetriNet& net, const ReasoningCheck& check, CfMode mode, std::string* note)
{
    std::map<Atom, double> alpha;
    try {
        alpha = propagate_uncertainty(net, check.premises, mode);
    }
    catch (const ValidationError& e) {
        if (note)
            *note = e.what();
        return {CheckStatus::not_derivable, std::nullopt};
    }
    auto it = alpha.find(check.conclusion);
    if (it == alpha.end()) {
        if (note)
            *note = fmt::format("{} is not derivable from the premises", to_string(check.conclusion));
        return {CheckStatus::not_derivable, std::nullopt};
    }
    const bool ok = compare(it->second, check.comparator, check.threshold);
    return {ok ? CheckStatus::pass : CheckStatus::fail, it->second};
}

} // namespace

std::vector<CheckResult> dynamic_validation(
    const EdmModel& model, const std::vector<Referent>& referents, const DynamicOptions& options)
{
    if (options.grid < 1)
        throw ValidationError("repair grid needs at least one step");
    const FuzzyPetriNet net = build_fpn(model);
    std::vector<CheckResult> out;
    for (const auto& ref : referents)
        for (const auto& check : ref.checks) {
            CheckResult r;
            r.referent = ref.name;
            r.check = check;
            std::tie(r.status, r.alpha) = run_check(net, check, options.mode, &r.note);

            if (r.status == CheckStatus::fail && options.suggest_repairs) {
                for (const auto& rule : model.rules)
                    for (int k = 0; k <= options.grid; ++k) {
                        const double beta = static_cast<double>(k) / options.grid;
                        const double delta = std::abs(beta - rule.cf);
                        if (delta < 1e-12 || (r.repair && delta >= std::abs(r.repair->to - r.repair->from) - 1e-12))
                            continue;
                        FuzzyPetriNet trial = net;
                        for (auto& t : trial.transitions)
                            if (t.parent == rule.name)
                                t.beta = beta;
                        const auto [status, alpha] = run_check(trial, check, options.mode, nullptr);
                        if (status == CheckStatus::pass)
                            r.repair = RepairSuggestion{rule.name, rule.cf, beta, *alpha};
                    }
            }
            out.push_back(std::move(r));
        }
    return out;
}

bool ValidationReport::semantically_valid() const noexcept
{
    return std::all_of(scenarios.begin(), scenarios.end(), [](const SemanticResult& s) { return s.valid; });
}

bool ValidationReport::checks_pass() const noexcept
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == CheckStatus::pass; });
}

// Serialization

namespace {

using J = nlohmann::ordered_json;

std::string join(const std::vector<std::string>& xs)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i)
        s += (i ? ", " : "") + xs[i];
    return s;
}

std::string describe_input(const CrispInput& input)
{
    std::string s;
    for (const auto& [k, v] : input)
        s += fmt::format("{}{}={}", s.empty() ? "" : " ", k, v);
    return s;
}

std::string describe_check(const ReasoningCheck& c)
{
    std::string premises;
    for (const auto& [a, alpha] : c.premises)
        premises += fmt::format("{}{}={}", premises.empty() ? "" : " & ", to_string(a), alpha);
    return premises;
}

std::string describe_repair(const RepairSuggestion& r)
{
    return fmt::format("{} {} cf {:.2f} -> {:.2f} (gives {:.3f})", r.to > r.from ? "raise" : "lower", r.rule, r.from,
        r.to, r.alpha);
}

} // namespace

nlohmann::ordered_json to_json(const StaticFindings& f)
{
    J j;
    j["referent"] = f.referent;
    j["missing_variables"] = f.missing_variables;
    J terms = J::array();
    for (const auto& a : f.missing_terms)
        terms.push_back(to_string(a));
    j["missing_terms"] = std::move(terms);
    j["missing_rules"] = f.missing_rules;
    j["partial_rules"] = f.partial_rules;
    return j;
}

nlohmann::ordered_json to_json(const SemanticResult& s)
{
    J j;
    J input = J::object();
    for (const auto& [k, v] : s.input)
        input[k] = v;
    j["input"] = std::move(input);
    j["crisp_risk"] = s.inference.crisp_risk;
    j["recommended_action"] = s.inference.recommended_action;
    J dist = J::object();
    for (const auto& [a, d] : s.inference.action_distribution.entries)
        dist[a] = d;
    j["action_distribution"] = std::move(dist);
    J scores = J::object();
    for (const auto& [p, v] : s.trace.contributions)
        scores[p] = v;
    j["principle_scores"] = std::move(scores);
    J refs = J::array();
    for (const auto& v : s.verdicts) {
        J vj;
        vj["referent"] = v.referent;
        vj["expected_actions"] = v.expected_actions;
        vj["S_A"] = v.action_similarity;
        vj["S_P"] = v.principle_consistency ? J(*v.principle_consistency) : J(nullptr);
        vj["threshold"] = v.threshold();
        vj["action_pass"] = v.action_pass;
        vj["principle_pass"] = v.principle_pass;
        vj["pass"] = v.passes();
        refs.push_back(std::move(vj));
    }
    j["referents"] = std::move(refs);
    j["semantically_valid"] = s.valid;
    return j;
}

nlohmann::ordered_json to_json(const CheckResult& c)
{
    J j;
    j["referent"] = c.referent;
    j["check"] = c.check.name;
    j["conclusion"] = to_string(c.check.conclusion);
    j["comparator"] = std::string(to_string(c.check.comparator));
    j["threshold"] = c.check.threshold;
    j["alpha"] = c.alpha ? J(*c.alpha) : J(nullptr);
    j["status"] = std::string(to_string(c.status));
    if (!c.note.empty())
        j["note"] = c.note;
    if (c.repair) {
        J r;
        r["rule"] = c.repair->rule;
        r["from"] = c.repair->from;
        r["to"] = c.repair->to;
        r["alpha"] = c.repair->alpha;
        j["repair"] = std::move(r);
    }
    return j;
}

nlohmann::ordered_json to_json(const ValidationReport& r)
{
    J j;
    J st = J::array();
    for (const auto& f : r.static_findings)
        st.push_back(to_json(f));
    j["static"] = std::move(st);
    J sc = J::array();
    for (const auto& s : r.scenarios)
        sc.push_back(to_json(s));
    j["scenarios"] = std::move(sc);
    J ch = J::array();
    for (const auto& c : r.checks)
        ch.push_back(to_json(c));
    j["checks"] = std::move(ch);
    j["semantically_valid"] = r.semantically_valid();
    j["checks_pass"] = r.checks_pass();
    return j;
}

std::string render_static(const std::vector<StaticFindings>& findings)
{
    std::string out = "Static validation\n";
    for (const auto& f : findings) {
        if (f.empty() && f.partial_rules.empty() && f.missing_terms.empty()) {
            out += fmt::format("  {}: complete\n", f.referent);
            continue;
        }
        out += fmt::format("  {}:\n", f.referent);
        if (!f.missing_variables.empty())
            out += fmt::format("    missing variables: {}\n", join(f.missing_variables));
        if (!f.missing_terms.empty()) {
            std::vector<std::string> terms;
            for (const auto& a : f.missing_terms)
                terms.push_back(to_string(a));
            out += fmt::format("    missing terms: {}\n", join(terms));
        }
        if (!f.missing_rules.empty())
            out += fmt::format("    missing rules: {}\n", join(f.missing_rules));
        if (!f.partial_rules.empty())
            out += fmt::format("    partially covered rules: {}\n", join(f.partial_rules));
    }
    return out;
}

std::string render_semantic(const SemanticResult& s, std::size_t index)
{
    std::string out = fmt::format("Scenario {}: {} -> {} (risk {:.1f}%)\n", index + 1, describe_input(s.input),
        s.inference.recommended_action, s.inference.crisp_risk * 100.0);
    out += fmt::format("  {:<18} {:>6} {:>6} {:>6}  {:<28} {}\n", "referent", "S_A", "S_P", "1-tau", "expected",
        "verdict");
    for (const auto& v : s.verdicts)
        out += fmt::format("  {:<18} {:>6.3f} {:>6} {:>6.3f}  {:<28} {}\n", v.referent, v.action_similarity,
            v.principle_consistency ? fmt::format("{:.3f}", *v.principle_consistency) : std::string("n/a"),
            v.threshold(), "{" + join(v.expected_actions) + "}", v.passes() ? "pass" : "fail");
    out += fmt::format("  semantically valid: {}\n", s.valid ? "yes" : "no");
    return out;
}

std::string render_checks(const std::vector<CheckResult>& checks)
{
    std::string out = "Dynamic validation\n";
    if (checks.empty())
        out += "  no reasoning checks\n";
    for (const auto& c : checks) {
        out += fmt::format("  {:<18} {:<8} {} => {} = {} {} {}  {}", c.referent, c.check.name,
            describe_check(c.check), to_string(c.check.conclusion),
            c.alpha ? fmt::format("{:.4g}", *c.alpha) : std::string("?"), to_string(c.check.comparator),
            c.check.threshold, to_string(c.status));
        if (!c.note.empty())
            out += fmt::format(" ({})", c.note);
        if (c.repair)
            out += fmt::format(" [suggest: {}]", describe_repair(*c.repair));
        out += "\n";
    }
    return out;
}

std::string render_report(const ValidationReport& r)
{
    std::string out = render_static(r.static_findings);
    for (std::size_t i = 0; i < r.scenarios.size(); ++i)
        out += render_semantic(r.scenarios[i], i);
    out += render_checks(r.checks);
    out += fmt::format("Verdict: {}\n", r.ok() ? "valid" : "not valid");
    return out;
}

} // namespace fedm
