#include "fedm/etm.hpp"

#include "fedm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace fedm {

double ExplanationTrace::score(std::string_view principle) const noexcept
{
    for (const auto& [p, s] : contributions)
        if (p == principle)
            return s;
    return 0.0;
}

std::vector<std::string> ExplanationTrace::dominant_principles() const
{
    std::vector<std::string> out;
    if (dominant.empty())
        return out;
    const double top = score(dominant.front());
    if (top <= 0.0)
        return out;
    for (const auto& p : dominant)
        if (score(p) == top)
            out.push_back(p);
    return out;
}

ExplanationTrace build_trace(const EdmModel& model, const InferenceResult& result)
{
    ExplanationTrace trace;
    trace.action = result.recommended_action;
    trace.crisp_risk = result.crisp_risk;
    trace.risk_value = result.risk_value;

    double best = -1.0;
    for (const auto& [term, degree] : result.risk_degrees.entries)
        if (degree > best) {
            best = degree;
            trace.risk_term = term;
        }

    const Atom chosen{model.action_variable().name, result.recommended_action};
    bool any_decision = false;
    for (const auto& f : result.fired_rules) {
        const auto* rule = model.find_rule(f.name);
        if (!rule || f.activation <= 0.0)
            continue;
        TracedRule t{f.name, f.kind, f.activation, f.cf, rule->principles};
        if (f.kind == RuleKind::ferr) {
            trace.risk_path.push_back(std::move(t));
            continue;
        }
        any_decision = true;
        if (rule->concludes(chosen))
            trace.fired.push_back(std::move(t));
    }
    if (!any_decision || trace.fired.empty())
        throw ExplanationError(fmt::format("unexplainable decision: no decision rule fired for '{}'", trace.action));

    for (const auto& p : model.principles) {
        double s = 0.0;
        for (const auto& r : trace.fired)
            if (std::find(r.principles.begin(), r.principles.end(), p) != r.principles.end())
                s += r.strength();
        trace.contributions.emplace_back(p, s);
    }

    const double total = std::accumulate(trace.contributions.begin(), trace.contributions.end(), 0.0,
        [](double acc, const auto& e) { return acc + e.second; });
    for (const auto& [p, s] : trace.contributions)
        trace.normalized.emplace_back(p, total > 0.0 ? s / total : 0.0);

    auto order = trace.contributions;
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& e : order)
        trace.dominant.push_back(e.first);
    return trace;
}

namespace {

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? ", " : "") + items[i];
    return out;
}

std::string render_rule_line(const TracedRule& r)
{
    return fmt::format("  {} ({}) activation {:.3f} x cf {:.3f} = {:.3f}  [{}]\n", r.name, to_string(r.kind),
        r.activation, r.cf, r.strength(), join(r.principles));
}

} // namespace

std::string render_explanation(const ExplanationTrace& trace)
{
    std::string out;
    out += fmt::format("Recommended action: {}\n", trace.action);
    out += fmt::format("Risk level: {:.1f}% ({})\n", trace.crisp_risk * 100.0, trace.risk_term);
    out += "Principle contributions (score, share):\n";
    for (std::size_t i = 0; i < trace.contributions.size(); ++i)
        out += fmt::format("  {}: {:.3f} ({:.3f})\n", trace.contributions[i].first, trace.contributions[i].second,
            trace.normalized[i].second);
    const auto top = trace.dominant_principles();
    out += fmt::format("Dominant principle{}: {}\n", top.size() > 1 ? "s" : "", top.empty() ? "none" : join(top));
    out += fmt::format("Decision rules supporting {}:\n", trace.action);
    for (const auto& r : trace.fired)
        out += render_rule_line(r);
    out += "Risk rules fired:\n";
    if (trace.risk_path.empty())
        out += "  none\n";
    for (const auto& r : trace.risk_path)
        out += render_rule_line(r);
    return out;
}

nlohmann::ordered_json to_json(const ExplanationTrace& trace)
{
    using J = nlohmann::ordered_json;
    auto scores = [](const PrincipleScores& s) {
        J o = J::object();
        for (const auto& [p, v] : s)
            o[p] = v;
        return o;
    };
    auto rules = [](const std::vector<TracedRule>& rs) {
        J a = J::array();
        for (const auto& r : rs) {
            J rj;
            rj["name"] = r.name;
            rj["kind"] = std::string(to_string(r.kind));
            rj["activation"] = r.activation;
            rj["cf"] = r.cf;
            rj["principles"] = r.principles;
            a.push_back(std::move(rj));
        }
        return a;
    };
    J j;
    j["action"] = trace.action;
    j["crisp_risk"] = trace.crisp_risk;
    j["risk_term"] = trace.risk_term;
    j["contributions"] = scores(trace.contributions);
    j["normalized"] = scores(trace.normalized);
    j["dominant"] = trace.dominant;
    j["fired"] = rules(trace.fired);
    j["risk_path"] = rules(trace.risk_path);
    return j;
}

} // namespace fedm
