#include "fedm/verify.hpp"

#include "fedm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace fedm {

std::string_view to_string(IncompletenessKind kind) noexcept
{
    switch (kind) {
    case IncompletenessKind::uncovered_input: return "uncovered_input";
    case IncompletenessKind::dead_place: return "dead_place";
    case IncompletenessKind::unreachable_output: return "unreachable_output";
    case IncompletenessKind::uncovered_principle: return "uncovered_principle";
    case IncompletenessKind::unused_input_term: return "unused_input_term";
    }
    return "?";
}

namespace {

VariableKind kind_of(const EdmModel& model, const Atom& atom)
{
    const auto* v = model.find_variable(atom.variable);
    return v ? v->kind : VariableKind::input;
}

std::string marking_label(const ReachabilityGraph& g, std::size_t i)
{
    return fmt::format("M{} {}", i + 1, to_string(g.nodes[i]));
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }
std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

bool contains(const std::vector<std::string>& v, const std::string& x)
{
    return std::find(v.begin(), v.end(), x) != v.end();
}

/// True if some output of `a` and some output of `b` are distinct terms of one variable.
bool conflicting_outputs(const FuzzyPetriNet& net, const Transition& a, const Transition& b,
    std::vector<std::size_t>* witness = nullptr)
{
    for (auto pa : a.outputs)
        for (auto pb : b.outputs) {
            const auto& x = net.places[pa];
            const auto& y = net.places[pb];
            if (x.variable == y.variable && x.term != y.term) {
                if (witness)
                    *witness = {pa, pb};
                return true;
            }
        }
    return false;
}

std::vector<std::size_t> enabled_in(const FuzzyPetriNet& net, const Marking& m)
{
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < net.transitions.size(); ++t)
        if (net.enabled(m, t))
            out.push_back(t);
    return out;
}

} // namespace

std::vector<IncompletenessFinding> detect_incompleteness(
    const ReachabilityGraph& g, const FuzzyPetriNet& net, const EdmModel& model)
{
    std::vector<IncompletenessFinding> out;

    // (a) backward closure from markings holding a decision token.
    std::vector<std::vector<std::size_t>> preds(g.nodes.size());
    for (const auto& e : g.edges)
        preds[e.to].push_back(e.from);
    std::vector<char> decides(g.nodes.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        for (std::size_t p = 0; p < net.places.size(); ++p)
            if (g.nodes[i].has(p) && kind_of(model, net.places[p]) == VariableKind::output) {
                decides[i] = 1;
                stack.push_back(i);
                break;
            }
    while (!stack.empty()) {
        const auto n = stack.back();
        stack.pop_back();
        for (auto p : preds[n])
            if (!decides[p]) {
                decides[p] = 1;
                stack.push_back(p);
            }
    }
    for (auto i : g.initial)
        if (!decides[i]) {
            std::string atoms;
            for (std::size_t p = 0; p < net.places.size(); ++p)
                if (g.nodes[i].has(p))
                    atoms += (atoms.empty() ? "" : " & ") + to_string(net.places[p]);
            out.push_back({IncompletenessKind::uncovered_input, marking_label(g, i), i,
                fmt::format("no decision is reachable from {} ({})", marking_label(g, i), atoms)});
        }

    // (b) internal places nothing consumes.
    for (std::size_t p = 0; p < net.places.size(); ++p)
        if (kind_of(model, net.places[p]) == VariableKind::internal && net.consumers(p).empty())
            out.push_back({IncompletenessKind::dead_place, to_string(net.places[p]), std::nullopt,
                fmt::format("{} has no outgoing transition", to_string(net.places[p]))});

    // (c) declared actions that no reachable marking holds.
    std::vector<char> seen(net.places.size(), 0);
    for (const auto& m : g.nodes)
        for (std::size_t p = 0; p < m.size(); ++p)
            seen[p] = seen[p] || m.has(p);
    for (const auto* var : model.variables_of(VariableKind::output))
        for (const auto& term : var->terms) {
            const Atom a{var->name, term.name};
            const auto p = net.place_index(a);
            if (!p || !seen[*p])
                out.push_back({IncompletenessKind::unreachable_output, to_string(a), std::nullopt,
                    fmt::format("{} is unreachable from every initial marking", to_string(a))});
        }

    for (const auto* var : model.variables_of(VariableKind::input))
        for (const auto& term : var->terms) {
            const Atom a{var->name, term.name};
            if (!net.place_index(a))
                out.push_back({IncompletenessKind::unused_input_term, to_string(a), std::nullopt,
                    fmt::format("no rule covers input {}", to_string(a))});
        }
    return out;
}

std::vector<InconsistencyFinding> detect_inconsistency(
    const ReachabilityGraph& g, const FuzzyPetriNet& net, const EdmModel& model)
{
    (void)model;
    std::vector<InconsistencyFinding> out;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& m = g.nodes[i];
        std::map<std::string, std::vector<std::size_t>> by_var;
        for (std::size_t p = 0; p < m.size(); ++p)
            if (m.has(p))
                by_var[net.places[p].variable].push_back(p);
        // Report in place order.
        std::vector<std::vector<std::size_t>> groups;
        for (auto& [var, places] : by_var)
            if (places.size() > 1)
                groups.push_back(places);
        std::sort(groups.begin(), groups.end());
        for (auto& places : groups)
            out.push_back(InconsistencyFinding{i, std::move(places), std::nullopt});

        const auto en = enabled_in(net, m);
        for (std::size_t a = 0; a < en.size(); ++a)
            for (std::size_t b = a + 1; b < en.size(); ++b) {
                std::vector<std::size_t> places;
                if (conflicting_outputs(net, net.transitions[en[a]], net.transitions[en[b]], &places))
                    out.push_back(InconsistencyFinding{i, std::move(places), std::pair{en[a], en[b]}});
            }
    }
    return out;
}

std::vector<Cycle> detect_circularity(const ReachabilityGraph& g, std::size_t limit, bool* truncated)
{
    if (truncated)
        *truncated = false;
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<std::size_t>> adj(n);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> via;
    for (const auto& e : g.edges) {
        if (via.emplace(std::pair{e.from, e.to}, e.transition).second)
            adj[e.from].push_back(e.to);
    }
    for (auto& a : adj)
        std::sort(a.begin(), a.end());

    // Iterative Tarjan: component ids, so cycle search stays inside one SCC.
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, none), low(n, 0), comp(n, none), comp_size;
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> tstack;
    std::size_t counter = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != none)
            continue;
        std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
        index[root] = low[root] = counter++;
        tstack.push_back(root);
        on_stack[root] = 1;
        while (!work.empty()) {
            auto& [v, k] = work.back();
            if (k < adj[v].size()) {
                const auto w = adj[v][k++];
                if (index[w] == none) {
                    index[w] = low[w] = counter++;
                    tstack.push_back(w);
                    on_stack[w] = 1;
                    work.emplace_back(w, 0);
                }
                else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                const auto id = comp_size.size();
                std::size_t size = 0;
                std::size_t w;
                do {
                    w = tstack.back();
                    tstack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = id;
                    ++size;
                } while (w != v);
                comp_size.push_back(size);
            }
            const auto done = v;
            work.pop_back();
            if (!work.empty())
                low[work.back().first] = std::min(low[work.back().first], low[done]);
        }
    }

    // Johnson's elementary-circuit enumeration, per least vertex s.
    std::vector<Cycle> cycles;
    std::vector<char> blocked(n, 0);
    std::vector<std::set<std::size_t>> blocked_by(n);
    std::vector<std::size_t> path;
    bool stop = false;

    std::function<void(std::size_t)> unblock = [&](std::size_t u) {
        blocked[u] = 0;
        auto pending = std::move(blocked_by[u]);
        blocked_by[u].clear();
        for (auto w : pending)
            if (blocked[w])
                unblock(w);
    };

    for (std::size_t s = 0; s < n && !stop; ++s) {
        const bool self_loop = via.count({s, s}) > 0;
        if (comp_size[comp[s]] < 2 && !self_loop)
            continue;
        auto in_scope = [&](std::size_t w) { return w >= s && comp[w] == comp[s]; };
        for (std::size_t v = s; v < n; ++v)
            if (comp[v] == comp[s]) {
                blocked[v] = 0;
                blocked_by[v].clear();
            }

        std::function<bool(std::size_t)> circuit = [&](std::size_t v) {
            bool found = false;
            path.push_back(v);
            blocked[v] = 1;
            for (auto w : adj[v]) {
                if (stop)
                    break;
                if (!in_scope(w))
                    continue;
                if (w == s) {
                    Cycle c;
                    c.markings = path;
                    for (std::size_t i = 0; i < path.size(); ++i)
                        c.transitions.push_back(via.at({path[i], path[(i + 1) % path.size()]}));
                    cycles.push_back(std::move(c));
                    found = true;
                    if (cycles.size() >= limit) {
                        stop = true;
                        if (truncated)
                            *truncated = true;
                    }
                }
                else if (!blocked[w] && circuit(w)) {
                    found = true;
                }
            }
            if (found) {
                unblock(v);
            }
            else {
                for (auto w : adj[v])
                    if (in_scope(w))
                        blocked_by[w].insert(v);
            }
            path.pop_back();
            return found;
        };
        circuit(s);
    }
    return cycles;
}

std::vector<RedundancyFinding> detect_redundancy(const FuzzyPetriNet& net, const ReachabilityGraph& g)
{
    std::vector<RedundancyFinding> out;
    const auto& ts = net.transitions;
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
            if (as_set(ts[i].inputs) != as_set(ts[j].inputs) || as_set(ts[i].outputs) != as_set(ts[j].outputs)
                || ts[i].beta != ts[j].beta || as_set(ts[i].principles) != as_set(ts[j].principles))
                continue;
            RedundancyFinding f{i, j, std::nullopt};
            for (std::size_t m = 0; m < g.nodes.size(); ++m)
                if (net.enabled(g.nodes[m], i)) {
                    f.witness = m;
                    break;
                }
            out.push_back(f);
        }
    return out;
}

PrincipleCoverage principle_coverage(const EdmModel& model)
{
    PrincipleCoverage out;
    for (const auto& p : model.principles) {
        const bool covered
            = std::any_of(model.rules.begin(), model.rules.end(), [&](const FuzzyRule& r) { return r.has_principle(p); });
        out.emplace_back(p, covered ? 1 : 0);
    }
    return out;
}

std::vector<CrossPrincipleConflict> cross_principle_conflicts(const ReachabilityGraph& g, const FuzzyPetriNet& net,
    const EdmModel& model, const std::vector<PrinciplePair>& incompatible, bool strict)
{
    for (const auto& [a, b] : incompatible)
        for (const auto& p : {a, b})
            if (!model.has_principle(p))
                throw VerificationError(fmt::format("incompatible pair ({}, {}) names unknown principle '{}'", a, b, p));

    std::vector<CrossPrincipleConflict> out;
    if (incompatible.empty())
        return out;
    for (std::size_t m = 0; m < g.nodes.size(); ++m) {
        const auto en = enabled_in(net, g.nodes[m]);
        for (std::size_t x = 0; x < en.size(); ++x)
            for (std::size_t y = x + 1; y < en.size(); ++y) {
                const auto& ti = net.transitions[en[x]];
                const auto& tj = net.transitions[en[y]];
                if (!strict && !conflicting_outputs(net, ti, tj))
                    continue;
                for (const auto& [pa, pb] : incompatible) {
                    if (contains(ti.principles, pa) && contains(tj.principles, pb))
                        out.push_back({m, en[x], en[y], pa, pb});
                    else if (contains(ti.principles, pb) && contains(tj.principles, pa))
                        out.push_back({m, en[y], en[x], pa, pb});
                }
            }
    }
    return out;
}

std::vector<PrincipleRedundancy> principle_redundancy(const EdmModel& model)
{
    auto canonical = [](const FuzzyRule& r) {
        std::set<std::set<Atom>> dnf;
        for (const auto& conj : r.antecedent)
            dnf.insert(std::set<Atom>(conj.begin(), conj.end()));
        return dnf;
    };
    std::vector<PrincipleRedundancy> out;
    for (std::size_t i = 0; i < model.rules.size(); ++i)
        for (std::size_t j = i + 1; j < model.rules.size(); ++j) {
            const auto& a = model.rules[i];
            const auto& b = model.rules[j];
            if (canonical(a) == canonical(b)
                && std::set<Atom>(a.consequents.begin(), a.consequents.end())
                    == std::set<Atom>(b.consequents.begin(), b.consequents.end())
                && as_set(a.principles) == as_set(b.principles))
                out.push_back({a.name, b.name});
        }
    return out;
}

bool VerificationReport::empty() const noexcept
{
    return finding_count() == 0;
}

std::size_t VerificationReport::finding_count() const noexcept
{
    return incompleteness.size() + inconsistency.size() + circularity.size() + redundancy.size()
        + cross_principle_conflicts.size() + principle_redundancy.size();
}

VerificationReport verify(const EdmModel& model, const VerifyOptions& options)
{
    VerificationReport r;
    r.net = build_fpn(model);
    r.graph = generate_reachability(r.net, model, options.state_cap);
    r.incompleteness = detect_incompleteness(r.graph, r.net, model);
    r.principle_coverage = principle_coverage(model);
    for (const auto& [p, covered] : r.principle_coverage)
        if (!covered)
            r.incompleteness.push_back({IncompletenessKind::uncovered_principle, p, std::nullopt,
                fmt::format("no rule is tagged with principle {}", p)});
    r.inconsistency = detect_inconsistency(r.graph, r.net, model);
    r.circularity = detect_circularity(r.graph, options.cycle_limit, &r.cycles_truncated);
    r.redundancy = detect_redundancy(r.net, r.graph);
    r.cross_principle_conflicts = cross_principle_conflicts(
        r.graph, r.net, model, options.incompatible.value_or(model.incompatible), options.strict);
    r.principle_redundancy = principle_redundancy(model);
    return r;
}

namespace {

std::string transition_label(const FuzzyPetriNet& net, std::size_t t)
{
    return fmt::format("T{} ({})", t + 1, net.transitions[t].name);
}

std::string describe(const VerificationReport& r, const InconsistencyFinding& f)
{
    std::string places;
    for (auto p : f.places)
        places += (places.empty() ? "" : ", ") + fmt::format("P{} {}", p + 1, to_string(r.net.places[p]));
    if (f.transitions)
        return fmt::format("{}: {} and {} are both enabled and conclude {}", marking_label(r.graph, f.marking),
            transition_label(r.net, f.transitions->first), transition_label(r.net, f.transitions->second), places);
    return fmt::format("{}: co-asserted {}", marking_label(r.graph, f.marking), places);
}

std::string describe(const VerificationReport&, const Cycle& c)
{
    std::string out;
    for (std::size_t i = 0; i < c.markings.size(); ++i)
        out += fmt::format("M{} -T{}-> ", c.markings[i] + 1, c.transitions[i] + 1);
    return out + fmt::format("M{}", c.markings.front() + 1);
}

std::string describe(const VerificationReport& r, const RedundancyFinding& f)
{
    return fmt::format("{} duplicates {}", transition_label(r.net, f.second), transition_label(r.net, f.first));
}

std::string describe(const VerificationReport& r, const CrossPrincipleConflict& c)
{
    return fmt::format("{}: {} [{}] and {} [{}] are co-enabled", marking_label(r.graph, c.marking),
        transition_label(r.net, c.first), c.principle_a, transition_label(r.net, c.second), c.principle_b);
}

} // namespace

nlohmann::ordered_json to_json(const VerificationReport& r)
{
    using J = nlohmann::ordered_json;
    J j;
    j["places"] = r.net.places.size();
    j["transitions"] = r.net.transitions.size();
    j["markings"] = r.graph.nodes.size();
    j["edges"] = r.graph.edges.size();
    j["initial_markings"] = r.graph.initial.size();

    J inc = J::array();
    for (const auto& f : r.incompleteness) {
        J fj;
        fj["kind"] = std::string(to_string(f.kind));
        fj["subject"] = f.subject;
        if (f.marking)
            fj["marking"] = to_string(r.graph.nodes[*f.marking]);
        fj["message"] = f.message;
        inc.push_back(std::move(fj));
    }
    j["incompleteness"] = std::move(inc);

    J incons = J::array();
    for (const auto& f : r.inconsistency) {
        J fj;
        fj["marking"] = fmt::format("M{}", f.marking + 1);
        fj["vector"] = to_string(r.graph.nodes[f.marking]);
        J places = J::array();
        for (auto p : f.places)
            places.push_back(to_string(r.net.places[p]));
        fj["places"] = std::move(places);
        if (f.transitions)
            fj["transitions"] = {r.net.transitions[f.transitions->first].name,
                r.net.transitions[f.transitions->second].name};
        incons.push_back(std::move(fj));
    }
    j["inconsistency"] = std::move(incons);

    J cyc = J::array();
    for (const auto& c : r.circularity) {
        J cj;
        J ms = J::array();
        for (auto m : c.markings)
            ms.push_back(fmt::format("M{}", m + 1));
        J ts = J::array();
        for (auto t : c.transitions)
            ts.push_back(r.net.transitions[t].name);
        cj["markings"] = std::move(ms);
        cj["transitions"] = std::move(ts);
        cyc.push_back(std::move(cj));
    }
    j["circularity"] = std::move(cyc);
    j["cycles_truncated"] = r.cycles_truncated;

    J red = J::array();
    for (const auto& f : r.redundancy)
        red.push_back({r.net.transitions[f.first].name, r.net.transitions[f.second].name});
    j["redundancy"] = std::move(red);

    J cov = J::object();
    for (const auto& [p, c] : r.principle_coverage)
        cov[p] = c;
    j["principle_coverage"] = std::move(cov);

    J cross = J::array();
    for (const auto& c : r.cross_principle_conflicts) {
        J cj;
        cj["marking"] = fmt::format("M{}", c.marking + 1);
        cj["vector"] = to_string(r.graph.nodes[c.marking]);
        cj["transitions"] = {r.net.transitions[c.first].name, r.net.transitions[c.second].name};
        cj["principles"] = {c.principle_a, c.principle_b};
        cross.push_back(std::move(cj));
    }
    j["cross_principle_conflicts"] = std::move(cross);

    J pred = J::array();
    for (const auto& p : r.principle_redundancy)
        pred.push_back({p.first, p.second});
    j["principle_redundancy"] = std::move(pred);
    j["findings"] = r.finding_count();
    return j;
}

std::string render_report(const VerificationReport& r)
{
    std::string out;
    out += fmt::format("Fuzzy Petri net: {} places, {} transitions\n", r.net.places.size(), r.net.transitions.size());
    out += fmt::format("Reachability graph: {} markings ({} initial), {} edges\n", r.graph.nodes.size(),
        r.graph.initial.size(), r.graph.edges.size());

    auto section = [&out](std::string_view title, const auto& items, auto&& line) {
        out += fmt::format("{}: {}\n", title, items.empty() ? "none" : fmt::format("{}", items.size()));
        for (const auto& item : items)
            out += "  " + line(item) + "\n";
    };
    section("Incompleteness", r.incompleteness, [](const IncompletenessFinding& f) { return f.message; });
    section("Inconsistency", r.inconsistency, [&](const InconsistencyFinding& f) { return describe(r, f); });
    section("Circularity", r.circularity, [&](const Cycle& c) { return describe(r, c); });
    if (r.cycles_truncated)
        out += "  (cycle enumeration truncated)\n";
    section("Redundancy", r.redundancy, [&](const RedundancyFinding& f) { return describe(r, f); });

    std::string vec;
    std::string names;
    for (const auto& [p, c] : r.principle_coverage) {
        vec += (vec.empty() ? "" : ",") + std::to_string(c);
        names += (names.empty() ? "" : ", ") + p;
    }
    out += fmt::format("Principle coverage: [{}] over ({})\n", vec, names);
    section("Cross-principle conflicts", r.cross_principle_conflicts,
        [&](const CrossPrincipleConflict& c) { return describe(r, c); });
    section("Principle redundancy", r.principle_redundancy,
        [](const PrincipleRedundancy& p) { return fmt::format("{} and {} are identical", p.first, p.second); });
    out += r.empty() ? "Verdict: no findings\n" : fmt::format("Verdict: {} finding(s)\n", r.finding_count());
    return out;
}

} // namespace fedm
