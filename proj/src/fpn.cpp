#include "fedm/fpn.hpp"

#include "fedm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <deque>
#include <numeric>

namespace fedm {

std::size_t Marking::count() const noexcept
{
    return static_cast<std::size_t>(std::count(tokens.begin(), tokens.end(), std::uint8_t{1}));
}

std::string to_string(const Marking& m)
{
    std::string out = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i)
            out += ',';
        out += m.has(i) ? '1' : '0';
    }
    return out + "]";
}

std::size_t MarkingHash::operator()(const Marking& m) const noexcept
{
    // FNV-1a over the token bytes.
    std::size_t h = 1469598103934665603ull;
    for (auto b : m.tokens) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::optional<std::size_t> FuzzyPetriNet::place_index(const Atom& atom) const
{
    auto it = std::find(places.begin(), places.end(), atom);
    if (it == places.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - places.begin());
}

bool FuzzyPetriNet::enabled(const Marking& m, std::size_t t) const
{
    const auto& in = transitions[t].inputs;
    return std::all_of(in.begin(), in.end(), [&](std::size_t p) { return m.has(p); });
}

Marking FuzzyPetriNet::fire(const Marking& m, std::size_t t) const
{
    Marking out = m;
    for (auto p : transitions[t].inputs)
        out.set(p, false);
    for (auto p : transitions[t].outputs)
        out.set(p, true);
    return out;
}

std::vector<std::size_t> FuzzyPetriNet::consumers(std::size_t place) const
{
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < transitions.size(); ++t) {
        const auto& in = transitions[t].inputs;
        if (std::find(in.begin(), in.end(), place) != in.end())
            out.push_back(t);
    }
    return out;
}

FuzzyPetriNet build_fpn(const std::vector<NormalizedRule>& rules, const EdmModel& model)
{
    // Rank atoms by (variable declaration index, term declaration index).
    auto rank = [&](const Atom& a) {
        for (std::size_t v = 0; v < model.variables.size(); ++v)
            if (model.variables[v].name == a.variable) {
                auto t = model.variables[v].term_index(a.term);
                return std::pair{v, t.value_or(model.variables[v].terms.size())};
            }
        return std::pair{model.variables.size(), std::size_t{0}};
    };

    std::vector<Atom> atoms;
    for (const auto& r : rules) {
        for (const auto& a : r.antecedent)
            atoms.push_back(a);
        atoms.push_back(r.consequent);
    }
    std::stable_sort(atoms.begin(), atoms.end(), [&](const Atom& x, const Atom& y) { return rank(x) < rank(y); });
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());

    FuzzyPetriNet net;
    net.places = std::move(atoms);
    for (const auto& r : rules) {
        Transition t;
        t.name = r.name;
        t.parent = r.parent;
        t.kind = r.kind;
        for (const auto& a : r.antecedent) {
            const auto p = *net.place_index(a);
            if (std::find(t.inputs.begin(), t.inputs.end(), p) == t.inputs.end())
                t.inputs.push_back(p);
        }
        t.outputs.push_back(*net.place_index(r.consequent));
        t.beta = r.cf;
        t.principles = r.principles;
        net.transitions.push_back(std::move(t));
    }
    return net;
}

FuzzyPetriNet build_fpn(const EdmModel& model)
{
    return build_fpn(normalize_rules(model), model);
}

std::optional<std::size_t> ReachabilityGraph::find(const Marking& m) const
{
    auto it = index.find(m);
    if (it == index.end())
        return std::nullopt;
    return it->second;
}

std::vector<std::vector<std::size_t>> ReachabilityGraph::successors() const
{
    std::vector<std::vector<std::size_t>> adj(nodes.size());
    for (const auto& e : edges)
        adj[e.from].push_back(e.to);
    return adj;
}

std::vector<Marking> initial_markings(const FuzzyPetriNet& net, const EdmModel& model)
{
    std::vector<std::vector<std::size_t>> choices;
    for (const auto* var : model.variables_of(VariableKind::input)) {
        std::vector<std::size_t> places;
        for (const auto& term : var->terms)
            if (auto p = net.place_index(Atom{var->name, term.name}))
                places.push_back(*p);
        if (!places.empty())
            choices.push_back(std::move(places));
    }

    std::vector<Marking> out;
    if (choices.empty())
        return out;
    std::vector<std::size_t> pick(choices.size(), 0);
    for (;;) {
        Marking m(net.places.size());
        for (std::size_t v = 0; v < choices.size(); ++v)
            m.set(choices[v][pick[v]]);
        out.push_back(std::move(m));
        // Odometer with the last variable varying fastest.
        std::size_t v = choices.size();
        while (v > 0) {
            --v;
            if (++pick[v] < choices[v].size())
                break;
            pick[v] = 0;
            if (v == 0)
                return out;
        }
    }
}

ReachabilityGraph generate_reachability(
    const FuzzyPetriNet& net, const std::vector<Marking>& initial, std::size_t state_cap)
{
    ReachabilityGraph g;
    std::deque<std::size_t> queue;
    auto intern = [&](const Marking& m) {
        auto [it, inserted] = g.index.emplace(m, g.nodes.size());
        if (inserted) {
            if (g.nodes.size() >= state_cap)
                throw VerificationError(
                    fmt::format("state explosion: reachability exceeded {} markings", state_cap));
            g.nodes.push_back(m);
            queue.push_back(it->second);
        }
        return it->second;
    };

    for (const auto& m : initial) {
        if (m.size() != net.places.size())
            throw VerificationError("initial marking length differs from the number of places");
        const auto id = intern(m);
        if (std::find(g.initial.begin(), g.initial.end(), id) == g.initial.end())
            g.initial.push_back(id);
    }

    while (!queue.empty()) {
        const std::size_t from = queue.front();
        queue.pop_front();
        for (std::size_t t = 0; t < net.transitions.size(); ++t) {
            if (!net.enabled(g.nodes[from], t))
                continue;
            const Marking next = net.fire(g.nodes[from], t);
            const std::size_t to = intern(next);
            g.edges.push_back(ReachabilityEdge{from, t, to});
        }
    }
    return g;
}

ReachabilityGraph generate_reachability(const FuzzyPetriNet& net, const EdmModel& model, std::size_t state_cap)
{
    return generate_reachability(net, initial_markings(net, model), state_cap);
}

std::string net_to_dot(const FuzzyPetriNet& net)
{
    std::string out = "digraph FPN {\n  rankdir=LR;\n";
    for (std::size_t p = 0; p < net.places.size(); ++p)
        out += fmt::format("  p{} [shape=circle, label=\"P{}\\n{}\"];\n", p + 1, p + 1, to_string(net.places[p]));
    for (std::size_t t = 0; t < net.transitions.size(); ++t) {
        const auto& tr = net.transitions[t];
        std::string principles;
        for (std::size_t i = 0; i < tr.principles.size(); ++i)
            principles += (i ? ", " : "") + tr.principles[i];
        out += fmt::format("  t{} [shape=box, label=\"T{}\\n{} beta={}\\n{{{}}}\"];\n", t + 1, t + 1, tr.name,
            tr.beta, principles);
    }
    for (std::size_t t = 0; t < net.transitions.size(); ++t) {
        for (auto p : net.transitions[t].inputs)
            out += fmt::format("  p{} -> t{};\n", p + 1, t + 1);
        for (auto p : net.transitions[t].outputs)
            out += fmt::format("  t{} -> p{};\n", t + 1, p + 1);
    }
    return out + "}\n";
}

std::string graph_to_dot(const ReachabilityGraph& g, const FuzzyPetriNet& net)
{
    std::string out = "digraph Reachability {\n  rankdir=TB;\n  node [shape=box];\n";
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const bool init = std::find(g.initial.begin(), g.initial.end(), i) != g.initial.end();
        out += fmt::format("  M{} [label=\"M{}\\n{}\"{}];\n", i + 1, i + 1, to_string(g.nodes[i]),
            init ? ", style=bold" : "");
    }
    for (const auto& e : g.edges)
        out += fmt::format("  M{} -> M{} [label=\"T{}\", tooltip=\"{}\"];\n", e.from + 1, e.to + 1, e.transition + 1,
            net.transitions[e.transition].name);
    return out + "}\n";
}

} // namespace fedm
