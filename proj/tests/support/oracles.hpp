#pragma once

// Independent reference computations used to check the library. Nothing here
// calls the code under test except for plain data accessors.

#include "fedm/model.hpp"
#include "fedm/referent.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fedm::oracle {

inline double trapezoid(double a, double b, double c, double d, double x)
{
    if (x < a || x > d)
        return 0.0;
    if (x >= b && x <= c)
        return 1.0;
    if (x < b)
        return (x - a) / (b - a);
    return (d - x) / (d - c);
}

inline double degree(const LinguisticVariable& v, const std::string& term, double x)
{
    for (const auto& t : v.terms) {
        if (t.name == term)
            return trapezoid(t.mf->a, t.mf->b, t.mf->c, t.mf->d, x);
    }
    return 0.0;
}

/// Centroid of max_t min(clip_t, mu_t(x)) sampled with `samples` points.
inline double clipped_centroid(const LinguisticVariable& v, const std::map<std::string, double>& clip, int samples)
{
    const double lo = v.universe->lo;
    const double hi = v.universe->hi;
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = lo + (hi - lo) * i / (samples - 1);
        double mu = 0.0;
        for (const auto& [term, level] : clip)
            mu = std::max(mu, std::min(level, degree(v, term, x)));
        num += x * mu;
        den += mu;
    }
    return num / den;
}

/// S_A from its definition over the union of action names.
inline double action_similarity(const std::map<std::string, double>& s, const std::map<std::string, double>& r)
{
    std::set<std::string> names;
    double max_s = 0.0;
    double max_r = 0.0;
    for (const auto& [a, mu] : s) {
        names.insert(a);
        max_s = std::max(max_s, mu);
    }
    for (const auto& [a, mu] : r) {
        names.insert(a);
        max_r = std::max(max_r, mu);
    }
    double dot = 0.0;
    for (const auto& a : names) {
        const double x = s.count(a) ? s.at(a) : 0.0;
        const double y = r.count(a) ? r.at(a) : 0.0;
        dot += x * y;
    }
    return std::min(1.0, dot / std::max(max_s, max_r));
}

/// Brute-force transitive closure of a preference relation.
inline std::set<std::pair<std::string, std::string>> closure(std::set<std::pair<std::string, std::string>> pairs)
{
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [a, b] : std::set(pairs)) {
            for (const auto& [c, d] : std::set(pairs)) {
                if (b == c && pairs.insert({a, d}).second)
                    grew = true;
            }
        }
    }
    return pairs;
}

inline double principle_consistency(const std::map<std::string, double>& scores,
    const std::set<std::pair<std::string, std::string>>& pairs, double eps)
{
    double sat = 0.0;
    for (const auto& [u, v] : pairs)
        sat += scores.at(u) >= scores.at(v) - eps ? 1.0 : 0.0;
    return sat / static_cast<double>(pairs.size());
}

/// mu_R at normalized risk r straight from the band table.
inline std::map<std::string, double> expected(const Referent& ref, const LinguisticVariable& actions, double r)
{
    std::map<std::string, double> mu;
    for (const auto& t : actions.terms)
        mu[t.name] = 0.0;
    for (const auto& b : ref.bands) {
        const bool above = b.lo_closed ? r >= b.lo : r > b.lo;
        const bool below = b.hi_closed ? r <= b.hi : r < b.hi;
        if (above && below) {
            for (const auto& a : b.actions)
                mu[a] = 1.0;
            break;
        }
    }
    return mu;
}

// Reachability by brute force over sets of atom strings.

using State = std::set<std::string>;

struct Firing {
    std::set<std::string> inputs;
    std::set<std::string> outputs;
};

inline std::vector<Firing> firings(const EdmModel& model)
{
    std::vector<Firing> out;
    for (const auto& r : model.rules) {
        for (const auto& conj : r.antecedent) {
            for (const auto& c : r.consequents) {
                Firing f;
                for (const auto& a : conj)
                    f.inputs.insert(a.variable + "(" + a.term + ")");
                f.outputs.insert(c.variable + "(" + c.term + ")");
                out.push_back(std::move(f));
            }
        }
    }
    return out;
}

inline std::vector<State> initial_states(const EdmModel& model)
{
    std::vector<State> states{State{}};
    for (const auto& v : model.variables) {
        if (v.kind != VariableKind::input)
            continue;
        std::vector<State> next;
        for (const auto& s : states) {
            for (const auto& t : v.terms) {
                State n = s;
                n.insert(v.name + "(" + t.name + ")");
                next.push_back(std::move(n));
            }
        }
        states = std::move(next);
    }
    return states;
}

struct StateGraph {
    std::set<State> states;
    std::multiset<std::pair<State, State>> edges;
};

inline StateGraph explore(const EdmModel& model)
{
    const auto fs = firings(model);
    StateGraph g;
    std::queue<State> todo;
    for (auto& s : initial_states(model)) {
        if (g.states.insert(s).second)
            todo.push(s);
    }
    while (!todo.empty()) {
        const State s = todo.front();
        todo.pop();
        for (const auto& f : fs) {
            if (!std::includes(s.begin(), s.end(), f.inputs.begin(), f.inputs.end()))
                continue;
            State t;
            std::set_difference(s.begin(), s.end(), f.inputs.begin(), f.inputs.end(), std::inserter(t, t.end()));
            t.insert(f.outputs.begin(), f.outputs.end());
            g.edges.insert({s, t});
            if (g.states.insert(t).second)
                todo.push(t);
        }
    }
    return g;
}

/// Kahn's algorithm on the atom-level dependency graph of the rules: true iff
/// no atom can (transitively) produce one of its own premises.
inline bool acyclic(const EdmModel& model)
{
    std::map<std::string, std::set<std::string>> succ;
    std::map<std::string, int> indeg;
    for (const auto& f : firings(model)) {
        for (const auto& i : f.inputs) {
            indeg.try_emplace(i, 0);
            for (const auto& o : f.outputs) {
                indeg.try_emplace(o, 0);
                if (succ[i].insert(o).second)
                    ++indeg[o];
            }
        }
    }
    std::queue<std::string> ready;
    for (const auto& [n, d] : indeg) {
        if (d == 0)
            ready.push(n);
    }
    std::size_t seen = 0;
    while (!ready.empty()) {
        const auto n = ready.front();
        ready.pop();
        ++seen;
        for (const auto& m : succ[n]) {
            if (--indeg[m] == 0)
                ready.push(m);
        }
    }
    return seen == indeg.size();
}

} // namespace fedm::oracle
