#pragma once

#include "fedm/inference.hpp"
#include "fedm/model.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace fedm::gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int pick(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Variable whose terms form a partition of unity over [lo, hi]: neighbours
/// cross linearly inside random overlap windows.
inline LinguisticVariable partition(Rng& rng, const std::string& name, VariableKind kind, double lo, double hi, int terms)
{
    std::vector<double> cuts;
    for (int i = 0; i < 2 * (terms - 1); ++i)
        cuts.push_back(uniform(rng, lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo)));
    std::sort(cuts.begin(), cuts.end());

    LinguisticVariable v;
    v.name = name;
    v.kind = kind;
    v.universe = Universe{lo, hi};
    for (int j = 0; j < terms; ++j) {
        TrapezoidMF mf;
        mf.a = j == 0 ? lo : cuts[2 * j - 2];
        mf.b = j == 0 ? lo : cuts[2 * j - 1];
        mf.c = j == terms - 1 ? hi : cuts[2 * j];
        mf.d = j == terms - 1 ? hi : cuts[2 * j + 1];
        v.terms.push_back(Term{"t" + std::to_string(j), mf});
    }
    return v;
}

inline std::vector<std::string> some_principles(Rng& rng, const std::vector<std::string>& all)
{
    std::vector<std::string> out;
    for (const auto& p : all) {
        if (pick(rng, 0, 1) == 1)
            out.push_back(p);
    }
    if (out.empty())
        out.push_back(all[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(all.size()) - 1))]);
    return out;
}

/// A well-formed random model in which every input combination is covered by
/// some risk rule and every risk term by some decision rule, so inference never
/// reports a coverage gap.
inline EdmModel random_model(Rng& rng)
{
    EdmModel m;
    m.name = "Random";
    m.principles = {"P0", "P1", "P2"};

    const int n_inputs = pick(rng, 1, 3);
    for (int i = 0; i < n_inputs; ++i)
        m.variables.push_back(partition(rng, "X" + std::to_string(i), VariableKind::input, 0.0, 10.0, pick(rng, 2, 4)));
    LinguisticVariable risk = partition(rng, "Risk", VariableKind::internal, 0.0, 100.0, pick(rng, 2, 4));
    LinguisticVariable action;
    action.name = "Action";
    action.kind = VariableKind::output;
    const int n_actions = pick(rng, 2, 3);
    for (int a = 0; a < n_actions; ++a)
        action.terms.push_back(Term{"a" + std::to_string(a), std::nullopt});
    m.variables.push_back(risk);
    m.variables.push_back(action);

    // Every combination of input terms, assigned to a random risk term.
    std::vector<Conjunction> combos{Conjunction{}};
    for (int i = 0; i < n_inputs; ++i) {
        const auto& v = m.variables[static_cast<std::size_t>(i)];
        std::vector<Conjunction> next;
        for (const auto& c : combos) {
            for (const auto& t : v.terms) {
                Conjunction n = c;
                n.push_back(Atom{v.name, t.name});
                next.push_back(std::move(n));
            }
        }
        combos = std::move(next);
    }
    std::shuffle(combos.begin(), combos.end(), rng);
    int counter = 0;
    std::vector<Dnf> groups(risk.terms.size());
    for (auto& c : combos)
        groups[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(risk.terms.size()) - 1))].push_back(c);
    for (std::size_t t = 0; t < groups.size(); ++t) {
        if (groups[t].empty())
            continue;
        // Split a group over one or two rules with independent cfs.
        const std::size_t cut = groups[t].size() > 1 && pick(rng, 0, 1) ? groups[t].size() / 2 : groups[t].size();
        for (const auto& part : {Dnf(groups[t].begin(), groups[t].begin() + static_cast<long>(cut)),
                 Dnf(groups[t].begin() + static_cast<long>(cut), groups[t].end())}) {
            if (part.empty())
                continue;
            FuzzyRule r;
            r.name = "R" + std::to_string(++counter);
            r.kind = RuleKind::ferr;
            r.antecedent = part;
            r.consequents = {Atom{"Risk", risk.terms[t].name}};
            r.cf = uniform(rng, 0.1, 1.0);
            r.principles = some_principles(rng, m.principles);
            m.rules.push_back(std::move(r));
        }
    }

    for (const auto& t : risk.terms) {
        FuzzyRule r;
        r.name = "R" + std::to_string(++counter);
        r.kind = RuleKind::ferd;
        r.antecedent = {{Atom{"Risk", t.name}}};
        r.consequents = {Atom{"Action", action.terms[static_cast<std::size_t>(pick(rng, 0, n_actions - 1))].name}};
        r.cf = uniform(rng, 0.1, 1.0);
        r.principles = some_principles(rng, m.principles);
        m.rules.push_back(std::move(r));
    }
    const int extra = pick(rng, 0, 2);
    for (int e = 0; e < extra; ++e) {
        FuzzyRule r;
        r.name = "R" + std::to_string(++counter);
        r.kind = RuleKind::ferd;
        const int disjuncts = pick(rng, 1, 2);
        for (int d = 0; d < disjuncts; ++d)
            r.antecedent.push_back({Atom{"Risk", risk.terms[static_cast<std::size_t>(
                                                 pick(rng, 0, static_cast<int>(risk.terms.size()) - 1))].name}});
        r.consequents = {Atom{"Action", action.terms[static_cast<std::size_t>(pick(rng, 0, n_actions - 1))].name}};
        r.cf = uniform(rng, 0.1, 1.0);
        r.principles = some_principles(rng, m.principles);
        m.rules.push_back(std::move(r));
    }
    return m;
}

inline CrispInput random_input(Rng& rng, const EdmModel& model)
{
    CrispInput in;
    for (const auto& v : model.variables) {
        if (v.kind == VariableKind::input)
            in[v.name] = uniform(rng, v.universe->lo, v.universe->hi);
    }
    return in;
}

/// The model with each rule replaced by its normalized children as separate rules.
inline EdmModel expanded_model(const EdmModel& model)
{
    EdmModel out = model;
    out.rules.clear();
    for (const auto& n : normalize_rules(model)) {
        FuzzyRule r;
        r.name = n.name;
        std::replace(r.name.begin(), r.name.end(), '#', '_');
        r.kind = n.kind;
        r.antecedent = {n.antecedent};
        r.consequents = {n.consequent};
        r.cf = n.cf;
        r.principles = n.principles;
        out.rules.push_back(std::move(r));
    }
    return out;
}

} // namespace fedm::gen
