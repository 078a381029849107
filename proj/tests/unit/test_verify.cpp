#include "oracles.hpp"
#include "support.hpp"

#include "fedm/error.hpp"
#include "fedm/fpn.hpp"
#include "fedm/model_io.hpp"
#include "fedm/verify.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fedm;
using fedm::test::original_model;
using fedm::test::rule_from_text;

namespace {

struct Built {
    EdmModel model;
    FuzzyPetriNet net;
    ReachabilityGraph graph;
};

Built build(EdmModel m)
{
    Built b{std::move(m), {}, {}};
    b.net = build_fpn(b.model);
    b.graph = generate_reachability(b.net, b.model);
    return b;
}

FuzzyRule autonomy_low_risk_rule()
{
    return rule_from_text("R7", RuleKind::ferr, "Severity(high) & Mental(bad)", "Risk(low)", 0.8, {"Autonomy"});
}

std::size_t count_kind(const std::vector<IncompletenessFinding>& fs, IncompletenessKind k)
{
    return static_cast<std::size_t>(std::count_if(fs.begin(), fs.end(), [&](const auto& f) { return f.kind == k; }));
}

/// Single input X, risk terms produced directly from X's terms, then the given
/// risk-to-risk chain edges and one decision rule per risk term.
EdmModel chain_model(int risk_terms, const std::vector<std::pair<int, int>>& chain)
{
    EdmModel m;
    m.name = "Chain";
    m.principles = {"P"};
    LinguisticVariable x{"X", VariableKind::input, Universe{0, 1}, {}};
    LinguisticVariable risk{"Risk", VariableKind::internal, Universe{0, 1}, {}};
    for (int i = 0; i < risk_terms; ++i) {
        const double lo = static_cast<double>(i) / risk_terms;
        const double hi = static_cast<double>(i + 1) / risk_terms;
        x.terms.push_back(Term{"x" + std::to_string(i), TrapezoidMF{i == 0 ? 0 : lo - 0.01, lo, hi, i + 1 == risk_terms ? 1 : hi + 0.01}});
        risk.terms.push_back(Term{"r" + std::to_string(i), x.terms.back().mf});
    }
    LinguisticVariable act{"Act", VariableKind::output, std::nullopt, {Term{"a", std::nullopt}}};
    m.variables = {x, risk, act};
    int n = 0;
    for (int i = 0; i < risk_terms; ++i)
        m.rules.push_back(rule_from_text("R" + std::to_string(++n), RuleKind::ferr, "X(x" + std::to_string(i) + ")",
            "Risk(r" + std::to_string(i) + ")", 1, {"P"}));
    for (const auto& [a, b] : chain)
        m.rules.push_back(rule_from_text("R" + std::to_string(++n), RuleKind::ferr, "Risk(r" + std::to_string(a) + ")",
            "Risk(r" + std::to_string(b) + ")", 1, {"P"}));
    for (int i = 0; i < risk_terms; ++i)
        m.rules.push_back(
            rule_from_text("R" + std::to_string(++n), RuleKind::ferd, "Risk(r" + std::to_string(i) + ")", "Act(a)", 1, {"P"}));
    return m;
}

} // namespace

TEST(Incompleteness, PatientModelHasNone)
{
    const Built b = build(original_model());
    EXPECT_TRUE(detect_incompleteness(b.graph, b.net, b.model).empty());
}

TEST(Incompleteness, DeletingR4)
{
    const Built b = build(fedm::test::without_rule(original_model(), "R4"));
    const auto fs = detect_incompleteness(b.graph, b.net, b.model);
    const auto dead = std::find_if(fs.begin(), fs.end(), [](const auto& f) { return f.kind == IncompletenessKind::dead_place; });
    ASSERT_NE(dead, fs.end());
    EXPECT_EQ(dead->subject, "Risk(low)");
    EXPECT_EQ(count_kind(fs, IncompletenessKind::uncovered_input), 4u);
    // The four low-risk combinations of R1.
    for (const auto& f : fs) {
        if (f.kind != IncompletenessKind::uncovered_input)
            continue;
        ASSERT_TRUE(f.marking.has_value());
        const Marking& m = b.graph.nodes[*f.marking];
        const bool sev_low = m.has(0);
        const bool med_good = m.has(1) && m.has(3);
        EXPECT_TRUE(sev_low || med_good) << to_string(m);
    }
}

TEST(Incompleteness, UnusedActionTermIsUnreachable)
{
    EdmModel m = original_model();
    for (auto& v : m.variables) {
        if (v.kind == VariableKind::output)
            v.terms.push_back(Term{"callDoctor", std::nullopt});
    }
    const Built b = build(m);
    const auto fs = detect_incompleteness(b.graph, b.net, b.model);
    ASSERT_EQ(count_kind(fs, IncompletenessKind::unreachable_output), 1u);
    for (const auto& f : fs) {
        if (f.kind == IncompletenessKind::unreachable_output) {
            EXPECT_EQ(f.subject, "Action(callDoctor)");
        }
    }
}

TEST(Inconsistency, PatientModelHasNone)
{
    const Built b = build(original_model());
    EXPECT_TRUE(detect_inconsistency(b.graph, b.net, b.model).empty());
}

TEST(Inconsistency, ConflictingRiskRule)
{
    const Built b = build(fedm::test::with_rule(original_model(),
        rule_from_text("R7", RuleKind::ferr, "Severity(low) & Mental(good)", "Risk(high)", 0.5, {"Beneficence"})));
    const auto fs = detect_inconsistency(b.graph, b.net, b.model);
    ASSERT_FALSE(fs.empty());
    const std::size_t low = *b.net.place_index(Atom{"Risk", "low"});
    const std::size_t high = *b.net.place_index(Atom{"Risk", "high"});
    bool found = false;
    for (const auto& f : fs) {
        if (std::find(f.places.begin(), f.places.end(), low) != f.places.end() &&
            std::find(f.places.begin(), f.places.end(), high) != f.places.end())
            found = true;
    }
    EXPECT_TRUE(found);
}

TEST(Inconsistency, SingleRuleNetVacuous)
{
    EdmModel m;
    m.name = "One";
    m.principles = {"P"};
    m.variables = {
        LinguisticVariable{"A", VariableKind::input, Universe{0, 1}, {Term{"x", TrapezoidMF{0, 0, 1, 1}}}},
        LinguisticVariable{"B", VariableKind::output, std::nullopt, {Term{"y", std::nullopt}}},
    };
    m.rules.push_back(rule_from_text("R1", RuleKind::ferd, "A(x)", "B(y)", 1, {"P"}));
    const FuzzyPetriNet net = build_fpn(normalize_rules(m), m);
    EXPECT_TRUE(detect_inconsistency(generate_reachability(net, m), net, m).empty());
}

TEST(Circularity, PatientModelAcyclic)
{
    const Built b = build(original_model());
    EXPECT_TRUE(detect_circularity(b.graph).empty());
}

TEST(Circularity, ForcedTwoCycle)
{
    const Built b = build(chain_model(2, {{0, 1}, {1, 0}}));
    bool truncated = true;
    const auto cycles = detect_circularity(b.graph, 10'000, &truncated);
    EXPECT_FALSE(truncated);
    ASSERT_EQ(cycles.size(), 1u);
    EXPECT_EQ(cycles[0].markings.size(), 2u);
    EXPECT_EQ(cycles[0].transitions.size(), 2u);
    // The witness is re-checkable on the graph.
    for (std::size_t i = 0; i < cycles[0].markings.size(); ++i) {
        const std::size_t from = cycles[0].markings[i];
        const std::size_t to = cycles[0].markings[(i + 1) % cycles[0].markings.size()];
        EXPECT_EQ(b.net.fire(b.graph.nodes[from], cycles[0].transitions[i]), b.graph.nodes[to]);
    }
}

TEST(Circularity, SelfLoop)
{
    const Built b = build(chain_model(2, {{1, 1}}));
    const auto cycles = detect_circularity(b.graph);
    ASSERT_EQ(cycles.size(), 1u);
    EXPECT_EQ(cycles[0].markings.size(), 1u);
}

TEST(Circularity, LimitTruncates)
{
    // Complete digraph on four risk terms has many elementary cycles.
    std::vector<std::pair<int, int>> all;
    for (int a = 0; a < 4; ++a) {
        for (int c = 0; c < 4; ++c) {
            if (a != c)
                all.emplace_back(a, c);
        }
    }
    const Built b = build(chain_model(4, all));
    bool truncated = false;
    const auto full = detect_circularity(b.graph, 10'000, &truncated);
    EXPECT_FALSE(truncated);
    EXPECT_EQ(full.size(), 20u); // 6 two-cycles, 8 three-cycles, 6 four-cycles
    const auto cut = detect_circularity(b.graph, 5, &truncated);
    EXPECT_TRUE(truncated);
    EXPECT_EQ(cut.size(), 5u);
}

TEST(Circularity, RandomChainsAgreeWithTopologicalOracle)
{
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = std::uniform_int_distribution<int>(2, 6)(rng);
        const bool dag = trial % 2 == 0;
        std::vector<std::pair<int, int>> chain;
        const int edges = std::uniform_int_distribution<int>(0, n * 2)(rng);
        for (int e = 0; e < edges; ++e) {
            int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
            int c = std::uniform_int_distribution<int>(0, n - 1)(rng);
            if (dag) {
                if (a == c)
                    continue;
                if (a > c)
                    std::swap(a, c);
            }
            if (std::find(chain.begin(), chain.end(), std::pair{a, c}) == chain.end())
                chain.emplace_back(a, c);
        }
        const EdmModel m = chain_model(n, chain);
        const Built b = build(m);
        const bool acyclic = oracle::acyclic(m);
        if (dag) {
            ASSERT_TRUE(acyclic);
        }
        EXPECT_EQ(detect_circularity(b.graph).empty(), acyclic) << "trial " << trial;
    }
}

TEST(Redundancy, PatientModelHasNone)
{
    const Built b = build(original_model());
    EXPECT_TRUE(detect_redundancy(b.net, b.graph).empty());
}

TEST(Redundancy, VerbatimCloneOfR4)
{
    EdmModel m = original_model();
    FuzzyRule clone = *m.find_rule("R4");
    clone.name = "R4b";
    const Built b = build(fedm::test::with_rule(m, clone));
    const auto fs = detect_redundancy(b.net, b.graph);
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(b.net.transitions[fs[0].first].name, "R4#1");
    EXPECT_EQ(b.net.transitions[fs[0].second].name, "R4b#1");
    ASSERT_TRUE(fs[0].witness.has_value());
    EXPECT_TRUE(b.net.enabled(b.graph.nodes[*fs[0].witness], fs[0].first));
}

TEST(Redundancy, DifferentBetaNotRedundant)
{
    EdmModel m = original_model();
    FuzzyRule clone = *m.find_rule("R4");
    clone.name = "R4b";
    clone.cf = 0.5;
    const Built b = build(fedm::test::with_rule(m, clone));
    EXPECT_TRUE(detect_redundancy(b.net, b.graph).empty());
}

TEST(PrincipleCoverage, PatientModelFull)
{
    const auto c = principle_coverage(original_model());
    EXPECT_EQ(c, (PrincipleCoverage{{"Autonomy", 1}, {"Beneficence", 1}, {"Nonmaleficence", 1}}));
}

TEST(PrincipleCoverage, UntaggedPrincipleIsGap)
{
    EdmModel m = original_model();
    m.principles.push_back("Justice");
    const auto c = principle_coverage(m);
    EXPECT_EQ(c.back(), (std::pair<std::string, int>{"Justice", 0}));
    const auto fs = verify(m).incompleteness;
    ASSERT_EQ(count_kind(fs, IncompletenessKind::uncovered_principle), 1u);
}

TEST(PrincipleCoverage, NoRulesAllZero)
{
    EdmModel m = original_model();
    m.rules.clear();
    for (const auto& [p, c] : principle_coverage(m))
        EXPECT_EQ(c, 0) << p;
}

TEST(CrossPrinciple, PatientModelNone)
{
    const Built b = build(original_model());
    EXPECT_TRUE(cross_principle_conflicts(b.graph, b.net, b.model, {{"Autonomy", "Nonmaleficence"}}).empty());
}

TEST(CrossPrinciple, AutonomyLowRiskRuleConflictsWithR3)
{
    const Built b = build(fedm::test::with_rule(original_model(), autonomy_low_risk_rule()));
    const auto fs = cross_principle_conflicts(b.graph, b.net, b.model, {{"Autonomy", "Nonmaleficence"}});
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(to_string(b.graph.nodes[fs[0].marking]), "[0,0,1,0,0,1,0,0,0,0,0,0]");
    EXPECT_EQ(fs[0].principle_a, "Autonomy");
    EXPECT_EQ(fs[0].principle_b, "Nonmaleficence");
    EXPECT_EQ(b.net.transitions[fs[0].first].parent, "R7");
    EXPECT_EQ(b.net.transitions[fs[0].second].parent, "R3");
}

TEST(CrossPrinciple, EmptySetVacuous)
{
    const Built b = build(fedm::test::with_rule(original_model(), autonomy_low_risk_rule()));
    EXPECT_TRUE(cross_principle_conflicts(b.graph, b.net, b.model, {}).empty());
}

TEST(CrossPrinciple, UnknownPrinciple)
{
    const Built b = build(original_model());
    EXPECT_THROW(cross_principle_conflicts(b.graph, b.net, b.model, {{"Autonomy", "Justice"}}), VerificationError);
}

TEST(CrossPrinciple, StrictIgnoresConsequents)
{
    // R3 (Nonmaleficence) and R2 (Beneficence) do not conflict by tag; R1 and R3
    // are never co-enabled. In the original model, strict mode still finds nothing.
    const Built b = build(original_model());
    EXPECT_TRUE(cross_principle_conflicts(b.graph, b.net, b.model, {{"Autonomy", "Nonmaleficence"}}, true).empty());
    // Autonomy and Beneficence tags co-enabled at the (medium, good) marking? R1#2
    // is the only enabled transition there, so strict pairs need two transitions.
    const Built c = build(fedm::test::with_rule(original_model(),
        rule_from_text("R7", RuleKind::ferr, "Severity(high) & Mental(bad)", "Risk(high)", 0.5, {"Autonomy"})));
    EXPECT_TRUE(cross_principle_conflicts(c.graph, c.net, c.model, {{"Autonomy", "Nonmaleficence"}}).empty());
    EXPECT_EQ(cross_principle_conflicts(c.graph, c.net, c.model, {{"Autonomy", "Nonmaleficence"}}, true).size(), 1u);
}

TEST(PrincipleRedundancy, PatientModelNone)
{
    EXPECT_TRUE(principle_redundancy(original_model()).empty());
}

TEST(PrincipleRedundancy, ReorderedDuplicateReported)
{
    EdmModel m = original_model();
    FuzzyRule dup = *m.find_rule("R1");
    dup.name = "R1b";
    std::reverse(dup.antecedent.begin(), dup.antecedent.end());
    for (auto& conj : dup.antecedent)
        std::reverse(conj.begin(), conj.end());
    const auto fs = principle_redundancy(fedm::test::with_rule(m, dup));
    ASSERT_EQ(fs.size(), 1u);
    EXPECT_EQ(fs[0], (PrincipleRedundancy{"R1", "R1b"}));
}

TEST(PrincipleRedundancy, DifferentTagsNotReported)
{
    EdmModel m = original_model();
    FuzzyRule dup = *m.find_rule("R1");
    dup.name = "R1b";
    dup.principles = {"Beneficence"};
    EXPECT_TRUE(principle_redundancy(fedm::test::with_rule(m, dup)).empty());
}

TEST(Verify, PatientModelReportEmpty)
{
    const VerificationReport r = verify(original_model());
    EXPECT_TRUE(r.empty());
    EXPECT_EQ(r.finding_count(), 0u);
    EXPECT_EQ(r.graph.nodes.size(), 15u);
    const std::string text = render_report(r);
    EXPECT_NE(text.find("Verdict: no findings"), std::string::npos) << text;
    const auto j = to_json(r);
    EXPECT_EQ(j["principle_coverage"].size(), 3u);
}

TEST(Verify, IncompatibleOverride)
{
    const EdmModel m = fedm::test::with_rule(original_model(), autonomy_low_risk_rule());
    VerifyOptions o;
    o.incompatible = std::vector<PrinciplePair>{};
    EXPECT_TRUE(verify(m, o).cross_principle_conflicts.empty());
    EXPECT_FALSE(verify(m).cross_principle_conflicts.empty());
}

TEST(Verify, StateCapPropagates)
{
    VerifyOptions o;
    o.state_cap = 5;
    EXPECT_THROW(verify(original_model(), o), VerificationError);
}
