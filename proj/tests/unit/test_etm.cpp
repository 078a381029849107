#include "support.hpp"

#include "fedm/error.hpp"
#include "fedm/etm.hpp"
#include "fedm/inference.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace fedm;
using fedm::test::original_model;

namespace {

InferenceResult fired(std::string action, std::vector<FiredRule> rules)
{
    InferenceResult r;
    r.recommended_action = std::move(action);
    r.fired_rules = std::move(rules);
    return r;
}

/// Original model plus a second tryAgainNow rule tagged Beneficence only.
EdmModel with_second_now_rule()
{
    return fedm::test::with_rule(original_model(),
        fedm::test::rule_from_text("R7", RuleKind::ferd, "Risk(high)", "Action(tryAgainNow)", 0.7, {"Beneficence"}));
}

} // namespace

TEST(BuildTrace, SingleRuleScores)
{
    const auto t = build_trace(original_model(), fired("tryAgainNow", {{"R5", RuleKind::ferd, 0.8, 0.9}}));
    EXPECT_EQ(t.action, "tryAgainNow");
    EXPECT_NEAR(t.score("Beneficence"), 0.72, 1e-12);
    EXPECT_NEAR(t.score("Nonmaleficence"), 0.72, 1e-12);
    EXPECT_EQ(t.score("Autonomy"), 0.0);
    ASSERT_EQ(t.contributions.size(), 3u);
    EXPECT_EQ(t.contributions[0].first, "Autonomy");
}

TEST(BuildTrace, TwoRuleScores)
{
    const auto t = build_trace(with_second_now_rule(),
        fired("tryAgainNow", {{"R5", RuleKind::ferd, 0.6, 0.9}, {"R7", RuleKind::ferd, 0.5, 0.7}}));
    EXPECT_NEAR(t.score("Beneficence"), 0.6 * 0.9 + 0.5 * 0.7, 1e-12);
    EXPECT_NEAR(t.score("Nonmaleficence"), 0.54, 1e-12);
    EXPECT_NEAR(t.score("Beneficence"), 0.89, 1e-12);
    EXPECT_EQ(t.dominant.front(), "Beneficence");
    EXPECT_EQ(t.dominant_principles(), (std::vector<std::string>{"Beneficence"}));
}

TEST(BuildTrace, RulesForOtherActionsDoNotScore)
{
    const auto t = build_trace(original_model(),
        fired("tryAgainNow", {{"R5", RuleKind::ferd, 0.8, 0.9}, {"R6", RuleKind::ferd, 0.9, 0.7}}));
    ASSERT_EQ(t.fired.size(), 1u);
    EXPECT_EQ(t.fired[0].name, "R5");
    EXPECT_EQ(t.score("Autonomy"), 0.0);
}

TEST(BuildTrace, RiskPathRecorded)
{
    const EdmModel m = original_model();
    const auto t = build_trace(m, infer(m, fedm::test::case_study_input()));
    std::vector<std::string> names;
    for (const auto& r : t.risk_path)
        names.push_back(r.name);
    EXPECT_EQ(names, (std::vector<std::string>{"R1", "R2", "R3"}));
    EXPECT_EQ(t.risk_term, "high");
}

TEST(BuildTrace, NoDecisionRuleIsUnexplainable)
{
    try {
        build_trace(original_model(), fired("tryAgainNow", {{"R3", RuleKind::ferr, 0.8, 0.9}}));
        FAIL();
    } catch (const ExplanationError& e) {
        EXPECT_NE(std::string(e.what()).find("unexplainable decision"), std::string::npos);
    }
}

TEST(BuildTrace, NormalizedSharesSumToOne)
{
    const EdmModel m = original_model();
    const auto t = build_trace(m, infer(m, fedm::test::case_study_input()));
    double sum = 0.0;
    for (const auto& [p, s] : t.normalized)
        sum += s;
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(BuildTrace, ScoreSumCountsEachTag)
{
    const auto t = build_trace(with_second_now_rule(),
        fired("tryAgainNow", {{"R5", RuleKind::ferd, 0.6, 0.9}, {"R7", RuleKind::ferd, 0.5, 0.7}}));
    double scores = 0.0;
    for (const auto& [p, s] : t.contributions)
        scores += s;
    double weighted = 0.0;
    for (const auto& r : t.fired)
        weighted += r.strength() * static_cast<double>(r.principles.size());
    EXPECT_NEAR(scores, weighted, 1e-12);
}

TEST(BuildTrace, LinearInActivation)
{
    const EdmModel m = with_second_now_rule();
    const auto a = build_trace(m, fired("tryAgainNow", {{"R5", RuleKind::ferd, 0.3, 0.9}, {"R7", RuleKind::ferd, 0.2, 0.7}}));
    const auto b = build_trace(m, fired("tryAgainNow", {{"R5", RuleKind::ferd, 0.6, 0.9}, {"R7", RuleKind::ferd, 0.4, 0.7}}));
    for (const auto& [p, s] : a.contributions)
        EXPECT_NEAR(b.score(p), 2.0 * s, 1e-12);
}

TEST(BuildTrace, RuleOrderDoesNotMatter)
{
    const EdmModel m = fedm::test::revised_model();
    const CrispInput in{{"Severity", 7.3}, {"Mental", 6.4}, {"LTconsequences", 8.5}};
    const auto base = build_trace(m, infer(m, in));
    std::mt19937 rng(7);
    for (int i = 0; i < 20; ++i) {
        EdmModel shuffled = m;
        std::shuffle(shuffled.rules.begin(), shuffled.rules.end(), rng);
        const auto t = build_trace(shuffled, infer(shuffled, in));
        EXPECT_EQ(t.action, base.action);
        for (const auto& [p, s] : base.contributions)
            EXPECT_NEAR(t.score(p), s, 1e-12);
    }
}

TEST(BuildTrace, DominantIsStableSort)
{
    const auto t = build_trace(original_model(), fired("tryAgainNow", {{"R5", RuleKind::ferd, 0.8, 0.9}}));
    EXPECT_EQ(t.dominant, (std::vector<std::string>{"Beneficence", "Nonmaleficence", "Autonomy"}));
    EXPECT_EQ(t.dominant_principles(), (std::vector<std::string>{"Beneficence", "Nonmaleficence"}));
}

TEST(RenderExplanation, ShowsScoresToThreeDecimals)
{
    const auto t = build_trace(original_model(), fired("tryAgainNow", {{"R5", RuleKind::ferd, 0.8, 0.9}}));
    const std::string text = render_explanation(t);
    EXPECT_NE(text.find("Beneficence: 0.720"), std::string::npos) << text;
    EXPECT_NE(text.find("Autonomy: 0.000"), std::string::npos) << text;
    EXPECT_NE(text.find("Recommended action: tryAgainNow"), std::string::npos);
}

TEST(RenderExplanation, MatchesFrozenGolden)
{
    const EdmModel m = original_model();
    const auto t = build_trace(m, infer(m, fedm::test::case_study_input()));
    const std::string golden = fedm::test::golden("case_study_explain.txt");
    // The golden file is CLI output: a scenario header line, then the rendering.
    const std::string body = golden.substr(golden.find('\n') + 1);
    EXPECT_EQ(render_explanation(t), body);
}

TEST(RenderExplanation, IdenticalBytes)
{
    const EdmModel m = original_model();
    const auto a = render_explanation(build_trace(m, infer(m, fedm::test::case_study_input())));
    const auto b = render_explanation(build_trace(m, infer(m, fedm::test::case_study_input())));
    EXPECT_EQ(a, b);
}

TEST(TraceJson, CarriesScoresAndRules)
{
    const EdmModel m = original_model();
    const auto j = to_json(build_trace(m, infer(m, fedm::test::case_study_input())));
    EXPECT_EQ(j["action"], "tryAgainNow");
    EXPECT_EQ(j["fired"].size(), 1u);
    EXPECT_EQ(j["risk_path"].size(), 3u);
}
