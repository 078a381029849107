#pragma once

#include "fedm/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fedm {

enum class Comparator { gt, ge, lt, le };

std::string_view to_string(Comparator c) noexcept;
bool compare(double value, Comparator c, double threshold) noexcept;

/// A dynamic reference check: asserted premise degrees must drive the
/// conclusion's degree past a threshold.
struct ReasoningCheck {
    std::string name;
    std::vector<std::pair<Atom, double>> premises;
    Atom conclusion;
    Comparator comparator = Comparator::gt;
    double threshold = 0.0;

    bool operator==(const ReasoningCheck&) const = default;
};

/// Risk interval (normalized) and the actions acceptable inside it.
struct ActionBand {
    double lo = 0.0;
    double hi = 1.0;
    bool lo_closed = true;
    bool hi_closed = true;
    std::vector<std::string> actions;

    bool contains(double r) const noexcept;
    bool operator==(const ActionBand&) const = default;
};

struct Referent {
    std::string name;
    std::vector<LinguisticVariable> variables;
    std::vector<std::string> principles;
    std::vector<FuzzyRule> rules; // expected FERRs and FERDs
    /// Ordered pairs (u, v) meaning u is preferred to v; transitively closed.
    std::vector<PrinciplePair> priority;
    double rho = 0.0;
    double tau = 0.0;
    std::vector<ActionBand> bands; // ascending, covering [0,1]
    std::vector<ReasoningCheck> checks;

    /// Actions of the band containing `r` (clamped to [0,1]).
    const std::vector<std::string>& acceptable_actions(double r) const;

    bool operator==(const Referent&) const = default;
};

/// Adds every implied pair; throws ValidationError on a preference cycle.
/// Output order: by first principle, then second, in `principles` order.
std::vector<PrinciplePair> transitive_closure(
    const std::vector<PrinciplePair>& pairs, const std::vector<std::string>& principles);

/// Throws ValidationError on the first violated invariant.
void validate_referent(const Referent& referent);

Referent parse_referent(std::string_view source);
Referent parse_referent_text(std::string_view source);
Referent parse_referent_json(std::string_view source);
Referent load_referent(const std::filesystem::path& path);

std::string render_referent(const Referent& referent);
nlohmann::ordered_json referent_to_json(const Referent& referent);
Referent referent_from_json(const nlohmann::ordered_json& doc);

} // namespace fedm
