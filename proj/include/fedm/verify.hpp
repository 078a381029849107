#pragma once

#include "fedm/fpn.hpp"
#include "fedm/model.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fedm {

enum class IncompletenessKind {
    uncovered_input,    // an initial marking reaches no decision
    dead_place,         // internal place no transition consumes
    unreachable_output, // declared action never reached
    uncovered_principle,
    unused_input_term, // input term no rule mentions
};

std::string_view to_string(IncompletenessKind kind) noexcept;

struct IncompletenessFinding {
    IncompletenessKind kind = IncompletenessKind::uncovered_input;
    std::string subject; // atom, principle or marking label
    std::optional<std::size_t> marking;
    std::string message;

    bool operator==(const IncompletenessFinding&) const = default;
};

struct InconsistencyFinding {
    std::size_t marking = 0;
    /// Places that are distinct terms of one variable.
    std::vector<std::size_t> places;
    /// Set when the witness is a co-enabled transition pair rather than co-marked places.
    std::optional<std::pair<std::size_t, std::size_t>> transitions;

    bool operator==(const InconsistencyFinding&) const = default;
};

struct Cycle {
    std::vector<std::size_t> markings;    // m0, m1, ..., back to m0 implied
    std::vector<std::size_t> transitions; // transitions[i] leads markings[i] -> markings[i+1]

    bool operator==(const Cycle&) const = default;
};

struct RedundancyFinding {
    std::size_t first = 0; // transition indices, first < second
    std::size_t second = 0;
    std::optional<std::size_t> witness; // a reachable marking enabling both

    bool operator==(const RedundancyFinding&) const = default;
};

struct CrossPrincipleConflict {
    std::size_t marking = 0;
    std::size_t first = 0; // transition tagged with principle_a
    std::size_t second = 0;
    std::string principle_a;
    std::string principle_b;

    bool operator==(const CrossPrincipleConflict&) const = default;
};

struct PrincipleRedundancy {
    std::string first; // rule names, declaration order
    std::string second;

    bool operator==(const PrincipleRedundancy&) const = default;
};

using PrincipleCoverage = std::vector<std::pair<std::string, int>>;

std::vector<IncompletenessFinding> detect_incompleteness(
    const ReachabilityGraph& graph, const FuzzyPetriNet& net, const EdmModel& model);

std::vector<InconsistencyFinding> detect_inconsistency(
    const ReachabilityGraph& graph, const FuzzyPetriNet& net, const EdmModel& model);

/// Elementary cycles (self-loops included), each rotated to start at its
/// smallest marking. Stops after `limit` cycles and sets `*truncated`.
std::vector<Cycle> detect_circularity(
    const ReachabilityGraph& graph, std::size_t limit = 10'000, bool* truncated = nullptr);

std::vector<RedundancyFinding> detect_redundancy(const FuzzyPetriNet& net, const ReachabilityGraph& graph);

PrincipleCoverage principle_coverage(const EdmModel& model);

/// Throws VerificationError if a pair names an unknown principle. In strict mode
/// any co-enabled incompatible pair is flagged, whatever its consequents.
std::vector<CrossPrincipleConflict> cross_principle_conflicts(const ReachabilityGraph& graph, const FuzzyPetriNet& net,
    const EdmModel& model, const std::vector<PrinciplePair>& incompatible, bool strict = false);

std::vector<PrincipleRedundancy> principle_redundancy(const EdmModel& model);

struct VerifyOptions {
    /// Replaces the model's incompatible pairs when set.
    std::optional<std::vector<PrinciplePair>> incompatible;
    bool strict = false;
    std::size_t state_cap = kDefaultStateCap;
    std::size_t cycle_limit = 10'000;
};

struct VerificationReport {
    FuzzyPetriNet net;
    ReachabilityGraph graph;

    std::vector<IncompletenessFinding> incompleteness;
    std::vector<InconsistencyFinding> inconsistency;
    std::vector<Cycle> circularity;
    bool cycles_truncated = false;
    std::vector<RedundancyFinding> redundancy;
    PrincipleCoverage principle_coverage;
    std::vector<CrossPrincipleConflict> cross_principle_conflicts;
    std::vector<PrincipleRedundancy> principle_redundancy;

    /// True when no check reported anything.
    bool empty() const noexcept;
    std::size_t finding_count() const noexcept;
};

VerificationReport verify(const EdmModel& model, const VerifyOptions& options = {});

nlohmann::ordered_json to_json(const VerificationReport& report);
std::string render_report(const VerificationReport& report);

} // namespace fedm
