#pragma once

#include "fedm/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fedm {

struct Transition {
    std::string name;   // normalized rule name, e.g. "R1#2"
    std::string parent; // rule it came from
    RuleKind kind = RuleKind::ferr;
    std::vector<std::size_t> inputs;  // place indices, antecedent order
    std::vector<std::size_t> outputs; // place indices
    double beta = 1.0;
    std::vector<std::string> principles;

    bool operator==(const Transition&) const = default;
};

/// Token presence per place, in place order.
struct Marking {
    std::vector<std::uint8_t> tokens;

    Marking() = default;
    explicit Marking(std::size_t places) : tokens(places, 0) {}

    std::size_t size() const noexcept { return tokens.size(); }
    bool has(std::size_t place) const noexcept { return tokens[place] != 0; }
    void set(std::size_t place, bool value = true) noexcept { tokens[place] = value ? 1 : 0; }
    std::size_t count() const noexcept;

    bool operator==(const Marking&) const = default;
};

/// Bracket notation, e.g. "[1,0,0,1,0,0]".
std::string to_string(const Marking& marking);

struct MarkingHash {
    std::size_t operator()(const Marking& m) const noexcept;
};

class FuzzyPetriNet {
public:
    std::vector<Atom> places;
    std::vector<Transition> transitions;

    std::optional<std::size_t> place_index(const Atom& atom) const;

    bool enabled(const Marking& m, std::size_t transition) const;
    /// Consumes the input tokens and produces the output tokens.
    Marking fire(const Marking& m, std::size_t transition) const;

    /// Transitions that consume from `place`.
    std::vector<std::size_t> consumers(std::size_t place) const;

    bool operator==(const FuzzyPetriNet&) const = default;
};

/// One place per distinct atom used by a rule, ordered by variable declaration
/// order and then term declaration order; one transition per normalized rule.
FuzzyPetriNet build_fpn(const std::vector<NormalizedRule>& rules, const EdmModel& model);
FuzzyPetriNet build_fpn(const EdmModel& model);

struct ReachabilityEdge {
    std::size_t from = 0;
    std::size_t transition = 0;
    std::size_t to = 0;

    bool operator==(const ReachabilityEdge&) const = default;
};

struct ReachabilityGraph {
    std::vector<Marking> nodes; // node i is printed as M(i+1)
    std::vector<ReachabilityEdge> edges;
    std::vector<std::size_t> initial;

    std::optional<std::size_t> find(const Marking& m) const;
    std::vector<std::vector<std::size_t>> successors() const;

    std::unordered_map<Marking, std::size_t, MarkingHash> index;
};

constexpr std::size_t kDefaultStateCap = 1'000'000;

/// One token in exactly one term place of every input variable, enumerated with
/// the first declared input variable outermost. Terms without a place are skipped.
std::vector<Marking> initial_markings(const FuzzyPetriNet& net, const EdmModel& model);

/// Breadth-first exploration: initial markings first, then each dequeued marking
/// fires its enabled transitions in transition order. Throws VerificationError
/// ("state explosion") once more than `state_cap` markings are discovered.
ReachabilityGraph generate_reachability(
    const FuzzyPetriNet& net, const std::vector<Marking>& initial, std::size_t state_cap = kDefaultStateCap);
ReachabilityGraph generate_reachability(
    const FuzzyPetriNet& net, const EdmModel& model, std::size_t state_cap = kDefaultStateCap);

std::string net_to_dot(const FuzzyPetriNet& net);
std::string graph_to_dot(const ReachabilityGraph& graph, const FuzzyPetriNet& net);

} // namespace fedm
