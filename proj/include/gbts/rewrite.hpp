#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gbts/chase.hpp"
#include "gbts/core.hpp"

namespace gbts {

struct ArityOverflow : GbtsError {
    using GbtsError::GbtsError;
};

struct NotFrontierGuarded : GbtsError {
    using GbtsError::GbtsError;
};

struct BodyCyclic : GbtsError {
    using GbtsError::GbtsError;
};

// ---------------------------------------------------------------------------
// Translation into a weakly frontier-guarded rule set.
//
// Adds a unary marker predicate for initial terms and a wide predicate that
// gathers terms sharing a bag: permutation and duplication rules over the
// wide predicate plus one translated rule per input rule. Preserves
// entailment of queries over the original vocabulary for rule sets whose
// derivations are all greedy, and is sound in general.

struct WfgTranslateOptions {
    size_t max_arity = 64;
};

KnowledgeBase wfg_translate(const KnowledgeBase& kb, const WfgTranslateOptions& opts = {});

// ---------------------------------------------------------------------------
// Normalization of frontier-guarded rules.
//
// Splits each rule with a non-empty frontier into the body component holding
// the frontier guard (components computed after splitting constants per
// occurrence) and a remainder that only has to be entailed once, linked by a
// fresh nullary predicate. Rules with an empty frontier pass through into
// `disconnected` unchanged.

struct NormalizedRules {
    std::vector<Rule> disconnected;
    std::vector<Rule> connected;
};

NormalizedRules normalize_fg(const std::vector<Rule>& rules);

// Fixpoint integration of disconnected rules into the fact: while the body
// of some remaining disconnected rule is entailed (per the callback), its
// head is added with fresh existential witnesses and the rule is dropped.
using EntailmentCallback = std::function<bool(const AtomSet& fact, const AtomSet& query)>;

AtomSet integrate_disconnected(const AtomSet& fact, std::vector<Rule> disconnected,
                               const EntailmentCallback& entailed);

// ---------------------------------------------------------------------------
// Decomposition graphs and acyclic coverings

struct DecompositionNode {
    AtomSet atoms;
    size_t guard;  // index into atoms() of an atom covering the node's variables
};

struct DecompositionEdge {
    size_t a, b;               // node indices, a < b
    std::vector<Term> shared;  // sorted shared variables
};

struct DecompositionGraph {
    std::vector<DecompositionNode> nodes;
    std::vector<DecompositionEdge> edges;
};

// Partition of `s` into internally guarded groups: atoms are swept in set
// order and absorbed into the most recently opened node that stays guarded.
DecompositionGraph decomposition_graph(const AtomSet& s);

struct AcyclicCovering {
    std::vector<size_t> kept_edges;  // indices into DecompositionGraph::edges
};

// A forest obtained by removing removable edges only, when one exists.
// Ties between equally strong edges prefer those incident to `root_hint`.
std::optional<AcyclicCovering> acyclic_covering(const DecompositionGraph& g,
                                                size_t root_hint = SIZE_MAX);

// ---------------------------------------------------------------------------
// Guarded translation of body-acyclic frontier-guarded rules.
//
// Identity on rules whose decomposition graph is a single node; otherwise
// one fresh predicate per covering edge and one guarded rule per node.
// Throws NotFrontierGuarded / BodyCyclic.

std::vector<Rule> ba_to_guarded(const Rule& r);

}  // namespace gbts
