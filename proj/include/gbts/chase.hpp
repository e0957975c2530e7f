#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gbts/core.hpp"

namespace gbts {

struct TriggerNotHomomorphism : GbtsError {
    using GbtsError::GbtsError;
};

struct InvalidScriptStep : GbtsError {
    using GbtsError::GbtsError;
};

struct NotGreedy : GbtsError {
    size_t step;
    explicit NotGreedy(size_t step_)
        : GbtsError("derivation is not greedy at step " + std::to_string(step_)), step(step_) {}
};

// ---------------------------------------------------------------------------
// Rules and knowledge bases

class Rule {
  public:
    Rule() = default;
    Rule(std::string name, AtomSet body, AtomSet head);

    const std::string& name() const { return name_; }
    const AtomSet& body() const { return body_; }
    const AtomSet& head() const { return head_; }
    // vars(body) ∩ vars(head), sorted.
    const std::vector<Term>& frontier() const { return frontier_; }
    // Head variables that are not frontier variables, sorted.
    const std::vector<Term>& existentials() const { return existentials_; }
    const std::vector<Term>& head_constants() const { return head_constants_; }

    bool is_datalog() const { return existentials_.empty(); }

  private:
    std::string name_;
    AtomSet body_;
    AtomSet head_;
    std::vector<Term> frontier_;
    std::vector<Term> existentials_;
    std::vector<Term> head_constants_;
};

class KnowledgeBase {
  public:
    KnowledgeBase() = default;
    KnowledgeBase(AtomSet fact, std::vector<Rule> rules);

    const AtomSet& fact() const { return fact_; }
    const std::vector<Rule>& rules() const { return rules_; }
    const Rule& rule(size_t i) const { return rules_[i]; }

    // vars(fact) plus every constant of the fact and the rules, sorted.
    const std::vector<Term>& initial_terms() const { return initial_terms_; }
    bool is_initial(Term t) const { return term_set_contains(initial_terms_, t); }

  private:
    AtomSet fact_;
    std::vector<Rule> rules_;
    std::vector<Term> initial_terms_;
};

// ---------------------------------------------------------------------------
// Rule application

// Safe application: frontier variables are replaced by their pi-image and
// every other head variable by a globally fresh variable. Throws
// TriggerNotHomomorphism when pi does not extend to a homomorphism from
// body(R) into F.
struct ApplicationResult {
    AtomSet fact;      // F ∪ produced
    AtomSet produced;  // instantiated head atoms
    Substitution safe; // head variables -> their instantiation
};

ApplicationResult apply_rule(const AtomSet& fact, const Rule& rule, const Substitution& pi,
                             std::string_view fresh_prefix = "Z");

// ---------------------------------------------------------------------------
// Derivations

struct DerivationStep {
    size_t rule;                // index into the KB rule list
    Substitution frontier_map;  // trigger restricted to the rule frontier
    Substitution safe_map;      // all head variables -> produced terms
    AtomSet produced;
};

struct Derivation {
    AtomSet initial;
    std::vector<DerivationStep> steps;
    AtomSet result;

    // F_0 .. F_k.
    std::vector<AtomSet> facts() const;
};

struct ChaseLimits {
    size_t max_atoms = 1'000'000;
    size_t max_triggers_per_step = 1'000'000;
};

enum class ChaseStatus { Saturated, DepthReached, BudgetExceeded };

struct ChaseResult {
    AtomSet fact;
    std::vector<size_t> atoms_per_step;  // cumulative count after each step, including step 0
    ChaseStatus status = ChaseStatus::DepthReached;
};

// Breadth-first saturation: step i applies exactly the triggers that use at
// least one atom produced at step i-1. Throws BudgetExceeded past the cap.
AtomSet k_saturation(const KnowledgeBase& kb, size_t k, const ChaseLimits& limits = {});
ChaseResult chase(const KnowledgeBase& kb, size_t k, const ChaseLimits& limits = {});

// Triggers of the next breadth-first step: homomorphisms from rule bodies
// into `current` that use at least one atom of `last_added` (all of them
// when everything_new is set).
std::vector<std::pair<size_t, Substitution>> breadth_triggers(const KnowledgeBase& kb,
                                                              const AtomSet& current,
                                                              const AtomSet& last_added,
                                                              bool everything_new);

struct ScriptStep {
    size_t rule;
    Substitution trigger;  // must extend to a homomorphism from the body
};

// Breadth-first derivation truncated after `budget` rule applications or
// `max_steps` breadth-first rounds, whichever comes first.
Derivation derive_breadth_first(const KnowledgeBase& kb, size_t budget,
                                const ChaseLimits& limits = {}, size_t max_steps = SIZE_MAX);
// Replays an explicit trigger script. Throws InvalidScriptStep.
Derivation derive_script(const KnowledgeBase& kb, const std::vector<ScriptStep>& script);

// ---------------------------------------------------------------------------
// Greedy derivations and derivation trees

// For each step i: 0 when the frontier image lies in the initial terms,
// otherwise the smallest bag index j >= 1 such that the frontier image is
// covered by vars(produced_{j-1}) ∪ T0; nullopt when no witness exists.
std::vector<std::optional<size_t>> greedy_witnesses(const KnowledgeBase& kb,
                                                    const Derivation& d);

struct DerivationTreeBag {
    std::vector<Term> terms;  // sorted
    AtomSet atoms;
    size_t parent = SIZE_MAX;           // SIZE_MAX for the root
    std::optional<size_t> rule;         // creating rule (non-root)
    Substitution frontier_map;          // creating trigger restricted to the frontier
    Substitution safe_map;              // creating instantiation of the head variables
};

struct DerivationTree {
    std::vector<DerivationTreeBag> bags;

    AtomSet all_atoms() const;
    size_t width() const;  // max bag term count minus one
};

struct DerivationTreeOptions {
    // When set, non-root bags hold only the instantiated head terms (plus
    // head constants) instead of also carrying every initial term. Valid for
    // frontier-guarded rule sets.
    bool reduced_bags = false;
};

// Throws NotGreedy on the first step without a witness.
DerivationTree derivation_tree(const KnowledgeBase& kb, const Derivation& d,
                               const DerivationTreeOptions& opts = {});

// Checks the four tree-decomposition conditions against `atoms`; returns an
// error description or nullopt when all hold.
std::optional<std::string> check_tree_decomposition(const DerivationTree& tree,
                                                    const AtomSet& atoms);

// |vars(F)| + |C| + max |vars(head(R))|; bags of a standard derivation tree
// never exceed this size.
size_t derivation_tree_width_bound(const KnowledgeBase& kb);

// ---------------------------------------------------------------------------
// Chase-based entailment oracle

enum class OracleAnswer { Yes, NoSaturated, NoUpToDepth };

// Yes iff the query maps into the k-saturation; NoSaturated when the chase
// reached a fixpoint without the query mapping (a semantic no); NoUpToDepth
// otherwise.
OracleAnswer oracle_entails(const KnowledgeBase& kb, const AtomSet& query, size_t depth,
                            const ChaseLimits& limits = {});

std::string to_string(OracleAnswer a);

}  // namespace gbts
