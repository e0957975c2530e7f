#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gbts/chase.hpp"
#include "gbts/core.hpp"

namespace gbts {

struct NotStructurallyEquivalent : GbtsError {
    using GbtsError::GbtsError;
};

// ---------------------------------------------------------------------------
// Rule-body subsets
//
// Pattern elements reference a rule body subset by bitmask over the body
// atoms in set order. Bodies are capped at 16 atoms.

class BodyIndex {
  public:
    explicit BodyIndex(const KnowledgeBase& kb);

    size_t rule_count() const { return sizes_.size(); }
    size_t body_size(size_t rule) const { return sizes_[rule]; }
    uint32_t full_mask(size_t rule) const {
        return sizes_[rule] == 0 ? 0 : static_cast<uint32_t>((1u << sizes_[rule]) - 1);
    }
    const Atom& body_atom(size_t rule, size_t i) const;
    AtomSet subset(size_t rule, uint32_t mask) const;
    const std::vector<Term>& subset_vars(size_t rule, uint32_t mask) const;

  private:
    const KnowledgeBase* kb_;
    std::vector<size_t> sizes_;
    mutable std::vector<std::map<uint32_t, std::vector<Term>>> var_cache_;
};

// ---------------------------------------------------------------------------
// Patterns

struct PatternElement {
    int32_t rule = -1;   // -1 with mask 0 is the empty element
    uint32_t mask = 0;
    Substitution map;    // partial map from subset terms into bag terms

    bool is_empty() const { return rule < 0; }

    friend bool operator==(const PatternElement& a, const PatternElement& b) {
        return a.rule == b.rule && a.mask == b.mask && a.map == b.map;
    }
};

int element_compare(const PatternElement& a, const PatternElement& b);

// A set of elements in canonical order; always contains the empty element.
class Pattern {
  public:
    Pattern();
    static Pattern of_elements(std::vector<PatternElement> elems);

    void insert(PatternElement e);
    bool contains(const PatternElement& e) const;
    const std::vector<PatternElement>& elements() const { return elems_; }
    size_t size() const { return elems_.size(); }
    bool subset_of(const Pattern& other) const;

    // Elements with the given rule and the full body mask.
    std::vector<const PatternElement*> full_body_elements(const BodyIndex& bodies,
                                                          size_t rule) const;

    friend bool operator==(const Pattern& a, const Pattern& b) { return a.elems_ == b.elems_; }

  private:
    std::vector<PatternElement> elems_;
};

// All (subset, full homomorphism into atoms) pairs. In single-atom mode only
// masks of one atom are produced.
Pattern initial_pattern(const BodyIndex& bodies, const AtomSet& atoms,
                        bool single_atom = false);

// The join of e1 with e2; the result map keeps images inside the target term
// set. Returns nullopt when the shared variables disagree or are unmapped.
std::optional<PatternElement> elementary_join(const BodyIndex& bodies, const PatternElement& e1,
                                              const PatternElement& e2,
                                              const std::function<bool(Term)>& in_target);

// All defined elementary joins of P1-elements with P2-elements.
Pattern join(const BodyIndex& bodies, const Pattern& p1, const Pattern& p2,
             const std::function<bool(Term)>& in_b1_terms, bool single_atom = false);

// Total maps of whole rule bodies recoverable from a pattern: the stored
// full-body elements plus, in single-atom mode, consistent combinations of
// total single-atom elements.
std::vector<Substitution> full_body_maps(const BodyIndex& bodies, const Pattern& p, size_t rule,
                                         bool single_atom);

// ---------------------------------------------------------------------------
// Fusions, structural equivalence, natural bijections

// The fusion of the frontier induced by pi: frontier variables mapped to
// initial terms keep their image, the others collapse onto the least
// frontier variable with the same image.
Substitution fusion_of_frontier(const KnowledgeBase& kb, const Rule& r, const Substitution& pi);

bool structurally_equivalent(const KnowledgeBase& kb, const DerivationTreeBag& a,
                             const DerivationTreeBag& b);

// Term bijection from a to b; identity on initial terms, head-variable
// matching elsewhere. Throws NotStructurallyEquivalent.
Substitution natural_bijection(const KnowledgeBase& kb, const DerivationTreeBag& a,
                               const DerivationTreeBag& b);

bool pattern_leq(const KnowledgeBase& kb, const DerivationTreeBag& bag_a, const Pattern& pa,
                 const DerivationTreeBag& bag_b, const Pattern& pb);
bool pattern_equiv(const KnowledgeBase& kb, const DerivationTreeBag& bag_a, const Pattern& pa,
                   const DerivationTreeBag& bag_b, const Pattern& pb);

// ---------------------------------------------------------------------------
// Patterned derivation trees

struct PatternedTree {
    DerivationTree tree;
    std::vector<Pattern> patterns;
};

// Builds the tree bag by bag, maintaining sound and complete patterns via
// join-based propagation.
PatternedTree patterned_tree(const KnowledgeBase& kb, const BodyIndex& bodies,
                             const Derivation& d);

// One maintenance round after `created` was added: join the new bag with its
// parent, then update every other bag from its neighbor nearer the new bag,
// in increasing distance order.
void propagate(const KnowledgeBase& kb, const BodyIndex& bodies, const DerivationTree& tree,
               std::vector<Pattern>& patterns, size_t created);

// ---------------------------------------------------------------------------
// Links and abstract joins

// Injective map from the non-initial frontier terms of a child support into
// the terms of its parent support. Initial terms translate identically and
// need no entry.
struct Link {
    std::vector<std::pair<Term, Term>> map;  // sorted by key

    bool empty() const { return map.empty(); }
    std::optional<Term> apply(Term t) const;
    std::optional<Term> inverse(Term t) const;

    friend bool operator==(const Link& a, const Link& b) { return a.map == b.map; }
};

Link make_link(std::vector<std::pair<Term, Term>> pairs);
std::string to_string(const Link& l);

// Joins across a link: the upper join lands in P1's coordinates, the lower
// join in P2's.
Pattern abstract_upper_join(const BodyIndex& bodies, const KnowledgeBase& kb, const Pattern& p1,
                            const Link& link, const Pattern& p2, bool single_atom = false);
Pattern abstract_lower_join(const BodyIndex& bodies, const KnowledgeBase& kb, const Pattern& p1,
                            const Link& link, const Pattern& p2, bool single_atom = false);

// ---------------------------------------------------------------------------
// Saturation

struct SaturateOptions {
    size_t max_patterns = 100'000;
    size_t max_rules = 2'000'000;
    // Store only single-atom elements (valid for weakly guarded rule sets).
    bool single_atom_elements = false;
};

// The saturated rule base over canonical supports and patterns.
class Saturation {
  public:
    struct Support {
        int32_t rule;            // -1 for the initial-fact support
        Substitution fusion;
        std::vector<Term> terms;          // sorted
        AtomSet atoms;
        std::vector<Term> frontier_terms; // sorted
        std::vector<Term> generated;      // sorted
    };

    struct PatternEntry {
        size_t support;
        Pattern pattern;
    };

    struct SatRule {
        bool creation;
        size_t lhs;
        size_t rhs;
        Link link;   // creation rules only
        uint32_t rank;
    };

    // The saturation owns a copy of its knowledge base; results stay valid
    // independently of the argument's lifetime.
    const KnowledgeBase& kb() const { return *kb_; }
    const BodyIndex& bodies() const { return bodies_; }
    bool single_atom() const { return single_atom_; }

    const std::vector<Support>& supports() const { return supports_; }
    const std::vector<PatternEntry>& patterns() const { return patterns_; }
    const std::vector<SatRule>& rules() const { return rules_; }
    size_t root_support() const { return 0; }
    size_t initial_pattern_id() const { return initial_pattern_; }

    // Pattern inclusion; defined only between patterns of the same support.
    bool pattern_subset(size_t a, size_t b) const;

    const std::vector<size_t>& most_informative() const { return most_informative_; }
    std::optional<size_t> most_informative_evolution(size_t lhs) const;
    std::vector<size_t> most_informative_creations(size_t lhs) const;

    // Upper bound used by the termination check: 2^(|R| * 2^aB * b^tB),
    // reported as its base-2 logarithm.
    double pattern_count_log2_bound() const;

    std::string describe_support(size_t sid) const;
    std::string describe_pattern(size_t pid) const;
    std::string describe_rule(size_t rid) const;

  private:
    friend Saturation saturate(const KnowledgeBase&, const SaturateOptions&);
    friend class Saturator;

    std::shared_ptr<const KnowledgeBase> kb_;
    BodyIndex bodies_;
    bool single_atom_ = false;
    std::vector<Support> supports_;
    std::vector<PatternEntry> patterns_;
    std::vector<SatRule> rules_;
    size_t initial_pattern_ = 0;
    std::vector<size_t> most_informative_;

    explicit Saturation(const KnowledgeBase& kb)
        : kb_(std::make_shared<const KnowledgeBase>(kb)), bodies_(*kb_) {}
};

// Least fixpoint of the deduction rules: seeded creation rules, lower-join
// closure, upper-join evolutions, evolution transitivity, and the two
// composition rules. Throws BudgetExceeded past the pattern or rule caps.
Saturation saturate(const KnowledgeBase& kb, const SaturateOptions& opts = {});

}  // namespace gbts
