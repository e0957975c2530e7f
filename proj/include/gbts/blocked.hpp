#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gbts/patterns.hpp"

namespace gbts {

// ---------------------------------------------------------------------------
// Full blocked trees
//
// Built breadth-first from the most informative rule base: the root carries
// the evolved initial pattern, every non-blocked bag gets one child per most
// informative creation rule of its pattern, and a bag is blocked (a leaf)
// when its pattern was already assigned to an earlier bag.

struct BlockedTreeOptions {
    size_t max_bags = 100'000;
};

struct BlockedBag {
    size_t pattern;         // abstract pattern id
    size_t support;         // support id
    size_t parent = SIZE_MAX;
    Link link;              // link to the parent, in abstract coordinates
    Substitution term_map;  // abstract support variables -> concrete terms
    std::vector<Term> terms;  // concrete, sorted
    AtomSet atoms;            // concrete
    bool blocked = false;
    size_t depth = 0;
};

class BlockedTree {
  public:
    const Saturation& saturation() const { return *sat_; }
    const std::vector<BlockedBag>& bags() const { return bags_; }
    const BlockedBag& bag(size_t i) const { return bags_[i]; }

    // First-created bag of the pattern class (the only one with children).
    size_t representative(size_t bag) const;
    const std::vector<size_t>& children(size_t bag) const { return children_[bag]; }
    size_t depth() const;

    AtomSet all_atoms() const;

  private:
    friend BlockedTree build_full_blocked_tree(const Saturation&, const BlockedTreeOptions&);
    const Saturation* sat_ = nullptr;
    std::vector<BlockedBag> bags_;
    std::vector<std::vector<size_t>> children_;
    std::map<size_t, size_t> representative_;  // pattern id -> bag index
};

BlockedTree build_full_blocked_tree(const Saturation& sat, const BlockedTreeOptions& opts = {});

// ---------------------------------------------------------------------------
// Generated trees
//
// Trees obtained from a blocked tree by iterated bag copies. Each bag
// remembers which blocked bag it instantiates and how the abstract support
// terms read in its own coordinates. At most one child per copied blocked
// bag exists under any parent.

struct GeneratedBag {
    size_t image;           // blocked bag this one instantiates
    size_t parent = SIZE_MAX;
    Substitution term_map;  // abstract support variables -> generated terms
    std::vector<Term> terms;  // sorted
    AtomSet atoms;
    size_t depth = 0;
};

class GeneratedTree {
  public:
    explicit GeneratedTree(const BlockedTree& bt);

    const BlockedTree& blocked() const { return *bt_; }
    const std::vector<GeneratedBag>& bags() const { return bags_; }
    const GeneratedBag& bag(size_t i) const { return bags_[i]; }
    const std::vector<size_t>& children(size_t bag) const { return children_[bag]; }

    std::optional<size_t> child_with_image(size_t parent, size_t blocked_child) const;

    // Blocked bags that may be copied under `parent`: the children of the
    // representative of the parent image's class.
    const std::vector<size_t>& copy_candidates(size_t parent) const;

    // Copies `blocked_child` under `parent`, reusing an existing child with
    // the same image. Returns the child bag index.
    size_t copy_under(size_t parent, size_t blocked_child);

    // Bag that introduced the given generated term (the root for initial
    // terms and constants).
    size_t creator(Term t) const;

    AtomSet all_atoms() const;

    // Concrete term of `bag` at the given abstract coordinate.
    std::optional<Term> concrete(size_t bag, Term abstract_term) const;
    // Abstract coordinate of a concrete term visible in `bag`.
    std::optional<Term> abstract_of(size_t bag, Term concrete_term) const;

  private:
    const BlockedTree* bt_;
    std::vector<GeneratedBag> bags_;
    std::vector<std::vector<size_t>> children_;
    std::map<uint32_t, size_t> creator_;  // term id -> bag
};

// Script-driven generation: copy steps as (parent bag, blocked child).
struct CopyStep {
    size_t parent;
    size_t blocked_child;
};

GeneratedTree generate(const BlockedTree& bt, const std::vector<CopyStep>& script);

// Exhaustive expansion to the given depth: every bag receives every possible
// copy child, breadth-first. Throws BudgetExceeded past max_bags.
GeneratedTree expand_to_depth(const BlockedTree& bt, size_t depth, size_t max_bags = 100'000);

// Embeds the blocked tree itself as a generated tree (each bag copied under
// the image of its parent). Bag i of the result instantiates blocked bag i.
GeneratedTree embed_blocked(const BlockedTree& bt);

}  // namespace gbts
