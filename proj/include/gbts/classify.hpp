#pragma once

#include <string>
#include <vector>

#include "gbts/chase.hpp"
#include "gbts/core.hpp"

namespace gbts {

// A predicate position, 1-based.
struct PredicatePosition {
    Predicate pred;
    uint32_t index;

    friend bool operator==(const PredicatePosition& a, const PredicatePosition& b) {
        return a.pred == b.pred && a.index == b.index;
    }
};

int position_compare(const PredicatePosition& a, const PredicatePosition& b);

// Least fixpoint of: (1) head positions holding an existential variable are
// affected; (2) if a body variable occurs in affected positions only, its
// head positions are affected.
std::vector<PredicatePosition> affected_positions(const std::vector<Rule>& rules);

struct RuleFlags {
    bool datalog = false;
    bool atomic_body = false;
    bool guarded = false;
    bool frontier_one = false;          // |frontier| = 1, literally
    bool frontier_guarded = false;      // vacuously true for an empty frontier
    bool guarded_frontier_one = false;
    bool weakly_guarded = false;
    bool weakly_frontier_one = false;   // at most one affected frontier variable
    bool weakly_frontier_guarded = false;
    bool weakly_guarded_frontier_one = false;
    bool empty_frontier = false;        // flagged: fails frontier_one, passes frontier_guarded
};

struct FragmentReport {
    std::vector<PredicatePosition> affected;            // sorted
    std::vector<RuleFlags> per_rule;
    std::vector<std::vector<Term>> affected_vars;       // per rule, sorted body variables

    // Set-level labels: conjunction of the per-rule flags.
    bool datalog = true;
    bool gfr1 = true;
    bool g = true;
    bool fr1 = true;
    bool fg = true;
    bool wgfr1 = true;
    bool wg = true;
    bool wfr1 = true;
    bool wfg = true;

    std::string summary() const;
    // Stable "key: value" lines for machine consumption.
    std::string key_value(const std::vector<Rule>& rules) const;
};

FragmentReport classify(const std::vector<Rule>& rules);

// True iff vars ⊆ vars(a).
bool is_guard(const Atom& a, const std::vector<Term>& vars);

}  // namespace gbts
