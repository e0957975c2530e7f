#include "gbts/chase.hpp"

#include <algorithm>
#include <cassert>

namespace gbts {

// ---------------------------------------------------------------------------
// Rule / KnowledgeBase

Rule::Rule(std::string name, AtomSet body, AtomSet head)
    : name_(std::move(name)), body_(std::move(body)), head_(std::move(head)) {
    for (Term v : head_.vars()) {
        if (term_set_contains(body_.vars(), v))
            frontier_.push_back(v);
        else
            existentials_.push_back(v);
    }
    for (Term t : head_.terms())
        if (is_constant(t)) head_constants_.push_back(t);
}

KnowledgeBase::KnowledgeBase(AtomSet fact, std::vector<Rule> rules)
    : fact_(std::move(fact)), rules_(std::move(rules)) {
    std::vector<Term> t0 = fact_.vars();
    for (Term t : fact_.terms())
        if (is_constant(t)) t0.push_back(t);
    for (const Rule& r : rules_) {
        for (Term t : r.body().terms())
            if (is_constant(t)) t0.push_back(t);
        for (Term t : r.head().terms())
            if (is_constant(t)) t0.push_back(t);
    }
    initial_terms_ = sorted_terms(std::move(t0));
}

// ---------------------------------------------------------------------------
// Rule application

ApplicationResult apply_rule(const AtomSet& fact, const Rule& rule, const Substitution& pi,
                             std::string_view fresh_prefix) {
    Substitution seed = pi.restricted([&](Term t) { return rule.body().has_term(t); });
    if (!maps_into(rule.body(), fact, seed))
        throw TriggerNotHomomorphism("trigger does not extend to a homomorphism for rule " +
                                     rule.name());
    Substitution safe;
    for (Term v : rule.frontier()) {
        auto img = pi.lookup(v);
        if (!img)
            throw TriggerNotHomomorphism("trigger leaves frontier variable unmapped in rule " +
                                         rule.name());
        safe.bind(v, *img);
    }
    for (Term v : rule.existentials()) safe.bind(v, fresh_variable(fresh_prefix));
    AtomSet produced = safe.apply(rule.head());
    return {union_of(fact, produced), produced, safe};
}

// ---------------------------------------------------------------------------
// Breadth-first chase

namespace {

// One breadth-first step: all triggers against `current` whose image uses at
// least one atom of `last_added`; step 1 treats the whole fact as new.
struct StepTrigger {
    size_t rule;
    Substitution hom;
};

std::vector<StepTrigger> new_triggers(const KnowledgeBase& kb, const AtomSet& current,
                                      const AtomSet& last_added, bool everything_new,
                                      size_t max_triggers) {
    std::vector<StepTrigger> out;
    size_t visited = 0;
    bool overflow = false;
    for (size_t ri = 0; ri < kb.rules().size() && !overflow; ++ri) {
        const Rule& r = kb.rule(ri);
        if (r.body().empty()) continue;
        for_each_homomorphism(r.body(), current, {}, [&](const Substitution& hom) {
            if (++visited > max_triggers) {
                overflow = true;
                return false;
            }
            bool fresh = everything_new;
            if (!fresh) {
                for (const Atom& a : r.body().atoms()) {
                    if (last_added.contains(hom.apply(a))) {
                        fresh = true;
                        break;
                    }
                }
            }
            if (fresh) out.push_back({ri, hom});
            return true;
        });
    }
    if (overflow)
        throw BudgetExceeded("trigger enumeration exceeded the per-step budget of " +
                             std::to_string(max_triggers));
    return out;
}

}  // namespace

std::vector<std::pair<size_t, Substitution>> breadth_triggers(const KnowledgeBase& kb,
                                                              const AtomSet& current,
                                                              const AtomSet& last_added,
                                                              bool everything_new) {
    std::vector<std::pair<size_t, Substitution>> out;
    for (const auto& t : new_triggers(kb, current, last_added, everything_new, SIZE_MAX))
        out.emplace_back(t.rule, t.hom);
    return out;
}

ChaseResult chase(const KnowledgeBase& kb, size_t k, const ChaseLimits& limits) {
    ChaseResult res;
    res.fact = kb.fact();
    res.atoms_per_step.push_back(res.fact.size());
    AtomSet last_added = kb.fact();
    for (size_t step = 1; step <= k; ++step) {
        auto triggers = new_triggers(kb, res.fact, last_added, step == 1, limits.max_triggers_per_step);
        std::vector<Atom> added;
        AtomSet next = res.fact;
        for (const auto& trig : triggers) {
            auto app = apply_rule(next, kb.rule(trig.rule), trig.hom);
            next = std::move(app.fact);
            for (const Atom& a : app.produced.atoms()) added.push_back(a);
            if (next.size() > limits.max_atoms)
                throw BudgetExceeded("chase exceeded the atom budget of " +
                                     std::to_string(limits.max_atoms));
        }
        AtomSet added_set(std::move(added));
        if (next.size() == res.fact.size()) {
            res.status = ChaseStatus::Saturated;
            res.atoms_per_step.push_back(next.size());
            return res;
        }
        res.fact = std::move(next);
        last_added = std::move(added_set);
        res.atoms_per_step.push_back(res.fact.size());
    }
    res.status = ChaseStatus::DepthReached;
    return res;
}

AtomSet k_saturation(const KnowledgeBase& kb, size_t k, const ChaseLimits& limits) {
    return chase(kb, k, limits).fact;
}

// ---------------------------------------------------------------------------
// Derivations

std::vector<AtomSet> Derivation::facts() const {
    std::vector<AtomSet> out;
    out.push_back(initial);
    for (const auto& s : steps) out.push_back(union_of(out.back(), s.produced));
    return out;
}

Derivation derive_breadth_first(const KnowledgeBase& kb, size_t budget,
                                const ChaseLimits& limits, size_t max_steps) {
    Derivation d;
    d.initial = kb.fact();
    d.result = kb.fact();
    AtomSet last_added = kb.fact();
    bool first = true;
    size_t rounds = 0;
    while (d.steps.size() < budget && rounds++ < max_steps) {
        auto triggers = new_triggers(kb, d.result, last_added, first, limits.max_triggers_per_step);
        first = false;
        if (triggers.empty()) break;
        std::vector<Atom> added;
        for (const auto& trig : triggers) {
            if (d.steps.size() >= budget) break;
            const Rule& r = kb.rule(trig.rule);
            auto app = apply_rule(d.result, r, trig.hom);
            d.result = std::move(app.fact);
            Substitution fmap = trig.hom.restricted(
                [&](Term t) { return term_set_contains(r.frontier(), t); });
            d.steps.push_back({trig.rule, std::move(fmap), app.safe, app.produced});
            for (const Atom& a : app.produced.atoms()) added.push_back(a);
            if (d.result.size() > limits.max_atoms)
                throw BudgetExceeded("derivation exceeded the atom budget");
        }
        last_added = AtomSet(std::move(added));
    }
    return d;
}

Derivation derive_script(const KnowledgeBase& kb, const std::vector<ScriptStep>& script) {
    Derivation d;
    d.initial = kb.fact();
    d.result = kb.fact();
    for (size_t i = 0; i < script.size(); ++i) {
        const auto& s = script[i];
        if (s.rule >= kb.rules().size())
            throw InvalidScriptStep("script step " + std::to_string(i) + ": no such rule");
        const Rule& r = kb.rule(s.rule);
        Substitution seed = s.trigger.restricted([&](Term t) { return r.body().has_term(t); });
        auto hom = first_homomorphism(r.body(), d.result, seed);
        if (!hom)
            throw InvalidScriptStep("script step " + std::to_string(i) +
                                    ": trigger is not a homomorphism for rule " + r.name());
        auto app = apply_rule(d.result, r, *hom);
        d.result = std::move(app.fact);
        Substitution fmap =
            hom->restricted([&](Term t) { return term_set_contains(r.frontier(), t); });
        d.steps.push_back({s.rule, std::move(fmap), app.safe, app.produced});
    }
    return d;
}

// ---------------------------------------------------------------------------
// Greedy witnesses and derivation trees

std::vector<std::optional<size_t>> greedy_witnesses(const KnowledgeBase& kb,
                                                    const Derivation& d) {
    std::vector<std::optional<size_t>> out;
    out.reserve(d.steps.size());
    for (size_t i = 0; i < d.steps.size(); ++i) {
        const auto& step = d.steps[i];
        std::vector<Term> image;
        for (const auto& [v, t] : step.frontier_map.pairs()) image.push_back(t);
        auto in_t0 = [&](Term t) { return kb.is_initial(t); };
        if (std::all_of(image.begin(), image.end(), in_t0)) {
            out.push_back(0);
            continue;
        }
        std::optional<size_t> witness;
        for (size_t j = 0; j < i; ++j) {
            const auto& prod = d.steps[j].produced;
            bool covered = std::all_of(image.begin(), image.end(), [&](Term t) {
                return in_t0(t) || term_set_contains(prod.vars(), t);
            });
            if (covered) {
                witness = j + 1;  // bag index: bag j+1 was created by step j
                break;
            }
        }
        out.push_back(witness);
    }
    return out;
}

DerivationTree derivation_tree(const KnowledgeBase& kb, const Derivation& d,
                               const DerivationTreeOptions& opts) {
    auto witnesses = greedy_witnesses(kb, d);
    for (size_t i = 0; i < witnesses.size(); ++i)
        if (!witnesses[i]) throw NotGreedy(i);

    DerivationTree tree;
    DerivationTreeBag root;
    root.terms = kb.initial_terms();
    root.atoms = d.initial;
    tree.bags.push_back(std::move(root));

    for (size_t i = 0; i < d.steps.size(); ++i) {
        const auto& step = d.steps[i];
        DerivationTreeBag bag;
        bag.atoms = step.produced;
        if (opts.reduced_bags) {
            bag.terms = step.produced.terms();
            for (Term c : kb.rule(step.rule).head_constants())
                bag.terms.push_back(c);
            bag.terms = sorted_terms(std::move(bag.terms));
        } else {
            bag.terms = term_set_union(step.produced.vars(), kb.initial_terms());
        }
        bag.rule = step.rule;
        bag.frontier_map = step.frontier_map;
        bag.safe_map = step.safe_map;
        // Smallest bag whose terms cover the frontier image; with full bags
        // this matches the greedy witness, with reduced bags the guard atom
        // pins the image inside a single earlier bag.
        size_t parent = SIZE_MAX;
        for (size_t b = 0; b < tree.bags.size(); ++b) {
            bool covered = true;
            for (const auto& [v, t] : step.frontier_map.pairs()) {
                if (!std::binary_search(tree.bags[b].terms.begin(), tree.bags[b].terms.end(), t,
                                        TermLess{})) {
                    covered = false;
                    break;
                }
            }
            if (covered) {
                parent = b;
                break;
            }
        }
        if (parent == SIZE_MAX) throw NotGreedy(i);
        bag.parent = parent;
        tree.bags.push_back(std::move(bag));
    }
    return tree;
}

AtomSet DerivationTree::all_atoms() const {
    std::vector<Atom> atoms;
    for (const auto& b : bags)
        for (const Atom& a : b.atoms.atoms()) atoms.push_back(a);
    return AtomSet(std::move(atoms));
}

size_t DerivationTree::width() const {
    size_t w = 0;
    for (const auto& b : bags) w = std::max(w, b.terms.size());
    return w == 0 ? 0 : w - 1;
}

std::optional<std::string> check_tree_decomposition(const DerivationTree& tree,
                                                    const AtomSet& atoms) {
    // 1–2: every term and atom is covered by some bag.
    std::vector<Term> covered_terms;
    std::vector<Atom> covered_atoms;
    for (const auto& b : tree.bags) {
        covered_terms.insert(covered_terms.end(), b.terms.begin(), b.terms.end());
        covered_atoms.insert(covered_atoms.end(), b.atoms.atoms().begin(), b.atoms.atoms().end());
    }
    covered_terms = sorted_terms(std::move(covered_terms));
    AtomSet covered(std::move(covered_atoms));
    for (Term t : atoms.terms())
        if (!term_set_contains(covered_terms, t))
            return "term " + to_string(t) + " is in no bag";
    for (const Atom& a : atoms.atoms())
        if (!covered.contains(a)) return "atom " + to_string(a) + " is in no bag";
    // 3: bag atoms only use bag terms.
    for (size_t i = 0; i < tree.bags.size(); ++i) {
        for (Term t : tree.bags[i].atoms.terms())
            if (!std::binary_search(tree.bags[i].terms.begin(), tree.bags[i].terms.end(), t,
                                    TermLess{}))
                return "bag " + std::to_string(i) + " holds an atom over foreign term " +
                       to_string(t);
    }
    // 4: running intersection. The bags containing any given term must form a
    // connected subtree; with parent pointers it suffices that for every
    // non-root bag containing t whose parent does not, t occurs in no other
    // bag closer to the root.
    for (Term t : atoms.terms()) {
        std::vector<size_t> holders;
        for (size_t i = 0; i < tree.bags.size(); ++i)
            if (std::binary_search(tree.bags[i].terms.begin(), tree.bags[i].terms.end(), t,
                                   TermLess{}))
                holders.push_back(i);
        if (holders.empty()) continue;
        // Climb from every holder towards the root until a bag without t;
        // all holders must reach the same top holder.
        size_t top = SIZE_MAX;
        for (size_t h : holders) {
            size_t cur = h;
            while (tree.bags[cur].parent != SIZE_MAX) {
                size_t p = tree.bags[cur].parent;
                bool parent_has =
                    std::binary_search(tree.bags[p].terms.begin(), tree.bags[p].terms.end(), t,
                                       TermLess{});
                if (!parent_has) break;
                cur = p;
            }
            if (top == SIZE_MAX)
                top = cur;
            else if (top != cur)
                return "term " + to_string(t) + " spans a disconnected set of bags";
        }
    }
    return std::nullopt;
}

size_t derivation_tree_width_bound(const KnowledgeBase& kb) {
    size_t constants = 0;
    for (Term t : kb.initial_terms())
        if (is_constant(t)) ++constants;
    size_t max_head_vars = 0;
    for (const Rule& r : kb.rules()) max_head_vars = std::max(max_head_vars, r.head().vars().size());
    return kb.fact().vars().size() + constants + max_head_vars;
}

// ---------------------------------------------------------------------------
// Oracle

OracleAnswer oracle_entails(const KnowledgeBase& kb, const AtomSet& query, size_t depth,
                            const ChaseLimits& limits) {
    AtomSet current = kb.fact();
    AtomSet last_added = kb.fact();
    bool first = true;
    for (size_t step = 0;; ++step) {
        if (maps_into(query, current)) return OracleAnswer::Yes;
        if (step == depth) return OracleAnswer::NoUpToDepth;
        auto triggers = new_triggers(kb, current, last_added, first, limits.max_triggers_per_step);
        first = false;
        std::vector<Atom> added;
        AtomSet next = current;
        for (const auto& trig : triggers) {
            auto app = apply_rule(next, kb.rule(trig.rule), trig.hom);
            next = std::move(app.fact);
            for (const Atom& a : app.produced.atoms()) added.push_back(a);
            if (next.size() > limits.max_atoms)
                throw BudgetExceeded("oracle chase exceeded the atom budget");
        }
        if (next.size() == current.size()) return OracleAnswer::NoSaturated;
        current = std::move(next);
        last_added = AtomSet(std::move(added));
    }
}

std::string to_string(OracleAnswer a) {
    switch (a) {
        case OracleAnswer::Yes: return "yes";
        case OracleAnswer::NoSaturated: return "no";
        case OracleAnswer::NoUpToDepth: return "no_up_to_depth";
    }
    return "?";
}

}  // namespace gbts
