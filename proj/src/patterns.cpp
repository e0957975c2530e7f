#include "gbts/patterns.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <queue>
#include <set>
#include <sstream>

namespace gbts {

// ---------------------------------------------------------------------------
// BodyIndex

BodyIndex::BodyIndex(const KnowledgeBase& kb) : kb_(&kb) {
    for (const Rule& r : kb.rules()) {
        if (r.body().size() > 16)
            throw GbtsError("rule " + r.name() + " has more than 16 body atoms");
        sizes_.push_back(r.body().size());
    }
    var_cache_.resize(sizes_.size());
}

const Atom& BodyIndex::body_atom(size_t rule, size_t i) const {
    return kb_->rule(rule).body().atoms()[i];
}

AtomSet BodyIndex::subset(size_t rule, uint32_t mask) const {
    std::vector<Atom> atoms;
    for (size_t i = 0; i < sizes_[rule]; ++i)
        if (mask & (1u << i)) atoms.push_back(body_atom(rule, i));
    return AtomSet(std::move(atoms));
}

const std::vector<Term>& BodyIndex::subset_vars(size_t rule, uint32_t mask) const {
    auto& cache = var_cache_[rule];
    auto it = cache.find(mask);
    if (it != cache.end()) return it->second;
    std::vector<Term> vars;
    for (size_t i = 0; i < sizes_[rule]; ++i) {
        if (!(mask & (1u << i))) continue;
        for (Term t : body_atom(rule, i).args)
            if (is_variable(t)) vars.push_back(t);
    }
    return cache.emplace(mask, sorted_terms(std::move(vars))).first->second;
}

// ---------------------------------------------------------------------------
// Pattern

int element_compare(const PatternElement& a, const PatternElement& b) {
    if (a.rule != b.rule) return a.rule < b.rule ? -1 : 1;
    if (a.mask != b.mask) return a.mask < b.mask ? -1 : 1;
    if (a.map == b.map) return 0;
    return substitution_less(a.map, b.map) ? -1 : 1;
}

namespace {
bool element_less(const PatternElement& a, const PatternElement& b) {
    return element_compare(a, b) < 0;
}
}  // namespace

Pattern::Pattern() { elems_.push_back(PatternElement{}); }

Pattern Pattern::of_elements(std::vector<PatternElement> elems) {
    Pattern p;
    elems.push_back(PatternElement{});
    std::sort(elems.begin(), elems.end(), element_less);
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    p.elems_ = std::move(elems);
    return p;
}

void Pattern::insert(PatternElement e) {
    auto it = std::lower_bound(elems_.begin(), elems_.end(), e, element_less);
    if (it != elems_.end() && element_compare(*it, e) == 0) return;
    elems_.insert(it, std::move(e));
}

bool Pattern::contains(const PatternElement& e) const {
    return std::binary_search(elems_.begin(), elems_.end(), e, element_less);
}

bool Pattern::subset_of(const Pattern& other) const {
    size_t i = 0;
    for (const auto& e : elems_) {
        while (i < other.elems_.size() && element_less(other.elems_[i], e)) ++i;
        if (i == other.elems_.size() || element_compare(other.elems_[i], e) != 0) return false;
    }
    return true;
}

std::vector<const PatternElement*> Pattern::full_body_elements(const BodyIndex& bodies,
                                                               size_t rule) const {
    std::vector<const PatternElement*> out;
    uint32_t full = bodies.full_mask(rule);
    for (const auto& e : elems_)
        if (!e.is_empty() && static_cast<size_t>(e.rule) == rule && e.mask == full)
            out.push_back(&e);
    return out;
}

Pattern initial_pattern(const BodyIndex& bodies, const AtomSet& atoms, bool single_atom) {
    std::vector<PatternElement> elems;
    for (size_t r = 0; r < bodies.rule_count(); ++r) {
        size_t n = bodies.body_size(r);
        if (n == 0) continue;
        auto add_subset = [&](uint32_t mask) {
            AtomSet subset = bodies.subset(r, mask);
            for_each_homomorphism(subset, atoms, {}, [&](const Substitution& hom) {
                elems.push_back({static_cast<int32_t>(r), mask, hom});
                return true;
            });
        };
        if (single_atom) {
            for (size_t i = 0; i < n; ++i) add_subset(1u << i);
        } else {
            uint32_t full = bodies.full_mask(r);
            for (uint32_t mask = 1; mask <= full; ++mask) add_subset(mask);
        }
    }
    return Pattern::of_elements(std::move(elems));
}

// ---------------------------------------------------------------------------
// Joins (concrete)

std::optional<PatternElement> elementary_join(const BodyIndex& bodies, const PatternElement& e1,
                                              const PatternElement& e2,
                                              const std::function<bool(Term)>& in_target) {
    if (e1.is_empty() && e2.is_empty()) return PatternElement{};
    if (e2.is_empty()) return e1;
    if (e1.is_empty()) {
        PatternElement out{e2.rule, e2.mask,
                           e2.map.restricted_to_values(in_target)};
        return out;
    }
    if (e1.rule != e2.rule) return std::nullopt;
    size_t rule = static_cast<size_t>(e1.rule);
    const auto& v1 = bodies.subset_vars(rule, e1.mask);
    const auto& v2 = bodies.subset_vars(rule, e2.mask);
    for (Term x : v1) {
        if (!term_set_contains(v2, x)) continue;
        auto a = e1.map.lookup(x);
        auto b = e2.map.lookup(x);
        if (!a || !b || *a != *b) return std::nullopt;
    }
    PatternElement out{e1.rule, e1.mask | e2.mask, e1.map};
    for (const auto& [k, v] : e2.map.pairs()) {
        if (!in_target(v)) continue;
        if (!out.map.bind(k, v)) return std::nullopt;
    }
    return out;
}

Pattern join(const BodyIndex& bodies, const Pattern& p1, const Pattern& p2,
             const std::function<bool(Term)>& in_b1_terms, bool single_atom) {
    std::vector<PatternElement> out;
    for (const auto& e1 : p1.elements()) {
        for (const auto& e2 : p2.elements()) {
            if (!e1.is_empty() && !e2.is_empty() && e1.rule != e2.rule) continue;
            auto j = elementary_join(bodies, e1, e2, in_b1_terms);
            if (!j) continue;
            if (single_atom && !j->is_empty() && (j->mask & (j->mask - 1)) != 0) continue;
            out.push_back(std::move(*j));
        }
    }
    return Pattern::of_elements(std::move(out));
}

std::vector<Substitution> full_body_maps(const BodyIndex& bodies, const Pattern& p, size_t rule,
                                         bool single_atom) {
    std::vector<Substitution> out;
    if (!single_atom || bodies.body_size(rule) <= 1) {
        for (const auto* e : p.full_body_elements(bodies, rule)) out.push_back(e->map);
        if (!single_atom) return out;
    }
    if (single_atom && bodies.body_size(rule) > 1) {
        // Combine total single-atom maps that agree on shared variables.
        size_t n = bodies.body_size(rule);
        std::vector<std::vector<const PatternElement*>> per_atom(n);
        for (const auto& e : p.elements()) {
            if (e.is_empty() || static_cast<size_t>(e.rule) != rule) continue;
            if ((e.mask & (e.mask - 1)) != 0) continue;
            size_t i = static_cast<size_t>(__builtin_ctz(e.mask));
            const auto& av = bodies.subset_vars(rule, e.mask);
            bool total = std::all_of(av.begin(), av.end(),
                                     [&](Term v) { return e.map.defined(v); });
            if (total) per_atom[i].push_back(&e);
        }
        Substitution acc;
        std::function<void(size_t)> rec = [&](size_t i) {
            if (i == n) {
                out.push_back(acc);
                return;
            }
            for (const auto* e : per_atom[i]) {
                Substitution saved = acc;
                bool ok = true;
                for (const auto& [k, v] : e->map.pairs())
                    if (!acc.bind(k, v)) {
                        ok = false;
                        break;
                    }
                if (ok) rec(i + 1);
                acc = std::move(saved);
            }
        };
        rec(0);
    }
    std::sort(out.begin(), out.end(),
              [](const Substitution& a, const Substitution& b) { return substitution_less(a, b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Fusions and bijections

Substitution fusion_of_frontier(const KnowledgeBase& kb, const Rule& r, const Substitution& pi) {
    Substitution fusion;
    for (Term y : r.frontier()) {
        auto img = pi.lookup(y);
        if (!img) throw GbtsError("fusion: frontier variable " + to_string(y) + " is unmapped");
        if (is_constant(*img) || kb.is_initial(*img)) {
            fusion.bind(y, *img);
            continue;
        }
        for (Term y2 : r.frontier()) {  // frontier is sorted, first match is least
            if (pi.lookup(y2) == img) {
                fusion.bind(y, y2);
                break;
            }
        }
    }
    return fusion;
}

bool structurally_equivalent(const KnowledgeBase& kb, const DerivationTreeBag& a,
                             const DerivationTreeBag& b) {
    if (!a.rule.has_value() || !b.rule.has_value()) return !a.rule.has_value() && !b.rule.has_value();
    if (*a.rule != *b.rule) return false;
    const Rule& r = kb.rule(*a.rule);
    return fusion_of_frontier(kb, r, a.frontier_map) == fusion_of_frontier(kb, r, b.frontier_map);
}

Substitution natural_bijection(const KnowledgeBase& kb, const DerivationTreeBag& a,
                               const DerivationTreeBag& b) {
    if (!structurally_equivalent(kb, a, b))
        throw NotStructurallyEquivalent("bags are not structurally equivalent");
    Substitution psi;
    if (!a.rule.has_value()) return psi;  // identity between root bags
    for (const auto& [u, x] : a.safe_map.pairs()) {
        if (is_constant(x) || kb.is_initial(x)) continue;
        psi.bind(x, b.safe_map.apply(u));
    }
    return psi;
}

bool pattern_leq(const KnowledgeBase& kb, const DerivationTreeBag& bag_a, const Pattern& pa,
                 const DerivationTreeBag& bag_b, const Pattern& pb) {
    if (!structurally_equivalent(kb, bag_a, bag_b)) return false;
    Substitution psi = natural_bijection(kb, bag_a, bag_b);
    for (const auto& e : pa.elements()) {
        PatternElement moved{e.rule, e.mask, e.map.composed_with(psi)};
        if (!pb.contains(moved)) return false;
    }
    return true;
}

bool pattern_equiv(const KnowledgeBase& kb, const DerivationTreeBag& bag_a, const Pattern& pa,
                   const DerivationTreeBag& bag_b, const Pattern& pb) {
    return pattern_leq(kb, bag_a, pa, bag_b, pb) && pattern_leq(kb, bag_b, pb, bag_a, pa);
}

// ---------------------------------------------------------------------------
// Patterned derivation trees

void propagate(const KnowledgeBase& kb, const BodyIndex& bodies, const DerivationTree& tree,
               std::vector<Pattern>& patterns, size_t created) {
    (void)kb;
    size_t n = tree.bags.size();
    std::vector<std::vector<size_t>> adj(n);
    for (size_t i = 0; i < n; ++i) {
        if (tree.bags[i].parent != SIZE_MAX) {
            adj[i].push_back(tree.bags[i].parent);
            adj[tree.bags[i].parent].push_back(i);
        }
    }
    std::vector<size_t> dist(n, SIZE_MAX), from(n, SIZE_MAX);
    std::deque<size_t> bfs{created};
    dist[created] = 0;
    std::vector<size_t> order;
    while (!bfs.empty()) {
        size_t cur = bfs.front();
        bfs.pop_front();
        if (cur != created) order.push_back(cur);
        for (size_t next : adj[cur]) {
            if (dist[next] != SIZE_MAX) continue;
            dist[next] = dist[cur] + 1;
            from[next] = cur;
            bfs.push_back(next);
        }
    }
    for (size_t b : order) {
        const auto& terms = tree.bags[b].terms;
        auto in_terms = [&](Term t) {
            return std::binary_search(terms.begin(), terms.end(), t, TermLess{});
        };
        patterns[b] = join(bodies, patterns[b], patterns[from[b]], in_terms);
    }
}

PatternedTree patterned_tree(const KnowledgeBase& kb, const BodyIndex& bodies,
                             const Derivation& d) {
    PatternedTree out;
    out.tree = derivation_tree(kb, d);
    out.patterns.resize(out.tree.bags.size());
    out.patterns[0] = initial_pattern(bodies, out.tree.bags[0].atoms);
    for (size_t b = 1; b < out.tree.bags.size(); ++b) {
        const auto& bag = out.tree.bags[b];
        auto in_terms = [&](Term t) {
            return std::binary_search(bag.terms.begin(), bag.terms.end(), t, TermLess{});
        };
        Pattern init = initial_pattern(bodies, bag.atoms);
        // Only the first b+1 bags exist at this point of the replay; build a
        // prefix view for propagation.
        DerivationTree prefix;
        prefix.bags.assign(out.tree.bags.begin(), out.tree.bags.begin() + static_cast<ptrdiff_t>(b + 1));
        out.patterns[b] = join(bodies, init, out.patterns[bag.parent], in_terms);
        std::vector<Pattern> window(out.patterns.begin(), out.patterns.begin() + static_cast<ptrdiff_t>(b + 1));
        propagate(kb, bodies, prefix, window, b);
        for (size_t i = 0; i <= b; ++i) out.patterns[i] = window[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Links

Link make_link(std::vector<std::pair<Term, Term>> pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        return term_less(a.first, b.first);
    });
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (size_t i = 1; i < pairs.size(); ++i)
        if (pairs[i].first == pairs[i - 1].first)
            throw GbtsError("link maps a frontier term twice");
    return Link{std::move(pairs)};
}

std::optional<Term> Link::apply(Term t) const {
    auto it = std::lower_bound(map.begin(), map.end(), t, [](const auto& p, Term k) {
        return term_less(p.first, k);
    });
    if (it != map.end() && it->first == t) return it->second;
    return std::nullopt;
}

std::optional<Term> Link::inverse(Term t) const {
    for (const auto& [k, v] : map)
        if (v == t) return k;
    return std::nullopt;
}

std::string to_string(const Link& l) {
    std::string out = "[";
    for (size_t i = 0; i < l.map.size(); ++i) {
        if (i) out += ",";
        out += to_string(l.map[i].first);
        out += "->";
        out += to_string(l.map[i].second);
    }
    out += "]";
    return out;
}

// ---------------------------------------------------------------------------
// Abstract joins

namespace {

// Link semantics extended with the identity on initial terms.
struct LambdaHat {
    const KnowledgeBase& kb;
    const Link& link;

    std::optional<Term> forward(Term t) const {
        if (is_constant(t) || kb.is_initial(t)) return t;
        return link.apply(t);
    }
    std::optional<Term> backward(Term t) const {
        if (is_constant(t) || kb.is_initial(t)) return t;
        return link.inverse(t);
    }
};

}  // namespace

Pattern abstract_upper_join(const BodyIndex& bodies, const KnowledgeBase& kb, const Pattern& p1,
                            const Link& link, const Pattern& p2, bool single_atom) {
    LambdaHat lam{kb, link};
    std::vector<PatternElement> out;
    for (const auto& e1 : p1.elements()) {
        for (const auto& e2 : p2.elements()) {
            if (!e1.is_empty() && !e2.is_empty() && e1.rule != e2.rule) continue;
            std::optional<PatternElement> j;
            if (e2.is_empty()) {
                j = e1;
            } else if (e1.is_empty()) {
                PatternElement moved{e2.rule, e2.mask, {}};
                for (const auto& [k, v] : e2.map.pairs())
                    if (auto img = lam.forward(v)) moved.map.bind(k, *img);
                j = std::move(moved);
            } else if (e1.rule == e2.rule) {
                size_t rule = static_cast<size_t>(e1.rule);
                const auto& v1 = bodies.subset_vars(rule, e1.mask);
                const auto& v2 = bodies.subset_vars(rule, e2.mask);
                bool ok = true;
                for (Term x : v1) {
                    if (!term_set_contains(v2, x)) continue;
                    auto a = e1.map.lookup(x);
                    auto b = e2.map.lookup(x);
                    if (!a || !b) {
                        ok = false;
                        break;
                    }
                    auto bb = lam.forward(*b);
                    if (!bb || *a != *bb) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    PatternElement merged{e1.rule, e1.mask | e2.mask, e1.map};
                    for (const auto& [k, v] : e2.map.pairs()) {
                        auto img = lam.forward(v);
                        if (!img) continue;
                        if (!merged.map.bind(k, *img)) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) j = std::move(merged);
                }
            }
            if (!j) continue;
            if (single_atom && !j->is_empty() && (j->mask & (j->mask - 1)) != 0) continue;
            out.push_back(std::move(*j));
        }
    }
    return Pattern::of_elements(std::move(out));
}

Pattern abstract_lower_join(const BodyIndex& bodies, const KnowledgeBase& kb, const Pattern& p1,
                            const Link& link, const Pattern& p2, bool single_atom) {
    LambdaHat lam{kb, link};
    std::vector<PatternElement> out;
    for (const auto& e1 : p1.elements()) {
        for (const auto& e2 : p2.elements()) {
            if (!e1.is_empty() && !e2.is_empty() && e1.rule != e2.rule) continue;
            std::optional<PatternElement> j;
            if (e1.is_empty()) {
                j = e2;
            } else if (e2.is_empty()) {
                PatternElement moved{e1.rule, e1.mask, {}};
                for (const auto& [k, v] : e1.map.pairs())
                    if (auto img = lam.backward(v)) moved.map.bind(k, *img);
                j = std::move(moved);
            } else if (e1.rule == e2.rule) {
                size_t rule = static_cast<size_t>(e1.rule);
                const auto& v1 = bodies.subset_vars(rule, e1.mask);
                const auto& v2 = bodies.subset_vars(rule, e2.mask);
                bool ok = true;
                for (Term x : v1) {
                    if (!term_set_contains(v2, x)) continue;
                    auto a = e1.map.lookup(x);
                    auto b = e2.map.lookup(x);
                    if (!a || !b) {
                        ok = false;
                        break;
                    }
                    auto bb = lam.forward(*b);
                    if (!bb || *a != *bb) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    PatternElement merged{e1.rule, e1.mask | e2.mask, e2.map};
                    for (const auto& [k, v] : e1.map.pairs()) {
                        auto img = lam.backward(v);
                        if (!img) continue;
                        if (!merged.map.bind(k, *img)) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) j = std::move(merged);
                }
            }
            if (!j) continue;
            if (single_atom && !j->is_empty() && (j->mask & (j->mask - 1)) != 0) continue;
            out.push_back(std::move(*j));
        }
    }
    return Pattern::of_elements(std::move(out));
}

// ---------------------------------------------------------------------------
// Saturation

namespace {

std::string fusion_key(const Substitution& fusion) {
    std::string key;
    for (const auto& [k, v] : fusion.pairs()) {
        key += std::to_string(k.id);
        key += ':';
        key += std::to_string(v.id);
        key += ';';
    }
    return key;
}

std::string pattern_key(size_t support, const Pattern& p) {
    std::string key = std::to_string(support);
    key += '|';
    for (const auto& e : p.elements()) {
        key += std::to_string(e.rule);
        key += ',';
        key += std::to_string(e.mask);
        key += ',';
        key += fusion_key(e.map);
        key += '#';
    }
    return key;
}

std::string link_key(const Link& l) {
    std::string key;
    for (const auto& [k, v] : l.map) {
        key += std::to_string(k.id);
        key += ':';
        key += std::to_string(v.id);
        key += ';';
    }
    return key;
}

}  // namespace

class Saturator {
  public:
    Saturator(const KnowledgeBase& kb, const SaturateOptions& opts)
        : sat_(kb), opts_(opts) {
        sat_.single_atom_ = opts.single_atom_elements;
    }

    // Fixpoint over a tree of abstract-bag cells. Each cell holds a growing
    // pattern; joins flow along the edges until nothing moves, and only the
    // first cell carrying a given pattern spawns children. Every pattern
    // change is recorded as an evolution stage and every edge as a creation
    // stage, which yields the rule base; the final stages per group are the
    // most informative rules.
    Saturation run() {
        register_root();
        cells_.push_back(Cell{0, sat_.initial_pattern_, sat_.initial_pattern_, SIZE_MAX, Link{}, {}});
        // A round that registers no new pattern and records no new rule only
        // replays settled configurations, so the rule base is closed then
        // even if fresh scaffolding cells were still appended.
        uint32_t round = 0;
        news_ = true;
        while (news_) {
            ++round;
            news_ = false;
            expand(round);
            propagate_all(round);
            if (std::getenv("GBTS_SAT_DEBUG"))
                fprintf(stderr, "round %u: cells=%zu patterns=%zu rules=%zu\n", round,
                        cells_.size(), sat_.patterns_.size(), sat_.rules_.size());
        }
        // Final creation stages; parent patterns are settled now.
        for (size_t i = 1; i < cells_.size(); ++i)
            record(true, cells_[cells_[i].parent].pattern, cells_[i].pattern, cells_[i].link,
                   round + 1);
        compute_most_informative();
        return std::move(sat_);
    }

  private:
    struct Cell {
        size_t support;
        size_t pattern;          // current pattern id
        size_t initial_pattern;  // pattern at creation time
        size_t parent;           // SIZE_MAX for the root
        Link link;
        std::set<std::string> spawned;  // child keys already materialized
        // Patterns at the last join evaluation of the edge to the parent.
        size_t eval_parent = SIZE_MAX;
        size_t eval_child = SIZE_MAX;
    };

    Saturation sat_;
    const SaturateOptions& opts_;
    std::unordered_map<std::string, size_t> support_ids_;
    std::unordered_map<std::string, size_t> pattern_ids_;
    std::set<std::string> rule_keys_;
    std::vector<Cell> cells_;
    bool news_ = false;

    const KnowledgeBase& kb() const { return sat_.kb(); }

    void register_root() {
        Saturation::Support root;
        root.rule = -1;
        root.terms = kb().initial_terms();
        root.atoms = kb().fact();
        root.generated = kb().fact().vars();
        sat_.supports_.push_back(std::move(root));
        support_ids_.emplace("root", 0);
        sat_.initial_pattern_ = register_pattern(
            0, initial_pattern(sat_.bodies_, kb().fact(), sat_.single_atom_));
    }

    size_t register_support(size_t rule, const Substitution& fusion) {
        std::string key = std::to_string(rule) + '|' + fusion_key(fusion);
        auto it = support_ids_.find(key);
        if (it != support_ids_.end()) return it->second;
        const Rule& r = kb().rule(rule);
        Saturation::Support s;
        s.rule = static_cast<int32_t>(rule);
        s.fusion = fusion;
        s.atoms = fusion.apply(r.head());
        std::vector<Term> image;
        for (Term t : r.head().terms()) image.push_back(fusion.apply(t));
        image = sorted_terms(std::move(image));
        s.terms = term_set_union(image, kb().initial_terms());
        std::vector<Term> ft;
        for (Term y : r.frontier()) ft.push_back(fusion.apply(y));
        s.frontier_terms = sorted_terms(std::move(ft));
        for (Term t : image)
            if (is_variable(t) && !kb().is_initial(t) &&
                !term_set_contains(s.frontier_terms, t))
                s.generated.push_back(t);
        s.generated = sorted_terms(std::move(s.generated));
        size_t id = sat_.supports_.size();
        sat_.supports_.push_back(std::move(s));
        support_ids_.emplace(std::move(key), id);
        return id;
    }

    size_t register_pattern(size_t support, Pattern p) {
        std::string key = pattern_key(support, p);
        auto it = pattern_ids_.find(key);
        if (it != pattern_ids_.end()) return it->second;
        if (sat_.patterns_.size() >= opts_.max_patterns)
            throw BudgetExceeded("pattern saturation exceeded the pattern cap of " +
                                 std::to_string(opts_.max_patterns));
        size_t id = sat_.patterns_.size();
        sat_.patterns_.push_back({support, std::move(p)});
        pattern_ids_.emplace(std::move(key), id);
        news_ = true;
        return id;
    }

    void record(bool creation, size_t lhs, size_t rhs, const Link& link, uint32_t rank) {
        if (!creation && lhs == rhs) return;
        std::string key = (creation ? "C" : "E");
        key += std::to_string(lhs);
        key += '>';
        key += std::to_string(rhs);
        key += '|';
        key += link_key(link);
        if (!rule_keys_.insert(std::move(key)).second) return;
        if (sat_.rules_.size() >= opts_.max_rules)
            throw BudgetExceeded("pattern saturation exceeded the rule cap");
        sat_.rules_.push_back({creation, lhs, rhs, link, rank});
        news_ = true;
    }

    // Creation seeds of a pattern: full-body elements whose frontier image
    // lies in the support's terms. Images entirely inside the initial terms
    // attach at the root support only; otherwise at least one image must be
    // generated here.
    struct Seed {
        size_t support;
        Link link;
    };

    std::vector<std::pair<std::string, Seed>> seeds_of(size_t pid) {
        const auto entry = sat_.patterns_[pid];
        const auto support = sat_.supports_[entry.support];
        std::vector<std::pair<std::string, Seed>> out;
        for (size_t rule = 0; rule < kb().rules().size(); ++rule) {
            const Rule& r = kb().rule(rule);
            auto maps = full_body_maps(sat_.bodies_, entry.pattern, rule, sat_.single_atom_);
            std::set<std::string> seen;
            for (const auto& m : maps) {
                bool covers_frontier = true;
                for (Term y : r.frontier())
                    if (!m.defined(y)) {
                        covers_frontier = false;
                        break;
                    }
                if (!covers_frontier) continue;
                Substitution pi = m.restricted(
                    [&](Term t) { return term_set_contains(r.frontier(), t); });
                if (!seen.insert(fusion_key(pi)).second) continue;
                bool all_initial = true;
                bool hits_generated = false;
                for (const auto& [y, img] : pi.pairs()) {
                    if (!(is_constant(img) || kb().is_initial(img))) all_initial = false;
                    if (term_set_contains(support.generated, img)) hits_generated = true;
                }
                if (all_initial) {
                    if (entry.support != 0) continue;  // attaches at the root
                } else if (!hits_generated) {
                    continue;  // attaches higher up
                }
                Substitution fusion = fusion_of_frontier(kb(), r, pi);
                std::vector<std::pair<Term, Term>> link_pairs;
                for (const auto& [y, img] : pi.pairs()) {
                    if (is_constant(img) || kb().is_initial(img)) continue;
                    link_pairs.push_back({fusion.apply(y), img});
                }
                std::sort(link_pairs.begin(), link_pairs.end(),
                          [](const auto& a, const auto& b) { return term_less(a.first, b.first); });
                link_pairs.erase(std::unique(link_pairs.begin(), link_pairs.end()),
                                 link_pairs.end());
                Link link{std::move(link_pairs)};
                size_t child = register_support(rule, fusion);
                std::string key = std::to_string(child) + '|' + link_key(link);
                out.push_back({std::move(key), Seed{child, std::move(link)}});
            }
        }
        return out;
    }

    // Only the first cell holding a pattern spawns children.
    void expand(uint32_t round) {
        std::map<size_t, size_t> owner;
        for (size_t i = 0; i < cells_.size(); ++i) owner.try_emplace(cells_[i].pattern, i);
        size_t ncells = cells_.size();
        for (size_t i = 0; i < ncells; ++i) {
            if (owner.at(cells_[i].pattern) != i) continue;
            for (auto& [key, seed] : seeds_of(cells_[i].pattern)) {
                if (!cells_[i].spawned.insert(key).second) continue;
                size_t child_pattern = register_pattern(
                    seed.support,
                    initial_pattern(sat_.bodies_, sat_.supports_[seed.support].atoms,
                                    sat_.single_atom_));
                record(true, cells_[i].pattern, child_pattern, seed.link, round);
                cells_.push_back(
                    Cell{seed.support, child_pattern, child_pattern, i, std::move(seed.link), {}});
            }
        }
    }

    // Sweeps joins along every edge until nothing moves; edges whose
    // endpoint patterns are unchanged since the last evaluation are skipped.
    void propagate_all(uint32_t round) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (size_t i = 1; i < cells_.size(); ++i) {
                Cell& child = cells_[i];
                size_t parent_pattern = cells_[child.parent].pattern;
                if (child.eval_parent == parent_pattern && child.eval_child == child.pattern)
                    continue;
                Pattern down = abstract_lower_join(
                    sat_.bodies_, kb(), sat_.patterns_[parent_pattern].pattern, child.link,
                    sat_.patterns_[child.pattern].pattern, sat_.single_atom_);
                size_t down_id = register_pattern(child.support, std::move(down));
                if (down_id != child.pattern) {
                    // Growth injected from the parent extends the creation
                    // rule's right-hand side; it is not an evolution of the
                    // child pattern on its own.
                    record(true, parent_pattern, down_id, child.link, round);
                    child.pattern = down_id;
                    moved = true;
                }
                Pattern up = abstract_upper_join(
                    sat_.bodies_, kb(), sat_.patterns_[parent_pattern].pattern, child.link,
                    sat_.patterns_[child.pattern].pattern, sat_.single_atom_);
                size_t up_id = register_pattern(cells_[child.parent].support, std::move(up));
                child.eval_parent = parent_pattern;
                child.eval_child = child.pattern;
                if (up_id != parent_pattern) {
                    Cell& parent = cells_[child.parent];
                    record(false, parent.pattern, up_id, {}, round);
                    // The cumulative evolution from the initial pattern is
                    // context-free only at the root.
                    if (parent.parent == SIZE_MAX)
                        record(false, parent.initial_pattern, up_id, {}, round);
                    parent.pattern = up_id;
                    moved = true;
                }
            }
        }
    }

    // Creations: maximal right-hand side per (lhs, child support, link).
    // Evolutions: maximal pattern reachable from the lhs through recorded
    // evolution steps (transitivity), synthesized as a rule when only the
    // intermediate hops were recorded.
    void compute_most_informative() {
        std::map<std::string, std::vector<size_t>> creation_groups;
        std::map<size_t, std::vector<size_t>> evolution_edges;
        for (size_t i = 0; i < sat_.rules_.size(); ++i) {
            const auto& r = sat_.rules_[i];
            if (r.creation) {
                std::string key = std::to_string(r.lhs) + '|' +
                                  std::to_string(sat_.patterns_[r.rhs].support) + '|' +
                                  link_key(r.link);
                creation_groups[key].push_back(i);
            } else {
                evolution_edges[r.lhs].push_back(i);
            }
        }
        for (auto& [key, members] : creation_groups) {
            std::vector<size_t> maximal;
            for (size_t i : members) {
                bool dominated = false;
                for (size_t j : members) {
                    if (i == j) continue;
                    if (sat_.pattern_subset(sat_.rules_[i].rhs, sat_.rules_[j].rhs) &&
                        sat_.rules_[i].rhs != sat_.rules_[j].rhs) {
                        dominated = true;
                        break;
                    }
                }
                if (!dominated) maximal.push_back(i);
            }
            if (maximal.size() != 1)
                throw GbtsError("most informative creation rule is not unique for " + key);
            sat_.most_informative_.push_back(maximal.front());
        }
        for (auto& [lhs, edges] : evolution_edges) {
            // Reachable right-hand sides under transitive composition.
            std::set<size_t> reach;
            std::deque<size_t> queue{lhs};
            while (!queue.empty()) {
                size_t cur = queue.front();
                queue.pop_front();
                auto it = evolution_edges.find(cur);
                if (it == evolution_edges.end()) continue;
                for (size_t rid : it->second) {
                    size_t rhs = sat_.rules_[rid].rhs;
                    if (reach.insert(rhs).second) queue.push_back(rhs);
                }
            }
            std::vector<size_t> maximal;
            for (size_t p : reach) {
                bool dominated = false;
                for (size_t q : reach)
                    if (p != q && sat_.pattern_subset(p, q)) dominated = true;
                if (!dominated) maximal.push_back(p);
            }
            if (maximal.size() != 1)
                throw GbtsError("most informative evolution is not unique for pattern " +
                                std::to_string(lhs));
            size_t best = maximal.front();
            size_t rule_id = SIZE_MAX;
            for (size_t rid : edges)
                if (sat_.rules_[rid].rhs == best) rule_id = rid;
            if (rule_id == SIZE_MAX) {
                rule_id = sat_.rules_.size();
                sat_.rules_.push_back({false, lhs, best, {}, UINT32_MAX});
            }
            sat_.most_informative_.push_back(rule_id);
        }
        std::sort(sat_.most_informative_.begin(), sat_.most_informative_.end());
    }
};

Saturation saturate(const KnowledgeBase& kb, const SaturateOptions& opts) {
    Saturator s(kb, opts);
    return s.run();
}

// ---------------------------------------------------------------------------
// Saturation queries

bool Saturation::pattern_subset(size_t a, size_t b) const {
    const auto& pa = patterns_[a];
    const auto& pb = patterns_[b];
    if (pa.support != pb.support) return false;
    return pa.pattern.subset_of(pb.pattern);
}

std::optional<size_t> Saturation::most_informative_evolution(size_t lhs) const {
    for (size_t rid : most_informative_) {
        const auto& r = rules_[rid];
        if (!r.creation && r.lhs == lhs) return rid;
    }
    return std::nullopt;
}

std::vector<size_t> Saturation::most_informative_creations(size_t lhs) const {
    std::vector<size_t> out;
    for (size_t rid : most_informative_) {
        const auto& r = rules_[rid];
        if (r.creation && r.lhs == lhs) out.push_back(rid);
    }
    return out;
}

double Saturation::pattern_count_log2_bound() const {
    double b = 0;
    for (const auto& s : supports_) b = std::max(b, static_cast<double>(s.terms.size()));
    double a_b = 0, t_b = 0;
    for (const Rule& r : kb_->rules()) {
        a_b = std::max(a_b, static_cast<double>(r.body().size()));
        t_b = std::max(t_b, static_cast<double>(r.body().terms().size()));
    }
    double n_rules = static_cast<double>(kb_->rules().size());
    // log2(2^(|R| * 2^aB * b^tB)) = |R| * 2^aB * b^tB
    double bound = n_rules * std::pow(2.0, a_b) * std::pow(std::max(b, 1.0), t_b);
    return std::isfinite(bound) ? bound : std::numeric_limits<double>::max();
}

std::string Saturation::describe_support(size_t sid) const {
    const auto& s = supports_[sid];
    std::ostringstream out;
    out << "S" << sid << " rule=" << (s.rule < 0 ? std::string("<fact>") : kb_->rule(s.rule).name())
        << " fusion=" << to_string(s.fusion) << " atoms=" << to_string(s.atoms);
    return out.str();
}

std::string Saturation::describe_pattern(size_t pid) const {
    const auto& p = patterns_[pid];
    std::ostringstream out;
    out << "P" << pid << " support=S" << p.support << " elements=" << p.pattern.size() - 1;
    return out.str();
}

std::string Saturation::describe_rule(size_t rid) const {
    const auto& r = rules_[rid];
    std::ostringstream out;
    out << "P" << r.lhs << " ~> ";
    if (r.creation) out << to_string(r.link) << ".";
    out << "P" << r.rhs << " (rank " << r.rank << ")";
    return out.str();
}

}  // namespace gbts
