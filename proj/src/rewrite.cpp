#include "gbts/rewrite.hpp"

#include "gbts/classify.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace gbts {

// ---------------------------------------------------------------------------
// wfg translation

namespace {

// Picks a predicate name not used by any rule or fact of the KB.
std::string free_predicate_name(const KnowledgeBase& kb, std::string base) {
    std::set<std::string> used;
    auto collect = [&](const AtomSet& s) {
        for (const Atom& a : s.atoms()) used.insert(std::string(predicate_name(a.pred)));
    };
    collect(kb.fact());
    for (const Rule& r : kb.rules()) {
        collect(r.body());
        collect(r.head());
    }
    while (used.count(base)) base += '_';
    return base;
}

}  // namespace

KnowledgeBase wfg_translate(const KnowledgeBase& kb, const WfgTranslateOptions& opts) {
    size_t max_head_terms = 0;
    for (const Rule& r : kb.rules())
        max_head_terms = std::max(max_head_terms, r.head().terms().size());
    size_t q = max_head_terms + kb.initial_terms().size();
    if (q == 0) q = 1;
    if (q > opts.max_arity)
        throw ArityOverflow("bag predicate arity " + std::to_string(q) + " exceeds the cap of " +
                            std::to_string(opts.max_arity));

    Predicate initial = make_predicate(free_predicate_name(kb, "initial"), 1);
    Predicate samebag = make_predicate(free_predicate_name(kb, "samebag"),
                                       static_cast<uint32_t>(q));

    // Marked fact.
    std::vector<Atom> fact = kb.fact().atoms();
    for (Term t : kb.fact().terms()) fact.push_back(Atom(initial, {t}));

    std::vector<Rule> rules;

    {  // initial(x) -> samebag(x,...,x)
        VarScope sc;
        Term x = sc.var("X");
        rules.emplace_back("S1", AtomSet({Atom(initial, {x})}),
                           AtomSet({Atom(samebag, std::vector<Term>(q, x))}));
    }
    {  // samebag(x1..xq) ∧ initial(x) -> samebag(x, x2..xq)
        VarScope sc;
        std::vector<Term> xs;
        for (size_t i = 1; i <= q; ++i) xs.push_back(sc.var("X" + std::to_string(i)));
        Term x = sc.var("X");
        std::vector<Term> head = xs;
        head[0] = x;
        rules.emplace_back("S2", AtomSet({Atom(samebag, xs), Atom(initial, {x})}),
                           AtomSet({Atom(samebag, head)}));
    }
    for (size_t i = 1; i <= q; ++i) {  // swap argument i to the front
        VarScope sc;
        std::vector<Term> xs;
        for (size_t j = 1; j <= q; ++j) xs.push_back(sc.var("X" + std::to_string(j)));
        std::vector<Term> head = xs;
        std::swap(head[0], head[i - 1]);
        rules.emplace_back("S3_" + std::to_string(i), AtomSet({Atom(samebag, xs)}),
                           AtomSet({Atom(samebag, head)}));
    }
    {  // samebag(x1..x_{q-1},xq) -> samebag(x1..x_{q-1},x1)
        VarScope sc;
        std::vector<Term> xs;
        for (size_t i = 1; i <= q; ++i) xs.push_back(sc.var("X" + std::to_string(i)));
        std::vector<Term> head = xs;
        head[q - 1] = xs[0];
        rules.emplace_back("S4", AtomSet({Atom(samebag, xs)}), AtomSet({Atom(samebag, head)}));
    }

    // One translated rule per input rule.
    for (const Rule& r : kb.rules()) {
        const auto& y = r.frontier();
        const auto& z = r.existentials();
        if (y.size() > q || y.size() + z.size() > q)
            throw ArityOverflow("rule " + r.name() + " does not fit the bag predicate");
        std::vector<Term> body_args = y;
        std::vector<Term> fresh;
        for (size_t i = body_args.size(); i < q; ++i) {
            Term v = make_variable("V" + std::to_string(i - y.size() + 1));
            fresh.push_back(v);
            body_args.push_back(v);
        }
        std::vector<Term> head_args = y;
        head_args.insert(head_args.end(), z.begin(), z.end());
        for (size_t i = head_args.size(); i < q; ++i)
            head_args.push_back(fresh[i - y.size() - z.size()]);

        std::vector<Atom> body = r.body().atoms();
        body.push_back(Atom(samebag, body_args));
        std::vector<Atom> head = r.head().atoms();
        head.push_back(Atom(samebag, head_args));
        for (Term c : r.head_constants()) head.push_back(Atom(initial, {c}));
        rules.emplace_back("T_" + r.name(), AtomSet(std::move(body)), AtomSet(std::move(head)));
    }

    return KnowledgeBase(AtomSet(std::move(fact)), std::move(rules));
}

// ---------------------------------------------------------------------------
// Frontier-guarded normalization

namespace {

bool has_frontier_guard(const Rule& r) {
    if (r.frontier().empty()) return true;
    for (const Atom& a : r.body().atoms()) {
        bool all = true;
        for (Term v : r.frontier())
            if (std::find(a.args.begin(), a.args.end(), v) == a.args.end()) {
                all = false;
                break;
            }
        if (all) return true;
    }
    return false;
}

}  // namespace

NormalizedRules normalize_fg(const std::vector<Rule>& rules) {
    NormalizedRules out;
    for (const Rule& r : rules) {
        if (!has_frontier_guard(r))
            throw NotFrontierGuarded("rule " + r.name() + " has no frontier guard");
        if (r.frontier().empty()) {
            out.disconnected.push_back(r);
            continue;
        }
        // Components connect through variables only, which matches the
        // constant-splitting step.
        auto components = connected_components(r.body());
        size_t frontier_comp = SIZE_MAX;
        for (size_t i = 0; i < components.size(); ++i) {
            if (term_set_contains(components[i].vars(), r.frontier().front())) {
                frontier_comp = i;
                break;
            }
        }
        if (components.size() == 1 || frontier_comp == SIZE_MAX) {
            out.connected.push_back(r);
            continue;
        }
        std::vector<Atom> rest;
        for (size_t i = 0; i < components.size(); ++i) {
            if (i == frontier_comp) continue;
            for (const Atom& a : components[i].atoms()) rest.push_back(a);
        }
        if (rest.empty()) {
            out.connected.push_back(r);
            continue;
        }
        Predicate p0 = make_predicate("p0_" + r.name(), 0);
        Atom marker(p0, {});
        out.disconnected.emplace_back(r.name() + "_rest", AtomSet(std::move(rest)),
                                      AtomSet({marker}));
        std::vector<Atom> core = components[frontier_comp].atoms();
        core.push_back(marker);
        out.connected.emplace_back(r.name() + "_core", AtomSet(std::move(core)), r.head());
    }
    return out;
}

AtomSet integrate_disconnected(const AtomSet& fact, std::vector<Rule> disconnected,
                               const EntailmentCallback& entailed) {
    AtomSet current = fact;
    bool progressed = true;
    while (progressed && !disconnected.empty()) {
        progressed = false;
        for (size_t i = 0; i < disconnected.size();) {
            const Rule& r = disconnected[i];
            if (entailed(current, r.body())) {
                Substitution fresh;
                for (Term v : r.head().vars()) fresh.bind(v, fresh_variable());
                current = union_of(current, fresh.apply(r.head()));
                disconnected.erase(disconnected.begin() + static_cast<ptrdiff_t>(i));
                progressed = true;
            } else {
                ++i;
            }
        }
    }
    return current;
}

// ---------------------------------------------------------------------------
// Decomposition graphs

namespace {

std::vector<Term> class_vars(const std::vector<Atom>& atoms) {
    std::vector<Term> vs;
    for (const Atom& a : atoms)
        for (Term t : a.args)
            if (is_variable(t)) vs.push_back(t);
    return sorted_terms(std::move(vs));
}

// Index of an atom guarding all of `vars`, or SIZE_MAX.
size_t find_internal_guard(const std::vector<Atom>& atoms, const std::vector<Term>& vars) {
    for (size_t i = 0; i < atoms.size(); ++i)
        if (is_guard(atoms[i], vars)) return i;
    return SIZE_MAX;
}

}  // namespace

DecompositionGraph decomposition_graph(const AtomSet& s) {
    const auto& atoms = s.atoms();
    // Sweep in set order; prefer the most recently opened group so that
    // locally connected atoms stay together.
    std::vector<std::vector<Atom>> classes;
    for (const Atom& a : atoms) {
        bool placed = false;
        for (size_t c = classes.size(); c-- > 0 && !placed;) {
            std::vector<Atom> joint = classes[c];
            joint.push_back(a);
            if (find_internal_guard(joint, class_vars(joint)) != SIZE_MAX) {
                classes[c] = std::move(joint);
                placed = true;
            }
        }
        if (!placed) classes.push_back({a});
    }

    DecompositionGraph g;
    g.nodes.resize(classes.size());
    for (size_t c = 0; c < classes.size(); ++c) {
        AtomSet cset(classes[c]);
        size_t guard = SIZE_MAX;
        auto gv = class_vars(cset.atoms());
        for (size_t i = 0; i < cset.atoms().size(); ++i)
            if (is_guard(cset.atoms()[i], gv)) {
                guard = i;
                break;
            }
        g.nodes[c] = {std::move(cset), guard};
    }
    for (size_t a = 0; a < g.nodes.size(); ++a) {
        for (size_t b = a + 1; b < g.nodes.size(); ++b) {
            std::vector<Term> shared;
            for (Term v : g.nodes[a].atoms.vars())
                if (term_set_contains(g.nodes[b].atoms.vars(), v)) shared.push_back(v);
            if (!shared.empty()) g.edges.push_back({a, b, sorted_terms(std::move(shared))});
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Acyclic coverings

namespace {

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    size_t find(size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

}  // namespace

std::optional<AcyclicCovering> acyclic_covering(const DecompositionGraph& g,
                                                size_t root_hint) {
    // Maximum-weight spanning forest (weight = shared-variable count), then
    // verify that every removed edge has its label carried along the tree
    // path between its endpoints.
    std::vector<size_t> order(g.edges.size());
    std::iota(order.begin(), order.end(), 0);
    auto touches_root = [&](size_t e) {
        return g.edges[e].a == root_hint || g.edges[e].b == root_hint;
    };
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (g.edges[a].shared.size() != g.edges[b].shared.size())
            return g.edges[a].shared.size() > g.edges[b].shared.size();
        return touches_root(a) && !touches_root(b);
    });
    UnionFind uf(g.nodes.size());
    std::vector<size_t> kept;
    for (size_t e : order)
        if (uf.unite(g.edges[e].a, g.edges[e].b)) kept.push_back(e);
    std::sort(kept.begin(), kept.end());

    // Adjacency over kept edges.
    std::vector<std::vector<std::pair<size_t, size_t>>> adj(g.nodes.size());  // (node, edge)
    for (size_t e : kept) {
        adj[g.edges[e].a].push_back({g.edges[e].b, e});
        adj[g.edges[e].b].push_back({g.edges[e].a, e});
    }
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (std::binary_search(kept.begin(), kept.end(), e)) continue;
        // Path from a to b through the forest.
        std::vector<size_t> prev_edge(g.nodes.size(), SIZE_MAX);
        std::vector<size_t> prev_node(g.nodes.size(), SIZE_MAX);
        std::vector<size_t> stack{g.edges[e].a};
        std::vector<bool> seen(g.nodes.size(), false);
        seen[g.edges[e].a] = true;
        while (!stack.empty()) {
            size_t cur = stack.back();
            stack.pop_back();
            for (auto [next, edge] : adj[cur]) {
                if (seen[next]) continue;
                seen[next] = true;
                prev_edge[next] = edge;
                prev_node[next] = cur;
                stack.push_back(next);
            }
        }
        if (!seen[g.edges[e].b]) return std::nullopt;  // endpoints ended up disconnected
        for (size_t cur = g.edges[e].b; cur != g.edges[e].a; cur = prev_node[cur]) {
            const auto& label = g.edges[prev_edge[cur]].shared;
            for (Term v : g.edges[e].shared)
                if (!term_set_contains(label, v)) return std::nullopt;
        }
    }
    return AcyclicCovering{kept};
}

// ---------------------------------------------------------------------------
// Guarded translation

std::vector<Rule> ba_to_guarded(const Rule& r) {
    if (!has_frontier_guard(r))
        throw NotFrontierGuarded("rule " + r.name() + " has no frontier guard");
    DecompositionGraph g = decomposition_graph(r.body());
    if (g.nodes.size() == 1) return {r};
    size_t root = SIZE_MAX;
    for (size_t i = 0; i < g.nodes.size() && root == SIZE_MAX; ++i)
        for (const Atom& a : g.nodes[i].atoms.atoms())
            if (is_guard(a, r.frontier())) {
                root = i;
                break;
            }
    if (root == SIZE_MAX)
        throw NotFrontierGuarded("rule " + r.name() + " has no node with a frontier guard");
    auto covering = acyclic_covering(g, root);
    if (!covering) throw BodyCyclic("rule " + r.name() + " has a cyclic body");

    std::vector<std::vector<std::pair<size_t, size_t>>> adj(g.nodes.size());
    for (size_t e : covering->kept_edges) {
        adj[g.edges[e].a].push_back({g.edges[e].b, e});
        adj[g.edges[e].b].push_back({g.edges[e].a, e});
    }

    // Orient the tree away from the root.
    std::vector<size_t> parent(g.nodes.size(), SIZE_MAX);
    std::vector<size_t> parent_edge(g.nodes.size(), SIZE_MAX);
    std::vector<size_t> dfs{root};
    std::vector<bool> seen(g.nodes.size(), false);
    seen[root] = true;
    std::vector<size_t> visit_order;
    while (!dfs.empty()) {
        size_t cur = dfs.back();
        dfs.pop_back();
        visit_order.push_back(cur);
        for (auto [next, edge] : adj[cur]) {
            if (seen[next]) continue;
            seen[next] = true;
            parent[next] = cur;
            parent_edge[next] = edge;
            dfs.push_back(next);
        }
    }
    if (visit_order.size() != g.nodes.size())
        throw GbtsError("rule " + r.name() + " body is not variable-connected; normalize first");

    // One fresh predicate per oriented edge; arguments are the sorted shared
    // variables of the edge.
    std::vector<Atom> edge_atom(g.nodes.size());
    for (size_t n = 0; n < g.nodes.size(); ++n) {
        if (parent[n] == SIZE_MAX) continue;
        const auto& shared = g.edges[parent_edge[n]].shared;
        Predicate p = make_predicate(
            "q_" + r.name() + "_" + std::to_string(parent_edge[n]),
            static_cast<uint32_t>(shared.size()));
        edge_atom[n] = Atom(p, shared);
    }

    std::vector<Rule> out;
    for (size_t n : visit_order) {
        std::vector<Atom> body = g.nodes[n].atoms.atoms();
        for (size_t c = 0; c < g.nodes.size(); ++c)
            if (parent[c] == n) body.push_back(edge_atom[c]);
        if (n == root) {
            out.emplace_back(r.name() + "_root", AtomSet(std::move(body)), r.head());
        } else {
            out.emplace_back(r.name() + "_n" + std::to_string(n), AtomSet(std::move(body)),
                             AtomSet({edge_atom[n]}));
        }
    }
    return out;
}

}  // namespace gbts
