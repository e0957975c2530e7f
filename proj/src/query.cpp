#include "gbts/query.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace gbts {

// ---------------------------------------------------------------------------
// APT structure checks and enumeration

std::optional<std::string> check_apt(const AtomSet& query, const Apt& apt) {
    size_t n_atoms = query.size();
    const auto& terms = query.terms();
    std::vector<int> atom_owner(n_atoms, -1);
    std::map<uint32_t, int> term_owner;
    size_t roots = 0;
    for (size_t i = 0; i < apt.nodes.size(); ++i) {
        const auto& node = apt.nodes[i];
        if (node.parent == SIZE_MAX) {
            ++roots;
            if (apt.root != i) return "root index does not match the parentless node";
        } else if (node.parent >= apt.nodes.size()) {
            return "node parent out of range";
        }
        for (size_t a : node.atoms) {
            if (a >= n_atoms) return "atom index out of range";
            if (atom_owner[a] != -1) return "atom assigned to two nodes";
            atom_owner[a] = static_cast<int>(i);
        }
        for (Term t : node.terms) {
            if (!query.has_term(t)) return "node owns a term foreign to the query";
            if (term_owner.count(t.id)) return "term assigned to two nodes";
            term_owner[t.id] = static_cast<int>(i);
        }
    }
    if (roots != 1) return "tree must have exactly one root";
    for (size_t a = 0; a < n_atoms; ++a)
        if (atom_owner[a] == -1) return "atom not covered by the partition";
    for (Term t : terms)
        if (!term_owner.count(t.id)) return "term not covered by the partition";
    // Acyclicity.
    for (size_t i = 0; i < apt.nodes.size(); ++i) {
        size_t cur = i, hops = 0;
        while (cur != SIZE_MAX) {
            cur = apt.nodes[cur].parent;
            if (++hops > apt.nodes.size()) return "parent pointers form a cycle";
        }
    }
    return std::nullopt;
}

uint64_t enumerate_apts(const AtomSet& query, const std::function<bool(const Apt&)>& fn) {
    // Items: atoms first, then terms, each in set order.
    size_t n_atoms = query.size();
    size_t n = n_atoms + query.terms().size();
    if (n == 0) return 0;
    std::vector<size_t> label(n, 0);
    uint64_t count = 0;
    bool stop = false;

    std::function<void(size_t, size_t)> parts = [&](size_t i, size_t used) {
        if (stop) return;
        if (i == n) {
            size_t k = used;
            // All rooted trees over k labelled blocks: choose a root and a
            // parent for every other block, keeping the graph acyclic.
            std::vector<size_t> parent(k, SIZE_MAX);
            std::function<void(size_t, size_t)> trees = [&](size_t node, size_t root) {
                if (stop) return;
                if (node == k) {
                    Apt apt;
                    apt.nodes.resize(k);
                    apt.root = root;
                    for (size_t b = 0; b < k; ++b) apt.nodes[b].parent = parent[b];
                    for (size_t item = 0; item < n; ++item) {
                        if (item < n_atoms)
                            apt.nodes[label[item]].atoms.push_back(item);
                        else
                            apt.nodes[label[item]].terms.push_back(
                                query.terms()[item - n_atoms]);
                    }
                    ++count;
                    if (!fn(apt)) stop = true;
                    return;
                }
                if (node == root) {
                    trees(node + 1, root);
                    return;
                }
                for (size_t p = 0; p < k && !stop; ++p) {
                    if (p == node) continue;
                    // Reject cycles among already-assigned parents.
                    size_t cur = p;
                    bool cyc = false;
                    while (cur != SIZE_MAX && cur != root) {
                        if (cur == node) {
                            cyc = true;
                            break;
                        }
                        cur = parent[cur];
                    }
                    if (cyc) continue;
                    parent[node] = p;
                    trees(node + 1, root);
                    parent[node] = SIZE_MAX;
                }
            };
            for (size_t root = 0; root < k && !stop; ++root) trees(0, root);
            return;
        }
        for (size_t c = 0; c <= used && c < n && !stop; ++c) {
            label[i] = c;
            parts(i + 1, std::max(used, c + 1));
        }
    };
    parts(0, 0);
    return count;
}

// ---------------------------------------------------------------------------
// Validation

size_t joins_path_bound(const Saturation& sat) {
    double p = static_cast<double>(sat.patterns().size());
    double f = 0;
    for (const Rule& r : sat.kb().rules())
        f = std::max(f, static_cast<double>(r.frontier().size()));
    double bound = p * std::pow(std::max(f, 1.0), f);
    if (!std::isfinite(bound) || bound > 1e7) return 10'000'000;
    return std::max<size_t>(1, static_cast<size_t>(bound));
}

namespace {

bool is_initial_term(const KnowledgeBase& kb, Term t) {
    return is_constant(t) || kb.is_initial(t);
}

// Terms counted as created in a blocked bag: images of the support's
// generated variables; at the root every initial term counts as created.
bool created_in(const BlockedTree& bt, size_t bag, Term concrete) {
    const auto& b = bt.bag(bag);
    const KnowledgeBase& kb = bt.saturation().kb();
    if (bag == 0) return term_set_contains(kb.initial_terms(), concrete);
    const auto& support = bt.saturation().supports()[b.support];
    for (Term g : support.generated)
        if (b.term_map.apply(g) == concrete) return true;
    return false;
}

}  // namespace

AptValidator::AptValidator(const BlockedTree& bt, const AtomSet& query, const Apt& apt,
                           const AptMapping& gamma)
    : bt_(bt), query_(query), apt_(apt), gamma_(gamma), gen_(bt) {
    xi_.assign(apt.nodes.size(), SIZE_MAX);
    bound_ = joins_path_bound(bt.saturation());
}

std::optional<std::string> AptValidator::check_mapping() const {
    if (gamma_.bag.size() != apt_.nodes.size() || gamma_.term_map.size() != apt_.nodes.size())
        return "mapping arity does not match the tree";
    std::set<size_t> images;
    for (size_t i = 0; i < apt_.nodes.size(); ++i) {
        size_t b = gamma_.bag[i];
        if (b >= bt_.bags().size()) return "mapped bag out of range";
        if (!images.insert(b).second) return "bag mapping is not injective";
        const auto& node = apt_.nodes[i];
        // Domain of the node map: exactly the node's variable terms.
        for (Term t : node.terms) {
            if (is_constant(t)) {
                if (b != 0) return "constant owned by a node mapped below the root";
                continue;
            }
            auto img = gamma_.term_map[i].lookup(t);
            if (!img) return "node term left unmapped";
            if (!created_in(bt_, b, *img))
                return "term image was not created in the mapped bag";
        }
        for (const auto& [k, v] : gamma_.term_map[i].pairs()) {
            if (!std::binary_search(node.terms.begin(), node.terms.end(), k, TermLess{}))
                return "map defined on a term outside the node";
        }
        // Every atom term must be owned here or on the path to the root.
        for (size_t a : node.atoms) {
            for (Term t : query_.atoms()[a].args) {
                if (is_constant(t)) continue;
                bool found = false;
                for (size_t cur = i; cur != SIZE_MAX; cur = apt_.nodes[cur].parent) {
                    if (std::binary_search(apt_.nodes[cur].terms.begin(),
                                           apt_.nodes[cur].terms.end(), t, TermLess{})) {
                        found = true;
                        break;
                    }
                }
                if (!found) return "atom uses a term not owned on the root path";
            }
        }
    }
    return std::nullopt;
}

std::optional<Substitution> AptValidator::joins(size_t node) {
    const auto& anode = apt_.nodes[node];
    size_t target = gamma_.bag[node];
    size_t start = node == apt_.root ? 0 : xi_[anode.parent];

    // Generated-term images that the target bag must still see.
    std::vector<Term> needed;
    for (size_t a : anode.atoms) {
        for (Term t : query_.atoms()[a].args) {
            if (is_constant(t)) continue;
            if (std::binary_search(anode.terms.begin(), anode.terms.end(), t, TermLess{}))
                continue;
            Term img = assignment_.apply(t);
            if (!is_initial_term(bt_.saturation().kb(), img)) needed.push_back(img);
        }
    }
    needed = sorted_terms(std::move(needed));

    auto visible = [&](size_t gen_bag) {
        for (Term t : needed)
            if (!term_set_contains(gen_.bag(gen_bag).terms, t)) return false;
        return true;
    };
    auto state_key = [&](size_t gen_bag) {
        std::string key = std::to_string(gen_.bag(gen_bag).image);
        for (Term t : needed) {
            auto abs = gen_.abstract_of(gen_bag, t);
            key += '|';
            key += std::to_string(abs ? abs->id : UINT32_MAX);
        }
        return key;
    };
    auto try_accept = [&](size_t gen_bag) -> std::optional<Substitution> {
        if (gen_.bag(gen_bag).image != target) return std::nullopt;
        Substitution node_map;
        for (Term t : anode.terms) {
            if (is_constant(t)) continue;
            Term blocked_concrete = gamma_.term_map[node].apply(t);
            std::optional<Term> abs;
            if (is_initial_term(bt_.saturation().kb(), blocked_concrete)) {
                abs = blocked_concrete;
            } else {
                // Pull the blocked-tree concrete term back to its abstract
                // coordinate.
                for (const auto& [a, c] : bt_.bag(target).term_map.pairs())
                    if (c == blocked_concrete) {
                        abs = a;
                        break;
                    }
            }
            if (!abs) return std::nullopt;
            auto conc = gen_.concrete(gen_bag, *abs);
            if (!conc) return std::nullopt;
            node_map.bind(t, *conc);
        }
        // All atoms of the node must occur in the reached bag.
        for (size_t a : anode.atoms) {
            const Atom& qa = query_.atoms()[a];
            std::vector<Term> args;
            for (Term t : qa.args) {
                if (is_constant(t))
                    args.push_back(t);
                else if (auto own = node_map.lookup(t))
                    args.push_back(*own);
                else
                    args.push_back(assignment_.apply(t));
            }
            if (!gen_.bag(gen_bag).atoms.contains(Atom(qa.pred, args))) return std::nullopt;
        }
        return node_map;
    };

    size_t bound = bound_;
    if (node == apt_.root) bound = std::max(bound, bt_.depth() + 1);

    std::set<std::string> seen;
    std::deque<std::pair<size_t, size_t>> queue;  // (gen bag, distance)
    std::map<size_t, std::pair<size_t, size_t>> pred;  // bag -> (previous, blocked child)
    if (!visible(start)) return std::nullopt;
    seen.insert(state_key(start));
    queue.push_back({start, 0});
    if (node == apt_.root) {
        if (auto res = try_accept(start)) return res;
    }
    while (!queue.empty()) {
        auto [cur, dist] = queue.front();
        queue.pop_front();
        if (dist >= bound) continue;
        for (size_t blocked_child : gen_.copy_candidates(cur)) {
            size_t child = gen_.copy_under(cur, blocked_child);
            if (!visible(child)) continue;
            std::string key = state_key(child);
            if (!seen.insert(key).second) continue;
            if (!pred.count(child)) pred[child] = {cur, blocked_child};
            if (auto res = try_accept(child)) {
                // Record the successful copy path.
                std::vector<WitnessCopy> path;
                size_t walk = child;
                while (walk != start && pred.count(walk)) {
                    auto [prev, bc] = pred[walk];
                    path.push_back({prev, gen_.bag(prev).image, bc, walk});
                    walk = prev;
                }
                std::reverse(path.begin(), path.end());
                for (const auto& c : path) copies_.push_back(c);
                longest_path_ = std::max(longest_path_, dist + 1);
                xi_[node] = child;
                return res;
            }
            queue.push_back({child, dist + 1});
        }
    }
    if (node == apt_.root && gen_.bag(start).image == target) {
        // Root already accepted above; reaching here means no proof.
        return std::nullopt;
    }
    return std::nullopt;
}

bool AptValidator::run() {
    if (check_mapping()) return false;
    // Parent-before-child traversal.
    std::vector<size_t> order;
    std::deque<size_t> queue{apt_.root};
    while (!queue.empty()) {
        size_t cur = queue.front();
        queue.pop_front();
        order.push_back(cur);
        for (size_t i = 0; i < apt_.nodes.size(); ++i)
            if (apt_.nodes[i].parent == cur) queue.push_back(i);
    }
    if (order.size() != apt_.nodes.size()) return false;
    for (size_t node : order) {
        auto res = joins(node);
        if (!res) return false;
        if (node == apt_.root && xi_[node] == SIZE_MAX) xi_[node] = 0;
        if (xi_[node] == SIZE_MAX) return false;
        for (const auto& [k, v] : res->pairs()) assignment_.bind(k, v);
    }
    return true;
}

bool validate_apt(const BlockedTree& bt, const AtomSet& query, const Apt& apt,
                  const AptMapping& gamma, QueryWitness* witness) {
    if (check_apt(query, apt)) return false;
    AptValidator validator(bt, query, apt, gamma);
    if (!validator.run()) return false;
    if (witness) {
        witness->copies = validator.copies();
        witness->xi = validator.xi();
        witness->assignment = validator.assignment();
        witness->apt = apt;
        witness->gamma = gamma;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Guided homomorphism search into the generated trees of a blocked tree

namespace {

class TreeSearch {
  public:
    TreeSearch(const BlockedTree& bt, const AtomSet& component)
        : bt_(bt), kb_(bt.saturation().kb()), query_(component), gen_(bt) {
        bound_ = joins_path_bound(bt_.saturation());
        order_ = placement_order();
        atom_bag_.assign(order_.size(), SIZE_MAX);
    }

    std::optional<QueryWitness> run() {
        if (!search(0)) return std::nullopt;
        QueryWitness w;
        w.copies = copies_;
        w.assignment = assigned_;
        build_apt(w);
        return w;
    }

  private:
    const BlockedTree& bt_;
    const KnowledgeBase& kb_;
    const AtomSet& query_;
    GeneratedTree gen_;
    size_t bound_;
    std::vector<size_t> order_;      // atom indices in placement order
    std::vector<size_t> atom_bag_;   // per placement slot, the chosen bag
    Substitution assigned_;          // query variable -> generated term
    std::vector<WitnessCopy> copies_;

    // Connected order: each atom after the first shares a variable with an
    // earlier one.
    std::vector<size_t> placement_order() const {
        size_t n = query_.size();
        std::vector<size_t> order;
        std::vector<bool> used(n, false);
        std::vector<Term> seen_vars;
        for (size_t step = 0; step < n; ++step) {
            size_t pick = SIZE_MAX;
            for (size_t i = 0; i < n; ++i) {
                if (used[i]) continue;
                if (step == 0) {
                    pick = i;
                    break;
                }
                bool shares = false;
                for (Term t : query_.atoms()[i].args)
                    if (is_variable(t) && term_set_contains(seen_vars, t)) shares = true;
                if (shares) {
                    pick = i;
                    break;
                }
            }
            if (pick == SIZE_MAX) pick = [&] {  // disconnected input; take the first unused
                for (size_t i = 0; i < n; ++i)
                    if (!used[i]) return i;
                return n;
            }();
            used[pick] = true;
            order.push_back(pick);
            std::vector<Term> vars = seen_vars;
            for (Term t : query_.atoms()[pick].args)
                if (is_variable(t)) vars.push_back(t);
            seen_vars = sorted_terms(std::move(vars));
        }
        return order;
    }

    bool search(size_t slot) {
        if (slot == order_.size()) return true;
        const Atom& atom = query_.atoms()[order_[slot]];

        std::vector<Term> needed;  // generated images the bag must see
        for (Term t : atom.args) {
            if (!is_variable(t)) continue;
            auto img = assigned_.lookup(t);
            if (img && !is_initial_term(kb_, *img)) needed.push_back(*img);
        }
        needed = sorted_terms(std::move(needed));

        size_t start = 0;
        if (!needed.empty()) {
            size_t deepest = gen_.creator(needed.front());
            for (Term t : needed) {
                size_t c = gen_.creator(t);
                if (gen_.bag(c).depth > gen_.bag(deepest).depth) deepest = c;
            }
            start = deepest;
            for (Term t : needed)
                if (!term_set_contains(gen_.bag(start).terms, t)) return false;
        }

        auto state_key = [&](size_t bag) {
            std::string key = std::to_string(gen_.bag(bag).image);
            for (Term t : needed) {
                auto abs = gen_.abstract_of(bag, t);
                key += '|';
                key += std::to_string(abs ? abs->id : UINT32_MAX);
            }
            return key;
        };

        std::set<std::string> seen;
        std::deque<std::pair<size_t, size_t>> queue{{start, 0}};
        std::map<size_t, std::pair<size_t, size_t>> pred;
        seen.insert(state_key(start));
        size_t bound = needed.empty() ? SIZE_MAX : bound_;
        while (!queue.empty()) {
            auto [cur, dist] = queue.front();
            queue.pop_front();
            if (try_place(slot, cur, start, pred, dist)) return true;
            if (dist >= bound) continue;
            for (size_t blocked_child : gen_.copy_candidates(cur)) {
                size_t child = gen_.copy_under(cur, blocked_child);
                bool ok = true;
                for (Term t : needed)
                    if (!term_set_contains(gen_.bag(child).terms, t)) {
                        ok = false;
                        break;
                    }
                if (!ok) continue;
                std::string key = state_key(child);
                if (!seen.insert(key).second) continue;
                if (!pred.count(child)) pred[child] = {cur, blocked_child};
                queue.push_back({child, dist + 1});
            }
        }
        return false;
    }

    bool try_place(size_t slot, size_t bag, size_t start,
                   const std::map<size_t, std::pair<size_t, size_t>>& pred, size_t dist) {
        const Atom& atom = query_.atoms()[order_[slot]];
        auto [lo, hi] = gen_.bag(bag).atoms.predicate_range(atom.pred);
        for (size_t j = lo; j < hi; ++j) {
            const Atom& cand = gen_.bag(bag).atoms.atoms()[j];
            Substitution saved = assigned_;
            bool ok = true;
            for (size_t k = 0; k < atom.args.size(); ++k) {
                if (!assigned_.bind(atom.args[k], cand.args[k])) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                size_t copies_before = copies_.size();
                // Record the path that led here.
                std::vector<WitnessCopy> path;
                size_t walk = bag;
                while (walk != start) {
                    auto it = pred.find(walk);
                    if (it == pred.end()) break;
                    auto [prev, bc] = it->second;
                    path.push_back({prev, gen_.bag(prev).image, bc, walk});
                    walk = prev;
                }
                std::reverse(path.begin(), path.end());
                for (const auto& c : path) copies_.push_back(c);
                atom_bag_[slot] = bag;
                (void)dist;
                if (search(slot + 1)) return true;
                copies_.resize(copies_before);
                atom_bag_[slot] = SIZE_MAX;
            }
            assigned_ = std::move(saved);
        }
        return false;
    }

    // Reconstructs the atom-term partition tree induced by the homomorphism:
    // atoms grouped by their bag, terms owned by the bag that created their
    // image, tree structure contracted from the generated tree.
    void build_apt(QueryWitness& w) const {
        std::map<size_t, std::pair<std::vector<size_t>, std::vector<Term>>> content;
        for (size_t slot = 0; slot < order_.size(); ++slot)
            content[atom_bag_[slot]].first.push_back(order_[slot]);
        for (Term t : query_.terms()) {
            size_t owner = is_variable(t) ? gen_.creator(assigned_.apply(t)) : 0;
            content[owner].second.push_back(t);
        }
        std::vector<size_t> bags;
        for (const auto& [bag, _] : content) bags.push_back(bag);
        auto content_ancestor = [&](size_t bag) -> size_t {
            size_t cur = gen_.bag(bag).parent;
            while (cur != SIZE_MAX) {
                if (content.count(cur)) return cur;
                cur = gen_.bag(cur).parent;
            }
            return SIZE_MAX;
        };
        Apt apt;
        AptMapping gamma;
        std::map<size_t, size_t> node_of;
        for (size_t bag : bags) node_of[bag] = node_of.size();
        size_t roots = 0;
        bool injective = true;
        std::set<size_t> images;
        apt.nodes.resize(bags.size());
        gamma.bag.resize(bags.size());
        gamma.term_map.resize(bags.size());
        for (size_t bag : bags) {
            size_t node = node_of[bag];
            auto& anode = apt.nodes[node];
            anode.atoms = content.at(bag).first;
            std::sort(anode.atoms.begin(), anode.atoms.end());
            anode.terms = sorted_terms(std::move(content.at(bag).second));
            size_t up = content_ancestor(bag);
            if (up == SIZE_MAX) {
                anode.parent = SIZE_MAX;
                apt.root = node;
                ++roots;
            } else {
                anode.parent = node_of.at(up);
            }
            size_t image = gen_.bag(bag).image;
            gamma.bag[node] = image;
            if (!images.insert(image).second) injective = false;
            for (Term t : anode.terms) {
                if (!is_variable(t)) continue;
                Term img = assigned_.apply(t);
                if (is_initial_term(kb_, img)) {
                    gamma.term_map[node].bind(t, img);
                    continue;
                }
                auto abs = gen_.abstract_of(bag, img);
                if (!abs) {
                    injective = false;  // should not happen; skip the mapping
                    continue;
                }
                gamma.term_map[node].bind(t, bt_.bag(image).term_map.apply(*abs));
            }
        }
        w.xi.clear();
        for (size_t bag : bags) w.xi.push_back(bag);
        if (roots == 1 && injective) {
            w.apt = apt;
            w.gamma = gamma;
        }
    }
};

std::string free_name(const KnowledgeBase& kb, std::string base) {
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

// Breadth-first chase that checks the greedy witness of every application.
bool fallback_entails(const KnowledgeBase& kb, const AtomSet& query, const EntailOptions& opts) {
    AtomSet current = kb.fact();
    AtomSet last_added = kb.fact();
    std::vector<AtomSet> produced_sets;
    bool first = true;
    size_t applications = 0;
    for (size_t step = 0; step < opts.fallback_steps; ++step) {
        if (maps_into(query, current)) return true;
        auto triggers = breadth_triggers(kb, current, last_added, first);
        first = false;
        if (triggers.empty()) return false;  // saturated
        std::vector<Atom> added;
        for (const auto& [rule_idx, hom] : triggers) {
            const Rule& r = kb.rule(rule_idx);
            std::vector<Term> image;
            for (Term y : r.frontier()) image.push_back(hom.apply(y));
            bool witnessed = std::all_of(image.begin(), image.end(),
                                         [&](Term t) { return is_initial_term(kb, t); });
            for (size_t j = 0; !witnessed && j < produced_sets.size(); ++j) {
                witnessed = std::all_of(image.begin(), image.end(), [&](Term t) {
                    return is_initial_term(kb, t) ||
                           term_set_contains(produced_sets[j].vars(), t);
                });
            }
            if (!witnessed) throw NotGreedy(applications);
            auto app = apply_rule(current, r, hom);
            current = std::move(app.fact);
            produced_sets.push_back(app.produced);
            for (const Atom& a : app.produced.atoms()) added.push_back(a);
            ++applications;
            if (current.size() > opts.chase.max_atoms)
                throw BudgetExceeded("fallback chase exceeded the atom budget");
        }
        last_added = AtomSet(std::move(added));
    }
    if (maps_into(query, current)) return true;
    throw BudgetExceeded(
        "no decision after " + std::to_string(opts.fallback_steps) +
        " breadth-first steps; the rule set is not weakly frontier-guarded, consider the wfg "
        "translation");
}

}  // namespace

std::optional<QueryWitness> find_tree_homomorphism(const BlockedTree& bt,
                                                   const AtomSet& component) {
    TreeSearch search(bt, component);
    return search.run();
}

EntailResult entails(const KnowledgeBase& kb, const AtomSet& query, const EntailOptions& opts) {
    EntailResult result;
    for (Term t : query.terms()) {
        if (is_constant(t) && !kb.is_initial(t)) return result;  // unknown constant
    }
    if (maps_into(query, kb.fact())) {  // already answered by the fact
        result.entailed = true;
        return result;
    }
    FragmentReport report = classify(kb.rules());
    if (!report.wfg) {
        result.entailed = fallback_entails(kb, query, opts);
        return result;
    }
    auto components = connected_components(query);
    if (opts.mode == QueryMode::Apt) {
        Saturation sat = saturate(kb, opts.saturate);
        BlockedTree tree = build_full_blocked_tree(sat, opts.tree);
        for (const AtomSet& comp : components) {
            auto witness = find_tree_homomorphism(tree, comp);
            if (!witness) return result;
            result.witnesses.push_back(std::move(*witness));
        }
        result.entailed = true;
        return result;
    }
    // Query-as-rule: one fresh nullary goal per component.
    for (const AtomSet& comp : components) {
        std::vector<Rule> rules = kb.rules();
        Predicate goal = make_predicate(free_name(kb, "goal"), 0);
        rules.emplace_back("Q", comp, AtomSet({Atom(goal, {})}));
        KnowledgeBase augmented(kb.fact(), std::move(rules));
        size_t qrule = augmented.rules().size() - 1;
        Saturation sat = saturate(augmented, opts.saturate);
        BlockedTree tree = build_full_blocked_tree(sat, opts.tree);
        bool found = false;
        for (const auto& bag : tree.bags()) {
            const auto& pattern = sat.patterns()[bag.pattern].pattern;
            if (!full_body_maps(sat.bodies(), pattern, qrule, sat.single_atom()).empty()) {
                found = true;
                break;
            }
        }
        if (!found) return result;
    }
    result.entailed = true;
    return result;
}

}  // namespace gbts
