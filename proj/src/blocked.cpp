#include "gbts/blocked.hpp"

#include <algorithm>
#include <deque>

namespace gbts {

// ---------------------------------------------------------------------------
// Blocked tree construction

namespace {

// Instantiates the support of `pattern` under a parent bag: frontier terms
// resolve through the link into the parent's concrete terms, generated
// terms become fresh variables, initial terms stay themselves.
template <typename ParentConcrete>
void instantiate(const Saturation& sat, size_t support_id, const Link& link,
                 const ParentConcrete& parent_concrete, Substitution& term_map,
                 std::vector<Term>& terms, AtomSet& atoms) {
    const auto& support = sat.supports()[support_id];
    const KnowledgeBase& kb = sat.kb();
    for (Term t : support.terms) {
        if (is_constant(t) || kb.is_initial(t)) continue;
        if (term_set_contains(support.generated, t)) {
            term_map.bind(t, fresh_variable());
        } else {
            auto up = link.apply(t);
            if (!up) throw GbtsError("link does not cover frontier term " + to_string(t));
            Term parent_term = *up;
            if (!is_constant(parent_term) && !kb.is_initial(parent_term)) {
                auto conc = parent_concrete(parent_term);
                if (!conc) throw GbtsError("parent bag lacks term " + to_string(parent_term));
                parent_term = *conc;
            }
            term_map.bind(t, parent_term);
        }
    }
    std::vector<Term> out;
    for (Term t : support.terms) out.push_back(term_map.apply(t));
    terms = sorted_terms(std::move(out));
    atoms = term_map.apply(support.atoms);
}

}  // namespace

BlockedTree build_full_blocked_tree(const Saturation& sat, const BlockedTreeOptions& opts) {
    BlockedTree tree;
    tree.sat_ = &sat;

    BlockedBag root;
    root.support = sat.root_support();
    auto evo = sat.most_informative_evolution(sat.initial_pattern_id());
    root.pattern = evo ? sat.rules()[*evo].rhs : sat.initial_pattern_id();
    root.terms = sat.kb().initial_terms();
    root.atoms = sat.kb().fact();
    tree.bags_.push_back(std::move(root));
    tree.children_.emplace_back();
    tree.representative_.emplace(tree.bags_[0].pattern, 0);

    std::deque<size_t> queue{0};
    while (!queue.empty()) {
        size_t cur = queue.front();
        queue.pop_front();
        for (size_t rid : sat.most_informative_creations(tree.bags_[cur].pattern)) {
            const auto& rule = sat.rules()[rid];
            if (tree.bags_.size() >= opts.max_bags)
                throw BudgetExceeded("blocked tree exceeded the bag cap of " +
                                     std::to_string(opts.max_bags));
            BlockedBag bag;
            bag.pattern = rule.rhs;
            bag.support = sat.patterns()[rule.rhs].support;
            bag.parent = cur;
            bag.link = rule.link;
            bag.depth = tree.bags_[cur].depth + 1;
            const auto& parent = tree.bags_[cur];
            instantiate(
                sat, bag.support, bag.link,
                [&](Term t) { return parent.term_map.lookup(t); }, bag.term_map, bag.terms,
                bag.atoms);
            size_t id = tree.bags_.size();
            auto [it, inserted] = tree.representative_.emplace(bag.pattern, id);
            bag.blocked = !inserted;
            tree.bags_.push_back(std::move(bag));
            tree.children_.emplace_back();
            tree.children_[cur].push_back(id);
            if (inserted) queue.push_back(id);
        }
    }
    return tree;
}

size_t BlockedTree::representative(size_t bag) const {
    return representative_.at(bags_[bag].pattern);
}

size_t BlockedTree::depth() const {
    size_t d = 0;
    for (const auto& b : bags_) d = std::max(d, b.depth);
    return d;
}

AtomSet BlockedTree::all_atoms() const {
    std::vector<Atom> atoms;
    for (const auto& b : bags_)
        for (const Atom& a : b.atoms.atoms()) atoms.push_back(a);
    return AtomSet(std::move(atoms));
}

// ---------------------------------------------------------------------------
// Generated trees

GeneratedTree::GeneratedTree(const BlockedTree& bt) : bt_(&bt) {
    GeneratedBag root;
    root.image = 0;
    root.terms = bt.bag(0).terms;
    root.atoms = bt.bag(0).atoms;
    bags_.push_back(std::move(root));
    children_.emplace_back();
    for (Term t : bags_[0].terms) creator_.emplace(t.id, 0);
}

std::optional<size_t> GeneratedTree::child_with_image(size_t parent, size_t blocked_child) const {
    for (size_t c : children_[parent])
        if (bags_[c].image == blocked_child) return c;
    return std::nullopt;
}

const std::vector<size_t>& GeneratedTree::copy_candidates(size_t parent) const {
    size_t rep = bt_->representative(bags_[parent].image);
    return bt_->children(rep);
}

size_t GeneratedTree::copy_under(size_t parent, size_t blocked_child) {
    if (auto existing = child_with_image(parent, blocked_child)) return *existing;
    const auto& candidates = copy_candidates(parent);
    if (std::find(candidates.begin(), candidates.end(), blocked_child) == candidates.end())
        throw GbtsError("bag copy: blocked bag is not a child of the class representative");
    const Saturation& sat = bt_->saturation();
    GeneratedBag bag;
    bag.image = blocked_child;
    bag.parent = parent;
    bag.depth = bags_[parent].depth + 1;
    const auto& parent_bag = bags_[parent];
    instantiate(
        sat, bt_->bag(blocked_child).support, bt_->bag(blocked_child).link,
        [&](Term t) { return parent_bag.term_map.lookup(t); }, bag.term_map, bag.terms,
        bag.atoms);
    size_t id = bags_.size();
    for (const auto& [abs, conc] : bag.term_map.pairs())
        creator_.emplace(conc.id, id);  // inherited terms keep their first creator
    bags_.push_back(std::move(bag));
    children_.emplace_back();
    children_[parent].push_back(id);
    return id;
}

size_t GeneratedTree::creator(Term t) const {
    auto it = creator_.find(t.id);
    return it == creator_.end() ? 0 : it->second;
}

AtomSet GeneratedTree::all_atoms() const {
    std::vector<Atom> atoms;
    for (const auto& b : bags_)
        for (const Atom& a : b.atoms.atoms()) atoms.push_back(a);
    return AtomSet(std::move(atoms));
}

std::optional<Term> GeneratedTree::concrete(size_t bag, Term abstract_term) const {
    if (is_constant(abstract_term) || bt_->saturation().kb().is_initial(abstract_term))
        return abstract_term;
    auto v = bags_[bag].term_map.lookup(abstract_term);
    if (!v) return std::nullopt;
    return *v;
}

std::optional<Term> GeneratedTree::abstract_of(size_t bag, Term concrete_term) const {
    if (is_constant(concrete_term) || bt_->saturation().kb().is_initial(concrete_term))
        return concrete_term;
    for (const auto& [abs, conc] : bags_[bag].term_map.pairs())
        if (conc == concrete_term) return abs;
    return std::nullopt;
}

GeneratedTree generate(const BlockedTree& bt, const std::vector<CopyStep>& script) {
    GeneratedTree tree(bt);
    for (const auto& step : script) tree.copy_under(step.parent, step.blocked_child);
    return tree;
}

GeneratedTree expand_to_depth(const BlockedTree& bt, size_t depth, size_t max_bags) {
    GeneratedTree tree(bt);
    std::deque<size_t> queue{0};
    while (!queue.empty()) {
        size_t cur = queue.front();
        queue.pop_front();
        if (tree.bag(cur).depth >= depth) continue;
        for (size_t child : tree.copy_candidates(cur)) {
            if (tree.bags().size() >= max_bags)
                throw BudgetExceeded("generated tree exceeded the bag cap");
            queue.push_back(tree.copy_under(cur, child));
        }
    }
    return tree;
}

GeneratedTree embed_blocked(const BlockedTree& bt) {
    GeneratedTree tree(bt);
    std::vector<size_t> image_of(bt.bags().size(), SIZE_MAX);
    image_of[0] = 0;
    for (size_t i = 1; i < bt.bags().size(); ++i) {
        size_t parent = bt.bag(i).parent;
        image_of[i] = tree.copy_under(image_of[parent], i);
    }
    return tree;
}

}  // namespace gbts
