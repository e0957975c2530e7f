#include "gbts/core.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <deque>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace gbts {

// ---------------------------------------------------------------------------
// Term table

namespace {

struct TermEntry {
    TermKind kind;
    std::string name;
};

struct TermTable {
    std::mutex mu;
    std::deque<TermEntry> entries;                       // stable addresses
    std::unordered_map<std::string, uint32_t> constants; // name -> id
    std::atomic<uint64_t> fresh_counter{0};

    static TermTable& instance() {
        static TermTable t;
        return t;
    }
};

struct PredEntry {
    std::string name;
    uint32_t arity;
};

struct PredTable {
    std::mutex mu;
    std::deque<PredEntry> entries;
    std::unordered_map<std::string, uint32_t> index;  // "name/arity" -> id

    static PredTable& instance() {
        static PredTable t;
        return t;
    }
};

}  // namespace

Term make_constant(std::string_view name) {
    auto& t = TermTable::instance();
    std::lock_guard<std::mutex> lock(t.mu);
    std::string key(name);
    auto it = t.constants.find(key);
    if (it != t.constants.end()) return Term{it->second};
    uint32_t id = static_cast<uint32_t>(t.entries.size());
    t.entries.push_back({TermKind::Constant, std::move(key)});
    t.constants.emplace(t.entries.back().name, id);
    return Term{id};
}

Term make_variable(std::string_view name) {
    auto& t = TermTable::instance();
    std::lock_guard<std::mutex> lock(t.mu);
    uint32_t id = static_cast<uint32_t>(t.entries.size());
    t.entries.push_back({TermKind::Variable, std::string(name)});
    return Term{id};
}

void reset_fresh_names() {
    TermTable::instance().fresh_counter.store(0);
}

Term fresh_variable(std::string_view prefix) {
    auto& t = TermTable::instance();
    uint64_t n = t.fresh_counter.fetch_add(1) + 1;
    std::string name(prefix);
    name += std::to_string(n);
    return make_variable(name);
}

TermKind term_kind(Term t) {
    return TermTable::instance().entries[t.id].kind;
}

std::string_view term_name(Term t) {
    return TermTable::instance().entries[t.id].name;
}

bool is_constant(Term t) { return term_kind(t) == TermKind::Constant; }
bool is_variable(Term t) { return term_kind(t) == TermKind::Variable; }

int term_compare(Term a, Term b) {
    if (a.id == b.id) return 0;
    const auto& ea = TermTable::instance().entries[a.id];
    const auto& eb = TermTable::instance().entries[b.id];
    if (ea.kind != eb.kind) return ea.kind == TermKind::Constant ? -1 : 1;
    int c = ea.name.compare(eb.name);
    if (c != 0) return c < 0 ? -1 : 1;
    return a.id < b.id ? -1 : 1;
}

Term VarScope::var(std::string_view name) {
    for (const auto& [n, t] : vars_)
        if (n == name) return t;
    Term t = make_variable(name);
    vars_.emplace_back(std::string(name), t);
    return t;
}

std::optional<Term> VarScope::lookup(std::string_view name) const {
    for (const auto& [n, t] : vars_)
        if (n == name) return t;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Predicates

Predicate make_predicate(std::string_view name, uint32_t arity) {
    auto& t = PredTable::instance();
    std::lock_guard<std::mutex> lock(t.mu);
    std::string key(name);
    key += '/';
    key += std::to_string(arity);
    auto it = t.index.find(key);
    if (it != t.index.end()) return Predicate{it->second};
    uint32_t id = static_cast<uint32_t>(t.entries.size());
    t.entries.push_back({std::string(name), arity});
    t.index.emplace(std::move(key), id);
    return Predicate{id};
}

std::string_view predicate_name(Predicate p) {
    return PredTable::instance().entries[p.id].name;
}

uint32_t predicate_arity(Predicate p) {
    return PredTable::instance().entries[p.id].arity;
}

int predicate_compare(Predicate a, Predicate b) {
    if (a.id == b.id) return 0;
    const auto& ea = PredTable::instance().entries[a.id];
    const auto& eb = PredTable::instance().entries[b.id];
    int c = ea.name.compare(eb.name);
    if (c != 0) return c < 0 ? -1 : 1;
    if (ea.arity != eb.arity) return ea.arity < eb.arity ? -1 : 1;
    return 0;
}

// ---------------------------------------------------------------------------
// Atoms

Atom::Atom(Predicate p, std::vector<Term> a) : pred(p), args(std::move(a)) {
    if (args.size() != predicate_arity(pred))
        throw GbtsError("atom argument count does not match predicate arity for " +
                        std::string(predicate_name(pred)));
}

int atom_compare(const Atom& a, const Atom& b) {
    int c = predicate_compare(a.pred, b.pred);
    if (c != 0) return c;
    for (size_t i = 0; i < a.args.size() && i < b.args.size(); ++i) {
        c = term_compare(a.args[i], b.args[i]);
        if (c != 0) return c;
    }
    if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
    return 0;
}

std::string to_string(Term t) { return std::string(term_name(t)); }

std::string to_string(const Atom& a) {
    std::string s(predicate_name(a.pred));
    s += '(';
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ',';
        s += term_name(a.args[i]);
    }
    s += ')';
    return s;
}

// ---------------------------------------------------------------------------
// AtomSet

AtomSet::AtomSet(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(), atom_less);
    atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
    for (const auto& a : atoms_)
        for (Term t : a.args) terms_.push_back(t);
    std::sort(terms_.begin(), terms_.end(), TermLess{});
    terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
    for (Term t : terms_)
        if (is_variable(t)) vars_.push_back(t);
}

bool AtomSet::contains(const Atom& a) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), a, atom_less);
}

bool AtomSet::subset_of(const AtomSet& other) const {
    for (const auto& a : atoms_)
        if (!other.contains(a)) return false;
    return true;
}

bool AtomSet::has_term(Term t) const {
    return std::binary_search(terms_.begin(), terms_.end(), t, TermLess{});
}

std::pair<size_t, size_t> AtomSet::predicate_range(Predicate p) const {
    auto lo = std::lower_bound(atoms_.begin(), atoms_.end(), p,
                               [](const Atom& a, Predicate q) { return predicate_compare(a.pred, q) < 0; });
    auto hi = std::upper_bound(atoms_.begin(), atoms_.end(), p,
                               [](Predicate q, const Atom& a) { return predicate_compare(q, a.pred) < 0; });
    return {static_cast<size_t>(lo - atoms_.begin()), static_cast<size_t>(hi - atoms_.begin())};
}

AtomSet union_of(const AtomSet& a, const AtomSet& b) {
    std::vector<Atom> all = a.atoms();
    all.insert(all.end(), b.atoms().begin(), b.atoms().end());
    return AtomSet(std::move(all));
}

std::string to_string(const AtomSet& s) {
    std::string out = "{";
    for (size_t i = 0; i < s.atoms().size(); ++i) {
        if (i) out += ", ";
        out += to_string(s.atoms()[i]);
    }
    out += '}';
    return out;
}

// ---------------------------------------------------------------------------
// Substitution

Substitution Substitution::of(std::initializer_list<std::pair<Term, Term>> pairs) {
    Substitution s;
    for (const auto& [k, v] : pairs) {
        if (!s.bind(k, v)) throw GbtsError("inconsistent substitution literal");
    }
    return s;
}

bool Substitution::bind(Term t, Term value) {
    if (is_constant(t)) return t == value;
    auto it = std::lower_bound(map_.begin(), map_.end(), t,
                               [](const auto& p, Term k) { return term_less(p.first, k); });
    if (it != map_.end() && it->first == t) return it->second == value;
    map_.insert(it, {t, value});
    return true;
}

std::optional<Term> Substitution::lookup(Term t) const {
    auto it = std::lower_bound(map_.begin(), map_.end(), t,
                               [](const auto& p, Term k) { return term_less(p.first, k); });
    if (it != map_.end() && it->first == t) return it->second;
    return std::nullopt;
}

Term Substitution::apply(Term t) const {
    if (auto v = lookup(t)) return *v;
    return t;
}

Atom Substitution::apply(const Atom& a) const {
    std::vector<Term> args;
    args.reserve(a.args.size());
    for (Term t : a.args) args.push_back(apply(t));
    return Atom(a.pred, std::move(args));
}

AtomSet Substitution::apply(const AtomSet& s) const {
    std::vector<Atom> out;
    out.reserve(s.size());
    for (const auto& a : s.atoms()) out.push_back(apply(a));
    return AtomSet(std::move(out));
}

Substitution Substitution::restricted(const std::function<bool(Term)>& keep_key) const {
    Substitution out;
    for (const auto& [k, v] : map_)
        if (keep_key(k)) out.map_.push_back({k, v});
    return out;
}

Substitution Substitution::restricted_to_values(const std::function<bool(Term)>& keep_value) const {
    Substitution out;
    for (const auto& [k, v] : map_)
        if (keep_value(v)) out.map_.push_back({k, v});
    return out;
}

Substitution Substitution::composed_with(const Substitution& outer) const {
    Substitution out;
    for (const auto& [k, v] : map_) out.map_.push_back({k, outer.apply(v)});
    return out;
}

bool Substitution::extends(const Substitution& sub) const {
    for (const auto& [k, v] : sub.map_) {
        auto mine = lookup(k);
        if (!mine || *mine != v) return false;
    }
    return true;
}

bool Substitution::agrees_with(const Substitution& other) const {
    for (const auto& [k, v] : map_) {
        auto theirs = other.lookup(k);
        if (theirs && *theirs != v) return false;
    }
    return true;
}

bool substitution_less(const Substitution& a, const Substitution& b) {
    size_t n = std::min(a.map_.size(), b.map_.size());
    for (size_t i = 0; i < n; ++i) {
        int c = term_compare(a.map_[i].first, b.map_[i].first);
        if (c != 0) return c < 0;
        c = term_compare(a.map_[i].second, b.map_[i].second);
        if (c != 0) return c < 0;
    }
    return a.map_.size() < b.map_.size();
}

std::string to_string(const Substitution& s) {
    std::string out = "{";
    for (size_t i = 0; i < s.pairs().size(); ++i) {
        if (i) out += ", ";
        out += term_name(s.pairs()[i].first);
        out += "->";
        out += term_name(s.pairs()[i].second);
    }
    out += '}';
    return out;
}

// ---------------------------------------------------------------------------
// Homomorphism search

namespace {

struct HomSearch {
    const AtomSet& target;
    const std::vector<Atom>& source;  // in set order
    const std::function<bool(const Substitution&)>& fn;
    bool keep_going = true;

    // Backtracking over source atoms; bindings accumulated in `sub`.
    void run(size_t i, Substitution& sub) {
        if (!keep_going) return;
        if (i == source.size()) {
            keep_going = fn(sub);
            return;
        }
        const Atom& a = source[i];
        auto [lo, hi] = target.predicate_range(a.pred);
        for (size_t j = lo; j < hi && keep_going; ++j) {
            const Atom& cand = target.atoms()[j];
            Substitution saved = sub;
            bool ok = true;
            for (size_t k = 0; k < a.args.size(); ++k) {
                if (!sub.bind(a.args[k], cand.args[k])) {
                    ok = false;
                    break;
                }
            }
            if (ok) run(i + 1, sub);
            sub = std::move(saved);
        }
    }
};

}  // namespace

bool for_each_homomorphism(const AtomSet& source, const AtomSet& target,
                           const Substitution& seed,
                           const std::function<bool(const Substitution&)>& fn) {
    Substitution sub = seed;
    HomSearch search{target, source.atoms(), fn};
    search.run(0, sub);
    return search.keep_going;
}

std::vector<Substitution> all_homomorphisms(const AtomSet& source, const AtomSet& target,
                                            const Substitution& seed) {
    std::vector<Substitution> out;
    for_each_homomorphism(source, target, seed, [&](const Substitution& s) {
        out.push_back(s);
        return true;
    });
    return out;
}

std::optional<Substitution> first_homomorphism(const AtomSet& source, const AtomSet& target,
                                               const Substitution& seed) {
    std::optional<Substitution> out;
    for_each_homomorphism(source, target, seed, [&](const Substitution& s) {
        out = s;
        return false;
    });
    return out;
}

bool maps_into(const AtomSet& source, const AtomSet& target, const Substitution& seed) {
    return first_homomorphism(source, target, seed).has_value();
}

// ---------------------------------------------------------------------------
// Connected components (variable connectivity)

std::vector<AtomSet> connected_components(const AtomSet& a) {
    const auto& atoms = a.atoms();
    size_t n = atoms.size();
    std::vector<size_t> comp(n);
    for (size_t i = 0; i < n; ++i) comp[i] = i;
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (comp[x] != x) {
            comp[x] = comp[comp[x]];
            x = comp[x];
        }
        return x;
    };
    auto unite = [&](size_t x, size_t y) {
        x = find(x);
        y = find(y);
        if (x != y) comp[std::max(x, y)] = std::min(x, y);
    };
    std::vector<std::pair<Term, size_t>> var_first;
    for (size_t i = 0; i < n; ++i) {
        for (Term t : atoms[i].args) {
            if (!is_variable(t)) continue;
            auto it = std::find_if(var_first.begin(), var_first.end(),
                                   [&](const auto& p) { return p.first == t; });
            if (it == var_first.end())
                var_first.push_back({t, i});
            else
                unite(it->second, i);
        }
    }
    std::vector<std::pair<size_t, std::vector<Atom>>> groups;
    for (size_t i = 0; i < n; ++i) {
        size_t r = find(i);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == r; });
        if (it == groups.end())
            groups.push_back({r, {atoms[i]}});
        else
            it->second.push_back(atoms[i]);
    }
    std::vector<AtomSet> out;
    out.reserve(groups.size());
    for (auto& g : groups) out.emplace_back(std::move(g.second));
    return out;
}

// ---------------------------------------------------------------------------
// Term set helpers

std::vector<Term> sorted_terms(std::vector<Term> ts) {
    std::sort(ts.begin(), ts.end(), TermLess{});
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

bool term_set_contains(const std::vector<Term>& sorted, Term t) {
    return std::binary_search(sorted.begin(), sorted.end(), t, TermLess{});
}

std::vector<Term> term_set_union(const std::vector<Term>& a, const std::vector<Term>& b) {
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out), TermLess{});
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace gbts
