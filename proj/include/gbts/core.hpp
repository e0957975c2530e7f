#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gbts {

// ---------------------------------------------------------------------------
// Errors

struct GbtsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetExceeded : GbtsError {
    using GbtsError::GbtsError;
};

// ---------------------------------------------------------------------------
// Terms
//
// Terms are interned in a process-wide table and compared by id. Constants
// are deduplicated by name; variables always get a fresh id so that distinct
// scopes (rules, queries, chase steps) never alias even when display names
// repeat. The total order used everywhere is (kind, name, id), which keeps
// enumeration deterministic within a run.

enum class TermKind : uint8_t { Constant, Variable };

struct Term {
    uint32_t id = UINT32_MAX;

    bool valid() const { return id != UINT32_MAX; }
    friend bool operator==(Term a, Term b) { return a.id == b.id; }
    friend bool operator!=(Term a, Term b) { return a.id != b.id; }
};

Term make_constant(std::string_view name);
// Always mints a new term; the display name is kept as given.
Term make_variable(std::string_view name);
// New variable named <prefix><n> with a run-global counter (unique display).
Term fresh_variable(std::string_view prefix = "Z");
// Restarts the fresh-name counter; display names restart at <prefix>1 while
// term identities stay unique. One logical run should reset at most once.
void reset_fresh_names();

TermKind term_kind(Term t);
std::string_view term_name(Term t);
bool is_constant(Term t);
bool is_variable(Term t);

// (kind, name, id): constants sort before variables.
int term_compare(Term a, Term b);
inline bool term_less(Term a, Term b) { return term_compare(a, b) < 0; }

struct TermLess {
    bool operator()(Term a, Term b) const { return term_less(a, b); }
};

// Helper for building scoped variables: one fresh Term per distinct name.
class VarScope {
  public:
    Term var(std::string_view name);
    std::optional<Term> lookup(std::string_view name) const;

  private:
    std::vector<std::pair<std::string, Term>> vars_;
};

// ---------------------------------------------------------------------------
// Predicates and atoms

struct Predicate {
    uint32_t id = UINT32_MAX;

    bool valid() const { return id != UINT32_MAX; }
    friend bool operator==(Predicate a, Predicate b) { return a.id == b.id; }
    friend bool operator!=(Predicate a, Predicate b) { return a.id != b.id; }
};

// Interned by (name, arity). Same name with two arities yields two distinct
// predicates; per-document arity consistency is enforced by the parser.
Predicate make_predicate(std::string_view name, uint32_t arity);
std::string_view predicate_name(Predicate p);
uint32_t predicate_arity(Predicate p);
int predicate_compare(Predicate a, Predicate b);

struct Atom {
    Predicate pred;
    std::vector<Term> args;

    Atom() = default;
    Atom(Predicate p, std::vector<Term> a);

    friend bool operator==(const Atom& a, const Atom& b) {
        return a.pred == b.pred && a.args == b.args;
    }
};

int atom_compare(const Atom& a, const Atom& b);
inline bool atom_less(const Atom& a, const Atom& b) { return atom_compare(a, b) < 0; }
std::string to_string(const Atom& a);
std::string to_string(Term t);

// ---------------------------------------------------------------------------
// Atom sets
//
// Set semantics over atoms: sorted, deduplicated, with eagerly computed
// vars/terms caches. Values are immutable after construction and safe to
// share across threads.

class AtomSet {
  public:
    AtomSet() = default;
    explicit AtomSet(std::vector<Atom> atoms);

    const std::vector<Atom>& atoms() const { return atoms_; }
    size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    bool contains(const Atom& a) const;
    bool subset_of(const AtomSet& other) const;

    // Sorted, unique.
    const std::vector<Term>& terms() const { return terms_; }
    const std::vector<Term>& vars() const { return vars_; }
    bool has_term(Term t) const;

    // Range [first, last) of atoms with the given predicate.
    std::pair<size_t, size_t> predicate_range(Predicate p) const;

    friend bool operator==(const AtomSet& a, const AtomSet& b) { return a.atoms_ == b.atoms_; }

  private:
    std::vector<Atom> atoms_;
    std::vector<Term> terms_;
    std::vector<Term> vars_;
};

AtomSet union_of(const AtomSet& a, const AtomSet& b);
std::string to_string(const AtomSet& a);

// ---------------------------------------------------------------------------
// Substitutions
//
// Partial maps Term -> Term. Constants are implicitly mapped to themselves;
// binding a constant to a different term is rejected. apply() is the
// identity on unmapped terms.

class Substitution {
  public:
    Substitution() = default;

    static Substitution of(std::initializer_list<std::pair<Term, Term>> pairs);

    // Returns false when t is a constant and value != t, or when t is
    // already bound to a different value.
    bool bind(Term t, Term value);

    std::optional<Term> lookup(Term t) const;
    bool defined(Term t) const { return lookup(t).has_value(); }
    Term apply(Term t) const;
    Atom apply(const Atom& a) const;
    AtomSet apply(const AtomSet& a) const;

    size_t size() const { return map_.size(); }
    bool empty() const { return map_.empty(); }
    const std::vector<std::pair<Term, Term>>& pairs() const { return map_; }

    // Keep only bindings whose key satisfies the filter.
    Substitution restricted(const std::function<bool(Term)>& keep_key) const;
    // Keep only bindings whose value satisfies the filter.
    Substitution restricted_to_values(const std::function<bool(Term)>& keep_value) const;

    // (outer ∘ this): x -> outer.apply(this(x)).
    Substitution composed_with(const Substitution& outer) const;

    // True when every binding of sub also holds here.
    bool extends(const Substitution& sub) const;
    // True when the two maps agree on shared keys.
    bool agrees_with(const Substitution& other) const;

    friend bool operator==(const Substitution& a, const Substitution& b) {
        return a.map_ == b.map_;
    }
    friend bool operator!=(const Substitution& a, const Substitution& b) {
        return !(a == b);
    }

  private:
    friend bool substitution_less(const Substitution& a, const Substitution& b);
    std::vector<std::pair<Term, Term>> map_;  // sorted by key (term order)
};

// Lexicographic over the sorted pair lists; a deterministic total order.
bool substitution_less(const Substitution& a, const Substitution& b);

std::string to_string(const Substitution& s);

// ---------------------------------------------------------------------------
// Homomorphisms
//
// Enumerates the extensions pi of `seed` with pi(source) ⊆ target, in a
// deterministic order: source atoms are processed in set order and candidate
// target atoms are tried in set order. The callback returns false to stop.

bool for_each_homomorphism(const AtomSet& source, const AtomSet& target,
                           const Substitution& seed,
                           const std::function<bool(const Substitution&)>& fn);

std::vector<Substitution> all_homomorphisms(const AtomSet& source, const AtomSet& target,
                                            const Substitution& seed = {});
std::optional<Substitution> first_homomorphism(const AtomSet& source, const AtomSet& target,
                                               const Substitution& seed = {});
bool maps_into(const AtomSet& source, const AtomSet& target, const Substitution& seed = {});

// Components connected through shared variables; constants do not connect.
std::vector<AtomSet> connected_components(const AtomSet& a);

// Sorted union helpers used throughout.
std::vector<Term> sorted_terms(std::vector<Term> ts);
bool term_set_contains(const std::vector<Term>& sorted, Term t);
std::vector<Term> term_set_union(const std::vector<Term>& a, const std::vector<Term>& b);

}  // namespace gbts
