#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "gbts/chase.hpp"
#include "gbts/core.hpp"
#include "gbts/parser.hpp"

namespace gbts::testing {

// ---------------------------------------------------------------------------
// Shared knowledge bases

// F = {r(a,b), r(c,d), p(d)} with the looping rule r(x,y) -> r(y,z).
inline KBDocument loop_kb() {
    return parse_document(R"(
@facts
r(a,b). r(c,d). p(d).
@rules
r(X,Y) -> r(Y,Z).
)");
}

// Two-rule set whose third application has no greedy witness.
inline KBDocument non_greedy_kb() {
    return parse_document(R"(
@facts
r1(a,b). r1(b,c).
@rules
r1(X,Y) -> r2(Y,Z).
r1(X,Y), r2(X,Z), r2(Y,T) -> r2(Z,T).
@queries
? r2(X,Y), r2(Y,Z), r2(Z,W).
)");
}

// The seven-rule working set with its five-atom fact.
inline KBDocument running_kb() {
    return parse_document(R"(
@facts
q1(a,b,c). q1(d,c,e). q1(f,g,g). i(c). i(g).
@rules
q1(X1,Y1,Z1) -> s(Y1,T1), r(Z1,T1), q2(T1,U1,V1).
q2(X2,Y2,Z2) -> s(Y2,T2), r(Z2,T2), q3(T2,U2,V2).
q3(T3,U3,V3) -> h(T3).
q2(X4,Y4,Z4), s(Y4,T4), r(Z4,T4), h(T4) -> h(X4), p1(Y4), p2(Z4).
q1(X5,Y5,Z5), s(Y5,T5), r(Z5,T5), h(T5) -> p1(Y5), p2(Z5).
p1(XP), i(XP) -> r(XP,YP), p2(YP), i(YP).
p2(XQ), i(XQ) -> s(XQ,YQ), p1(YQ), i(YQ).
)");
}

// The two alternating rules over a single constant; its blocked tree has
// seven bags.
inline KBDocument alternating_kb() {
    return parse_document(R"(
@facts
i(c). p1(c). p2(c).
@rules
p1(XP), i(XP) -> r(XP,YP), p2(YP), i(YP).
p2(XQ), i(XQ) -> s(XQ,YQ), p1(YQ), i(YQ).
@queries
? p1(X), s(X,Y), r(Y,Z), s(Z,T), r(T,U), r(X,V).
)");
}

// The project/manager rule set used for classification.
inline KBDocument project_kb() {
    return parse_document(R"(
@rules
project(X,D,Z) -> projectDpt(X,D), projectField(X,Z).
projectField(X,Z) -> hasManager(X,Y).
hasManager(X,Y) -> projectField(X,Z).
hasManager(X,Y), projectDpt(X,D) -> memberOf(Y,D).
hasManager(X,Y), projectField(X,Z), isSensitiveField(Z) -> isCriticalManager(Y).
isCriticalManager(Y) -> hasManager(X,Y), projectField(X,Z), isSensitiveField(Z).
)");
}

// A single self-replicating rule: all positions of r1 and r2 are affected.
inline KBDocument replicating_kb() {
    return parse_document(R"(
@facts
r1(a,b). r2(b,c).
@rules
r1(X,Y), r2(Y,Z) -> r(X,XX), r(Y,YY), r(Z,ZZ), r1(XX,YY), r2(YY,ZZ).
@queries
? r1(X,Y).
)");
}

// Triangle-bodied rule whose decomposition graph has three nodes.
inline Rule triangle_rule() {
    auto doc = parse_document(R"(
@rules
p1(X), p2(X,U), p2(Y,Z), p3(Y,Z,U), p2(U,V), p3(U,V,X) -> h13(U,V).
)");
    return doc.rules[0];
}

// ---------------------------------------------------------------------------
// Independent oracles

// Exhaustive homomorphism check: tries all |terms(target)|^|vars(source)|
// assignments.
inline std::vector<Substitution> brute_force_homs(const AtomSet& source, const AtomSet& target,
                                                  const Substitution& seed = {}) {
    std::vector<Substitution> out;
    const auto& vars = source.vars();
    const auto& terms = target.terms();
    std::vector<size_t> choice(vars.size(), 0);
    size_t n = vars.size();
    auto check = [&]() {
        Substitution sub = seed;
        for (size_t i = 0; i < n; ++i) {
            if (!sub.bind(vars[i], terms[choice[i]])) return;
        }
        for (const Atom& a : source.atoms())
            if (!target.contains(sub.apply(a))) return;
        out.push_back(sub);
    };
    if (n == 0) {
        Substitution sub = seed;
        bool ok = true;
        for (const Atom& a : source.atoms())
            if (!target.contains(sub.apply(a))) ok = false;
        if (ok) out.push_back(sub);
        return out;
    }
    if (terms.empty()) return out;
    while (true) {
        check();
        size_t i = 0;
        while (i < n && ++choice[i] == terms.size()) {
            choice[i] = 0;
            ++i;
        }
        if (i == n) break;
    }
    return out;
}

// Textbook breadth-first chase, written independently of the engine: every
// step applies the not-yet-applied homomorphisms of every rule body against
// the fact of the previous step.
inline AtomSet naive_k_saturation(const KnowledgeBase& kb, size_t k) {
    AtomSet fact = kb.fact();
    std::set<std::string> done;
    for (size_t step = 0; step < k; ++step) {
        std::vector<std::pair<size_t, Substitution>> pending;
        for (size_t r = 0; r < kb.rules().size(); ++r) {
            for (const Substitution& hom : brute_force_homs(kb.rule(r).body(), fact)) {
                std::string key = std::to_string(r) + "/" + to_string(hom);
                if (done.count(key)) continue;
                done.insert(key);
                pending.push_back({r, hom});
            }
        }
        if (pending.empty()) break;
        AtomSet next = fact;
        for (const auto& [r, hom] : pending) next = apply_rule(next, kb.rule(r), hom).fact;
        fact = std::move(next);
    }
    return fact;
}

// ---------------------------------------------------------------------------
// Random generation (frontier-guarded rules; guaranteed wfg)

struct GenOptions {
    size_t max_rules = 4;
    size_t max_fact_atoms = 6;
    size_t max_constants = 4;
    size_t max_body_atoms = 2;
    size_t max_head_atoms = 2;
    size_t max_existentials = 2;
    bool tiny = false;  // translation-sized instances
};

class RandomKb {
  public:
    RandomKb(uint32_t seed, const GenOptions& opts = {}) : rng_(seed), opts_(opts) {
        if (opts_.tiny) {
            opts_.max_rules = 2;
            opts_.max_fact_atoms = 2;
            opts_.max_constants = 2;
            opts_.max_body_atoms = 2;
            opts_.max_head_atoms = 1;
            opts_.max_existentials = 1;
        }
        size_t n_preds = opts_.tiny ? 3 : 4 + pick(3);
        for (size_t i = 0; i < n_preds; ++i) {
            uint32_t arity = 1 + static_cast<uint32_t>(pick(opts_.tiny ? 2 : 3));
            preds_.push_back(make_predicate("g" + std::to_string(seed) + "p" + std::to_string(i),
                                            arity));
        }
        size_t n_consts = 1 + pick(opts_.max_constants);
        for (size_t i = 0; i < n_consts; ++i)
            constants_.push_back(make_constant("c" + std::to_string(i)));
    }

    KnowledgeBase kb() {
        AtomSet fact = random_fact();
        std::vector<Rule> rules;
        size_t n = 1 + pick(opts_.max_rules);
        for (size_t i = 0; i < n; ++i) rules.push_back(random_rule("G" + std::to_string(i)));
        return KnowledgeBase(std::move(fact), std::move(rules));
    }

    AtomSet random_query(const KnowledgeBase& base) {
        VarScope scope;
        std::vector<Term> pool;
        for (size_t i = 0; i < 3; ++i) pool.push_back(scope.var("Q" + std::to_string(i)));
        std::vector<Atom> atoms;
        size_t n = 1 + pick(3);
        for (size_t i = 0; i < n; ++i) {
            Predicate p = preds_[pick(preds_.size())];
            std::vector<Term> args;
            for (uint32_t j = 0; j < predicate_arity(p); ++j) {
                // Bias towards shared variables so queries stay connected.
                if (pick(5) == 0 && !base.initial_terms().empty())
                    args.push_back(constants_[pick(constants_.size())]);
                else
                    args.push_back(pool[pick(pool.size())]);
            }
            atoms.push_back(Atom(p, std::move(args)));
        }
        return AtomSet(std::move(atoms));
    }

    size_t pick(size_t n) { return n == 0 ? 0 : rng_() % n; }

  private:
    std::mt19937 rng_;
    GenOptions opts_;
    std::vector<Predicate> preds_;
    std::vector<Term> constants_;

    AtomSet random_fact() {
        std::vector<Atom> atoms;
        size_t n = 1 + pick(opts_.max_fact_atoms);
        for (size_t i = 0; i < n; ++i) {
            Predicate p = preds_[pick(preds_.size())];
            std::vector<Term> args;
            for (uint32_t j = 0; j < predicate_arity(p); ++j)
                args.push_back(constants_[pick(constants_.size())]);
            atoms.push_back(Atom(p, std::move(args)));
        }
        return AtomSet(std::move(atoms));
    }

    // Frontier-guarded by construction: one body atom hosts every frontier
    // variable.
    Rule random_rule(const std::string& tag) {
        VarScope scope;
        std::vector<Term> vars;
        for (size_t i = 0; i < 3; ++i) vars.push_back(scope.var(tag + "X" + std::to_string(i)));

        Predicate guard_pred = preds_[pick(preds_.size())];
        uint32_t guard_arity = predicate_arity(guard_pred);
        std::vector<Term> guard_args;
        std::vector<Term> guard_vars;
        for (uint32_t j = 0; j < guard_arity; ++j) {
            Term v = vars[pick(vars.size())];
            guard_args.push_back(v);
            guard_vars.push_back(v);
        }
        std::vector<Atom> body{Atom(guard_pred, guard_args)};
        size_t extra = pick(opts_.max_body_atoms);
        for (size_t i = 0; i < extra; ++i) {
            Predicate p = preds_[pick(preds_.size())];
            std::vector<Term> args;
            for (uint32_t j = 0; j < predicate_arity(p); ++j) {
                if (pick(6) == 0)
                    args.push_back(constants_[pick(constants_.size())]);
                else
                    args.push_back(vars[pick(vars.size())]);
            }
            body.push_back(Atom(p, std::move(args)));
        }

        // Frontier drawn from the guard's variables only.
        guard_vars = sorted_terms(std::move(guard_vars));
        std::vector<Term> frontier;
        size_t fsize = std::min<size_t>(1 + pick(2), guard_vars.size());
        for (size_t i = 0; i < fsize; ++i) frontier.push_back(guard_vars[i]);
        std::vector<Term> head_pool = frontier;
        size_t n_exist = pick(opts_.max_existentials + 1);
        for (size_t i = 0; i < n_exist; ++i)
            head_pool.push_back(scope.var(tag + "E" + std::to_string(i)));

        std::vector<Atom> head;
        size_t n_head = 1 + pick(opts_.max_head_atoms);
        for (size_t i = 0; i < n_head; ++i) {
            Predicate p = preds_[pick(preds_.size())];
            std::vector<Term> args;
            for (uint32_t j = 0; j < predicate_arity(p); ++j) {
                if (pick(8) == 0)
                    args.push_back(constants_[pick(constants_.size())]);
                else
                    args.push_back(head_pool[pick(head_pool.size())]);
            }
            head.push_back(Atom(p, std::move(args)));
        }
        return Rule(tag, AtomSet(std::move(body)), AtomSet(std::move(head)));
    }
};

}  // namespace gbts::testing
