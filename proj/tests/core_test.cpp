#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "gbts/core.hpp"
#include "gbts/parser.hpp"

using namespace gbts;
using gbts::testing::brute_force_homs;

TEST_CASE("terms and predicates") {
    Term a = make_constant("a");
    Term a2 = make_constant("a");
    CHECK(a == a2);
    Term x = make_variable("x");
    Term x2 = make_variable("x");
    CHECK(x != x2);  // variables are scoped, never deduplicated
    CHECK(is_constant(a));
    CHECK(is_variable(x));
    CHECK(term_less(a, x));  // constants sort before variables

    Predicate p1 = make_predicate("ct_p", 1);
    Predicate p2 = make_predicate("ct_p", 2);
    CHECK(p1 != p2);
    CHECK(predicate_arity(p2) == 2);
    CHECK_THROWS_AS(Atom(p2, {a}), GbtsError);
}

TEST_CASE("atom sets deduplicate and cache") {
    VarScope sc;
    AtomSet s = parse_atoms("r(X,Y), r(X,Y), p(a)", sc);
    CHECK(s.size() == 2);
    CHECK(s.vars().size() == 2);
    CHECK(s.terms().size() == 3);
    // Caches agree with recomputation.
    std::vector<Term> expect;
    for (const Atom& at : s.atoms())
        for (Term t : at.args) expect.push_back(t);
    CHECK(s.terms() == sorted_terms(std::move(expect)));
}

TEST_CASE("substitutions") {
    VarScope sc;
    Term x = sc.var("X"), y = sc.var("Y");
    Term a = make_constant("a"), b = make_constant("b");

    SUBCASE("constants map to themselves") {
        Substitution s;
        CHECK(s.bind(a, a));
        CHECK_FALSE(s.bind(a, b));
        CHECK(s.apply(a) == a);
    }
    SUBCASE("apply examples") {
        AtomSet pxx = parse_atoms("p(X,X)", sc);
        Substitution s = Substitution::of({{x, a}});
        CHECK(to_string(s.apply(pxx)) == "{p(a,a)}");

        AtomSet pa = parse_atoms("p(a)");
        CHECK(Substitution{}.apply(pa) == pa);

        VarScope sc2;
        AtomSet mixed = parse_atoms("r(X,Y), p(Y)", sc2);
        Substitution s2 = Substitution::of({{sc2.lookup("Y").value(), b}});
        CHECK(to_string(s2.apply(mixed)) == "{p(b), r(X,b)}");
    }
    SUBCASE("idempotent substitutions are idempotent under application") {
        Substitution s = Substitution::of({{x, a}, {y, b}});
        AtomSet set = parse_atoms("q(X,Y)", sc);
        CHECK(s.apply(s.apply(set)) == s.apply(set));
    }
}

TEST_CASE("homomorphism enumeration examples") {
    SUBCASE("two matches in order") {
        VarScope sc;
        AtomSet source = parse_atoms("r(X,Y)", sc);
        AtomSet target = parse_atoms("r(a,b), r(c,d), p(d)");
        auto homs = all_homomorphisms(source, target);
        REQUIRE(homs.size() == 2);
        CHECK(to_string(homs[0]) == "{X->a, Y->b}");
        CHECK(to_string(homs[1]) == "{X->c, Y->d}");
    }
    SUBCASE("empty source yields exactly the seed") {
        AtomSet target = parse_atoms("p(a)");
        auto homs = all_homomorphisms(AtomSet(), target);
        REQUIRE(homs.size() == 1);
        CHECK(homs[0].empty());
    }
    SUBCASE("seeded search restricts candidates") {
        VarScope sc;
        AtomSet source = parse_atoms("r(X,Y)", sc);
        AtomSet target = parse_atoms("r(a,b), r(c,d)");
        Substitution seed = Substitution::of({{sc.lookup("X").value(), make_constant("c")}});
        auto homs = all_homomorphisms(source, target, seed);
        REQUIRE(homs.size() == 1);
        CHECK(homs[0].apply(sc.lookup("Y").value()) == make_constant("d"));
    }
    SUBCASE("constants must match") {
        VarScope sc;
        AtomSet source = parse_atoms("r(a,X)", sc);
        AtomSet target = parse_atoms("r(a,b), r(c,d)");
        auto homs = all_homomorphisms(source, target);
        REQUIRE(homs.size() == 1);
        CHECK(homs[0].apply(sc.lookup("X").value()) == make_constant("b"));
    }
}

TEST_CASE("homomorphisms agree with brute force on random instances") {
    std::mt19937 rng(7331);
    auto pick = [&](size_t n) { return rng() % n; };
    for (int round = 0; round < 300; ++round) {
        VarScope sc;
        std::vector<Term> vars;
        size_t nv = 1 + pick(5);
        for (size_t i = 0; i < nv; ++i) vars.push_back(sc.var("V" + std::to_string(i)));
        std::vector<Term> consts;
        size_t nc = 1 + pick(3);
        for (size_t i = 0; i < nc; ++i) consts.push_back(make_constant("k" + std::to_string(i)));
        std::vector<Predicate> preds;
        for (size_t i = 0; i < 2; ++i)
            preds.push_back(make_predicate("hrt" + std::to_string(i), 1 + (uint32_t)pick(2)));
        auto random_atom = [&](bool ground) {
            Predicate p = preds[pick(preds.size())];
            std::vector<Term> args;
            for (uint32_t j = 0; j < predicate_arity(p); ++j) {
                if (ground || pick(2) == 0)
                    args.push_back(consts[pick(consts.size())]);
                else
                    args.push_back(vars[pick(vars.size())]);
            }
            return Atom(p, args);
        };
        std::vector<Atom> src, tgt;
        size_t ns = 1 + pick(3), nt = 1 + pick(4);
        for (size_t i = 0; i < ns; ++i) src.push_back(random_atom(false));
        for (size_t i = 0; i < nt; ++i) tgt.push_back(random_atom(true));
        AtomSet source(src), target(tgt);

        auto fast = all_homomorphisms(source, target);
        auto slow = brute_force_homs(source, target);
        std::sort(fast.begin(), fast.end(), substitution_less);
        std::sort(slow.begin(), slow.end(), substitution_less);
        REQUIRE(fast == slow);
    }
}

TEST_CASE("homomorphism composition stays a homomorphism") {
    VarScope sc;
    AtomSet a = parse_atoms("e(X,Y), e(Y,Z)", sc);
    AtomSet b = parse_atoms("e(u1,u2), e(u2,u3), e(u3,u1)");
    AtomSet c = parse_atoms("e(w,w)");
    auto into_c = all_homomorphisms(a, c);
    CHECK(!into_c.empty());
    for (const auto& pi : all_homomorphisms(a, b)) {
        for (const auto& sigma : all_homomorphisms(b, c)) {
            Substitution composed = pi.composed_with(sigma);
            CHECK(std::find(into_c.begin(), into_c.end(), composed) != into_c.end());
        }
    }
}

TEST_CASE("connected components split on variables only") {
    SUBCASE("distinct variables split") {
        VarScope sc;
        CHECK(connected_components(parse_atoms("p(X), q(Y)", sc)).size() == 2);
    }
    SUBCASE("a shared constant does not connect") {
        VarScope sc;
        CHECK(connected_components(parse_atoms("p(X,a), q(Y,a)", sc)).size() == 2);
    }
    SUBCASE("a shared variable connects") {
        VarScope sc;
        CHECK(connected_components(parse_atoms("p(X,Y), q(Y,Z)", sc)).size() == 1);
    }
    SUBCASE("empty set has no components") {
        CHECK(connected_components(AtomSet()).empty());
    }
}
