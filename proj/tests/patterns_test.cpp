#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"
#include "gbts/parser.hpp"
#include "gbts/patterns.hpp"

using namespace gbts;
using namespace gbts::testing;

namespace {

// Looks up a rule variable by display name.
Term rule_var(const Rule& r, const std::string& name) {
    for (Term v : r.body().vars())
        if (term_name(v) == name) return v;
    for (Term v : r.head().vars())
        if (term_name(v) == name) return v;
    REQUIRE(false);
    return {};
}

// Bitmask of the body atoms of `rule` whose predicate names are listed.
uint32_t mask_of(const Rule& rule, std::initializer_list<const char*> preds) {
    uint32_t mask = 0;
    for (const char* p : preds) {
        bool found = false;
        for (size_t i = 0; i < rule.body().size(); ++i) {
            if (predicate_name(rule.body().atoms()[i].pred) == p) {
                mask |= 1u << i;
                found = true;
            }
        }
        REQUIRE(found);
    }
    return mask;
}

// The three-step scripted derivation of the working set: the chain rule at
// (a,b,c), then the second chain rule, then the h rule.
Derivation chain_derivation(const KnowledgeBase& kb) {
    Substitution t0;
    t0.bind(rule_var(kb.rule(0), "X1"), make_constant("a"));
    t0.bind(rule_var(kb.rule(0), "Y1"), make_constant("b"));
    t0.bind(rule_var(kb.rule(0), "Z1"), make_constant("c"));
    return derive_script(kb, {{0, t0}, {1, {}}, {2, {}}});
}

Term produced_term(const Derivation& d, size_t step, const char* pred, size_t arg) {
    for (const Atom& a : d.steps[step].produced.atoms())
        if (predicate_name(a.pred) == pred) return a.args[arg];
    REQUIRE(false);
    return {};
}

size_t find_support(const Saturation& sat, int rule, const std::string& fusion_desc) {
    for (size_t i = 0; i < sat.supports().size(); ++i) {
        const auto& s = sat.supports()[i];
        if (s.rule != rule) continue;
        if (to_string(s.fusion) == fusion_desc) return i;
    }
    return SIZE_MAX;
}

}  // namespace

TEST_CASE("initial pattern of the second chain bag") {
    KnowledgeBase kb = running_kb().kb();
    BodyIndex bodies(kb);
    Derivation d = chain_derivation(kb);
    DerivationTree tree = derivation_tree(kb, d);
    // Bag 2 holds s(u,t'), r(v,t'), q3(t',u',v').
    Pattern p = initial_pattern(bodies, tree.bags[2].atoms);
    CHECK(p.size() == 8);  // seven elements plus the empty one

    Term u1 = produced_term(d, 0, "q2", 1);
    Term v1 = produced_term(d, 0, "q2", 2);
    Term t2 = produced_term(d, 1, "q3", 0);
    const Rule& r3 = kb.rule(2);
    const Rule& r4 = kb.rule(3);
    // Full body of the h rule maps onto the q3 atom.
    PatternElement q3_elem{2, bodies.full_mask(2), Substitution::of({
        {rule_var(r3, "T3"), t2},
        {rule_var(r3, "U3"), produced_term(d, 1, "q3", 1)},
        {rule_var(r3, "V3"), produced_term(d, 1, "q3", 2)},
    })};
    CHECK(p.contains(q3_elem));
    // The s/r pair of the fourth rule maps with the shared witness.
    PatternElement sr_elem{3, mask_of(r4, {"s", "r"}), Substitution::of({
        {rule_var(r4, "Y4"), u1},
        {rule_var(r4, "Z4"), v1},
        {rule_var(r4, "T4"), t2},
    })};
    CHECK(p.contains(sr_elem));
    // Nothing from the first chain rule maps.
    for (const auto& e : p.elements())
        CHECK(e.rule != 0);
}

TEST_CASE("initial pattern of an empty bag is trivial") {
    KnowledgeBase kb = running_kb().kb();
    BodyIndex bodies(kb);
    Pattern p = initial_pattern(bodies, AtomSet());
    CHECK(p.size() == 1);
    CHECK(p.elements()[0].is_empty());
}

TEST_CASE("initial abstract pattern of the identity-fusion chain bag") {
    KnowledgeBase kb = running_kb().kb();
    BodyIndex bodies(kb);
    // Identity fusion: the abstract bag's atoms are the head of the rule.
    const Rule& r2 = kb.rule(1);
    Pattern p = initial_pattern(bodies, r2.head());
    CHECK(p.size() == 8);
    const Rule& r4 = kb.rule(3);
    PatternElement s_elem{3, mask_of(r4, {"s"}), Substitution::of({
        {rule_var(r4, "Y4"), rule_var(r2, "Y2")},
        {rule_var(r4, "T4"), rule_var(r2, "T2")},
    })};
    CHECK(p.contains(s_elem));
}

TEST_CASE("elementary joins") {
    KnowledgeBase kb = running_kb().kb();
    BodyIndex bodies(kb);
    Derivation d = chain_derivation(kb);
    DerivationTree tree = derivation_tree(kb, d);
    const Rule& r4 = kb.rule(3);
    Term t1 = produced_term(d, 0, "q2", 0);
    Term u1 = produced_term(d, 0, "q2", 1);
    Term v1 = produced_term(d, 0, "q2", 2);
    Term t2 = produced_term(d, 1, "q3", 0);
    auto in_b1 = [&](Term t) {
        return std::binary_search(tree.bags[1].terms.begin(), tree.bags[1].terms.end(), t,
                                  TermLess{});
    };
    PatternElement e1{3, mask_of(r4, {"q2"}), Substitution::of({
        {rule_var(r4, "X4"), t1}, {rule_var(r4, "Y4"), u1}, {rule_var(r4, "Z4"), v1}})};
    PatternElement e2{3, mask_of(r4, {"s", "r", "h"}), Substitution::of({
        {rule_var(r4, "Y4"), u1}, {rule_var(r4, "Z4"), v1}, {rule_var(r4, "T4"), t2}})};

    SUBCASE("the printed join of the chain bags") {
        auto j = elementary_join(bodies, e1, e2, in_b1);
        REQUIRE(j.has_value());
        CHECK(j->rule == 3);
        CHECK(j->mask == bodies.full_mask(3));
        // t2 lies outside the first bag, so T4 is dropped from the map.
        CHECK(j->map == e1.map);
    }
    SUBCASE("joining with the empty element is the identity") {
        auto j = elementary_join(bodies, e1, PatternElement{}, in_b1);
        REQUIRE(j.has_value());
        CHECK(*j == e1);
        auto j2 = elementary_join(bodies, PatternElement{}, e2, in_b1);
        REQUIRE(j2.has_value());
        CHECK(j2->mask == e2.mask);
        CHECK(j2->map.size() == 2);  // T4 restricted away
    }
    SUBCASE("conflicting shared variables yield no join") {
        PatternElement clash{3, mask_of(r4, {"s"}), Substitution::of({
            {rule_var(r4, "Y4"), v1}, {rule_var(r4, "T4"), t2}})};
        CHECK_FALSE(elementary_join(bodies, clash, e2, in_b1).has_value());
        // Shared variable unmapped on one side: also undefined.
        PatternElement partial{3, mask_of(r4, {"s"}), Substitution::of({
            {rule_var(r4, "T4"), t2}})};
        CHECK_FALSE(elementary_join(bodies, e2, partial, in_b1).has_value());
    }
}

TEST_CASE("join keeps the left pattern") {
    KnowledgeBase kb = running_kb().kb();
    BodyIndex bodies(kb);
    Derivation d = chain_derivation(kb);
    DerivationTree tree = derivation_tree(kb, d);
    Pattern p1 = initial_pattern(bodies, tree.bags[1].atoms);
    Pattern p2 = initial_pattern(bodies, tree.bags[2].atoms);
    auto in_b1 = [&](Term t) {
        return std::binary_search(tree.bags[1].terms.begin(), tree.bags[1].terms.end(), t,
                                  TermLess{});
    };
    Pattern joined = join(bodies, p1, p2, in_b1);
    CHECK(p1.subset_of(joined));
    CHECK(join(bodies, p1, Pattern(), in_b1) == p1);
    Pattern closed = join(bodies, joined, joined, in_b1);
    CHECK(joined.subset_of(closed));
}

TEST_CASE("propagation pushes the h element into the first chain bag") {
    KnowledgeBase kb = running_kb().kb();
    BodyIndex bodies(kb);
    Derivation d = chain_derivation(kb);
    PatternedTree pt = patterned_tree(kb, bodies, d);
    const Rule& r4 = kb.rule(3);
    Term t1 = produced_term(d, 0, "q2", 0);
    Term u1 = produced_term(d, 0, "q2", 1);
    Term v1 = produced_term(d, 0, "q2", 2);
    PatternElement bold{3, bodies.full_mask(3), Substitution::of({
        {rule_var(r4, "X4"), t1}, {rule_var(r4, "Y4"), u1}, {rule_var(r4, "Z4"), v1}})};
    CHECK(pt.patterns[1].contains(bold));
    // The root sees the restriction to its own terms.
    PatternElement at_root{3, bodies.full_mask(3), Substitution{}};
    CHECK(pt.patterns[0].contains(at_root));
}

TEST_CASE("propagation updates by increasing distance") {
    KnowledgeBase kb = running_kb().kb();
    BodyIndex bodies(kb);
    Derivation d = chain_derivation(kb);
    DerivationTree tree = derivation_tree(kb, d);
    std::vector<Pattern> patterns(tree.bags.size());
    patterns[0] = initial_pattern(bodies, tree.bags[0].atoms);
    for (size_t b = 1; b < tree.bags.size(); ++b) {
        auto in_terms = [&](Term t) {
            return std::binary_search(tree.bags[b].terms.begin(), tree.bags[b].terms.end(), t,
                                      TermLess{});
        };
        patterns[b] = join(bodies, initial_pattern(bodies, tree.bags[b].atoms),
                           patterns[tree.bags[b].parent], in_terms);
    }
    // A single propagation round from the last bag reaches the root.
    propagate(kb, bodies, tree, patterns, tree.bags.size() - 1);
    PatternElement at_root{3, bodies.full_mask(3), Substitution{}};
    CHECK(patterns[0].contains(at_root));
}

TEST_CASE("fusions of the frontier") {
    KnowledgeBase kb = running_kb().kb();
    const Rule& r2 = kb.rule(1);
    Term y2 = rule_var(r2, "Y2"), z2 = rule_var(r2, "Z2");
    Term fresh = fresh_variable();
    SUBCASE("collapse onto the least frontier variable") {
        Substitution pi = Substitution::of({{y2, fresh}, {z2, fresh}});
        Substitution fusion = fusion_of_frontier(kb, r2, pi);
        CHECK(fusion.apply(y2) == y2);
        CHECK(fusion.apply(z2) == y2);
    }
    SUBCASE("initial images are kept") {
        Term b = make_constant("b");
        Substitution pi = Substitution::of({{y2, b}, {z2, b}});
        Substitution fusion = fusion_of_frontier(kb, r2, pi);
        CHECK(fusion.apply(y2) == b);
        CHECK(fusion.apply(z2) == b);
    }
    SUBCASE("distinct fresh images give the identity") {
        Substitution pi = Substitution::of({{y2, fresh}, {z2, fresh_variable()}});
        Substitution fusion = fusion_of_frontier(kb, r2, pi);
        CHECK(fusion.apply(y2) == y2);
        CHECK(fusion.apply(z2) == z2);
    }
    SUBCASE("empty frontiers have empty fusions") {
        auto doc = parse_document("@rules p(X) -> q(Z).");
        KnowledgeBase kb2 = doc.kb();
        CHECK(fusion_of_frontier(kb2, kb2.rule(0), {}).empty());
    }
}

TEST_CASE("natural bijections between loop bags") {
    KnowledgeBase kb = loop_kb().kb();
    Derivation d = derive_breadth_first(kb, 4);
    DerivationTree tree = derivation_tree(kb, d);
    // Bags 3 and 4 come from the same rule with identity fusion.
    CHECK(structurally_equivalent(kb, tree.bags[3], tree.bags[4]));
    Substitution psi = natural_bijection(kb, tree.bags[3], tree.bags[4]);
    // The generated variable of bag 3 maps to the one of bag 4, and the
    // inherited frontier image z1 maps to z2.
    CHECK(psi.size() == 2);
    CHECK(psi.apply(tree.bags[3].atoms.atoms()[0].args[1]) ==
          tree.bags[4].atoms.atoms()[0].args[1]);
    // Identity on itself.
    Substitution self = natural_bijection(kb, tree.bags[3], tree.bags[3]);
    CHECK(self.size() == 2);
    for (const auto& [k, v] : self.pairs()) CHECK(k == v);
    // Bags 1 and 3 have different fusions? No - both identity, but bag 1 and
    // the root are not equivalent.
    CHECK_THROWS_AS(natural_bijection(kb, tree.bags[0], tree.bags[1]),
                    NotStructurallyEquivalent);
}

TEST_CASE("pattern inclusion and equivalence") {
    KnowledgeBase kb = loop_kb().kb();
    BodyIndex bodies(kb);
    Derivation d = derive_breadth_first(kb, 4);
    PatternedTree pt = patterned_tree(kb, bodies, d);
    // Reflexive.
    CHECK(pattern_leq(kb, pt.tree.bags[3], pt.patterns[3], pt.tree.bags[3], pt.patterns[3]));
    // The two leaves are structurally equivalent but not pattern-equivalent:
    // one hangs below b, the other below d.
    CHECK(structurally_equivalent(kb, pt.tree.bags[3], pt.tree.bags[4]));
    CHECK_FALSE(pattern_equiv(kb, pt.tree.bags[3], pt.patterns[3], pt.tree.bags[4],
                              pt.patterns[4]));
    // An initial pattern is below the propagated one.
    Pattern init3 = initial_pattern(bodies, pt.tree.bags[3].atoms);
    CHECK(pattern_leq(kb, pt.tree.bags[3], init3, pt.tree.bags[3], pt.patterns[3]));
}

TEST_CASE("alternating chains produce equivalent bags") {
    KnowledgeBase kb = alternating_kb().kb();
    BodyIndex bodies(kb);
    Derivation d = derive_breadth_first(kb, 6);
    PatternedTree pt = patterned_tree(kb, bodies, d);
    // Bags three and five descend by the same rule with the identity fusion
    // on the two branches; likewise four and six.
    REQUIRE(pt.tree.bags.size() == 7);
    CHECK(pattern_equiv(kb, pt.tree.bags[3], pt.patterns[3], pt.tree.bags[5], pt.patterns[5]));
    CHECK(pattern_equiv(kb, pt.tree.bags[4], pt.patterns[4], pt.tree.bags[6], pt.patterns[6]));
    CHECK_FALSE(pattern_leq(kb, pt.tree.bags[3], pt.patterns[3], pt.tree.bags[4],
                            pt.patterns[4]));
}

TEST_CASE("abstract upper and lower joins across a link") {
    KnowledgeBase kb = running_kb().kb();
    BodyIndex bodies(kb);
    const Rule& r2 = kb.rule(1);
    const Rule& r3 = kb.rule(2);
    const Rule& r4 = kb.rule(3);
    const Rule& r5 = kb.rule(4);
    // Parent: identity-fusion bag of the second chain rule. Child: the
    // h-rule bag linked through the shared witness.
    Pattern parent = initial_pattern(bodies, r2.head());
    Pattern child = initial_pattern(bodies, r3.head());
    CHECK(child.size() == 3);  // h(T4) and h(T5), plus the empty element
    Link link = make_link({{rule_var(r3, "T3"), rule_var(r2, "T2")}});

    SUBCASE("upper join pulls the h elements up") {
        Pattern up = abstract_upper_join(bodies, kb, parent, link, child);
        CHECK(parent.subset_of(up));
        // The eight new combinations listed for the evolved pattern.
        PatternElement sh{3, mask_of(r4, {"s", "h"}), Substitution::of({
            {rule_var(r4, "Y4"), rule_var(r2, "Y2")},
            {rule_var(r4, "T4"), rule_var(r2, "T2")}})};
        PatternElement srh{3, mask_of(r4, {"s", "r", "h"}), Substitution::of({
            {rule_var(r4, "Y4"), rule_var(r2, "Y2")},
            {rule_var(r4, "Z4"), rule_var(r2, "Z2")},
            {rule_var(r4, "T4"), rule_var(r2, "T2")}})};
        PatternElement h_only{3, mask_of(r4, {"h"}), Substitution::of({
            {rule_var(r4, "T4"), rule_var(r2, "T2")}})};
        PatternElement h5{4, mask_of(r5, {"h"}), Substitution::of({
            {rule_var(r5, "T5"), rule_var(r2, "T2")}})};
        CHECK(up.contains(sh));
        CHECK(up.contains(srh));
        CHECK(up.contains(h_only));
        CHECK(up.contains(h5));
        CHECK(up.size() == parent.size() + 8);
    }
    SUBCASE("lower join keeps the child and inherits the visible parts") {
        Pattern low = abstract_lower_join(bodies, kb, parent, link, child);
        CHECK(child.subset_of(low));
        // Parent elements travel down through the link inverse; only images
        // over the linked term or initial terms survive.
        PatternElement s_down{3, mask_of(r4, {"s"}), Substitution::of({
            {rule_var(r4, "T4"), rule_var(r3, "T3")}})};
        CHECK(low.contains(s_down));
        PatternElement sh_down{3, mask_of(r4, {"s", "h"}), Substitution::of({
            {rule_var(r4, "T4"), rule_var(r3, "T3")}})};
        CHECK(low.contains(sh_down));
    }
    SUBCASE("joining with a trivial pattern changes nothing") {
        Pattern up = abstract_upper_join(bodies, kb, parent, link, Pattern());
        CHECK(up == parent);
    }
}

TEST_CASE("saturation of the working set derives the expected rule shapes") {
    KnowledgeBase kb = running_kb().kb();
    Saturation sat = saturate(kb);

    // Creation out of the root with an empty link into the (b,c) bag.
    size_t bc = find_support(sat, 0, "{Y1->b, Z1->c}");
    REQUIRE(bc != SIZE_MAX);
    bool root_to_bc = false;
    for (const auto& r : sat.rules()) {
        if (!r.creation) continue;
        if (sat.patterns()[r.lhs].support == 0 && sat.patterns()[r.rhs].support == bc &&
            r.link.empty())
            root_to_bc = true;
    }
    CHECK(root_to_bc);

    // Chain creation (b,c) -> identity second-rule bag with the u/v link.
    size_t mid = find_support(sat, 1, "{Y2->Y2, Z2->Z2}");
    REQUIRE(mid != SIZE_MAX);
    bool bc_to_mid = false;
    for (const auto& r : sat.rules()) {
        if (!r.creation) continue;
        if (sat.patterns()[r.lhs].support == bc && sat.patterns()[r.rhs].support == mid &&
            to_string(r.link) == "[Y2->U1,Z2->V1]")
            bc_to_mid = true;
    }
    CHECK(bc_to_mid);

    // h-rule creation below the identity bag.
    size_t h_bag = find_support(sat, 2, "{T3->T3}");
    REQUIRE(h_bag != SIZE_MAX);
    bool mid_to_h = false;
    for (const auto& r : sat.rules()) {
        if (!r.creation) continue;
        if (sat.patterns()[r.lhs].support == mid && sat.patterns()[r.rhs].support == h_bag &&
            to_string(r.link) == "[T3->T2]")
            mid_to_h = true;
    }
    CHECK(mid_to_h);

    // An evolution on the identity bag gathering the h combination.
    const Rule& r4 = kb.rule(3);
    const Rule& r2 = kb.rule(1);
    PatternElement sh{3, mask_of(r4, {"s", "h"}), Substitution::of({
        {rule_var(r4, "Y4"), rule_var(r2, "Y2")},
        {rule_var(r4, "T4"), rule_var(r2, "T2")}})};
    bool evolved = false;
    for (const auto& r : sat.rules()) {
        if (r.creation) continue;
        if (sat.patterns()[r.lhs].support == mid &&
            sat.patterns()[r.rhs].pattern.contains(sh))
            evolved = true;
    }
    CHECK(evolved);

    // The recursive pair between the two alternating rules.
    size_t p_bag = find_support(sat, 5, "{XP->XP}");
    size_t q_bag = find_support(sat, 6, "{XQ->XQ}");
    REQUIRE(p_bag != SIZE_MAX);
    REQUIRE(q_bag != SIZE_MAX);
    bool p_to_q = false, q_to_p = false;
    for (const auto& r : sat.rules()) {
        if (!r.creation) continue;
        if (sat.patterns()[r.lhs].support == p_bag && sat.patterns()[r.rhs].support == q_bag &&
            to_string(r.link) == "[XQ->YP]")
            p_to_q = true;
        if (sat.patterns()[r.lhs].support == q_bag && sat.patterns()[r.rhs].support == p_bag &&
            to_string(r.link) == "[XP->YQ]")
            q_to_p = true;
    }
    CHECK(p_to_q);
    CHECK(q_to_p);
}

TEST_CASE("saturation of an empty rule set") {
    auto doc = parse_document("@facts p(a). q2(_n1).");
    Saturation sat = saturate(doc.kb());
    CHECK(sat.supports().size() == 1);
    CHECK(sat.patterns().size() == 1);
    CHECK(sat.rules().empty());
    CHECK(sat.most_informative().empty());
}

TEST_CASE("most informative rules dominate their group") {
    KnowledgeBase kb = running_kb().kb();
    Saturation sat = saturate(kb);
    size_t bc = find_support(sat, 0, "{Y1->b, Z1->c}");
    size_t mid = find_support(sat, 1, "{Y2->Y2, Z2->Z2}");
    REQUIRE(bc != SIZE_MAX);
    REQUIRE(mid != SIZE_MAX);
    const Rule& r4 = kb.rule(3);
    const Rule& r2 = kb.rule(1);
    PatternElement sh{3, mask_of(r4, {"s", "h"}), Substitution::of({
        {rule_var(r4, "Y4"), rule_var(r2, "Y2")},
        {rule_var(r4, "T4"), rule_var(r2, "T2")}})};
    // The kept creation from the largest bc-pattern into the mid bag carries
    // the evolved right-hand side.
    size_t best = SIZE_MAX;
    for (size_t rid : sat.most_informative()) {
        const auto& r = sat.rules()[rid];
        if (!r.creation) continue;
        if (sat.patterns()[r.lhs].support != bc || sat.patterns()[r.rhs].support != mid)
            continue;
        if (best == SIZE_MAX || sat.pattern_subset(sat.rules()[best].lhs, r.lhs)) best = rid;
    }
    REQUIRE(best != SIZE_MAX);
    CHECK(sat.patterns()[sat.rules()[best].rhs].pattern.contains(sh));
    // Every saturated rule is dominated by a most informative one over the
    // same group.
    for (const auto& r : sat.rules()) {
        bool dominated = false;
        for (size_t mid_rid : sat.most_informative()) {
            const auto& m = sat.rules()[mid_rid];
            if (m.creation != r.creation || m.lhs != r.lhs) continue;
            if (r.creation &&
                (!(m.link == r.link) ||
                 sat.patterns()[m.rhs].support != sat.patterns()[r.rhs].support))
                continue;
            if (sat.pattern_subset(r.rhs, m.rhs)) dominated = true;
        }
        CHECK(dominated);
    }
}

TEST_CASE("saturation is monotone over included left-hand sides") {
    // Group maxima are monotone in the left-hand side: a kept rule from a
    // smaller pattern never outgrows the kept rule of the same shape from a
    // bigger one.
    for (const auto& doc : {alternating_kb(), running_kb()}) {
        Saturation sat = saturate(doc.kb());
        for (size_t i : sat.most_informative()) {
            for (size_t j : sat.most_informative()) {
                const auto& r1 = sat.rules()[i];
                const auto& r2 = sat.rules()[j];
                if (r1.creation != r2.creation) continue;
                if (!sat.pattern_subset(r1.lhs, r2.lhs)) continue;
                if (r1.creation) {
                    if (!(r1.link == r2.link) ||
                        sat.patterns()[r1.rhs].support != sat.patterns()[r2.rhs].support)
                        continue;
                }
                CHECK(sat.pattern_subset(r1.rhs, r2.rhs));
            }
        }
    }
}

TEST_CASE("saturation stays within the pattern-count bound") {
    for (const auto& doc : {running_kb(), alternating_kb()}) {
        Saturation sat = saturate(doc.kb());
        double log2_count = std::log2(static_cast<double>(sat.patterns().size()));
        CHECK(log2_count <= sat.pattern_count_log2_bound());
    }
}

TEST_CASE("patterned trees are sound and complete on small derivations") {
    auto check_tree = [](const KnowledgeBase& kb, const Derivation& d) {
        BodyIndex bodies(kb);
        PatternedTree pt = patterned_tree(kb, bodies, d);
        const AtomSet& final_fact = d.result;
        for (size_t b = 0; b < pt.tree.bags.size(); ++b) {
            // Soundness: every element extends to a homomorphism.
            for (const auto& e : pt.patterns[b].elements()) {
                if (e.is_empty()) continue;
                AtomSet subset = bodies.subset(static_cast<size_t>(e.rule), e.mask);
                CHECK(maps_into(subset, final_fact, e.map));
            }
            // Completeness: every restricted homomorphism is present.
            const auto& terms = pt.tree.bags[b].terms;
            for (size_t rule = 0; rule < kb.rules().size(); ++rule) {
                for (uint32_t mask = 1; mask <= bodies.full_mask(rule); ++mask) {
                    AtomSet subset = bodies.subset(rule, mask);
                    for (const auto& hom : all_homomorphisms(subset, final_fact)) {
                        Substitution restricted = hom.restricted_to_values([&](Term t) {
                            return std::binary_search(terms.begin(), terms.end(), t, TermLess{});
                        });
                        PatternElement expect{static_cast<int32_t>(rule), mask, restricted};
                        CHECK(pt.patterns[b].contains(expect));
                    }
                }
            }
        }
    };
    check_tree(running_kb().kb(), chain_derivation(running_kb().kb()));
    check_tree(alternating_kb().kb(), derive_breadth_first(alternating_kb().kb(), 5));
    check_tree(loop_kb().kb(), derive_breadth_first(loop_kb().kb(), 5));
}

TEST_CASE("body subsets are capped") {
    std::string body;
    for (int i = 0; i < 17; ++i) {
        if (i) body += ", ";
        body += "p" + std::to_string(i) + "(X)";
    }
    auto doc = parse_document("@rules " + body + " -> q(X).");
    KnowledgeBase kb = doc.kb();
    CHECK_THROWS_AS(BodyIndex{kb}, GbtsError);
}
