#include "gbts/classify.hpp"

#include <algorithm>

namespace gbts {

int position_compare(const PredicatePosition& a, const PredicatePosition& b) {
    int c = predicate_compare(a.pred, b.pred);
    if (c != 0) return c;
    if (a.index != b.index) return a.index < b.index ? -1 : 1;
    return 0;
}

namespace {

bool position_less(const PredicatePosition& a, const PredicatePosition& b) {
    return position_compare(a, b) < 0;
}

bool contains_position(const std::vector<PredicatePosition>& sorted, Predicate p, uint32_t i) {
    return std::binary_search(sorted.begin(), sorted.end(), PredicatePosition{p, i},
                              position_less);
}

// Body variables of `r` occurring in affected positions only.
std::vector<Term> affected_body_vars(const Rule& r,
                                     const std::vector<PredicatePosition>& affected) {
    std::vector<Term> out;
    for (Term v : r.body().vars()) {
        bool only_affected = true;
        for (const Atom& a : r.body().atoms()) {
            for (uint32_t i = 0; i < a.args.size(); ++i) {
                if (a.args[i] == v && !contains_position(affected, a.pred, i + 1)) {
                    only_affected = false;
                    break;
                }
            }
            if (!only_affected) break;
        }
        if (only_affected) out.push_back(v);
    }
    return out;
}

}  // namespace

std::vector<PredicatePosition> affected_positions(const std::vector<Rule>& rules) {
    std::vector<PredicatePosition> affected;
    // Existential head positions.
    for (const Rule& r : rules) {
        for (const Atom& a : r.head().atoms()) {
            for (uint32_t i = 0; i < a.args.size(); ++i) {
                Term t = a.args[i];
                if (is_variable(t) && term_set_contains(r.existentials(), t))
                    affected.push_back({a.pred, i + 1});
            }
        }
    }
    std::sort(affected.begin(), affected.end(), position_less);
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    // Propagate through rule bodies until stable.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Rule& r : rules) {
            auto vars = affected_body_vars(r, affected);
            for (Term v : vars) {
                for (const Atom& a : r.head().atoms()) {
                    for (uint32_t i = 0; i < a.args.size(); ++i) {
                        if (a.args[i] != v) continue;
                        if (!contains_position(affected, a.pred, i + 1)) {
                            affected.push_back({a.pred, i + 1});
                            std::sort(affected.begin(), affected.end(), position_less);
                            changed = true;
                        }
                    }
                }
            }
        }
    }
    return affected;
}

bool is_guard(const Atom& a, const std::vector<Term>& vars) {
    for (Term v : vars) {
        if (std::find(a.args.begin(), a.args.end(), v) == a.args.end()) return false;
    }
    return true;
}

FragmentReport classify(const std::vector<Rule>& rules) {
    FragmentReport rep;
    rep.affected = affected_positions(rules);
    for (const Rule& r : rules) {
        RuleFlags f;
        f.datalog = r.is_datalog();
        f.atomic_body = r.body().size() == 1;
        f.empty_frontier = r.frontier().empty();

        auto affected_vars = affected_body_vars(r, rep.affected);
        rep.affected_vars.push_back(affected_vars);

        std::vector<Term> affected_frontier;
        for (Term v : r.frontier())
            if (term_set_contains(affected_vars, v)) affected_frontier.push_back(v);

        auto has_guard_for = [&](const std::vector<Term>& vars) {
            if (vars.empty()) return true;
            for (const Atom& a : r.body().atoms())
                if (is_guard(a, vars)) return true;
            return false;
        };

        f.guarded = has_guard_for(r.body().vars());
        f.frontier_one = r.frontier().size() == 1;
        f.frontier_guarded = has_guard_for(r.frontier());
        f.guarded_frontier_one = f.guarded && f.frontier_one;
        f.weakly_guarded = has_guard_for(affected_vars);
        f.weakly_frontier_one = affected_frontier.size() <= 1;
        f.weakly_frontier_guarded = has_guard_for(affected_frontier);
        f.weakly_guarded_frontier_one = f.weakly_guarded && f.weakly_frontier_one;

        rep.per_rule.push_back(f);
        rep.datalog &= f.datalog;
        rep.gfr1 &= f.guarded_frontier_one;
        rep.g &= f.guarded;
        rep.fr1 &= f.frontier_one;
        rep.fg &= f.frontier_guarded;
        rep.wgfr1 &= f.weakly_guarded_frontier_one;
        rep.wg &= f.weakly_guarded;
        rep.wfr1 &= f.weakly_frontier_one;
        rep.wfg &= f.weakly_frontier_guarded;
    }
    return rep;
}

std::string FragmentReport::summary() const {
    std::string out;
    auto add = [&](bool v, const char* name) {
        if (v) {
            if (!out.empty()) out += ' ';
            out += name;
        }
    };
    add(datalog, "datalog");
    add(gfr1, "gfr1");
    add(g, "g");
    add(fr1, "fr1");
    add(fg, "fg");
    add(wgfr1, "wgfr1");
    add(wg, "wg");
    add(wfr1, "wfr1");
    add(wfg, "wfg");
    if (out.empty()) out = "none";
    return out;
}

std::string FragmentReport::key_value(const std::vector<Rule>& rules) const {
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) {
        out += k;
        out += ": ";
        out += v;
        out += '\n';
    };
    auto b = [](bool v) { return v ? "true" : "false"; };
    kv("set.datalog", b(datalog));
    kv("set.gfr1", b(gfr1));
    kv("set.g", b(g));
    kv("set.fr1", b(fr1));
    kv("set.fg", b(fg));
    kv("set.wgfr1", b(wgfr1));
    kv("set.wg", b(wg));
    kv("set.wfr1", b(wfr1));
    kv("set.wfg", b(wfg));
    std::string aff;
    for (size_t i = 0; i < affected.size(); ++i) {
        if (i) aff += ' ';
        aff += predicate_name(affected[i].pred);
        aff += ':';
        aff += std::to_string(affected[i].index);
    }
    kv("affected", aff);
    for (size_t i = 0; i < rules.size(); ++i) {
        const RuleFlags& f = per_rule[i];
        std::string base = "rule." + rules[i].name();
        kv(base + ".datalog", b(f.datalog));
        kv(base + ".g", b(f.guarded));
        kv(base + ".fr1", b(f.frontier_one));
        kv(base + ".fg", b(f.frontier_guarded));
        kv(base + ".wg", b(f.weakly_guarded));
        kv(base + ".wfr1", b(f.weakly_frontier_one));
        kv(base + ".wfg", b(f.weakly_frontier_guarded));
        kv(base + ".empty_frontier", b(f.empty_frontier));
        std::string av;
        for (size_t j = 0; j < affected_vars[i].size(); ++j) {
            if (j) av += ' ';
            av += term_name(affected_vars[i][j]);
        }
        kv(base + ".affected_vars", av);
    }
    return out;
}

}  // namespace gbts
