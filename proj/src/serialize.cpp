#include "gbts/serialize.hpp"

#include <sstream>

#include "json.hpp"

namespace gbts {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json substitution_json(const Substitution& s) {
    ordered_json out = ordered_json::object();
    for (const auto& [k, v] : s.pairs()) out[std::string(term_name(k))] = term_name(v);
    return out;
}

ordered_json atoms_json(const AtomSet& s) {
    ordered_json out = ordered_json::array();
    for (const Atom& a : s.atoms()) out.push_back(to_string(a));
    return out;
}

ordered_json terms_json(const std::vector<Term>& ts) {
    ordered_json out = ordered_json::array();
    for (Term t : ts) out.push_back(term_name(t));
    return out;
}

ordered_json link_json(const Link& l) {
    ordered_json out = ordered_json::object();
    for (const auto& [k, v] : l.map) out[std::string(term_name(k))] = term_name(v);
    return out;
}

}  // namespace

std::string rule_base_json(const Saturation& sat) {
    ordered_json doc;
    doc["supports"] = ordered_json::array();
    for (size_t i = 0; i < sat.supports().size(); ++i) {
        const auto& s = sat.supports()[i];
        ordered_json js;
        js["id"] = i;
        js["rule"] = s.rule < 0 ? "<fact>" : sat.kb().rule(s.rule).name();
        js["fusion"] = substitution_json(s.fusion);
        js["atoms"] = atoms_json(s.atoms);
        js["frontier_terms"] = terms_json(s.frontier_terms);
        js["generated"] = terms_json(s.generated);
        doc["supports"].push_back(std::move(js));
    }
    doc["patterns"] = ordered_json::array();
    for (size_t i = 0; i < sat.patterns().size(); ++i) {
        const auto& p = sat.patterns()[i];
        ordered_json js;
        js["id"] = i;
        js["support"] = p.support;
        ordered_json elems = ordered_json::array();
        for (const auto& e : p.pattern.elements()) {
            if (e.is_empty()) continue;
            ordered_json je;
            je["rule"] = sat.kb().rule(e.rule).name();
            je["atoms"] = atoms_json(sat.bodies().subset(static_cast<size_t>(e.rule), e.mask));
            je["map"] = substitution_json(e.map);
            elems.push_back(std::move(je));
        }
        js["elements"] = std::move(elems);
        doc["patterns"].push_back(std::move(js));
    }
    doc["rules"] = ordered_json::array();
    for (size_t i = 0; i < sat.rules().size(); ++i) {
        const auto& r = sat.rules()[i];
        ordered_json js;
        js["id"] = i;
        js["kind"] = r.creation ? "creation" : "evolution";
        js["lhs"] = r.lhs;
        js["rhs"] = r.rhs;
        if (r.creation) js["link"] = link_json(r.link);
        js["rank"] = r.rank;
        doc["rules"].push_back(std::move(js));
    }
    doc["most_informative"] = sat.most_informative();
    return doc.dump(2) + "\n";
}

std::string rule_base_text(const Saturation& sat) {
    std::ostringstream out;
    out << "supports: " << sat.supports().size() << "\n";
    for (size_t i = 0; i < sat.supports().size(); ++i)
        out << "  " << sat.describe_support(i) << "\n";
    out << "patterns: " << sat.patterns().size() << "\n";
    for (size_t i = 0; i < sat.patterns().size(); ++i)
        out << "  " << sat.describe_pattern(i) << "\n";
    out << "rules: " << sat.rules().size() << "\n";
    for (size_t i = 0; i < sat.rules().size(); ++i)
        out << "  " << sat.describe_rule(i) << "\n";
    out << "most informative:\n";
    for (size_t rid : sat.most_informative()) out << "  " << sat.describe_rule(rid) << "\n";
    return out.str();
}

std::string blocked_tree_json(const BlockedTree& tree) {
    ordered_json doc;
    doc["bags"] = ordered_json::array();
    for (size_t i = 0; i < tree.bags().size(); ++i) {
        const auto& b = tree.bag(i);
        ordered_json js;
        js["id"] = i;
        js["pattern"] = b.pattern;
        js["support"] = b.support;
        if (b.parent != SIZE_MAX) js["parent"] = b.parent;
        js["link"] = link_json(b.link);
        js["terms"] = terms_json(b.terms);
        js["atoms"] = atoms_json(b.atoms);
        js["blocked"] = b.blocked;
        doc["bags"].push_back(std::move(js));
    }
    return doc.dump(2) + "\n";
}

std::string blocked_tree_dot(const BlockedTree& tree) {
    std::ostringstream out;
    out << "digraph blocked_tree {\n";
    for (size_t i = 0; i < tree.bags().size(); ++i) {
        const auto& b = tree.bag(i);
        out << "  b" << i << " [label=\"B" << i << (b.blocked ? " (blocked)" : "") << "\\n";
        for (const Atom& a : b.atoms.atoms()) out << to_string(a) << "\\n";
        out << "\"];\n";
    }
    for (size_t i = 0; i < tree.bags().size(); ++i)
        if (tree.bag(i).parent != SIZE_MAX)
            out << "  b" << tree.bag(i).parent << " -> b" << i << ";\n";
    out << "}\n";
    return out.str();
}

std::string witness_json(const QueryWitness& witness, const AtomSet& query) {
    ordered_json doc;
    doc["copies"] = ordered_json::array();
    for (const auto& c : witness.copies) {
        ordered_json js;
        js["parent"] = c.parent;
        js["parent_image"] = c.parent_image;
        js["blocked_child"] = c.blocked_child;
        js["result"] = c.result;
        doc["copies"].push_back(std::move(js));
    }
    doc["assignment"] = substitution_json(witness.assignment);
    if (witness.apt) {
        ordered_json nodes = ordered_json::array();
        for (size_t i = 0; i < witness.apt->nodes.size(); ++i) {
            const auto& n = witness.apt->nodes[i];
            ordered_json js;
            js["id"] = i;
            if (n.parent != SIZE_MAX) js["parent"] = n.parent;
            ordered_json atoms = ordered_json::array();
            for (size_t a : n.atoms) atoms.push_back(to_string(query.atoms()[a]));
            js["atoms"] = std::move(atoms);
            js["terms"] = terms_json(n.terms);
            if (witness.gamma) js["bag"] = witness.gamma->bag[i];
            nodes.push_back(std::move(js));
        }
        doc["apt"] = std::move(nodes);
    }
    return doc.dump(2) + "\n";
}

}  // namespace gbts
