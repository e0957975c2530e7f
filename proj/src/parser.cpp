#include "gbts/parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace gbts {

namespace {

struct Lexer {
    std::string_view text;
    size_t pos = 0;
    size_t line = 1;
    size_t col = 1;

    void advance() {
        if (pos < text.size() && text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_ws() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '%') {
                while (pos < text.size() && text[pos] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& msg) {
        skip_ws();
        throw ParseError(msg + " at line " + std::to_string(line) + ", column " +
                             std::to_string(col),
                         line, col);
    }

    bool try_consume(char c) {
        if (peek() != c) return false;
        advance();
        return true;
    }

    void expect(char c) {
        if (!try_consume(c)) fail(std::string("expected '") + c + "'");
    }

    bool try_keyword(std::string_view kw) {
        skip_ws();
        if (text.substr(pos, kw.size()) != kw) return false;
        if (pos + kw.size() < text.size() && ident_char(text[pos + kw.size()])) return false;
        for (size_t i = 0; i < kw.size(); ++i) advance();
        return true;
    }

    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    // [a-z_A-Z][A-Za-z0-9_]*
    std::string identifier() {
        skip_ws();
        if (pos >= text.size() || !(std::isalpha(static_cast<unsigned char>(text[pos])) ||
                                    text[pos] == '_'))
            fail("expected an identifier");
        size_t start = pos;
        while (pos < text.size() && ident_char(text[pos])) advance();
        return std::string(text.substr(start, pos - start));
    }
};

enum class Section { None, Facts, Rules, Queries };

struct Parser {
    Lexer lex;
    VarScope fact_nulls;  // nulls are shared across the fact section
    std::map<std::string, uint32_t> arities;

    explicit Parser(std::string_view text) : lex{text} {}

    Predicate predicate(const std::string& name, uint32_t arity) {
        auto [it, inserted] = arities.emplace(name, arity);
        if (!inserted && it->second != arity)
            lex.fail("predicate '" + name + "' used with arity " + std::to_string(arity) +
                     " but previously with arity " + std::to_string(it->second));
        return make_predicate(name, arity);
    }

    Term term(Section section, VarScope& scope) {
        std::string name = lex.identifier();
        char first = name[0];
        if (first == '_') {
            if (name.size() == 1) lex.fail("'_' alone is not a valid null name");
            for (char c : name.substr(1))
                if (!(std::islower(static_cast<unsigned char>(c)) ||
                      std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
                    lex.fail("null names are '_' followed by lowercase letters and digits");
            if (section != Section::Facts)
                lex.fail("null '" + name + "' is only allowed in the @facts section");
            return fact_nulls.var(name);
        }
        if (std::isupper(static_cast<unsigned char>(first))) {
            if (section == Section::Facts)
                lex.fail("variable '" + name +
                         "' is not allowed in @facts (use a '_' null for an existential term)");
            return scope.var(name);
        }
        return make_constant(name);
    }

    Atom atom(Section section, VarScope& scope) {
        std::string name = lex.identifier();
        if (std::isupper(static_cast<unsigned char>(name[0])) || name[0] == '_')
            lex.fail("predicate names start with a lowercase letter");
        std::vector<Term> args;
        if (lex.try_consume('(')) {
            if (lex.peek() == ')') lex.fail("empty argument lists are not allowed");
            args.push_back(term(section, scope));
            while (lex.try_consume(',')) args.push_back(term(section, scope));
            lex.expect(')');
        }
        uint32_t arity = static_cast<uint32_t>(args.size());
        return Atom(predicate(name, arity), std::move(args));
    }

    std::vector<Atom> atom_list(Section section, VarScope& scope) {
        std::vector<Atom> out;
        out.push_back(atom(section, scope));
        while (lex.try_consume(',')) out.push_back(atom(section, scope));
        return out;
    }

    KBDocument run() {
        KBDocument doc;
        std::vector<Atom> facts;
        Section section = Section::None;
        while (!lex.eof()) {
            if (lex.try_keyword("@facts")) {
                section = Section::Facts;
                continue;
            }
            if (lex.try_keyword("@rules")) {
                section = Section::Rules;
                continue;
            }
            if (lex.try_keyword("@queries")) {
                section = Section::Queries;
                continue;
            }
            switch (section) {
                case Section::None:
                    lex.fail("expected a section marker (@facts, @rules, or @queries)");
                case Section::Facts: {
                    VarScope unused;
                    auto atoms = atom_list(Section::Facts, unused);
                    lex.expect('.');
                    facts.insert(facts.end(), atoms.begin(), atoms.end());
                    break;
                }
                case Section::Rules: {
                    size_t line = lex.line;
                    VarScope scope;  // rule variables are scoped per rule
                    auto body = atom_list(Section::Rules, scope);
                    if (!(lex.try_consume('-') && lex.try_consume('>')))
                        lex.fail("expected '->' between rule body and head");
                    auto head = atom_list(Section::Rules, scope);
                    lex.expect('.');
                    std::string name = "R" + std::to_string(doc.rules.size());
                    doc.rules.emplace_back(name, AtomSet(std::move(body)), AtomSet(std::move(head)));
                    doc.rule_lines.push_back(line);
                    break;
                }
                case Section::Queries: {
                    size_t line = lex.line;
                    lex.expect('?');
                    VarScope scope;  // query variables are scoped per query
                    auto atoms = atom_list(Section::Queries, scope);
                    lex.expect('.');
                    doc.queries.emplace_back(std::move(atoms));
                    doc.query_lines.push_back(line);
                    break;
                }
            }
        }
        doc.facts = AtomSet(std::move(facts));
        return doc;
    }
};

}  // namespace

KBDocument parse_document(std::string_view text) {
    Parser p(text);
    return p.run();
}

KBDocument parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GbtsError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    return parse_document(text);
}

AtomSet parse_atoms(std::string_view text, VarScope& scope) {
    Parser p(text);
    if (p.lex.eof()) return AtomSet();
    std::vector<Atom> atoms;
    atoms.push_back(p.atom(Section::Rules, scope));
    while (p.lex.try_consume(',')) atoms.push_back(p.atom(Section::Rules, scope));
    if (!p.lex.eof()) p.lex.fail("trailing input after atom list");
    return AtomSet(std::move(atoms));
}

AtomSet parse_atoms(std::string_view text) {
    VarScope scope;
    return parse_atoms(text, scope);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void print_atoms(std::string& out, const AtomSet& atoms) {
    for (size_t i = 0; i < atoms.atoms().size(); ++i) {
        if (i) out += ", ";
        out += to_string(atoms.atoms()[i]);
    }
}

}  // namespace

std::string print_rule(const Rule& r) {
    std::string out;
    print_atoms(out, r.body());
    out += " -> ";
    print_atoms(out, r.head());
    out += ".";
    return out;
}

std::string print_document(const KBDocument& doc) {
    std::string out;
    if (!doc.facts.empty()) {
        out += "@facts\n";
        for (const Atom& a : doc.facts.atoms()) {
            out += to_string(a);
            out += ".\n";
        }
    }
    if (!doc.rules.empty()) {
        out += "@rules\n";
        for (const Rule& r : doc.rules) {
            out += print_rule(r);
            out += "\n";
        }
    }
    if (!doc.queries.empty()) {
        out += "@queries\n";
        for (const AtomSet& q : doc.queries) {
            out += "? ";
            print_atoms(out, q);
            out += ".\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structural equality up to variable identity

namespace {

bool atomsets_equal_upto_names(const AtomSet& a, const AtomSet& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        const Atom& x = a.atoms()[i];
        const Atom& y = b.atoms()[i];
        if (x.pred != y.pred) return false;
        for (size_t j = 0; j < x.args.size(); ++j) {
            Term s = x.args[j];
            Term t = y.args[j];
            if (term_kind(s) != term_kind(t)) return false;
            if (is_constant(s)) {
                if (s != t) return false;
            } else if (term_name(s) != term_name(t)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

bool documents_equal(const KBDocument& a, const KBDocument& b) {
    if (!atomsets_equal_upto_names(a.facts, b.facts)) return false;
    if (a.rules.size() != b.rules.size() || a.queries.size() != b.queries.size()) return false;
    for (size_t i = 0; i < a.rules.size(); ++i) {
        if (!atomsets_equal_upto_names(a.rules[i].body(), b.rules[i].body())) return false;
        if (!atomsets_equal_upto_names(a.rules[i].head(), b.rules[i].head())) return false;
    }
    for (size_t i = 0; i < a.queries.size(); ++i)
        if (!atomsets_equal_upto_names(a.queries[i], b.queries[i])) return false;
    return true;
}

}  // namespace gbts
