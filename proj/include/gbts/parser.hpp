#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gbts/chase.hpp"
#include "gbts/core.hpp"

namespace gbts {

struct ParseError : GbtsError {
    size_t line;
    size_t col;
    ParseError(std::string msg, size_t line_, size_t col_)
        : GbtsError(std::move(msg)), line(line_), col(col_) {}
};

// A parsed knowledge-base document.
//
// Grammar (line comments start with '%'):
//   document  := section*
//   section   := "@facts" fact* | "@rules" rule* | "@queries" query*
//   fact      := atomlist "."
//   rule      := atomlist "->" atomlist "."
//   query     := "?" atomlist "."
//   atomlist  := atom ("," atom)*
//   atom      := predicate "(" term ("," term)* ")" | predicate
//   predicate := lowercase identifier          [a-z][A-Za-z0-9_]*
//   constant  := lowercase identifier
//   variable  := uppercase identifier          [A-Z][A-Za-z0-9_]*
//   null      := "_" [a-z0-9_]+                (existential term, facts only)
//
// Variables are scoped per rule and per query; nulls are scoped to the fact
// section. Uppercase variables are rejected inside @facts. Predicates must
// have a consistent arity across the whole document.
struct KBDocument {
    AtomSet facts;
    std::vector<Rule> rules;
    std::vector<AtomSet> queries;
    std::vector<size_t> rule_lines;   // source line of each rule
    std::vector<size_t> query_lines;  // source line of each query

    KnowledgeBase kb() const { return KnowledgeBase(facts, rules); }
};

KBDocument parse_document(std::string_view text);
KBDocument parse_file(const std::string& path);

std::string print_document(const KBDocument& doc);
std::string print_rule(const Rule& r);

// Structural equality up to term display names (parse/print round trips).
bool documents_equal(const KBDocument& a, const KBDocument& b);

// Test/fixture helpers: parse a comma-separated atom list. Uppercase names
// become variables scoped to this call (or to `scope` when provided).
AtomSet parse_atoms(std::string_view text);
AtomSet parse_atoms(std::string_view text, VarScope& scope);

}  // namespace gbts
