#pragma once

#include <string>

#include "gbts/blocked.hpp"
#include "gbts/query.hpp"

namespace gbts {

// JSON exports with stable key order, and a dot rendering for inspection.
std::string rule_base_json(const Saturation& sat);
std::string rule_base_text(const Saturation& sat);
std::string blocked_tree_json(const BlockedTree& tree);
std::string blocked_tree_dot(const BlockedTree& tree);
std::string witness_json(const QueryWitness& witness, const AtomSet& query);

}  // namespace gbts
