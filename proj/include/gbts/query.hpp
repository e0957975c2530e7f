#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gbts/blocked.hpp"
#include "gbts/classify.hpp"
#include "gbts/patterns.hpp"

namespace gbts {

// ---------------------------------------------------------------------------
// Atom-term partition trees

struct Apt {
    struct Node {
        std::vector<size_t> atoms;  // indices into the query atom list, sorted
        std::vector<Term> terms;    // query terms owned by this node, sorted
        size_t parent = SIZE_MAX;
    };
    std::vector<Node> nodes;
    size_t root = 0;
};

// Partition/tree well-formedness; nullopt when valid.
std::optional<std::string> check_apt(const AtomSet& query, const Apt& apt);

// All atom-term partitions of the query crossed with all rooted trees over
// the partition blocks, in a fixed enumeration order. The callback returns
// false to stop; the return value counts the APTs produced.
uint64_t enumerate_apts(const AtomSet& query, const std::function<bool(const Apt&)>& fn);

// ---------------------------------------------------------------------------
// APT-mappings and validation

struct AptMapping {
    std::vector<size_t> bag;             // node -> blocked bag
    std::vector<Substitution> term_map;  // node terms -> concrete bag terms
};

struct WitnessCopy {
    size_t parent;         // generated bag
    size_t parent_image;   // blocked bag the parent instantiates
    size_t blocked_child;  // blocked bag copied
    size_t result;         // generated bag created or reused
};

struct QueryWitness {
    std::vector<WitnessCopy> copies;
    std::vector<size_t> xi;    // APT node -> generated bag
    Substitution assignment;   // query term -> generated term
    std::optional<Apt> apt;
    std::optional<AptMapping> gamma;
};

// Longest copy sequence a single validation step may explore.
size_t joins_path_bound(const Saturation& sat);

// Backtrack-free validation: walks the APT from the root, extending a shared
// generated tree by bag-copy sequences of bounded length.
class AptValidator {
  public:
    AptValidator(const BlockedTree& bt, const AtomSet& query, const Apt& apt,
                 const AptMapping& gamma);

    bool run();

    // Explores one node whose parent is already explored; returns the term
    // assignment of the node on success.
    std::optional<Substitution> joins(size_t node);

    const GeneratedTree& generated() const { return gen_; }
    const std::vector<WitnessCopy>& copies() const { return copies_; }
    const std::vector<size_t>& xi() const { return xi_; }
    const Substitution& assignment() const { return assignment_; }
    size_t longest_path() const { return longest_path_; }

  private:
    const BlockedTree& bt_;
    const AtomSet& query_;
    const Apt& apt_;
    const AptMapping& gamma_;
    GeneratedTree gen_;
    std::vector<size_t> xi_;
    Substitution assignment_;
    std::vector<WitnessCopy> copies_;
    size_t bound_;
    size_t longest_path_ = 0;

    std::optional<std::string> check_mapping() const;
};

// True when the mapping has a proof; fills the witness when given. Rejects
// mappings violating the well-formedness conditions.
bool validate_apt(const BlockedTree& bt, const AtomSet& query, const Apt& apt,
                  const AptMapping& gamma, QueryWitness* witness = nullptr);

// ---------------------------------------------------------------------------
// Entailment

enum class QueryMode { QueryAsRule, Apt };

struct EntailOptions {
    QueryMode mode = QueryMode::QueryAsRule;
    SaturateOptions saturate;
    BlockedTreeOptions tree;
    ChaseLimits chase;
    size_t fallback_steps = 64;  // breadth steps for non-wfg inputs
};

struct EntailResult {
    bool entailed = false;
    // One witness per connected query component answered via tree search.
    std::vector<QueryWitness> witnesses;
};

// Decides Boolean entailment. Rule sets classified wfg run the saturation
// engine in the chosen mode; other inputs fall back to a breadth-first chase
// that verifies the greedy witness of every step and aborts with NotGreedy
// when one is missing.
EntailResult entails(const KnowledgeBase& kb, const AtomSet& query,
                     const EntailOptions& opts = {});

// The guided component search used by apt mode; exposed for tests.
std::optional<QueryWitness> find_tree_homomorphism(const BlockedTree& bt, const AtomSet& component);

}  // namespace gbts
