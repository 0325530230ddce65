#pragma once

#include <memory>

#include "cellmorph/horn.hpp"

namespace cellmorph {

using Tuple = std::vector<Value>;

/// One node of a tree unfolding: a clause instance whose body atoms are
/// derived by the children (facts have none).
struct DerivationNode {
    size_t clause = 0;
    Env assignment;
    Tuple head_values;                 // empty for the goal root
    std::vector<Tuple> atom_values;    // evaluated body atom arguments
    std::vector<std::unique_ptr<DerivationNode>> children;
};

struct DerivationTree {
    std::unique_ptr<DerivationNode> root;  // instance of a goal clause
};

struct UnfoldOptions {
    int depth = 6;                      // max derivation height below the goal
    std::vector<int64_t> extra_values;  // widen the search universe
    size_t node_budget = 2000000;
};

/// Bounded search for a derivation of a query violation: assignments are
/// drawn from the integer constants of the system plus a small neighborhood.
/// Returns the first tree found in deterministic clause/value order.
std::optional<DerivationTree> find_unfolding(const HornSystem& s, const UnfoldOptions& opts);

/// Independent re-check: every node's constraint holds, children's heads
/// equal the parent's atom values, and the root violates its query.
bool validate_tree(const HornSystem& s, const DerivationTree& t, std::string* why = nullptr);

std::string tree_str(const HornSystem& s, const DerivationTree& t);

}  // namespace cellmorph
