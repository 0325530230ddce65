#pragma once

#include <set>

#include "cellmorph/abstraction.hpp"

namespace cellmorph {

struct Bounds {
    int64_t max_len = 3;        // array extent cap (also the unranged window)
    int64_t lo = 0;             // scalar and cell value range
    int64_t hi = 3;
    size_t state_budget = 2000000;
    size_t init_combo_cap = 4096;  // exhaustive content enumeration cap
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A concrete machine state at some control point: live scalars, array
/// contents (per declared array, empty when out of scope) and the snapshot
/// taken at initialization for original-contents comparisons.
struct OracleState {
    Env scalars;
    std::vector<std::vector<Value>> arrays;
    std::vector<std::vector<Value>> arrays0;
    std::vector<std::vector<int64_t>> dims;  // extent per dimension

    bool operator<(const OracleState& o) const {
        if (scalars != o.scalars) return scalars < o.scalars;
        if (arrays != o.arrays) return arrays < o.arrays;
        return arrays0 < o.arrays0;
    }
};

using ReachSets = std::map<int, std::set<OracleState>>;
using Tuple = std::vector<Value>;

struct Tables {
    std::map<int, std::set<Tuple>> rows;  // predicate id -> relation
};

struct Violation {
    size_t clause = 0;
    std::string rule;
    std::string detail;
};

class Oracle {
public:
    Oracle(const Cfg& cfg, const Bounds& b);

    /// Least fixpoint of the concrete transition relation within bounds.
    const ReachSets& interpret();

    /// One concrete step over an edge; empty result means the path halts.
    std::vector<OracleState> step(const Edge& e, const OracleState& s) const;

    /// Term evaluation over a full state; cell references read the arrays
    /// (out-of-range gives nullopt, halting the path).
    std::optional<Value> eval_state(const OracleState& s, const Term& t) const;

    /// alpha over the reach sets for every predicate of the system,
    /// including the count-write intermediates.
    Tables build_tables(const HornSystem& sys, const AbstractionConfig& abs);

    /// Per-rule soundness: clause application to the alpha table of its
    /// source must cover the alpha image of every concrete successor.
    /// Goal clauses are checked directly against their point's table.
    std::vector<Violation> check_rules(const HornSystem& sys, const AbstractionConfig& abs,
                                       const Tables& tables);

    /// Tuples of one state under a predicate signature (alpha on a point).
    std::vector<Tuple> state_tuples(const PredicateSig& sig, const OracleState& s) const;

    /// The imposed set of a single non-goal clause over the given tables.
    std::set<Tuple> imposed_set(const HornSystem& sys, size_t clause_idx,
                                const Tables& tables) const;

    /// First assignment violating a goal clause against the tables, if any.
    std::optional<Env> find_goal_violation(const HornSystem& sys, size_t goal_clause,
                                           const Tables& tables) const;

    const std::vector<Value>& value_domain() const { return value_dom_; }
    const std::vector<Value>& int_domain() const { return int_dom_; }
    std::vector<OracleState> initial_states() const;
    const Cfg& cfg() const { return cfg_; }
    const Bounds& bounds() const { return bounds_; }

    /// Index domain of an array in a given state (flattened positions and
    /// their index values, one vector per dimension arity).
    std::vector<std::vector<Value>> index_points(size_t array_pos,
                                                 const OracleState& s) const;

private:
    const Cfg& cfg_;
    Bounds bounds_;
    ReachSets reach_;
    bool interpreted_ = false;
    std::vector<Value> value_dom_;  // [lo..hi] plus program literals
    std::vector<Value> int_dom_;    // value_dom plus index range and -1
    std::vector<Value> real_samples_;

    size_t array_pos(const std::string& name) const;
    std::vector<OracleState> init_array(const OracleState& s, size_t pos) const;
    friend class RuleChecker;
};

}  // namespace cellmorph
