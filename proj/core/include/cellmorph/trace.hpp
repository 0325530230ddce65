#pragma once

#include "cellmorph/oracle.hpp"
#include "cellmorph/unfold.hpp"

namespace cellmorph {

/// One statement of an abstract counterexample trace, in execution order.
struct TraceStep {
    size_t clause = 0;
    std::string rule;
    std::vector<int> edges;  // concrete cfg edges this clause stands for
    Env assignment;          // the solver-free unfolding's hint values
};

struct Trace {
    std::vector<TraceStep> steps;
    size_t goal_clause = 0;
    Env goal_assignment;
};

/// The leftmost root-to-leaf branch, reversed into execution order.
Trace extract_branch(const HornSystem& s, const DerivationTree& t);

/// SSA-style satisfiability script over arithmetic plus arrays for the
/// branch: concrete transition relations conjoined with the negated
/// property instance. Abstract assignment values ride along as comments.
std::string trace_to_concrete_formula(const Trace& tr, const Cfg& cfg, const HornSystem& s);

/// A concrete run following the trace's branch decisions and ending in a
/// property violation, found by bounded enumeration of the inputs.
struct ConcreteWitness {
    OracleState initial;
    std::vector<std::pair<int, OracleState>> path;  // (edge id, state after)
    Env binders;                                    // violated property instance
};

std::optional<ConcreteWitness> bounded_trace_witness(const Trace& tr, const Cfg& cfg,
                                                     const HornSystem& s, const Bounds& b);

/// Replays a witness step-for-step through the interpreter and confirms the
/// final state violates the property instance.
bool replay_witness(const ConcreteWitness& w, const Trace& tr, const Cfg& cfg,
                    const HornSystem& s, const Bounds& b);

std::string witness_str(const ConcreteWitness& w, const Cfg& cfg);

}  // namespace cellmorph
