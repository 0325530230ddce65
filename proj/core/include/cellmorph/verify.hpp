#pragma once

#include "cellmorph/solver.hpp"
#include "cellmorph/trace.hpp"

namespace cellmorph {

struct VerifyOptions {
    AbstractionConfig abs;
    std::vector<SolverKind> solvers;  // portfolio, first definitive answer wins
    int solver_timeout = 60;
    int max_depth = 12;               // unfolding cap, iterative deepening
    Bounds bounds;                    // bounded concrete replay window
    bool allow_refine = true;
    std::vector<PropertySpec> hints;
    std::string work_dir = ".";
    bool keep_files = true;
};

struct VerifyResult {
    enum class Kind { Proved, Violated, Exhausted, Budget } kind = Kind::Budget;
    std::string detail;
    int refinements = 0;
    std::optional<ConcreteWitness> witness;
    std::string witness_text;
    std::string model;
    AbstractionConfig final_config;
};

/// Increases the tracked cell count of the named arrays; reports whether any
/// array actually got more precise.
bool refine(AbstractionConfig& abs, const std::vector<std::string>& arrays);

/// Arrays whose reads/writes appear on the trace.
std::vector<std::string> trace_arrays(const Trace& tr, const Cfg& cfg);

/// encode -> solve -> on refutation reconstruct a counterexample, replay it
/// concretely, and either report the violation or refine and retry.
VerifyResult verify(const Cfg& cfg, const VerifyOptions& opts);

}  // namespace cellmorph
