#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cellmorph {

enum class SolverKind { Spacer, Z3Pdr, Eldarica };

std::string solver_name(SolverKind k);
std::optional<SolverKind> solver_from_name(const std::string& name);

struct SolverVerdict {
    enum class Kind { Sat, Unsat, Unknown, Timeout, Crash } kind = Kind::Unknown;
    std::string model;       // raw output on sat
    std::string diagnostic;  // raw output otherwise
};

/// Binary for a solver kind: CELLMORPH_Z3 / CELLMORPH_ELDARICA override the
/// defaults on PATH. Empty when nothing is runnable.
std::string solver_binary(SolverKind k);
bool solver_available(SolverKind k);

/// Runs the solver on an .smt2 file with a wall-clock timeout, parsing
/// sat/unsat/unknown from stdout.
SolverVerdict run_solver(const std::string& file, SolverKind kind, int timeout_sec);

}  // namespace cellmorph
