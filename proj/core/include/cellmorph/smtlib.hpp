#pragma once

#include "cellmorph/horn.hpp"

namespace cellmorph {

/// Renders the system as SMT-LIB 2 (logic HORN): one declare-fun per
/// predicate, clauses as universally quantified implications, queries in
/// goal normal form with head false. Deterministic, byte-stable output.
/// Provenance appears as comments; the cfg, when given, adds statement text.
std::string emit_smtlib(const HornSystem& s, const Cfg* cfg = nullptr);

}  // namespace cellmorph
