#pragma once

#include "cellmorph/horn.hpp"

namespace cellmorph {

/// Eliminates body equalities v = e (v universal, v not in e) by substitution.
HornSystem substitute_equalities(const HornSystem& s);

/// Inlines chain predicates: single-definition/single-use predicates merge
/// into their consumer; a definitional single-definition predicate inlines
/// into all uses; a single-use predicate behind a pure renaming consumer is
/// resolved against all its definitions. Predicates referenced by queries
/// are never eliminated.
HornSystem coalesce(const HornSystem& s);

/// substitute_equalities then coalesce, to fixpoint.
HornSystem simplify(const HornSystem& s);

}  // namespace cellmorph
