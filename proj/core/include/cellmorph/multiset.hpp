#pragma once

#include "cellmorph/horn.hpp"

namespace cellmorph {

/// Syntactic frame check: count slots of `array` are carried unchanged from
/// body to head in every clause whose rule does not touch the counts.
/// Returns offending clause indices.
std::vector<size_t> count_frame_violations(const HornSystem& s, const std::string& array);

}  // namespace cellmorph
