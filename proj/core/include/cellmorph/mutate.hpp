#pragma once

#include <optional>

#include "cellmorph/horn.hpp"

namespace cellmorph {

struct Mutation {
    int id = 0;
    std::string description;
};

/// The fixed catalogue of unsound clause mutations used to exercise the
/// soundness checker. Ten entries, stable numbering.
const std::vector<Mutation>& mutation_catalogue();

/// Applies mutation `id` to the first matching clause; nullopt when the
/// system has no clause the mutation applies to.
std::optional<HornSystem> apply_mutation(const HornSystem& s, int id);

}  // namespace cellmorph
