#pragma once

#include "cellmorph/horn.hpp"

namespace cellmorph {

struct ArrayAbsConfig {
    int cells = 1;  // 0 erases the array, 1 or 2 distinguished cells
    bool weakened = false;
    enum class Multiset { Off, Track, TrackOrig } multiset = Multiset::Off;
};

struct AbstractionConfig {
    int default_cells = 1;
    bool ordered = true;          // break k1/k2 symmetry with k1 <= k2
    bool weakened = false;
    bool shared_index = false;    // one index slot shared by all arrays
    bool bounds_guards = true;    // 0 <= k < n on ranged arrays
    ArrayAbsConfig::Multiset multiset = ArrayAbsConfig::Multiset::Off;
    std::map<std::string, ArrayAbsConfig> per_array;

    ArrayAbsConfig for_array(const std::string& name) const {
        auto it = per_array.find(name);
        if (it != per_array.end()) return it->second;
        ArrayAbsConfig c;
        c.cells = default_cells;
        c.weakened = weakened;
        c.multiset = multiset;
        return c;
    }
};

struct EncodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Builds predicate signatures for every control point plus the count-write
/// intermediates, then emits per-edge clauses and property queries.
HornSystem encode(const Cfg& c, const AbstractionConfig& cfg,
                  const std::vector<PropertySpec>& hints = {});

/// Clauses of a single edge against prebuilt signatures (rule dispatch).
std::vector<HornClause> abstract_edge(const HornSystem& sigs, const Cfg& c,
                                      const AbstractionConfig& cfg, const Edge& e);

/// Converts a property into a goal clause over the point's predicate.
HornClause encode_property(const HornSystem& sigs, const Cfg& c, const AbstractionConfig& cfg,
                           const PropertySpec& p);

/// The pairing and diagonal clauses turning a one-cell abstraction into an
/// ordered two-cell abstraction over the same scalar vector.
std::vector<HornClause> expand_1_to_2(const PredicateSig& one, const PredicateSig& two);

}  // namespace cellmorph
