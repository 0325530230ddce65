#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cellmorph/cfg.hpp"

namespace cellmorph {

/// One block of predicate argument slots belonging to an array: its tracked
/// cell indices/values and optional count slots.
struct ArrayBlock {
    std::string array;
    int cells = 0;                       // 0, 1 or 2 tracked cells
    int dims = 1;                        // index arity (2 for matrices)
    Sort index_sort = Sort::Int;
    Sort value_sort = Sort::Int;
    bool ordered = true;                 // two-cell blocks keep k1 <= k2
    bool counts = false;                 // carries (z, cnt)
    bool counts_orig = false;            // also carries cnt0
    bool shared_value_only = false;      // shared-index mode: value slot only
    // Slot names, in order of appearance.
    std::vector<std::string> index_names;   // k / k1,k2 / kx,ky
    std::vector<std::string> value_names;   // a_k / a_k1,a_k2
    std::string z_name, cnt_name, cnt0_name;
};

/// Predicate argument layout, fixed and stable: scalars in declaration
/// order, then (in shared-index mode) the shared index, then one block per
/// array in declaration order — cells=1: (k, a_k); cells=2: (k1, a_k1, k2,
/// a_k2); 2D: (kx, ky, a_k) — each block optionally followed by its count
/// slots (z, cnt[, cnt0]).
struct PredicateSig {
    int id = 0;
    std::string name;
    int point = -1;                      // control point, -1 for synthesized
    int aux_edge = -1;                   // count-write edge of an intermediate
    int aux_phase = -1;                  // 0 after decrement, 1 after increment
    std::vector<ScalarVar> scalars;
    std::optional<ScalarVar> extra;      // write-value slot of count intermediates
    std::vector<std::string> shared_index_names;  // nonempty in shared-index mode
    Sort shared_index_sort = Sort::Int;
    std::vector<ArrayBlock> blocks;

    std::vector<ScalarVar> slots() const;  // flattened (name, sort) argument list
    size_t arity() const { return slots().size(); }
};

struct Atom {
    int pred = 0;
    std::vector<Term> args;
};

struct Goal {
    Term constraint;  // the conclusion that must hold
};

struct HornClause {
    std::vector<ScalarVar> universals;
    std::vector<Atom> body;
    Term constraint;                      // quantifier-free side condition
    std::optional<Atom> head;             // absent for goal clauses
    std::optional<Goal> goal;

    bool is_goal() const { return goal.has_value(); }
    bool is_fact() const { return body.empty() && !is_goal(); }
};

struct Provenance {
    std::vector<int> edges;   // originating cfg edges, execution order
    std::string rule;
    bool is_hint = false;
};

struct HornSystem {
    std::vector<PredicateSig> preds;
    std::vector<HornClause> clauses;
    std::vector<Provenance> provenance;   // parallel to clauses
    std::map<int, int> point_pred;        // control point -> predicate id

    const PredicateSig& pred(int id) const { return preds.at(static_cast<size_t>(id)); }
    std::optional<int> pred_by_name(const std::string& name) const {
        for (const auto& p : preds)
            if (p.name == name) return p.id;
        return std::nullopt;
    }
    std::string clause_str(size_t i) const;
};

std::string atom_str(const HornSystem& s, const Atom& a);

}  // namespace cellmorph
