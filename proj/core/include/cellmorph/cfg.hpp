#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cellmorph/program.hpp"

namespace cellmorph {

struct ScalarVar {
    std::string name;
    Sort sort;
    friend bool operator==(const ScalarVar&, const ScalarVar&) = default;
};

/// Array read into a fresh target: v := a[i] (index atoms only).
struct ArrayRead {
    std::string array;
    std::vector<Term> index;
    std::string target;
    Sort target_sort;
};

/// Array write a[i] := e; the index is atomic, the value a pure-scalar term.
struct ArrayWrite {
    std::string array;
    std::vector<Term> index;
    Term value;
};

/// Guarded parallel assignment over scalars: guard(x) && x' = rhs(x).
struct ScalarOp {
    Term guard;
    std::vector<std::pair<std::string, Term>> assigns;
};

struct Kill {
    std::vector<std::string> vars;
};

/// Havocs (or re-establishes) the content of one array per its declaration.
struct ArrayInit {
    std::string array;
};

struct MultisetOp {
    enum class Kind { Union, Intersection } kind;
    std::string target;
    std::string lhs;
    std::string rhs;
};

using Transition = std::variant<ArrayRead, ArrayWrite, ScalarOp, Kill, ArrayInit, MultisetOp>;

std::string transition_str(const Transition& t);

struct ControlPoint {
    int id = 0;
    std::string name;
    std::vector<ScalarVar> scalars;       // live-or-input variables, decl order
    std::vector<std::string> arrays;      // arrays in scope (initialized), decl order
};

struct Edge {
    int id = 0;
    int src = 0;
    int dst = 0;
    Transition transition;
};

struct Cfg {
    std::vector<ControlPoint> points;
    std::vector<Edge> edges;
    int entry = 0;
    std::vector<int> exits;

    std::vector<ScalarDecl> scalar_decls;
    std::vector<ArrayDecl> arrays;
    std::vector<PropertySpec> properties;

    const ControlPoint& point(int id) const {
        for (const auto& p : points)
            if (p.id == id) return p;
        throw std::out_of_range("no control point " + std::to_string(id));
    }
    ControlPoint& point(int id) {
        for (auto& p : points)
            if (p.id == id) return p;
        throw std::out_of_range("no control point " + std::to_string(id));
    }
    const ArrayDecl* find_array(const std::string& name) const {
        for (const auto& a : arrays)
            if (a.name == name) return &a;
        return nullptr;
    }
    std::optional<int> point_by_name(const std::string& name) const {
        for (const auto& p : points)
            if (p.name == name) return p.id;
        return std::nullopt;
    }
    std::vector<const Edge*> out_edges(int point_id) const {
        std::vector<const Edge*> out;
        for (const auto& e : edges)
            if (e.src == point_id) out.push_back(&e);
        return out;
    }
};

/// Lowers structured statements to a CFG with one edge per statement;
/// while/if become guard edges, declared arrays get init edges at entry.
Cfg lower_to_cfg(const Program& p);

/// Splits edges into normal form: compound indices hoisted through temps,
/// a[i]=a[j] split through a temp, read targets fresh at their source point.
Cfg normalize(const Cfg& c);

/// Backward scalar liveness; shrinks point vectors and inserts batched Kill
/// edges where variables die. Array range variables stay pinned everywhere.
Cfg insert_kills(const Cfg& c);

/// parse + lower + normalize + insert_kills.
Cfg frontend_pipeline(const Program& p);

}  // namespace cellmorph
