#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cellmorph/term.hpp"

namespace cellmorph {

struct SourceLoc {
    int line = 0;
    int col = 0;
};

struct ScalarDecl {
    std::string name;
    Sort sort = Sort::Int;
    SourceLoc loc;
};

enum class IndexKind { Int1, Int2, Real1 };

struct ArrayDecl {
    std::string name;
    Sort value_sort = Sort::Int;
    IndexKind index = IndexKind::Int1;
    // Length expressions for ranged int-indexed arrays (one per dimension).
    std::vector<Term> range;
    std::optional<Term> init_value;   // "int a[...] = 0;"
    std::optional<std::string> copy_of;  // "int b[n] = a;"
    SourceLoc loc;

    bool ranged() const { return !range.empty(); }
    int dims() const { return index == IndexKind::Int2 ? 2 : 1; }
    Sort index_sort() const { return index == IndexKind::Real1 ? Sort::Real : Sort::Int; }
};

struct Stmt;
using StmtList = std::vector<Stmt>;

struct AssignStmt {
    std::string lhs;
    Term rhs;  // may contain Cell reads; normalize hoists them
};

struct StoreStmt {
    std::string array;
    std::vector<Term> index;
    Term value;  // may contain Cell reads
};

struct AssumeStmt {
    Term cond;
};

struct WhileStmt {
    Term cond;
    std::shared_ptr<StmtList> body;
};

struct IfStmt {
    Term cond;
    std::shared_ptr<StmtList> then_body;
    std::shared_ptr<StmtList> else_body;  // may be null
};

struct Stmt {
    enum class Kind { Assign, Store, Assume, While, If } kind;
    std::string label;  // names the control point before this statement
    SourceLoc loc;
    AssignStmt assign;
    StoreStmt store;
    AssumeStmt assume;
    WhileStmt while_;
    IfStmt if_;
};

/// A universally quantified implication attached to the exit point or a
/// labeled point. Binders cover cell indices and count samples.
struct PropertySpec {
    std::string at;  // empty = exit point
    std::vector<std::pair<std::string, Sort>> binders;
    Term guard;
    Term conclusion;
    bool is_hint = false;
    SourceLoc loc;
};

struct Program {
    std::vector<ScalarDecl> scalars;
    std::vector<ArrayDecl> arrays;
    StmtList body;
    std::vector<PropertySpec> properties;

    const ArrayDecl* find_array(const std::string& name) const {
        for (const auto& a : arrays)
            if (a.name == name) return &a;
        return nullptr;
    }
    const ScalarDecl* find_scalar(const std::string& name) const {
        for (const auto& s : scalars)
            if (s.name == name) return &s;
        return nullptr;
    }
};

struct ParseError : std::runtime_error {
    SourceLoc loc;
    ParseError(const std::string& msg, SourceLoc l)
        : std::runtime_error(msg + " at line " + std::to_string(l.line) + ":" +
                             std::to_string(l.col)),
          loc(l) {}
};

/// Parses mini-language source text (.arr). Rejects undeclared identifiers,
/// shadowing and ill-sorted expressions.
Program parse(const std::string& text);

/// Parses a hint file: entries of "at <point>: [forall binders:] cond => cond;"
/// resolving identifiers against the given program's declarations.
std::vector<PropertySpec> parse_hints(const Program& p, const std::string& text);

}  // namespace cellmorph
