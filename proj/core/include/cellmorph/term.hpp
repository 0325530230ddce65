#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cellmorph {

enum class Sort { Int, Real, Bool };

std::string sort_name(Sort s);

/// Exact rational value. Int and Bool values carry den == 1.
struct Value {
    int64_t num = 0;
    int64_t den = 1;

    Value() = default;
    Value(int64_t n) : num(n), den(1) {}
    Value(int64_t n, int64_t d);

    bool is_int() const { return den == 1; }
    bool truthy() const { return num != 0; }

    friend bool operator==(const Value& a, const Value& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
    friend bool operator<(const Value& a, const Value& b);
    friend bool operator<=(const Value& a, const Value& b) { return a < b || a == b; }

    Value operator+(const Value& o) const;
    Value operator-(const Value& o) const;
    Value operator-() const { return Value(-num, den); }

    std::string str() const;
};

/// Euclidean remainder, result in [0, |m|). Ints only.
int64_t euclid_mod(int64_t v, int64_t m);

class Term;
using Env = std::map<std::string, Value>;

enum class TermKind {
    Var,
    Lit,
    Add,
    Sub,
    Neg,
    MulConst,   // c * arg
    ModConst,   // arg mod c
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    BoolLit,
    Cell,       // a[i] or a[i,j]; properties only
    Count,      // #a(z) / #a0(z); properties only
};

struct TermNode {
    TermKind kind;
    Sort sort = Sort::Int;
    Value lit;                       // Lit / BoolLit / the constant of MulConst, ModConst
    std::string name;                // Var name or Cell/Count array name
    bool count_orig = false;         // Count: refers to the original-contents copy
    std::vector<Term> args;
};

/// Immutable term over scalars: arithmetic, comparisons, boolean connectives,
/// plus cell and count references used by property specifications.
class Term {
public:
    Term() = default;

    static Term var(std::string name, Sort s);
    static Term int_lit(int64_t v);
    static Term real_lit(Value v);
    static Term bool_lit(bool b);
    static Term add(Term a, Term b);
    static Term sub(Term a, Term b);
    static Term neg(Term a);
    static Term mul_const(Value c, Term a);
    static Term mod_const(Term a, int64_t m);
    static Term cmp(TermKind k, Term a, Term b);
    static Term eq(Term a, Term b) { return cmp(TermKind::Eq, a, b); }
    static Term ne(Term a, Term b) { return cmp(TermKind::Ne, a, b); }
    static Term lt(Term a, Term b) { return cmp(TermKind::Lt, a, b); }
    static Term le(Term a, Term b) { return cmp(TermKind::Le, a, b); }
    static Term and_(Term a, Term b);
    static Term or_(Term a, Term b);
    static Term not_(Term a);
    static Term cell(std::string array, std::vector<Term> index, Sort value_sort);
    static Term count(std::string array, Term arg, bool orig);
    static Term conjoin(const std::vector<Term>& terms);

    bool valid() const { return node_ != nullptr; }
    const TermNode& n() const { return *node_; }
    TermKind kind() const { return node_->kind; }
    Sort sort() const { return node_->sort; }

    bool is_true() const;
    bool is_false() const;
    bool is_var() const { return valid() && kind() == TermKind::Var; }
    bool is_atomic() const;  // Var or literal

    std::optional<Value> eval(const Env& env) const;
    Term substitute(const std::map<std::string, Term>& m) const;
    Term rename(const std::map<std::string, std::string>& m) const;
    void collect_vars(std::vector<std::string>& out) const;
    std::vector<std::string> vars() const;
    bool mentions(const std::string& v) const;
    bool has_array_refs() const;  // any Cell/Count subterm

    /// Splits nested conjunctions into a flat list; `true` gives an empty list.
    std::vector<Term> conjuncts() const;

    std::string str() const;   // stable human-readable rendering
    std::string smt() const;   // SMT-LIB 2 rendering

    friend bool operator==(const Term& a, const Term& b);

private:
    explicit Term(std::shared_ptr<const TermNode> n) : node_(std::move(n)) {}
    static Term mk(TermNode n);
    std::shared_ptr<const TermNode> node_;
};

}  // namespace cellmorph
