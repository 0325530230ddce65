#include "cellmorph/term.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cellmorph {

std::string sort_name(Sort s) {
    switch (s) {
        case Sort::Int: return "Int";
        case Sort::Real: return "Real";
        case Sort::Bool: return "Bool";
    }
    return "?";
}

Value::Value(int64_t n, int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    if (den < 0) { num = -num; den = -den; }
    int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
}

bool operator<(const Value& a, const Value& b) {
    return a.num * b.den < b.num * a.den;
}

Value Value::operator+(const Value& o) const {
    return Value(num * o.den + o.num * den, den * o.den);
}

Value Value::operator-(const Value& o) const {
    return Value(num * o.den - o.num * den, den * o.den);
}

std::string Value::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

int64_t euclid_mod(int64_t v, int64_t m) {
    if (m < 0) m = -m;
    int64_t r = v % m;
    return r < 0 ? r + m : r;
}

Term Term::mk(TermNode n) {
    return Term(std::make_shared<const TermNode>(std::move(n)));
}

Term Term::var(std::string name, Sort s) {
    TermNode n;
    n.kind = TermKind::Var;
    n.sort = s;
    n.name = std::move(name);
    return mk(std::move(n));
}

Term Term::int_lit(int64_t v) {
    TermNode n;
    n.kind = TermKind::Lit;
    n.sort = Sort::Int;
    n.lit = Value(v);
    return mk(std::move(n));
}

Term Term::real_lit(Value v) {
    TermNode n;
    n.kind = TermKind::Lit;
    n.sort = Sort::Real;
    n.lit = v;
    return mk(std::move(n));
}

Term Term::bool_lit(bool b) {
    TermNode n;
    n.kind = TermKind::BoolLit;
    n.sort = Sort::Bool;
    n.lit = Value(b ? 1 : 0);
    return mk(std::move(n));
}

Term Term::add(Term a, Term b) {
    TermNode n;
    n.kind = TermKind::Add;
    n.sort = a.sort();
    n.args = {std::move(a), std::move(b)};
    return mk(std::move(n));
}

Term Term::sub(Term a, Term b) {
    TermNode n;
    n.kind = TermKind::Sub;
    n.sort = a.sort();
    n.args = {std::move(a), std::move(b)};
    return mk(std::move(n));
}

Term Term::neg(Term a) {
    TermNode n;
    n.kind = TermKind::Neg;
    n.sort = a.sort();
    n.args = {std::move(a)};
    return mk(std::move(n));
}

Term Term::mul_const(Value c, Term a) {
    TermNode n;
    n.kind = TermKind::MulConst;
    n.sort = a.sort();
    n.lit = c;
    n.args = {std::move(a)};
    return mk(std::move(n));
}

Term Term::mod_const(Term a, int64_t m) {
    TermNode n;
    n.kind = TermKind::ModConst;
    n.sort = Sort::Int;
    n.lit = Value(m);
    n.args = {std::move(a)};
    return mk(std::move(n));
}

Term Term::cmp(TermKind k, Term a, Term b) {
    TermNode n;
    n.kind = k;
    n.sort = Sort::Bool;
    n.args = {std::move(a), std::move(b)};
    return mk(std::move(n));
}

Term Term::and_(Term a, Term b) {
    if (a.is_true()) return b;
    if (b.is_true()) return a;
    if (a.is_false() || b.is_false()) return bool_lit(false);
    TermNode n;
    n.kind = TermKind::And;
    n.sort = Sort::Bool;
    n.args = {std::move(a), std::move(b)};
    return mk(std::move(n));
}

Term Term::or_(Term a, Term b) {
    if (a.is_false()) return b;
    if (b.is_false()) return a;
    if (a.is_true() || b.is_true()) return bool_lit(true);
    TermNode n;
    n.kind = TermKind::Or;
    n.sort = Sort::Bool;
    n.args = {std::move(a), std::move(b)};
    return mk(std::move(n));
}

Term Term::not_(Term a) {
    if (a.is_true()) return bool_lit(false);
    if (a.is_false()) return bool_lit(true);
    switch (a.kind()) {
        case TermKind::Eq: return cmp(TermKind::Ne, a.n().args[0], a.n().args[1]);
        case TermKind::Ne: return cmp(TermKind::Eq, a.n().args[0], a.n().args[1]);
        case TermKind::Lt: return cmp(TermKind::Ge, a.n().args[0], a.n().args[1]);
        case TermKind::Le: return cmp(TermKind::Gt, a.n().args[0], a.n().args[1]);
        case TermKind::Gt: return cmp(TermKind::Le, a.n().args[0], a.n().args[1]);
        case TermKind::Ge: return cmp(TermKind::Lt, a.n().args[0], a.n().args[1]);
        case TermKind::Not: return a.n().args[0];
        default: break;
    }
    TermNode n;
    n.kind = TermKind::Not;
    n.sort = Sort::Bool;
    n.args = {std::move(a)};
    return mk(std::move(n));
}

Term Term::cell(std::string array, std::vector<Term> index, Sort value_sort) {
    TermNode n;
    n.kind = TermKind::Cell;
    n.sort = value_sort;
    n.name = std::move(array);
    n.args = std::move(index);
    return mk(std::move(n));
}

Term Term::count(std::string array, Term arg, bool orig) {
    TermNode n;
    n.kind = TermKind::Count;
    n.sort = Sort::Int;
    n.name = std::move(array);
    n.count_orig = orig;
    n.args = {std::move(arg)};
    return mk(std::move(n));
}

Term Term::conjoin(const std::vector<Term>& terms) {
    Term acc = bool_lit(true);
    for (const auto& t : terms) acc = and_(acc, t);
    return acc;
}

bool Term::is_true() const {
    return valid() && kind() == TermKind::BoolLit && node_->lit.num == 1;
}

bool Term::is_false() const {
    return valid() && kind() == TermKind::BoolLit && node_->lit.num == 0;
}

bool Term::is_atomic() const {
    if (!valid()) return false;
    return kind() == TermKind::Var || kind() == TermKind::Lit || kind() == TermKind::BoolLit;
}

std::optional<Value> Term::eval(const Env& env) const {
    const TermNode& n = *node_;
    auto ev = [&](size_t i) { return n.args[i].eval(env); };
    switch (n.kind) {
        case TermKind::Var: {
            auto it = env.find(n.name);
            if (it == env.end()) return std::nullopt;
            return it->second;
        }
        case TermKind::Lit:
        case TermKind::BoolLit:
            return n.lit;
        case TermKind::Add: {
            auto a = ev(0), b = ev(1);
            if (!a || !b) return std::nullopt;
            return *a + *b;
        }
        case TermKind::Sub: {
            auto a = ev(0), b = ev(1);
            if (!a || !b) return std::nullopt;
            return *a - *b;
        }
        case TermKind::Neg: {
            auto a = ev(0);
            if (!a) return std::nullopt;
            return -*a;
        }
        case TermKind::MulConst: {
            auto a = ev(0);
            if (!a) return std::nullopt;
            return Value(n.lit.num * a->num, n.lit.den * a->den);
        }
        case TermKind::ModConst: {
            auto a = ev(0);
            if (!a || !a->is_int()) return std::nullopt;
            return Value(euclid_mod(a->num, n.lit.num));
        }
        case TermKind::Eq:
        case TermKind::Ne:
        case TermKind::Lt:
        case TermKind::Le:
        case TermKind::Gt:
        case TermKind::Ge: {
            auto a = ev(0), b = ev(1);
            if (!a || !b) return std::nullopt;
            bool r = false;
            switch (n.kind) {
                case TermKind::Eq: r = (*a == *b); break;
                case TermKind::Ne: r = (*a != *b); break;
                case TermKind::Lt: r = (*a < *b); break;
                case TermKind::Le: r = (*a <= *b); break;
                case TermKind::Gt: r = (*b < *a); break;
                case TermKind::Ge: r = (*b <= *a); break;
                default: break;
            }
            return Value(r ? 1 : 0);
        }
        case TermKind::And: {
            auto a = ev(0);
            if (!a) return std::nullopt;
            if (!a->truthy()) return Value(0);
            return ev(1);
        }
        case TermKind::Or: {
            auto a = ev(0);
            if (!a) return std::nullopt;
            if (a->truthy()) return Value(1);
            return ev(1);
        }
        case TermKind::Not: {
            auto a = ev(0);
            if (!a) return std::nullopt;
            return Value(a->truthy() ? 0 : 1);
        }
        case TermKind::Cell:
        case TermKind::Count:
            return std::nullopt;  // needs an array-aware evaluator
    }
    return std::nullopt;
}

Term Term::substitute(const std::map<std::string, Term>& m) const {
    const TermNode& n = *node_;
    if (n.kind == TermKind::Var) {
        auto it = m.find(n.name);
        return it == m.end() ? *this : it->second;
    }
    if (n.args.empty()) return *this;
    TermNode copy = n;
    bool changed = false;
    for (auto& a : copy.args) {
        Term s = a.substitute(m);
        if (!(s == a)) changed = true;
        a = s;
    }
    if (!changed) return *this;
    return mk(std::move(copy));
}

Term Term::rename(const std::map<std::string, std::string>& m) const {
    std::map<std::string, Term> sub;
    const TermNode& n = *node_;
    if (n.kind == TermKind::Var) {
        auto it = m.find(n.name);
        if (it == m.end()) return *this;
        return var(it->second, n.sort);
    }
    if (n.args.empty()) return *this;
    TermNode copy = n;
    for (auto& a : copy.args) a = a.rename(m);
    return mk(std::move(copy));
}

void Term::collect_vars(std::vector<std::string>& out) const {
    const TermNode& n = *node_;
    if (n.kind == TermKind::Var) {
        if (std::find(out.begin(), out.end(), n.name) == out.end()) out.push_back(n.name);
        return;
    }
    for (const auto& a : n.args) a.collect_vars(out);
}

std::vector<std::string> Term::vars() const {
    std::vector<std::string> out;
    collect_vars(out);
    return out;
}

bool Term::mentions(const std::string& v) const {
    const TermNode& n = *node_;
    if (n.kind == TermKind::Var) return n.name == v;
    for (const auto& a : n.args)
        if (a.mentions(v)) return true;
    return false;
}

bool Term::has_array_refs() const {
    const TermNode& n = *node_;
    if (n.kind == TermKind::Cell || n.kind == TermKind::Count) return true;
    for (const auto& a : n.args)
        if (a.has_array_refs()) return true;
    return false;
}

std::vector<Term> Term::conjuncts() const {
    std::vector<Term> out;
    if (!valid() || is_true()) return out;
    if (kind() == TermKind::And) {
        for (const auto& a : node_->args) {
            auto sub = a.conjuncts();
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }
    out.push_back(*this);
    return out;
}

namespace {

const char* op_str(TermKind k) {
    switch (k) {
        case TermKind::Eq: return "==";
        case TermKind::Ne: return "!=";
        case TermKind::Lt: return "<";
        case TermKind::Le: return "<=";
        case TermKind::Gt: return ">";
        case TermKind::Ge: return ">=";
        default: return "?";
    }
}

}  // namespace

std::string Term::str() const {
    const TermNode& n = *node_;
    std::ostringstream os;
    switch (n.kind) {
        case TermKind::Var: os << n.name; break;
        case TermKind::Lit: os << n.lit.str(); break;
        case TermKind::BoolLit: os << (n.lit.num ? "true" : "false"); break;
        case TermKind::Add: os << "(" << n.args[0].str() << " + " << n.args[1].str() << ")"; break;
        case TermKind::Sub: os << "(" << n.args[0].str() << " - " << n.args[1].str() << ")"; break;
        case TermKind::Neg: os << "(-" << n.args[0].str() << ")"; break;
        case TermKind::MulConst: os << "(" << n.lit.str() << "*" << n.args[0].str() << ")"; break;
        case TermKind::ModConst: os << "(" << n.args[0].str() << " % " << n.lit.str() << ")"; break;
        case TermKind::Eq:
        case TermKind::Ne:
        case TermKind::Lt:
        case TermKind::Le:
        case TermKind::Gt:
        case TermKind::Ge:
            os << "(" << n.args[0].str() << " " << op_str(n.kind) << " " << n.args[1].str() << ")";
            break;
        case TermKind::And: os << "(" << n.args[0].str() << " && " << n.args[1].str() << ")"; break;
        case TermKind::Or: os << "(" << n.args[0].str() << " || " << n.args[1].str() << ")"; break;
        case TermKind::Not: os << "(!" << n.args[0].str() << ")"; break;
        case TermKind::Cell: {
            os << n.name << "[";
            for (size_t i = 0; i < n.args.size(); ++i) os << (i ? "," : "") << n.args[i].str();
            os << "]";
            break;
        }
        case TermKind::Count:
            os << "#" << n.name << (n.count_orig ? "0" : "") << "(" << n.args[0].str() << ")";
            break;
    }
    return os.str();
}

std::string Term::smt() const {
    const TermNode& n = *node_;
    std::ostringstream os;
    auto lit_smt = [](const Value& v, Sort s) -> std::string {
        if (s == Sort::Real) {
            std::string mag = std::to_string(v.num < 0 ? -v.num : v.num) + ".0";
            std::string base = v.den == 1 ? mag : "(/ " + mag + " " + std::to_string(v.den) + ".0)";
            return v.num < 0 ? "(- " + base + ")" : base;
        }
        if (v.num < 0) return "(- " + std::to_string(-v.num) + ")";
        return std::to_string(v.num);
    };
    switch (n.kind) {
        case TermKind::Var: os << n.name; break;
        case TermKind::Lit: os << lit_smt(n.lit, n.sort); break;
        case TermKind::BoolLit: os << (n.lit.num ? "true" : "false"); break;
        case TermKind::Add: os << "(+ " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::Sub: os << "(- " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::Neg: os << "(- " << n.args[0].smt() << ")"; break;
        case TermKind::MulConst:
            os << "(* " << lit_smt(n.lit, n.args[0].sort()) << " " << n.args[0].smt() << ")";
            break;
        case TermKind::ModConst:
            os << "(mod " << n.args[0].smt() << " " << lit_smt(n.lit, Sort::Int) << ")";
            break;
        case TermKind::Eq: os << "(= " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::Ne:
            os << "(not (= " << n.args[0].smt() << " " << n.args[1].smt() << "))";
            break;
        case TermKind::Lt: os << "(< " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::Le: os << "(<= " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::Gt: os << "(> " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::Ge: os << "(>= " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::And: os << "(and " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::Or: os << "(or " << n.args[0].smt() << " " << n.args[1].smt() << ")"; break;
        case TermKind::Not: os << "(not " << n.args[0].smt() << ")"; break;
        case TermKind::Cell:
        case TermKind::Count:
            os << "<array-ref:" << str() << ">";
            break;
    }
    return os.str();
}

bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    const TermNode& x = *a.node_;
    const TermNode& y = *b.node_;
    if (x.kind != y.kind || x.sort != y.sort || x.name != y.name ||
        !(x.lit == y.lit) || x.count_orig != y.count_orig || x.args.size() != y.args.size())
        return false;
    for (size_t i = 0; i < x.args.size(); ++i)
        if (!(x.args[i] == y.args[i])) return false;
    return true;
}

}  // namespace cellmorph
