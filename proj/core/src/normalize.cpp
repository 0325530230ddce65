#include <algorithm>
#include <functional>

#include "cellmorph/cfg.hpp"

namespace cellmorph {

namespace {

class Normalizer {
public:
    explicit Normalizer(const Cfg& c) : in_(c) {}

    Cfg run() {
        out_ = in_;
        out_.edges.clear();
        next_point_ = 0;
        for (const auto& p : in_.points) next_point_ = std::max(next_point_, p.id + 1);
        for (const auto& e : in_.edges) normalize_edge(e);
        renumber_edges();
        return std::move(out_);
    }

private:
    const Cfg& in_;
    Cfg out_;
    int next_point_ = 0;
    int next_temp_ = 0;

    std::string fresh_temp(const std::string& stem) {
        return "_" + stem + std::to_string(next_temp_++);
    }

    int fresh_point(int like_point) {
        ControlPoint p = in_.point(like_point);
        p.id = next_point_;
        p.name = "p" + std::to_string(next_point_);
        ++next_point_;
        p.scalars.clear();
        for (const auto& d : out_.scalar_decls) p.scalars.push_back({d.name, d.sort});
        out_.points.push_back(p);
        return p.id;
    }

    void emit(int src, Transition t, int dst) {
        Edge e;
        e.id = 0;  // renumbered afterwards
        e.src = src;
        e.dst = dst;
        e.transition = std::move(t);
        out_.edges.push_back(std::move(e));
    }

    void add_scalar(const std::string& name, Sort sort) {
        for (const auto& d : out_.scalar_decls)
            if (d.name == name) return;
        out_.scalar_decls.push_back({name, sort, {}});
        for (auto& p : out_.points) p.scalars.push_back({name, sort});
    }

    // Pulls array reads out of an expression; returns the pure remainder.
    Term extract_reads(Term t, std::vector<ArrayRead>& reads) {
        const TermNode& n = t.n();
        if (n.kind == TermKind::Cell) {
            const ArrayDecl* a = in_.find_array(n.name);
            std::string temp = fresh_temp("t");
            ArrayRead r;
            r.array = n.name;
            for (const auto& ix : n.args) r.index.push_back(extract_reads(ix, reads));
            r.target = temp;
            r.target_sort = a ? a->value_sort : Sort::Int;
            reads.push_back(std::move(r));
            return Term::var(temp, a ? a->value_sort : Sort::Int);
        }
        if (n.args.empty()) return t;
        TermNode copy = n;
        for (auto& arg : copy.args) arg = extract_reads(arg, reads);
        // Rebuild through substitute on a synthetic node: easier to just
        // reconstruct via public constructors per kind.
        return rebuild(copy);
    }

    Term rebuild(const TermNode& n) {
        switch (n.kind) {
            case TermKind::Add: return Term::add(n.args[0], n.args[1]);
            case TermKind::Sub: return Term::sub(n.args[0], n.args[1]);
            case TermKind::Neg: return Term::neg(n.args[0]);
            case TermKind::MulConst: return Term::mul_const(n.lit, n.args[0]);
            case TermKind::ModConst: return Term::mod_const(n.args[0], n.lit.num);
            case TermKind::Eq:
            case TermKind::Ne:
            case TermKind::Lt:
            case TermKind::Le:
            case TermKind::Gt:
            case TermKind::Ge: return Term::cmp(n.kind, n.args[0], n.args[1]);
            case TermKind::And: return Term::and_(n.args[0], n.args[1]);
            case TermKind::Or: return Term::or_(n.args[0], n.args[1]);
            case TermKind::Not: return Term::not_(n.args[0]);
            case TermKind::Cell: return Term::cell(n.name, n.args, n.sort);
            case TermKind::Count: return Term::count(n.name, n.args[0], n.count_orig);
            default: break;
        }
        throw std::logic_error("rebuild on leaf");
    }

    // Emits ScalarOp temps so that every index becomes atomic.
    std::vector<Term> atomize_indices(std::vector<Term> idx, int& cur, int dst_like) {
        for (auto& ix : idx) {
            if (ix.is_atomic()) continue;
            std::string temp = fresh_temp("i");
            add_scalar(temp, ix.sort());
            int mid = fresh_point(dst_like);
            emit(cur, ScalarOp{Term::bool_lit(true), {{temp, ix}}}, mid);
            cur = mid;
            ix = Term::var(temp, ix.sort());
        }
        return idx;
    }

    void emit_read(ArrayRead r, int& cur, int dst_like) {
        r.index = atomize_indices(std::move(r.index), cur, dst_like);
        // A target also used as an index var goes through a temp.
        bool clashes = false;
        for (const auto& ix : r.index)
            if (ix.is_var() && ix.n().name == r.target) clashes = true;
        if (clashes) {
            std::string temp = fresh_temp("r");
            add_scalar(temp, r.target_sort);
            std::string orig = r.target;
            Sort sort = r.target_sort;
            r.target = temp;
            int mid = fresh_point(dst_like);
            emit(cur, r, mid);
            cur = mid;
            int mid2 = fresh_point(dst_like);
            emit(cur, ScalarOp{Term::bool_lit(true), {{orig, Term::var(temp, sort)}}}, mid2);
            cur = mid2;
        } else {
            int mid = fresh_point(dst_like);
            emit(cur, r, mid);
            cur = mid;
        }
    }

    void normalize_edge(const Edge& e) {
        int cur = e.src;
        if (auto* w = std::get_if<ArrayWrite>(&e.transition)) {
            std::vector<ArrayRead> reads;
            Term value = extract_reads(w->value, reads);
            std::vector<Term> idx;
            for (const auto& ix : w->index) idx.push_back(extract_reads(ix, reads));
            for (auto& r : reads) {
                add_scalar(r.target, r.target_sort);
                emit_read(r, cur, e.dst);
            }
            idx = atomize_indices(std::move(idx), cur, e.dst);
            emit(cur, ArrayWrite{w->array, std::move(idx), value}, e.dst);
            return;
        }
        if (auto* s = std::get_if<ScalarOp>(&e.transition)) {
            if (s->assigns.size() == 1 && s->guard.is_true()) {
                const auto& [lhs, rhs] = s->assigns[0];
                if (rhs.kind() == TermKind::Cell) {
                    // Plain read statement: v = a[i].
                    std::vector<ArrayRead> inner;
                    std::vector<Term> idx;
                    for (const auto& ix : rhs.n().args) idx.push_back(extract_reads(ix, inner));
                    for (auto& r : inner) {
                        add_scalar(r.target, r.target_sort);
                        emit_read(r, cur, e.dst);
                    }
                    idx = atomize_indices(std::move(idx), cur, e.dst);
                    ArrayRead r{rhs.n().name, std::move(idx), lhs, rhs.sort()};
                    bool clashes = false;
                    for (const auto& ix : r.index)
                        if (ix.is_var() && ix.n().name == r.target) clashes = true;
                    if (!clashes) {
                        emit(cur, r, e.dst);
                        return;
                    }
                    std::string temp = fresh_temp("r");
                    add_scalar(temp, r.target_sort);
                    r.target = temp;
                    int mid = fresh_point(e.dst);
                    emit(cur, r, mid);
                    emit(mid, ScalarOp{Term::bool_lit(true),
                                       {{lhs, Term::var(temp, rhs.sort())}}},
                         e.dst);
                    return;
                }
            }
            // General scalar op: hoist any reads buried in assignments.
            ScalarOp op = *s;
            std::vector<ArrayRead> reads;
            for (auto& [lhs, rhs] : op.assigns) rhs = extract_reads(rhs, reads);
            for (auto& r : reads) {
                add_scalar(r.target, r.target_sort);
                emit_read(r, cur, e.dst);
            }
            emit(cur, std::move(op), e.dst);
            return;
        }
        emit(cur, e.transition, e.dst);
    }

    void renumber_edges() {
        for (size_t i = 0; i < out_.edges.size(); ++i)
            out_.edges[i].id = static_cast<int>(i);
    }
};

}  // namespace

Cfg normalize(const Cfg& c) { return Normalizer(c).run(); }

}  // namespace cellmorph
