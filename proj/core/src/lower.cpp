#include <algorithm>
#include <stdexcept>

#include "cellmorph/cfg.hpp"

namespace cellmorph {

std::string transition_str(const Transition& t) {
    if (auto* r = std::get_if<ArrayRead>(&t)) {
        std::string idx;
        for (size_t i = 0; i < r->index.size(); ++i) idx += (i ? "," : "") + r->index[i].str();
        return r->target + " := " + r->array + "[" + idx + "]";
    }
    if (auto* w = std::get_if<ArrayWrite>(&t)) {
        std::string idx;
        for (size_t i = 0; i < w->index.size(); ++i) idx += (i ? "," : "") + w->index[i].str();
        return w->array + "[" + idx + "] := " + w->value.str();
    }
    if (auto* s = std::get_if<ScalarOp>(&t)) {
        std::string out;
        if (!s->guard.is_true()) out += s->guard.str();
        for (const auto& [v, e] : s->assigns) {
            if (!out.empty()) out += "; ";
            out += v + " := " + e.str();
        }
        return out.empty() ? "skip" : out;
    }
    if (auto* k = std::get_if<Kill>(&t)) {
        std::string out = "kill(";
        for (size_t i = 0; i < k->vars.size(); ++i) out += (i ? "," : "") + k->vars[i];
        return out + ")";
    }
    if (auto* i = std::get_if<ArrayInit>(&t)) return "init " + i->array;
    if (auto* m = std::get_if<MultisetOp>(&t))
        return m->target + " := " +
               (m->kind == MultisetOp::Kind::Union ? "union(" : "intersection(") + m->lhs + "," +
               m->rhs + ")";
    return "?";
}

namespace {

class Lowering {
public:
    explicit Lowering(const Program& p) : prog_(p) {
        cfg_.scalar_decls = p.scalars;
        cfg_.arrays = p.arrays;
        cfg_.properties = p.properties;
    }

    Cfg run() {
        int cur = new_point("init");
        cfg_.entry = cur;
        std::vector<std::string> in_scope;
        for (const auto& a : prog_.arrays) {
            int next = new_point("");
            add_edge(cur, ArrayInit{a.name}, next);
            in_scope.push_back(a.name);
            cfg_.point(next).arrays = in_scope;
            cur = next;
        }
        // Points created later see every array.
        all_arrays_ = in_scope;
        cur = lower_list(prog_.body, cur);
        if (cfg_.point(cur).name.empty()) cfg_.point(cur).name = "end";
        cfg_.exits = {cur};
        compact();
        return std::move(cfg_);
    }

private:
    const Program& prog_;
    Cfg cfg_;
    std::vector<std::string> all_arrays_;
    int next_id_ = 0;

    int new_point(const std::string& name) {
        ControlPoint p;
        p.id = next_id_++;
        p.name = name;
        for (const auto& d : prog_.scalars) p.scalars.push_back({d.name, d.sort});
        p.arrays = all_arrays_;
        cfg_.points.push_back(std::move(p));
        return cfg_.points.back().id;
    }

    void add_edge(int src, Transition t, int dst) {
        Edge e;
        e.id = static_cast<int>(cfg_.edges.size());
        e.src = src;
        e.dst = dst;
        e.transition = std::move(t);
        cfg_.edges.push_back(std::move(e));
    }

    void set_label(int point, const std::string& label) {
        if (label.empty()) return;
        for (const auto& p : cfg_.points)
            if (p.name == label && p.id != point)
                throw std::runtime_error("label collides with point name: " + label);
        cfg_.point(point).name = label;
    }

    // Redirects every edge ending at `from` to `to` and drops `from`.
    void merge_point(int from, int to) {
        if (from == to) return;
        for (auto& e : cfg_.edges) {
            if (e.src == from) e.src = to;
            if (e.dst == from) e.dst = to;
        }
        cfg_.points.erase(
            std::remove_if(cfg_.points.begin(), cfg_.points.end(),
                           [&](const ControlPoint& p) { return p.id == from; }),
            cfg_.points.end());
    }

    int lower_list(const StmtList& list, int cur) {
        for (const auto& s : list) cur = lower_stmt(s, cur);
        return cur;
    }

    int lower_stmt(const Stmt& s, int cur) {
        set_label(cur, s.label);
        switch (s.kind) {
            case Stmt::Kind::Assign: {
                int next = new_point("");
                add_edge(cur, ScalarOp{Term::bool_lit(true), {{s.assign.lhs, s.assign.rhs}}},
                         next);
                return next;
            }
            case Stmt::Kind::Store: {
                int next = new_point("");
                add_edge(cur, ArrayWrite{s.store.array, s.store.index, s.store.value}, next);
                return next;
            }
            case Stmt::Kind::Assume: {
                int next = new_point("");
                add_edge(cur, ScalarOp{s.assume.cond, {}}, next);
                return next;
            }
            case Stmt::Kind::While: {
                int head = cur;
                int body_start = new_point("");
                add_edge(head, ScalarOp{s.while_.cond, {}}, body_start);
                int body_end = lower_list(*s.while_.body, body_start);
                merge_point(body_end, head);
                int after = new_point("");
                add_edge(head, ScalarOp{Term::not_(s.while_.cond), {}}, after);
                return after;
            }
            case Stmt::Kind::If: {
                int then_start = new_point("");
                add_edge(cur, ScalarOp{s.if_.cond, {}}, then_start);
                int join = lower_list(*s.if_.then_body, then_start);
                if (s.if_.else_body) {
                    int else_start = new_point("");
                    add_edge(cur, ScalarOp{Term::not_(s.if_.cond), {}}, else_start);
                    int else_end = lower_list(*s.if_.else_body, else_start);
                    merge_point(else_end, join);
                } else {
                    add_edge(cur, ScalarOp{Term::not_(s.if_.cond), {}}, join);
                }
                return join;
            }
        }
        throw std::logic_error("unreachable");
    }

    // Renumber ids densely, name anonymous points p<k>, keep edge order.
    void compact() {
        std::map<int, int> remap;
        for (size_t i = 0; i < cfg_.points.size(); ++i) {
            remap[cfg_.points[i].id] = static_cast<int>(i);
            cfg_.points[i].id = static_cast<int>(i);
        }
        for (auto& e : cfg_.edges) {
            e.src = remap.at(e.src);
            e.dst = remap.at(e.dst);
        }
        cfg_.entry = remap.at(cfg_.entry);
        for (auto& x : cfg_.exits) x = remap.at(x);
        for (auto& p : cfg_.points)
            if (p.name.empty()) p.name = "p" + std::to_string(p.id);
    }
};

}  // namespace

Cfg lower_to_cfg(const Program& p) { return Lowering(p).run(); }

}  // namespace cellmorph
