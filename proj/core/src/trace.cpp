#include <functional>
#include <sstream>

#include "cellmorph/trace.hpp"

namespace cellmorph {

Trace extract_branch(const HornSystem& s, const DerivationTree& t) {
    Trace tr;
    if (!t.root) return tr;
    tr.goal_clause = t.root->clause;
    tr.goal_assignment = t.root->assignment;
    std::vector<const DerivationNode*> branch;
    const DerivationNode* cur = t.root->children.empty() ? nullptr : t.root->children[0].get();
    while (cur) {
        branch.push_back(cur);
        cur = cur->children.empty() ? nullptr : cur->children[0].get();
    }
    // Leaf-to-root is execution order.
    for (auto it = branch.rbegin(); it != branch.rend(); ++it) {
        TraceStep step;
        step.clause = (*it)->clause;
        if ((*it)->clause < s.provenance.size()) {
            step.rule = s.provenance[(*it)->clause].rule;
            step.edges = s.provenance[(*it)->clause].edges;
        }
        step.assignment = (*it)->assignment;
        tr.steps.push_back(std::move(step));
    }
    return tr;
}

namespace {

struct Ssa {
    std::map<std::string, int> scalar_ver;
    std::map<std::string, int> array_ver;
    std::map<std::string, Sort> scalar_sort;

    std::string scalar(const std::string& name) const {
        auto it = scalar_ver.find(name);
        return name + "!" + std::to_string(it == scalar_ver.end() ? 0 : it->second);
    }
    std::string array(const std::string& name) const {
        auto it = array_ver.find(name);
        return name + "!" + std::to_string(it == array_ver.end() ? 0 : it->second);
    }
};

std::string render(const Term& t, const std::function<std::string(const std::string&)>& var) {
    const TermNode& n = t.n();
    auto bin = [&](const char* op) {
        return "(" + std::string(op) + " " + render(n.args[0], var) + " " +
               render(n.args[1], var) + ")";
    };
    switch (n.kind) {
        case TermKind::Var: return var(n.name);
        case TermKind::Lit:
        case TermKind::BoolLit: return t.smt();
        case TermKind::Add: return bin("+");
        case TermKind::Sub: return bin("-");
        case TermKind::Neg: return "(- " + render(n.args[0], var) + ")";
        case TermKind::MulConst:
            return "(* " + Term::int_lit(n.lit.num).smt() + " " + render(n.args[0], var) + ")";
        case TermKind::ModConst:
            return "(mod " + render(n.args[0], var) + " " + std::to_string(n.lit.num) + ")";
        case TermKind::Eq: return bin("=");
        case TermKind::Ne:
            return "(not (= " + render(n.args[0], var) + " " + render(n.args[1], var) + "))";
        case TermKind::Lt: return bin("<");
        case TermKind::Le: return bin("<=");
        case TermKind::Gt: return bin(">");
        case TermKind::Ge: return bin(">=");
        case TermKind::And: return bin("and");
        case TermKind::Or: return bin("or");
        case TermKind::Not: return "(not " + render(n.args[0], var) + ")";
        default: throw std::runtime_error("cell/count term in scalar context");
    }
}

std::string array_sort_smt(const ArrayDecl& a) {
    std::string val = sort_name(a.value_sort);
    if (a.index == IndexKind::Real1) return "(Array Real " + val + ")";
    if (a.index == IndexKind::Int2) return "(Array Int (Array Int " + val + "))";
    return "(Array Int " + val + ")";
}

std::string select_smt(const ArrayDecl& a, const std::string& arr,
                       const std::vector<std::string>& idx) {
    if (a.index == IndexKind::Int2)
        return "(select (select " + arr + " " + idx[0] + ") " + idx[1] + ")";
    return "(select " + arr + " " + idx[0] + ")";
}

}  // namespace

std::string trace_to_concrete_formula(const Trace& tr, const Cfg& cfg, const HornSystem& s) {
    std::ostringstream os;
    bool reals = false;
    for (const auto& a : cfg.arrays)
        if (a.index == IndexKind::Real1 || a.value_sort == Sort::Real) reals = true;
    for (const auto& d : cfg.scalar_decls)
        if (d.sort == Sort::Real) reals = true;
    os << "(set-logic " << (reals ? "QF_AUFLIRA" : "QF_AUFLIA") << ")\n";

    Ssa ssa;
    std::ostringstream decls, body;
    for (const auto& d : cfg.scalar_decls) ssa.scalar_sort[d.name] = d.sort;

    auto declare_scalar = [&](const std::string& name) {
        Sort sort = ssa.scalar_sort.count(name) ? ssa.scalar_sort[name] : Sort::Int;
        decls << "(declare-const " << ssa.scalar(name) << " " << sort_name(sort) << ")\n";
    };
    auto declare_array = [&](const ArrayDecl& a) {
        decls << "(declare-const " << ssa.array(a.name) << " " << array_sort_smt(a) << ")\n";
    };
    auto var_ref = [&](const std::string& name) { return ssa.scalar(name); };

    // Entry scalars (inputs) at version 0.
    for (const auto& v : cfg.point(cfg.entry).scalars) {
        ssa.scalar_ver[v.name] = 0;
        declare_scalar(v.name);
    }

    auto edge_by_id = [&](int id) -> const Edge* {
        for (const auto& e : cfg.edges)
            if (e.id == id) return &e;
        return nullptr;
    };

    for (const auto& step : tr.steps) {
        body << "; step c" << step.clause << " [" << step.rule << "]";
        for (const auto& [k, v] : step.assignment) body << " " << k << "=" << v.str();
        body << "  (abstract hint values)\n";
        for (int eid : step.edges) {
            const Edge* e = edge_by_id(eid);
            if (!e) continue;
            if (auto* init = std::get_if<ArrayInit>(&e->transition)) {
                const ArrayDecl* a = cfg.find_array(init->array);
                ssa.array_ver[init->array] = 0;
                declare_array(*a);
                if (a->copy_of) {
                    body << "(assert (= " << ssa.array(init->array) << " "
                         << ssa.array(*a->copy_of) << "))\n";
                } else if (a->init_value) {
                    body << "(assert (= " << ssa.array(init->array) << " ((as const "
                         << array_sort_smt(*a) << ") " << a->init_value->smt() << ")))\n";
                }
            } else if (auto* r = std::get_if<ArrayRead>(&e->transition)) {
                const ArrayDecl* a = cfg.find_array(r->array);
                std::vector<std::string> idx;
                for (const auto& ix : r->index) idx.push_back(render(ix, var_ref));
                std::string sel = select_smt(*a, ssa.array(r->array), idx);
                ssa.scalar_ver[r->target]++;
                declare_scalar(r->target);
                body << "(assert (= " << ssa.scalar(r->target) << " " << sel << "))\n";
            } else if (auto* w = std::get_if<ArrayWrite>(&e->transition)) {
                const ArrayDecl* a = cfg.find_array(w->array);
                std::vector<std::string> idx;
                for (const auto& ix : w->index) idx.push_back(render(ix, var_ref));
                std::string val = render(w->value, var_ref);
                std::string old = ssa.array(w->array);
                ssa.array_ver[w->array]++;
                declare_array(*a);
                if (a->index == IndexKind::Int2) {
                    body << "(assert (= " << ssa.array(w->array) << " (store " << old << " "
                         << idx[0] << " (store (select " << old << " " << idx[0] << ") " << idx[1]
                         << " " << val << "))))\n";
                } else {
                    body << "(assert (= " << ssa.array(w->array) << " (store " << old << " "
                         << idx[0] << " " << val << ")))\n";
                }
            } else if (auto* op = std::get_if<ScalarOp>(&e->transition)) {
                if (!op->guard.is_true())
                    body << "(assert " << render(op->guard, var_ref) << ")\n";
                std::vector<std::pair<std::string, std::string>> rhs;
                for (const auto& [lhs, expr] : op->assigns)
                    rhs.emplace_back(lhs, render(expr, var_ref));
                for (const auto& [lhs, expr] : rhs) {
                    ssa.scalar_ver[lhs]++;
                    declare_scalar(lhs);
                    body << "(assert (= " << ssa.scalar(lhs) << " " << expr << "))\n";
                }
            }
            // Kill edges leave the formula unchanged.
        }
    }

    // Negated property instance at the end of the branch.
    const HornClause& goal = s.clauses[tr.goal_clause];
    const PredicateSig& sig = s.pred(goal.body[0].pred);
    std::map<std::string, std::string> special;
    auto slots = sig.slots();
    size_t pos = 0;
    for (const auto& blk : sig.blocks) {
        if (blk.counts)
            throw std::runtime_error("count abstractions have no first-order trace formula");
    }
    for (size_t i = 0; i < slots.size() && i < goal.body[0].args.size(); ++i) {
        (void)pos;
        const Term& arg = goal.body[0].args[i];
        // scalar slots map to final SSA versions
        bool is_scalar = false;
        for (const auto& sc : sig.scalars)
            if (sc.name == slots[i].name) is_scalar = true;
        if (is_scalar && arg.is_var()) special[arg.n().name] = ssa.scalar(slots[i].name);
    }
    // Cell value variables become selects over the final arrays.
    for (const auto& blk : sig.blocks) {
        const ArrayDecl* a = cfg.find_array(blk.array);
        for (int c = 0; c < blk.cells; ++c) {
            // find slot positions of this cell's index/value
            std::vector<std::string> idx;
            for (int d = 0; d < blk.dims; ++d) {
                const std::string& slot = blk.index_names[static_cast<size_t>(c * blk.dims + d)];
                for (size_t i = 0; i < slots.size(); ++i)
                    if (slots[i].name == slot)
                        idx.push_back(render(goal.body[0].args[i],
                                             [&](const std::string& v) {
                                                 auto it = special.find(v);
                                                 return it != special.end() ? it->second
                                                                            : "q!" + v;
                                             }));
            }
            const std::string& vslot = blk.value_names[static_cast<size_t>(c)];
            for (size_t i = 0; i < slots.size(); ++i) {
                if (slots[i].name != vslot) continue;
                const Term& arg = goal.body[0].args[i];
                if (arg.is_var())
                    special[arg.n().name] = select_smt(*a, ssa.array(blk.array), idx);
            }
        }
    }
    std::ostringstream prop;
    std::set<std::string> declared_binders;
    auto prop_var = [&](const std::string& v) -> std::string {
        auto it = special.find(v);
        if (it != special.end()) return it->second;
        if (ssa.scalar_ver.count(v)) return ssa.scalar(v);
        if (!declared_binders.count(v)) {
            Sort sort = Sort::Int;
            for (const auto& u : goal.universals)
                if (u.name == v) sort = u.sort;
            decls << "(declare-const q!" << v << " " << sort_name(sort) << ")\n";
            declared_binders.insert(v);
        }
        return "q!" + v;
    };
    prop << "; negated property instance\n";
    if (!goal.constraint.is_true()) prop << "(assert " << render(goal.constraint, prop_var) << ")\n";
    prop << "(assert (not " << render(goal.goal->constraint, prop_var) << "))\n";
    for (const auto& [k, v] : tr.goal_assignment)
        prop << "; hint " << k << " = " << v.str() << "\n";

    os << decls.str() << body.str() << prop.str();
    os << "(check-sat)\n(get-model)\n";
    return os.str();
}

std::optional<ConcreteWitness> bounded_trace_witness(const Trace& tr, const Cfg& cfg,
                                                     const HornSystem& s, const Bounds& b) {
    Oracle oracle(cfg, b);
    std::vector<int> edges;
    for (const auto& step : tr.steps)
        for (int e : step.edges) edges.push_back(e);
    auto edge_by_id = [&](int id) -> const Edge* {
        for (const auto& e : cfg.edges)
            if (e.id == id) return &e;
        return nullptr;
    };
    for (const auto& init : oracle.initial_states()) {
        std::vector<std::vector<std::pair<int, OracleState>>> paths{{}};
        std::vector<OracleState> frontier{init};
        std::vector<std::vector<std::pair<int, OracleState>>> new_paths;
        std::vector<OracleState> next;
        bool dead = false;
        for (int eid : edges) {
            const Edge* e = edge_by_id(eid);
            if (!e) {
                dead = true;
                break;
            }
            new_paths.clear();
            next.clear();
            for (size_t i = 0; i < frontier.size(); ++i) {
                for (auto& n : oracle.step(*e, frontier[i])) {
                    auto p = paths[i];
                    p.emplace_back(eid, n);
                    new_paths.push_back(std::move(p));
                    next.push_back(std::move(n));
                    if (next.size() > 4096) break;  // bounded search
                }
            }
            paths = new_paths;
            frontier = next;
            if (frontier.empty()) {
                dead = true;
                break;
            }
        }
        if (dead) continue;
        for (size_t i = 0; i < frontier.size(); ++i) {
            const PredicateSig& sig = s.pred(s.clauses[tr.goal_clause].body[0].pred);
            Tables tables;
            for (auto& tup : oracle.state_tuples(sig, frontier[i]))
                tables.rows[sig.id].insert(std::move(tup));
            auto env = oracle.find_goal_violation(s, tr.goal_clause, tables);
            if (env) {
                ConcreteWitness w;
                w.initial = init;
                w.path = paths[i];
                w.binders = *env;
                return w;
            }
        }
    }
    return std::nullopt;
}

bool replay_witness(const ConcreteWitness& w, const Trace& tr, const Cfg& cfg,
                    const HornSystem& s, const Bounds& b) {
    Oracle oracle(cfg, b);
    OracleState cur = w.initial;
    for (const auto& [eid, after] : w.path) {
        const Edge* e = nullptr;
        for (const auto& cand : cfg.edges)
            if (cand.id == eid) e = &cand;
        if (!e) return false;
        bool matched = false;
        for (const auto& n : oracle.step(*e, cur))
            if (!(n < after) && !(after < n)) {
                matched = true;
                break;
            }
        if (!matched) return false;
        cur = after;
    }
    const PredicateSig& sig = s.pred(s.clauses[tr.goal_clause].body[0].pred);
    Tables tables;
    for (auto& tup : oracle.state_tuples(sig, cur)) tables.rows[sig.id].insert(std::move(tup));
    return oracle.find_goal_violation(s, tr.goal_clause, tables).has_value();
}

std::string witness_str(const ConcreteWitness& w, const Cfg& cfg) {
    std::ostringstream os;
    os << "initial:";
    for (const auto& [k, v] : w.initial.scalars) os << " " << k << "=" << v.str();
    for (size_t a = 0; a < cfg.arrays.size(); ++a) {
        if (w.initial.arrays[a].empty() && w.initial.dims[a].empty()) continue;
        os << " " << cfg.arrays[a].name << "=[";
        for (size_t i = 0; i < w.initial.arrays[a].size(); ++i)
            os << (i ? "," : "") << w.initial.arrays[a][i].str();
        os << "]";
    }
    os << "\n";
    for (const auto& [eid, st] : w.path) {
        const Edge* e = nullptr;
        for (const auto& cand : cfg.edges)
            if (cand.id == eid) e = &cand;
        os << "  edge " << eid << (e ? " " + transition_str(e->transition) : "") << " ->";
        for (const auto& [k, v] : st.scalars) os << " " << k << "=" << v.str();
        for (size_t a = 0; a < cfg.arrays.size(); ++a) {
            if (st.arrays[a].empty()) continue;
            os << " " << cfg.arrays[a].name << "=[";
            for (size_t i = 0; i < st.arrays[a].size(); ++i)
                os << (i ? "," : "") << st.arrays[a][i].str();
            os << "]";
        }
        os << "\n";
    }
    os << "violated instance:";
    for (const auto& [k, v] : w.binders) os << " " << k << "=" << v.str();
    os << "\n";
    return os.str();
}

}  // namespace cellmorph
