#include <algorithm>
#include <set>

#include "cellmorph/simplify.hpp"

namespace cellmorph {

namespace {

bool is_universal(const HornClause& c, const std::string& name) {
    for (const auto& u : c.universals)
        if (u.name == name) return true;
    return false;
}

void drop_universal(HornClause& c, const std::string& name) {
    c.universals.erase(std::remove_if(c.universals.begin(), c.universals.end(),
                                      [&](const ScalarVar& v) { return v.name == name; }),
                       c.universals.end());
}

void apply_subst(HornClause& c, const std::map<std::string, Term>& m) {
    for (auto& a : c.body)
        for (auto& t : a.args) t = t.substitute(m);
    if (c.head)
        for (auto& t : c.head->args) t = t.substitute(m);
    if (c.goal) c.goal->constraint = c.goal->constraint.substitute(m);
    c.constraint = c.constraint.substitute(m);
}

// One round of equality elimination on a single clause.
bool subst_step(HornClause& c) {
    auto conj = c.constraint.conjuncts();
    for (size_t i = 0; i < conj.size(); ++i) {
        const Term& t = conj[i];
        if (t.kind() != TermKind::Eq) continue;
        const Term& lhs = t.n().args[0];
        const Term& rhs = t.n().args[1];
        const Term* var = nullptr;
        const Term* repl = nullptr;
        if (lhs.is_var() && is_universal(c, lhs.n().name) && !rhs.mentions(lhs.n().name)) {
            var = &lhs;
            repl = &rhs;
        } else if (rhs.is_var() && is_universal(c, rhs.n().name) && !lhs.mentions(rhs.n().name)) {
            var = &rhs;
            repl = &lhs;
        } else {
            continue;
        }
        std::map<std::string, Term> m{{var->n().name, *repl}};
        std::vector<Term> rest;
        for (size_t j = 0; j < conj.size(); ++j)
            if (j != i) rest.push_back(conj[j].substitute(m));
        c.constraint = Term::conjoin(rest);
        drop_universal(c, var->n().name);
        apply_subst(c, m);
        return true;
    }
    return false;
}

std::vector<std::string> atom_vars(const Atom& a) {
    std::vector<std::string> out;
    for (const auto& t : a.args) t.collect_vars(out);
    return out;
}

// Drops duplicate conjuncts (stable, syntactic), unused universals, and
// composition suffixes whose base name has become free again.
void tidy(HornClause& c) {
    std::vector<Term> conj;
    std::set<std::string> seen;
    for (const auto& t : c.constraint.conjuncts())
        if (seen.insert(t.str()).second) conj.push_back(t);
    c.constraint = Term::conjoin(conj);
    std::set<std::string> used;
    auto mark = [&](const Term& t) {
        for (const auto& v : t.vars()) used.insert(v);
    };
    for (const auto& a : c.body)
        for (const auto& t : a.args) mark(t);
    if (c.head)
        for (const auto& t : c.head->args) mark(t);
    if (c.goal) mark(c.goal->constraint);
    mark(c.constraint);
    c.universals.erase(std::remove_if(c.universals.begin(), c.universals.end(),
                                      [&](const ScalarVar& v) { return !used.count(v.name); }),
                       c.universals.end());

    std::map<std::string, std::string> rename;
    std::set<std::string> taken;
    for (const auto& u : c.universals) taken.insert(u.name);
    for (auto& u : c.universals) {
        auto tilde = u.name.find('~');
        if (tilde == std::string::npos) continue;
        std::string base = u.name.substr(0, tilde);
        if (taken.count(base)) continue;
        rename[u.name] = base;
        taken.erase(u.name);
        taken.insert(base);
        u.name = base;
    }
    if (rename.empty()) return;
    std::map<std::string, Term> sub;
    for (const auto& [from, to] : rename)
        sub[from] = Term::var(to, Sort::Int);
    // Sort-correct substitution: rebuild per universal sort.
    sub.clear();
    for (const auto& u : c.universals) {
        for (const auto& [from, to] : rename)
            if (u.name == to) sub[from] = Term::var(to, u.sort);
    }
    apply_subst(c, sub);
}

// Renames `from`'s universals apart from `taken`; returns the rename map.
std::map<std::string, Term> freshen(std::vector<ScalarVar>& vars,
                                    std::set<std::string>& taken) {
    std::map<std::string, Term> m;
    for (auto& v : vars) {
        if (!taken.count(v.name)) {
            taken.insert(v.name);
            continue;
        }
        std::string name = v.name;
        int i = 1;
        while (taken.count(name)) name = v.name + "~" + std::to_string(i++);
        m[v.name] = Term::var(name, v.sort);
        v.name = name;
        taken.insert(name);
    }
    return m;
}

struct Occurrence {
    size_t clause;
    size_t atom;
};

struct Usage {
    std::vector<size_t> defs;          // clauses with this head
    std::vector<Occurrence> uses;      // body occurrences
    bool protected_ = false;           // appears in a goal clause body
    bool self_recursive = false;
};

std::map<int, Usage> usage_of(const HornSystem& s) {
    std::map<int, Usage> u;
    for (const auto& p : s.preds) u[p.id];
    for (size_t i = 0; i < s.clauses.size(); ++i) {
        const HornClause& c = s.clauses[i];
        if (c.head) u[c.head->pred].defs.push_back(i);
        for (size_t j = 0; j < c.body.size(); ++j) {
            u[c.body[j].pred].uses.push_back({i, j});
            if (c.is_goal()) u[c.body[j].pred].protected_ = true;
            if (c.head && c.head->pred == c.body[j].pred)
                u[c.body[j].pred].self_recursive = true;
        }
    }
    return u;
}

bool pattern_distinct_vars(const Atom& a) {
    std::set<std::string> seen;
    for (const auto& t : a.args) {
        if (!t.is_var()) return false;
        if (!seen.insert(t.n().name).second) return false;
    }
    return true;
}

struct Merged {
    HornClause clause;
    Provenance prov;
};

Merged compose(const HornSystem& s, size_t def_idx, size_t use_idx, size_t atom_pos) {
    const HornClause& def = s.clauses[def_idx];
    const HornClause& use = s.clauses[use_idx];
    HornClause out = use;
    std::set<std::string> taken;
    for (const auto& v : out.universals) taken.insert(v.name);
    std::vector<ScalarVar> dvars = def.universals;
    std::map<std::string, Term> ren = freshen(dvars, taken);
    Atom target = out.body[atom_pos];
    out.body.erase(out.body.begin() + static_cast<long>(atom_pos));
    for (const auto& a : def.body) {
        Atom copy = a;
        for (auto& t : copy.args) t = t.substitute(ren);
        out.body.push_back(copy);
    }
    Term bridge = def.constraint.substitute(ren);
    for (size_t i = 0; i < target.args.size(); ++i)
        bridge = Term::and_(bridge, Term::eq(def.head->args[i].substitute(ren), target.args[i]));
    out.constraint = Term::and_(out.constraint, bridge);
    for (const auto& v : dvars) out.universals.push_back(v);
    while (subst_step(out)) {
    }
    tidy(out);
    Merged m;
    m.clause = std::move(out);
    m.prov.edges = s.provenance[def_idx].edges;
    for (int e : s.provenance[use_idx].edges) m.prov.edges.push_back(e);
    m.prov.rule = s.provenance[use_idx].rule == "kill" || s.provenance[use_idx].rule == "scalar"
                      ? s.provenance[def_idx].rule
                      : s.provenance[use_idx].rule;
    m.prov.is_hint = s.provenance[use_idx].is_hint;
    return m;
}

void prune_preds(HornSystem& s) {
    std::set<int> used;
    for (const auto& c : s.clauses) {
        if (c.head) used.insert(c.head->pred);
        for (const auto& a : c.body) used.insert(a.pred);
    }
    std::map<int, int> remap;
    std::vector<PredicateSig> kept;
    for (const auto& p : s.preds) {
        if (!used.count(p.id)) continue;
        remap[p.id] = static_cast<int>(kept.size());
        kept.push_back(p);
        kept.back().id = remap[p.id];
    }
    for (auto& c : s.clauses) {
        if (c.head) c.head->pred = remap.at(c.head->pred);
        for (auto& a : c.body) a.pred = remap.at(a.pred);
    }
    std::map<int, int> new_point_pred;
    for (const auto& [pt, pid] : s.point_pred)
        if (remap.count(pid)) new_point_pred[pt] = remap.at(pid);
    s.point_pred = std::move(new_point_pred);
    s.preds = std::move(kept);
}

}  // namespace

HornSystem substitute_equalities(const HornSystem& s) {
    HornSystem out = s;
    for (auto& c : out.clauses) {
        while (subst_step(c)) {
        }
        tidy(c);
    }
    return out;
}

namespace {

enum class Rule { Chain, Inline, Resolve };

bool try_rule(HornSystem& cur, Rule rule) {
    auto usage = usage_of(cur);
    for (const auto& p : cur.preds) {
        const Usage& u = usage.at(p.id);
        if (u.protected_ || u.self_recursive) continue;
        if (u.defs.empty()) continue;

        const HornClause& def0 = cur.clauses[u.defs[0]];
        bool def_linear = u.defs.size() == 1 && def0.body.size() <= 1;

        if (rule == Rule::Chain && def_linear && u.uses.size() == 1) {
            size_t use_idx = u.uses[0].clause;
            if (use_idx == u.defs[0]) continue;
            Merged m = compose(cur, u.defs[0], use_idx, u.uses[0].atom);
            HornSystem next;
            next.preds = cur.preds;
            next.point_pred = cur.point_pred;
            for (size_t i = 0; i < cur.clauses.size(); ++i) {
                if (i == u.defs[0]) continue;
                if (i == use_idx) {
                    next.clauses.push_back(m.clause);
                    next.provenance.push_back(m.prov);
                    continue;
                }
                next.clauses.push_back(cur.clauses[i]);
                next.provenance.push_back(cur.provenance[i]);
            }
            prune_preds(next);
            cur = std::move(next);
            return true;
        }

        if (rule == Rule::Inline && def_linear && def0.body.size() == 1 &&
            def0.constraint.is_true() && pattern_distinct_vars(def0.body[0]) &&
            u.uses.size() >= 2) {
            std::set<size_t> use_clauses;
            for (const auto& occ : u.uses) use_clauses.insert(occ.clause);
            if (use_clauses.count(u.defs[0])) continue;
            HornSystem next;
            next.preds = cur.preds;
            next.point_pred = cur.point_pred;
            for (size_t i = 0; i < cur.clauses.size(); ++i) {
                if (i == u.defs[0]) continue;
                if (!use_clauses.count(i)) {
                    next.clauses.push_back(cur.clauses[i]);
                    next.provenance.push_back(cur.provenance[i]);
                    continue;
                }
                // Replace every occurrence, one at a time.
                HornSystem tmp;
                tmp.preds = cur.preds;
                tmp.clauses = {cur.clauses[u.defs[0]], cur.clauses[i]};
                tmp.provenance = {cur.provenance[u.defs[0]], cur.provenance[i]};
                for (;;) {
                    size_t pos = tmp.clauses[1].body.size();
                    for (size_t j = 0; j < tmp.clauses[1].body.size(); ++j)
                        if (tmp.clauses[1].body[j].pred == p.id) {
                            pos = j;
                            break;
                        }
                    if (pos == tmp.clauses[1].body.size()) break;
                    Merged m = compose(tmp, 0, 1, pos);
                    tmp.clauses[1] = m.clause;
                    tmp.provenance[1].rule = m.prov.rule;
                }
                Provenance prov = cur.provenance[i];
                std::vector<int> edges = cur.provenance[u.defs[0]].edges;
                for (int e : prov.edges) edges.push_back(e);
                prov.edges = std::move(edges);
                next.clauses.push_back(tmp.clauses[1]);
                next.provenance.push_back(prov);
            }
            prune_preds(next);
            cur = std::move(next);
            return true;
        }

        if (rule == Rule::Resolve && u.uses.size() == 1) {
            size_t use_idx = u.uses[0].clause;
            const HornClause& use = cur.clauses[use_idx];
            bool eligible = use.body.size() == 1 && use.constraint.is_true() &&
                            pattern_distinct_vars(use.body[0]) && use.head &&
                            use.head->pred != p.id;
            bool self_def = false;
            for (size_t d : u.defs)
                if (d == use_idx) self_def = true;
            if (!eligible || self_def) continue;
            HornSystem next;
            next.preds = cur.preds;
            next.point_pred = cur.point_pred;
            for (size_t i = 0; i < cur.clauses.size(); ++i) {
                if (i == use_idx) continue;
                bool is_def = std::find(u.defs.begin(), u.defs.end(), i) != u.defs.end();
                if (!is_def) {
                    next.clauses.push_back(cur.clauses[i]);
                    next.provenance.push_back(cur.provenance[i]);
                    continue;
                }
                Merged m = compose(cur, i, use_idx, 0);
                next.clauses.push_back(m.clause);
                next.provenance.push_back(m.prov);
            }
            prune_preds(next);
            cur = std::move(next);
            return true;
        }
    }
    return false;
}

}  // namespace

HornSystem coalesce(const HornSystem& s) {
    HornSystem cur = substitute_equalities(s);
    for (;;) {
        // Chain merges first: they keep the user-visible points.
        if (try_rule(cur, Rule::Chain)) continue;
        if (try_rule(cur, Rule::Inline)) continue;
        if (try_rule(cur, Rule::Resolve)) continue;
        break;
    }
    return cur;
}

HornSystem simplify(const HornSystem& s) { return coalesce(s); }

}  // namespace cellmorph
