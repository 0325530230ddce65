#include <algorithm>
#include <deque>
#include <functional>
#include <random>
#include <sstream>

#include "cellmorph/oracle.hpp"

namespace cellmorph {

namespace {

void collect_literals(const Term& t, std::set<int64_t>& out) {
    const TermNode& n = t.n();
    if (n.kind == TermKind::Lit && n.lit.is_int()) out.insert(n.lit.num);
    if ((n.kind == TermKind::MulConst || n.kind == TermKind::ModConst) && n.lit.is_int())
        out.insert(n.lit.num);
    for (const auto& a : n.args) collect_literals(a, out);
}

std::set<int64_t> program_literals(const Cfg& cfg) {
    std::set<int64_t> lits;
    for (const auto& e : cfg.edges) {
        if (auto* r = std::get_if<ArrayRead>(&e.transition)) {
            for (const auto& ix : r->index) collect_literals(ix, lits);
        } else if (auto* w = std::get_if<ArrayWrite>(&e.transition)) {
            for (const auto& ix : w->index) collect_literals(ix, lits);
            collect_literals(w->value, lits);
        } else if (auto* s = std::get_if<ScalarOp>(&e.transition)) {
            collect_literals(s->guard, lits);
            for (const auto& [v, t] : s->assigns) collect_literals(t, lits);
        }
    }
    for (const auto& p : cfg.properties) {
        collect_literals(p.guard, lits);
        collect_literals(p.conclusion, lits);
    }
    for (const auto& a : cfg.arrays) {
        if (a.init_value) collect_literals(*a.init_value, lits);
        for (const auto& r : a.range) collect_literals(r, lits);
    }
    return lits;
}

int64_t flatten(const std::vector<int64_t>& dims, const std::vector<int64_t>& idx) {
    int64_t pos = 0;
    for (size_t d = 0; d < dims.size(); ++d) {
        if (idx[d] < 0 || idx[d] >= dims[d]) return -1;
        pos = pos * dims[d] + idx[d];
    }
    return pos;
}

}  // namespace

Oracle::Oracle(const Cfg& cfg, const Bounds& b) : cfg_(cfg), bounds_(b) {
    std::set<int64_t> lits = program_literals(cfg);
    std::set<Value> vals;
    for (int64_t v = bounds_.lo; v <= bounds_.hi; ++v) vals.insert(Value(v));
    for (int64_t l : lits) vals.insert(Value(l));
    value_dom_.assign(vals.begin(), vals.end());
    std::set<Value> ints(vals.begin(), vals.end());
    ints.insert(Value(-1));
    for (int64_t k = 0; k <= bounds_.max_len; ++k) ints.insert(Value(k));
    int_dom_.assign(ints.begin(), ints.end());
    std::set<Value> reals;
    for (int64_t l : lits) reals.insert(Value(l));
    for (int64_t v = bounds_.lo; v <= bounds_.hi; ++v) reals.insert(Value(v));
    real_samples_.assign(reals.begin(), reals.end());
}

size_t Oracle::array_pos(const std::string& name) const {
    for (size_t i = 0; i < cfg_.arrays.size(); ++i)
        if (cfg_.arrays[i].name == name) return i;
    throw std::out_of_range("unknown array " + name);
}

std::vector<OracleState> Oracle::initial_states() const {
    const ControlPoint& entry = cfg_.point(cfg_.entry);
    std::vector<OracleState> out;
    OracleState base;
    base.arrays.resize(cfg_.arrays.size());
    base.arrays0.resize(cfg_.arrays.size());
    base.dims.resize(cfg_.arrays.size());
    std::function<void(size_t, OracleState&)> rec = [&](size_t i, OracleState& s) {
        if (i == entry.scalars.size()) {
            out.push_back(s);
            return;
        }
        const ScalarVar& v = entry.scalars[i];
        if (v.sort == Sort::Bool) {
            for (int64_t b = 0; b <= 1; ++b) {
                s.scalars[v.name] = Value(b);
                rec(i + 1, s);
            }
        } else {
            for (int64_t b = bounds_.lo; b <= bounds_.hi; ++b) {
                s.scalars[v.name] = Value(b);
                rec(i + 1, s);
            }
        }
    };
    rec(0, base);
    return out;
}

std::vector<std::vector<Value>> Oracle::index_points(size_t pos, const OracleState& s) const {
    const ArrayDecl& decl = cfg_.arrays[pos];
    std::vector<std::vector<Value>> pts;
    if (decl.index == IndexKind::Real1) {
        for (const auto& r : real_samples_) pts.push_back({r});
        return pts;
    }
    const auto& dims = s.dims[pos];
    if (dims.empty()) return pts;
    if (dims.size() == 1) {
        for (int64_t k = 0; k < dims[0]; ++k) pts.push_back({Value(k)});
        return pts;
    }
    for (int64_t x = 0; x < dims[0]; ++x)
        for (int64_t y = 0; y < dims[1]; ++y) pts.push_back({Value(x), Value(y)});
    return pts;
}

std::vector<OracleState> Oracle::init_array(const OracleState& s, size_t pos) const {
    const ArrayDecl& decl = cfg_.arrays[pos];
    std::vector<int64_t> dims;
    if (decl.index == IndexKind::Real1) {
        dims = {static_cast<int64_t>(real_samples_.size())};
    } else if (decl.ranged()) {
        for (const auto& r : decl.range) {
            auto v = r.eval(s.scalars);
            if (!v || !v->is_int()) return {};
            int64_t len = std::max<int64_t>(0, v->num);
            if (len > bounds_.max_len) return {};  // outside the bounded window
            dims.push_back(len);
        }
    } else {
        dims.assign(static_cast<size_t>(decl.dims()), bounds_.max_len);
    }
    int64_t total = 1;
    for (int64_t d : dims) total *= d;

    std::vector<OracleState> out;
    auto finish = [&](std::vector<Value> contents) {
        OracleState next = s;
        next.dims[pos] = dims;
        next.arrays[pos] = contents;
        next.arrays0[pos] = std::move(contents);
        out.push_back(std::move(next));
    };

    if (decl.copy_of) {
        size_t src = array_pos(*decl.copy_of);
        OracleState next = s;
        next.dims[pos] = s.dims[src];
        next.arrays[pos] = s.arrays[src];
        next.arrays0[pos] = s.arrays[src];
        return {next};
    }
    if (decl.init_value) {
        auto v = decl.init_value->eval(s.scalars);
        if (!v) return {};
        finish(std::vector<Value>(static_cast<size_t>(total), *v));
        return out;
    }
    // Nondeterministic contents, exhaustive under the cap, sampled beyond it.
    size_t domain = value_dom_.size();
    double combos = 1;
    for (int64_t i = 0; i < total; ++i) combos *= static_cast<double>(domain);
    if (combos <= static_cast<double>(bounds_.init_combo_cap)) {
        std::vector<Value> contents(static_cast<size_t>(total));
        std::function<void(int64_t)> rec = [&](int64_t i) {
            if (i == total) {
                finish(contents);
                return;
            }
            for (const auto& v : value_dom_) {
                contents[static_cast<size_t>(i)] = v;
                rec(i + 1);
            }
        };
        rec(0);
    } else {
        std::mt19937 rng(12345);
        std::uniform_int_distribution<size_t> pick(0, domain - 1);
        // Constant fills first: they exercise the most corner cases.
        for (const auto& v : value_dom_)
            finish(std::vector<Value>(static_cast<size_t>(total), v));
        for (size_t n = 0; n < bounds_.init_combo_cap; ++n) {
            std::vector<Value> contents(static_cast<size_t>(total));
            for (auto& c : contents) c = value_dom_[pick(rng)];
            finish(std::move(contents));
        }
    }
    return out;
}

std::optional<Value> Oracle::eval_state(const OracleState& s, const Term& t) const {
    const TermNode& n = t.n();
    if (n.kind == TermKind::Cell) {
        size_t pos = array_pos(n.name);
        const ArrayDecl& decl = cfg_.arrays[pos];
        if (s.arrays[pos].empty() && s.dims[pos].empty()) return std::nullopt;
        if (decl.index == IndexKind::Real1) {
            auto iv = eval_state(s, n.args[0]);
            if (!iv) return std::nullopt;
            auto it = std::find(real_samples_.begin(), real_samples_.end(), *iv);
            if (it == real_samples_.end()) return std::nullopt;
            return s.arrays[pos][static_cast<size_t>(it - real_samples_.begin())];
        }
        std::vector<int64_t> idx;
        for (const auto& ix : n.args) {
            auto v = eval_state(s, ix);
            if (!v || !v->is_int()) return std::nullopt;
            idx.push_back(v->num);
        }
        int64_t p = flatten(s.dims[pos], idx);
        if (p < 0) return std::nullopt;
        return s.arrays[pos][static_cast<size_t>(p)];
    }
    if (n.kind == TermKind::Count) {
        size_t pos = array_pos(n.name);
        auto z = eval_state(s, n.args[0]);
        if (!z) return std::nullopt;
        const auto& contents = n.count_orig ? s.arrays0[pos] : s.arrays[pos];
        int64_t c = 0;
        for (const auto& v : contents)
            if (v == *z) ++c;
        return Value(c);
    }
    if (n.args.empty()) return t.eval(s.scalars);
    // Evaluate through the scalar evaluator after resolving array refs.
    if (!t.has_array_refs()) return t.eval(s.scalars);
    TermNode copy = n;
    Env extended = s.scalars;
    int fresh = 0;
    std::function<Term(const Term&)> resolve = [&](const Term& term) -> Term {
        const TermNode& tn = term.n();
        if (tn.kind == TermKind::Cell || tn.kind == TermKind::Count) {
            auto v = eval_state(s, term);
            if (!v) return Term();  // invalid marks failure
            std::string name = "!cell" + std::to_string(fresh++);
            extended[name] = *v;
            return Term::var(name, term.sort());
        }
        if (tn.args.empty()) return term;
        TermNode c2 = tn;
        for (auto& a : c2.args) {
            a = resolve(a);
            if (!a.valid()) return Term();
        }
        // Rebuild via substitute trick: construct manually.
        switch (c2.kind) {
            case TermKind::Add: return Term::add(c2.args[0], c2.args[1]);
            case TermKind::Sub: return Term::sub(c2.args[0], c2.args[1]);
            case TermKind::Neg: return Term::neg(c2.args[0]);
            case TermKind::MulConst: return Term::mul_const(c2.lit, c2.args[0]);
            case TermKind::ModConst: return Term::mod_const(c2.args[0], c2.lit.num);
            case TermKind::Eq:
            case TermKind::Ne:
            case TermKind::Lt:
            case TermKind::Le:
            case TermKind::Gt:
            case TermKind::Ge: return Term::cmp(c2.kind, c2.args[0], c2.args[1]);
            case TermKind::And: return Term::and_(c2.args[0], c2.args[1]);
            case TermKind::Or: return Term::or_(c2.args[0], c2.args[1]);
            case TermKind::Not: return Term::not_(c2.args[0]);
            default: return term;
        }
    };
    Term resolved = resolve(t);
    if (!resolved.valid()) return std::nullopt;
    return resolved.eval(extended);
}

std::vector<OracleState> Oracle::step(const Edge& e, const OracleState& s) const {
    const ControlPoint& dst = cfg_.point(e.dst);
    auto project = [&](OracleState next) {
        Env kept;
        for (const auto& v : dst.scalars) {
            auto it = next.scalars.find(v.name);
            if (it == next.scalars.end())
                throw std::logic_error("missing scalar " + v.name + " entering " + dst.name);
            kept[v.name] = it->second;
        }
        next.scalars = std::move(kept);
        return next;
    };

    if (auto* init = std::get_if<ArrayInit>(&e.transition)) {
        std::vector<OracleState> out;
        for (auto& n : init_array(s, array_pos(init->array))) out.push_back(project(n));
        return out;
    }
    if (auto* r = std::get_if<ArrayRead>(&e.transition)) {
        size_t pos = array_pos(r->array);
        const ArrayDecl& decl = cfg_.arrays[pos];
        if (decl.index == IndexKind::Real1) {
            auto iv = eval_state(s, r->index[0]);
            if (!iv) return {};
            auto it = std::find(real_samples_.begin(), real_samples_.end(), *iv);
            if (it == real_samples_.end()) return {};  // outside the sampled window
            OracleState next = s;
            next.scalars[r->target] =
                s.arrays[pos][static_cast<size_t>(it - real_samples_.begin())];
            return {project(std::move(next))};
        }
        std::vector<int64_t> idx;
        for (const auto& ix : r->index) {
            auto v = eval_state(s, ix);
            if (!v || !v->is_int()) return {};
            idx.push_back(v->num);
        }
        int64_t p = flatten(s.dims[pos], idx);
        if (p < 0) return {};  // out-of-range read stops the execution
        OracleState next = s;
        next.scalars[r->target] = s.arrays[pos][static_cast<size_t>(p)];
        return {project(std::move(next))};
    }
    if (auto* w = std::get_if<ArrayWrite>(&e.transition)) {
        size_t pos = array_pos(w->array);
        const ArrayDecl& decl = cfg_.arrays[pos];
        auto val = eval_state(s, w->value);
        if (!val) return {};
        int64_t p = -1;
        if (decl.index == IndexKind::Real1) {
            auto iv = eval_state(s, w->index[0]);
            if (!iv) return {};
            auto it = std::find(real_samples_.begin(), real_samples_.end(), *iv);
            if (it == real_samples_.end()) return {};
            p = it - real_samples_.begin();
        } else {
            std::vector<int64_t> idx;
            for (const auto& ix : w->index) {
                auto v = eval_state(s, ix);
                if (!v || !v->is_int()) return {};
                idx.push_back(v->num);
            }
            p = flatten(s.dims[pos], idx);
            if (p < 0) return {};  // writes outside the window stop the path
        }
        OracleState next = s;
        next.arrays[pos][static_cast<size_t>(p)] = *val;
        return {project(std::move(next))};
    }
    if (auto* op = std::get_if<ScalarOp>(&e.transition)) {
        auto g = eval_state(s, op->guard);
        if (!g) return {};
        if (!g->truthy()) return {};
        OracleState next = s;
        for (const auto& [lhs, rhs] : op->assigns) {
            auto v = eval_state(s, rhs);
            if (!v) return {};
            next.scalars[lhs] = *v;
        }
        return {project(std::move(next))};
    }
    if (std::get_if<Kill>(&e.transition)) {
        return {project(s)};
    }
    if (auto* m = std::get_if<MultisetOp>(&e.transition)) {
        size_t t = array_pos(m->target), l = array_pos(m->lhs), r = array_pos(m->rhs);
        OracleState next = s;
        size_t len = s.arrays[l].size();
        if (s.arrays[r].size() != len || s.arrays[t].size() != len) return {};
        for (size_t i = 0; i < len; ++i) {
            const Value& a = s.arrays[l][i];
            const Value& b = s.arrays[r][i];
            if (m->kind == MultisetOp::Kind::Union) {
                bool boolean = cfg_.arrays[t].value_sort == Sort::Bool;
                next.arrays[t][i] = boolean ? Value((a.truthy() || b.truthy()) ? 1 : 0) : a + b;
            } else {
                next.arrays[t][i] = Value((a.truthy() && b.truthy()) ? 1 : 0);
            }
        }
        return {project(std::move(next))};
    }
    return {};
}

const ReachSets& Oracle::interpret() {
    if (interpreted_) return reach_;
    interpreted_ = true;
    std::deque<std::pair<int, OracleState>> work;
    size_t total = 0;
    for (auto& s : initial_states()) {
        if (reach_[cfg_.entry].insert(s).second) {
            work.emplace_back(cfg_.entry, s);
            ++total;
        }
    }
    std::map<int, std::vector<const Edge*>> out_edges;
    for (const auto& e : cfg_.edges) out_edges[e.src].push_back(&e);
    while (!work.empty()) {
        auto [pt, s] = work.front();
        work.pop_front();
        for (const Edge* e : out_edges[pt]) {
            for (auto& n : step(*e, s)) {
                if (reach_[e->dst].insert(n).second) {
                    if (++total > bounds_.state_budget)
                        throw BudgetExceeded("state budget exceeded");
                    work.emplace_back(e->dst, std::move(n));
                }
            }
        }
    }
    return reach_;
}

// --- alpha ------------------------------------------------------------------

namespace {

int64_t count_value(const std::vector<Value>& contents, const Value& z) {
    int64_t c = 0;
    for (const auto& v : contents)
        if (v == z) ++c;
    return c;
}

// Count adjustment of the virtual states inside a count-tracked write:
// phase 0 decrements at the old cell value, phase 1 also increments at the
// written value.
struct VirtualWrite {
    bool active = false;
    size_t array_pos = 0;
    int phase = 0;
    Value old_value;
    Value new_value;
};

}  // namespace

struct TupleGen {
    const Oracle* oracle;
    const PredicateSig* sig;
    const OracleState* state;
    VirtualWrite vw;

    std::vector<Tuple> run() const {
        Tuple prefix;
        for (const auto& sc : sig->scalars) {
            auto it = state->scalars.find(sc.name);
            if (it == state->scalars.end()) return {};
            prefix.push_back(it->second);
        }
        if (sig->extra) {
            if (!vw.active) return {};
            prefix.push_back(vw.new_value);
        }
        std::vector<Tuple> acc{prefix};
        if (!sig->shared_index_names.empty()) {
            expand_shared(acc);
            return acc;
        }
        for (const auto& blk : sig->blocks) expand_block(blk, acc);
        return acc;
    }

    void expand_shared(std::vector<Tuple>& acc) const {
        if (sig->blocks.empty()) return;
        size_t pos0 = 0;
        const Cfg& cfg = oracle->cfg();
        for (size_t i = 0; i < cfg.arrays.size(); ++i)
            if (cfg.arrays[i].name == sig->blocks[0].array) pos0 = i;
        auto points = oracle->index_points(pos0, *state);
        std::vector<Tuple> next;
        for (const auto& base : acc) {
            for (size_t p = 0; p < points.size(); ++p) {
                Tuple t = base;
                for (const auto& c : points[p]) t.push_back(c);
                bool ok = true;
                for (const auto& blk : sig->blocks) {
                    size_t pos = 0;
                    for (size_t i = 0; i < cfg.arrays.size(); ++i)
                        if (cfg.arrays[i].name == blk.array) pos = i;
                    if (state->arrays[pos].size() != points.size()) {
                        ok = false;
                        break;
                    }
                    t.push_back(state->arrays[pos][p]);
                }
                if (ok) next.push_back(std::move(t));
            }
        }
        // counts appended per block above; shared mode emits per index point
        acc = std::move(next);
    }


    void expand_block(const ArrayBlock& blk, std::vector<Tuple>& acc) const {
        const Cfg& cfg = oracle->cfg();
        size_t pos = 0;
        for (size_t i = 0; i < cfg.arrays.size(); ++i)
            if (cfg.arrays[i].name == blk.array) pos = i;
        auto points = oracle->index_points(pos, *state);
        const auto& contents = state->arrays[pos];
        std::vector<Tuple> next;
        if (blk.cells == 1) {
            for (const auto& base : acc) {
                for (size_t p = 0; p < points.size(); ++p) {
                    Tuple t = base;
                    for (const auto& c : points[p]) t.push_back(c);
                    t.push_back(contents[p]);
                    next.push_back(std::move(t));
                }
            }
        } else if (blk.cells == 2) {
            for (const auto& base : acc) {
                for (size_t p1 = 0; p1 < points.size(); ++p1) {
                    for (size_t p2 = blk.ordered ? p1 : 0; p2 < points.size(); ++p2) {
                        Tuple t = base;
                        t.push_back(points[p1][0]);
                        t.push_back(contents[p1]);
                        t.push_back(points[p2][0]);
                        t.push_back(contents[p2]);
                        next.push_back(std::move(t));
                    }
                }
            }
        } else {
            next = acc;
        }
        if (blk.counts) {
            std::vector<Tuple> with_counts;
            for (const auto& base : next) {
                for (const auto& z : oracle->value_domain()) {
                    Tuple t = base;
                    int64_t cnt = count_value(contents, z);
                    if (vw.active && vw.array_pos == pos) {
                        if (z == vw.old_value) --cnt;
                        if (vw.phase == 1 && z == vw.new_value) ++cnt;
                    }
                    t.push_back(z);
                    t.push_back(Value(cnt));
                    if (blk.counts_orig)
                        t.push_back(Value(count_value(state->arrays0[pos], z)));
                    with_counts.push_back(std::move(t));
                }
            }
            next = std::move(with_counts);
        }
        acc = std::move(next);
    }
};

std::vector<Tuple> Oracle::state_tuples(const PredicateSig& sig, const OracleState& s) const {
    TupleGen gen{this, &sig, &s, {}};
    return gen.run();
}

Tables Oracle::build_tables(const HornSystem& sys, const AbstractionConfig& abs) {
    (void)abs;
    interpret();
    Tables t;
    for (const auto& sig : sys.preds) {
        auto& rows = t.rows[sig.id];
        if (sig.point >= 0) {
            auto it = reach_.find(sig.point);
            if (it == reach_.end()) continue;
            for (const auto& s : it->second)
                for (auto& tup : state_tuples(sig, s)) rows.insert(std::move(tup));
            continue;
        }
        if (sig.aux_edge < 0) continue;
        const Edge* edge = nullptr;
        for (const auto& e : cfg_.edges)
            if (e.id == sig.aux_edge) edge = &e;
        if (!edge) continue;
        const auto* w = std::get_if<ArrayWrite>(&edge->transition);
        if (!w) continue;
        size_t pos = array_pos(w->array);
        auto it = reach_.find(edge->src);
        if (it == reach_.end()) continue;
        for (const auto& s : it->second) {
            auto iv = w->index[0].eval(s.scalars);
            auto val = w->value.eval(s.scalars);
            if (!iv || !val || !iv->is_int()) continue;
            if (iv->num < 0 || iv->num >= static_cast<int64_t>(s.arrays[pos].size())) continue;
            VirtualWrite vw;
            vw.active = true;
            vw.array_pos = pos;
            vw.phase = sig.aux_phase;
            vw.old_value = s.arrays[pos][static_cast<size_t>(iv->num)];
            vw.new_value = *val;
            TupleGen gen{this, &sig, &s, vw};
            for (auto& tup : gen.run()) rows.insert(std::move(tup));
        }
    }
    return t;
}

// --- clause evaluation ------------------------------------------------------

namespace {

class Matcher {
public:
    Matcher(const Oracle& oracle, const HornClause& clause, const Tables& tables)
        : oracle_(oracle), clause_(clause), tables_(tables) {
        for (const auto& u : clause.universals) sorts_[u.name] = u.sort;
        build_indexes();
    }

    // Enumerates assignments satisfying body atoms + constraint; calls sink.
    void enumerate(const std::function<void(const Env&)>& sink) {
        Env env;
        match_atom(0, env, sink);
    }

private:
    const Oracle& oracle_;
    const HornClause& clause_;
    const Tables& tables_;
    std::map<std::string, Sort> sorts_;
    // Per-atom join index: rows grouped by the argument positions whose
    // terms are fully determined once the earlier atoms have matched.
    std::vector<std::vector<size_t>> key_positions_;
    std::vector<std::map<Tuple, std::vector<const Tuple*>>> indexes_;

    const std::vector<Value>& domain_for(Sort s) const {
        switch (s) {
            case Sort::Int: return oracle_.int_domain();
            case Sort::Real: return oracle_.value_domain();
            case Sort::Bool: {
                static const std::vector<Value> bools{Value(0), Value(1)};
                return bools;
            }
        }
        return oracle_.int_domain();
    }

    void build_indexes() {
        std::set<std::string> bound;
        key_positions_.resize(clause_.body.size());
        indexes_.resize(clause_.body.size());
        for (size_t i = 0; i < clause_.body.size(); ++i) {
            const Atom& atom = clause_.body[i];
            if (i > 0) {
                for (size_t a = 0; a < atom.args.size(); ++a) {
                    bool determined = true;
                    for (const auto& v : atom.args[a].vars())
                        if (!bound.count(v)) determined = false;
                    if (determined) key_positions_[i].push_back(a);
                }
                auto trows = tables_.rows.find(atom.pred);
                if (trows != tables_.rows.end()) {
                    for (const auto& row : trows->second) {
                        if (row.size() != atom.args.size()) continue;
                        Tuple key;
                        for (size_t p : key_positions_[i]) key.push_back(row[p]);
                        indexes_[i][key].push_back(&row);
                    }
                }
            }
            for (const auto& arg : atom.args)
                for (const auto& v : arg.vars()) bound.insert(v);
        }
    }

    void match_atom(size_t i, Env& env, const std::function<void(const Env&)>& sink) {
        if (i == clause_.body.size()) {
            finish(env, sink);
            return;
        }
        const Atom& atom = clause_.body[i];

        auto try_row = [&](const Tuple& row) {
            if (row.size() != atom.args.size()) return;
            std::vector<std::pair<std::string, Value>> bound;
            bool ok = true;
            for (size_t a = 0; a < row.size() && ok; ++a) {
                const Term& t = atom.args[a];
                if (t.is_var()) {
                    const std::string& name = t.n().name;
                    auto it = env.find(name);
                    if (it == env.end()) {
                        env[name] = row[a];
                        bound.emplace_back(name, row[a]);
                    } else if (!(it->second == row[a])) {
                        ok = false;
                    }
                    continue;
                }
                auto v = t.eval(env);
                if (v) {
                    if (!(*v == row[a])) ok = false;
                    continue;
                }
                std::vector<std::string> free;
                for (const auto& var : t.vars())
                    if (!env.count(var)) free.push_back(var);
                if (free.empty()) {
                    ok = false;
                    continue;
                }
                ok = solve_term(t, row[a], free, env, bound);
            }
            if (ok) match_atom(i + 1, env, sink);
            for (auto& [name, val] : bound) env.erase(name);
        };

        if (i == 0) {
            auto trows = tables_.rows.find(atom.pred);
            if (trows == tables_.rows.end()) return;
            for (const auto& row : trows->second) try_row(row);
            return;
        }
        Tuple key;
        for (size_t p : key_positions_[i]) {
            auto v = atom.args[p].eval(env);
            if (!v) return;  // key term must be determined here
            key.push_back(*v);
        }
        auto bucket = indexes_[i].find(key);
        if (bucket == indexes_[i].end()) return;
        for (const Tuple* row : bucket->second) try_row(*row);
    }

    bool solve_term(const Term& t, const Value& want, const std::vector<std::string>& free,
                    Env& env, std::vector<std::pair<std::string, Value>>& bound) {
        // Small backtracking over the free variables of one argument term.
        std::function<bool(size_t)> rec = [&](size_t i) -> bool {
            if (i == free.size()) {
                auto v = t.eval(env);
                return v && *v == want;
            }
            Sort s = sorts_.count(free[i]) ? sorts_[free[i]] : Sort::Int;
            for (const auto& cand : domain_for(s)) {
                env[free[i]] = cand;
                if (rec(i + 1)) {
                    bound.emplace_back(free[i], cand);
                    return true;
                }
            }
            env.erase(free[i]);
            return false;
        };
        return rec(0);
        // NOTE: finds one solution; argument terms with several preimages in
        // one atom slot are not used by the encoder.
    }

    void finish(Env& env, const std::function<void(const Env&)>& sink) {
        std::vector<std::string> leftover;
        for (const auto& u : clause_.universals)
            if (!env.count(u.name)) leftover.push_back(u.name);
        std::function<void(size_t)> rec = [&](size_t i) {
            if (i == leftover.size()) {
                auto c = clause_.constraint.eval(env);
                if (c && c->truthy()) sink(env);
                return;
            }
            Sort s = sorts_.count(leftover[i]) ? sorts_[leftover[i]] : Sort::Int;
            for (const auto& cand : domain_for(s)) {
                env[leftover[i]] = cand;
                rec(i + 1);
            }
            env.erase(leftover[i]);
        };
        rec(0);
    }
};

}  // namespace

std::set<Tuple> Oracle::imposed_set(const HornSystem& sys, size_t clause_idx,
                                    const Tables& tables) const {
    const HornClause& c = sys.clauses[clause_idx];
    std::set<Tuple> imposed;
    if (!c.head) return imposed;
    Matcher m(*this, c, tables);
    m.enumerate([&](const Env& env) {
        Tuple t;
        for (const auto& arg : c.head->args) {
            auto v = arg.eval(env);
            if (!v) return;
            t.push_back(*v);
        }
        imposed.insert(std::move(t));
    });
    return imposed;
}

std::optional<Env> Oracle::find_goal_violation(const HornSystem& sys, size_t goal_clause,
                                               const Tables& tables) const {
    const HornClause& c = sys.clauses[goal_clause];
    if (!c.is_goal()) return std::nullopt;
    std::optional<Env> found;
    Matcher m(*this, c, tables);
    m.enumerate([&](const Env& env) {
        if (found) return;
        auto g = c.goal->constraint.eval(env);
        if (g && !g->truthy()) found = env;
    });
    return found;
}

std::vector<Violation> Oracle::check_rules(const HornSystem& sys, const AbstractionConfig& abs,
                                           const Tables& tables) {
    interpret();
    std::vector<Violation> out;
    auto edge_by_id = [&](int id) -> const Edge* {
        for (const auto& e : cfg_.edges)
            if (e.id == id) return &e;
        return nullptr;
    };

    // A statement's abstraction is a clause group (e.g. the two write rules
    // split on i = k); soundness holds for the group's union of imposed
    // tuples. Group clauses by head predicate and originating edges.
    std::map<std::string, std::vector<size_t>> groups;
    std::vector<std::string> group_order;
    for (size_t ci = 0; ci < sys.clauses.size(); ++ci) {
        const HornClause& c = sys.clauses[ci];
        if (c.is_goal()) {
            const std::string rule = ci < sys.provenance.size() ? sys.provenance[ci].rule : "";
            Matcher m(*this, c, tables);
            bool bad = false;
            std::string detail;
            m.enumerate([&](const Env& env) {
                if (bad) return;
                auto g = c.goal->constraint.eval(env);
                if (!g || g->truthy()) return;
                bad = true;
                std::ostringstream os;
                os << "goal fails under";
                for (const auto& [k, v] : env) os << " " << k << "=" << v.str();
                detail = os.str();
            });
            if (bad) out.push_back({ci, rule, detail});
            continue;
        }
        if (!c.head) continue;
        std::ostringstream key;
        key << c.head->pred << "|";
        if (ci < sys.provenance.size())
            for (int e : sys.provenance[ci].edges) key << e << ",";
        if (!groups.count(key.str())) group_order.push_back(key.str());
        groups[key.str()].push_back(ci);
    }

    for (const auto& key : group_order) {
        const auto& members = groups.at(key);
        size_t ci0 = members[0];
        const HornClause& c0 = sys.clauses[ci0];
        const std::string rule =
            ci0 < sys.provenance.size() ? sys.provenance[ci0].rule : "";
        const PredicateSig& head_sig = sys.pred(c0.head->pred);

        std::set<Tuple> imposed;
        for (size_t ci : members)
            for (auto& t : imposed_set(sys, ci, tables)) imposed.insert(std::move(t));

        auto report = [&](const Tuple& t) {
            std::ostringstream os;
            os << "alpha tuple (";
            for (size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i].str();
            os << ") of " << head_sig.name << " not imposed";
            out.push_back({ci0, rule, os.str()});
        };
        auto check_posts = [&](const std::vector<Tuple>& tuples) {
            for (const auto& t : tuples)
                if (!imposed.count(t)) {
                    report(t);
                    return false;
                }
            return true;
        };

        if (head_sig.aux_edge >= 0) {
            // Head is a count-write intermediate: compare against the
            // virtual state after the decrement (phase 0) or increment (1).
            const Edge* e = edge_by_id(head_sig.aux_edge);
            const auto* w = e ? std::get_if<ArrayWrite>(&e->transition) : nullptr;
            if (!e || !w) continue;
            size_t pos = array_pos(w->array);
            auto it = reach_.find(e->src);
            if (it == reach_.end()) continue;
            for (const auto& s : it->second) {
                auto iv = w->index[0].eval(s.scalars);
                auto val = w->value.eval(s.scalars);
                if (!iv || !val || !iv->is_int()) continue;
                if (iv->num < 0 || iv->num >= static_cast<int64_t>(s.arrays[pos].size()))
                    continue;
                VirtualWrite vw{true, pos, head_sig.aux_phase,
                                s.arrays[pos][static_cast<size_t>(iv->num)], *val};
                TupleGen gen{this, &head_sig, &s, vw};
                if (!check_posts(gen.run())) break;
            }
            continue;
        }

        std::vector<int> chain =
            ci0 < sys.provenance.size() ? sys.provenance[ci0].edges : std::vector<int>{};
        int start_point = -1;
        if (c0.body.empty()) {
            // A fact: pure entry facts check the entry states directly,
            // merged facts replay their edge chain from the entry.
            start_point = cfg_.entry;
            if (chain.empty()) {
                if (head_sig.point < 0) continue;
                auto it = reach_.find(head_sig.point);
                if (it == reach_.end()) continue;
                for (const auto& s : it->second)
                    if (!check_posts(state_tuples(head_sig, s))) break;
                continue;
            }
        } else {
            const PredicateSig& body_sig = sys.pred(c0.body[0].pred);
            if (body_sig.point >= 0) {
                start_point = body_sig.point;
            } else {
                // Phase C: the body is the __incr predicate; replay the
                // whole write edge from its concrete source states.
                const Edge* e = edge_by_id(body_sig.aux_edge);
                if (e) start_point = e->src;
                chain = {body_sig.aux_edge};
            }
        }
        if (chain.empty()) continue;
        auto it = reach_.find(start_point);
        if (it == reach_.end()) continue;
        bool stop = false;
        for (const auto& s : it->second) {
            std::vector<OracleState> frontier{s};
            for (int eid : chain) {
                const Edge* e = edge_by_id(eid);
                if (!e) {
                    frontier.clear();
                    break;
                }
                std::vector<OracleState> next;
                for (const auto& f : frontier)
                    for (auto& n : step(*e, f)) next.push_back(std::move(n));
                frontier = std::move(next);
            }
            for (const auto& post : frontier) {
                if (!check_posts(state_tuples(head_sig, post))) {
                    stop = true;
                    break;
                }
            }
            if (stop) break;
        }
    }
    (void)abs;
    return out;
}

}  // namespace cellmorph

