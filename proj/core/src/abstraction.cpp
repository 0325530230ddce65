#include <algorithm>
#include <functional>
#include <set>

#include "cellmorph/abstraction.hpp"

namespace cellmorph {

namespace {

Term tvar(const ScalarVar& v) { return Term::var(v.name, v.sort); }

// Pointwise equality of index tuples: (i) = (k) or (ix,iy) = (kx,ky).
Term idx_eq(const std::vector<Term>& a, const std::vector<Term>& b) {
    Term t = Term::bool_lit(true);
    for (size_t d = 0; d < a.size(); ++d) t = Term::and_(t, Term::eq(a[d], b[d]));
    return t;
}

Term idx_ne(const std::vector<Term>& a, const std::vector<Term>& b) {
    Term t = Term::bool_lit(false);
    for (size_t d = 0; d < a.size(); ++d) t = Term::or_(t, Term::ne(a[d], b[d]));
    return t;
}

class Encoder {
public:
    Encoder(const Cfg& c, const AbstractionConfig& cfg) : cfg_(c), abs_(cfg) {}

    HornSystem build_sigs() {
        HornSystem sys;
        validate();
        for (const auto& p : cfg_.points) {
            PredicateSig sig;
            sig.id = static_cast<int>(sys.preds.size());
            sig.name = p.name;
            sig.point = p.id;
            sig.scalars = p.scalars;
            fill_blocks(sig, p.arrays);
            sys.point_pred[p.id] = sig.id;
            sys.preds.push_back(std::move(sig));
        }
        // Count-tracked writes need two intermediate predicates each.
        for (const auto& e : cfg_.edges) {
            if (auto* w = std::get_if<ArrayWrite>(&e.transition)) {
                if (abs_.for_array(w->array).multiset == ArrayAbsConfig::Multiset::Off)
                    continue;
                const ControlPoint& src = cfg_.point(e.src);
                const ControlPoint& dst = cfg_.point(e.dst);
                for (const char* suffix : {"__decr", "__incr"}) {
                    PredicateSig sig;
                    sig.id = static_cast<int>(sys.preds.size());
                    sig.name = dst.name + suffix;
                    sig.point = -1;
                    sig.aux_edge = e.id;
                    sig.aux_phase = suffix[2] == 'd' ? 0 : 1;
                    sig.scalars = src.scalars;
                    if (!w->value.is_var())
                        sig.extra = ScalarVar{"wval", value_sort(w->array)};
                    fill_blocks(sig, src.arrays);
                    intermediate_[{e.id, sig.aux_phase}] = sig.id;
                    sys.preds.push_back(std::move(sig));
                }
            }
        }
        return sys;
    }

    std::vector<HornClause> edge_clauses(const HornSystem& sys, const Edge& e) {
        std::vector<std::pair<HornClause, std::string>> raw = dispatch(sys, e);
        std::vector<HornClause> out;
        rules_.clear();
        for (auto& [cl, rule] : raw) {
            add_bounds_guards(cl, sys);
            out.push_back(std::move(cl));
            rules_.push_back(rule);
        }
        return out;
    }

    const std::vector<std::string>& last_rules() const { return rules_; }

    int intermediate(int edge, int phase) const { return intermediate_.at({edge, phase}); }
    bool has_intermediate(int edge) const { return intermediate_.count({edge, 0}) > 0; }

    HornClause property_clause(const HornSystem& sys, const PropertySpec& p) const;

private:
    const Cfg& cfg_;
    const AbstractionConfig& abs_;
    std::map<std::pair<int, int>, int> intermediate_;
    std::vector<std::string> rules_;

    Sort value_sort(const std::string& array) const {
        const ArrayDecl* a = cfg_.find_array(array);
        return a ? a->value_sort : Sort::Int;
    }

    void validate() const {
        for (const auto& a : cfg_.arrays) {
            ArrayAbsConfig ac = abs_.for_array(a.name);
            if (ac.cells < 0 || ac.cells > 2) throw EncodeError("cells must be 0, 1 or 2");
            if (ac.cells == 2 && a.dims() == 2)
                throw EncodeError("two-cell abstraction of a 2D array is unsupported");
            if (ac.weakened && ac.cells != 1)
                throw EncodeError("weakened reads need exactly one cell");
            if (ac.multiset != ArrayAbsConfig::Multiset::Off && ac.cells > 1)
                throw EncodeError("count tracking is defined for one cell");
            if (abs_.shared_index && (ac.cells > 1 || a.dims() == 2))
                throw EncodeError("shared-index mode needs one-cell 1D arrays");
            if (abs_.shared_index && ac.multiset != ArrayAbsConfig::Multiset::Off)
                throw EncodeError("count tracking is unsupported in shared-index mode");
        }
    }

    bool single_array() const { return cfg_.arrays.size() == 1; }

    void fill_blocks(PredicateSig& sig, const std::vector<std::string>& in_scope) const {
        if (abs_.shared_index) {
            bool any = false;
            Sort isort = Sort::Int;
            for (const auto& name : in_scope) {
                const ArrayDecl* a = cfg_.find_array(name);
                if (!a || abs_.for_array(name).cells == 0) continue;
                any = true;
                isort = a->index_sort();
            }
            if (any) {
                sig.shared_index_names = {"k"};
                sig.shared_index_sort = isort;
            }
            for (const auto& name : in_scope) {
                const ArrayDecl* a = cfg_.find_array(name);
                ArrayAbsConfig ac = abs_.for_array(name);
                if (!a || ac.cells == 0) continue;
                ArrayBlock b;
                b.array = name;
                b.cells = 1;
                b.dims = 1;
                b.index_sort = a->index_sort();
                b.value_sort = a->value_sort;
                b.shared_value_only = true;
                b.value_names = {name + "_k"};
                attach_counts(b, ac, name);
                sig.blocks.push_back(std::move(b));
            }
            return;
        }
        for (const auto& name : in_scope) {
            const ArrayDecl* a = cfg_.find_array(name);
            ArrayAbsConfig ac = abs_.for_array(name);
            if (!a || (ac.cells == 0 && ac.multiset == ArrayAbsConfig::Multiset::Off)) continue;
            ArrayBlock b;
            b.array = name;
            b.cells = ac.cells;
            b.dims = a->dims();
            b.index_sort = a->index_sort();
            b.value_sort = a->value_sort;
            std::string suffix = single_array() ? "" : "_" + name;
            if (ac.cells == 1) {
                if (b.dims == 2)
                    b.index_names = {"kx" + suffix, "ky" + suffix};
                else
                    b.index_names = {"k" + suffix};
                b.value_names = {name + "_k"};
            } else if (ac.cells == 2) {
                b.index_names = {"k1" + suffix, "k2" + suffix};
                b.value_names = {name + "_k1", name + "_k2"};
                b.ordered = abs_.ordered;
            }
            attach_counts(b, ac, name);
            sig.blocks.push_back(std::move(b));
        }
    }

    void attach_counts(ArrayBlock& b, const ArrayAbsConfig& ac, const std::string& name) const {
        if (ac.multiset == ArrayAbsConfig::Multiset::Off) return;
        std::string suffix = single_array() ? "" : "_" + name;
        b.counts = true;
        b.counts_orig = ac.multiset == ArrayAbsConfig::Multiset::TrackOrig;
        b.z_name = "z" + suffix;
        b.cnt_name = "cnt" + suffix;
        b.cnt0_name = "cnt0" + suffix;
    }

    // --- clause assembly helpers -----------------------------------------

    struct Build {
        const PredicateSig* src;
        const PredicateSig* dst;
        std::vector<ScalarVar> universals;
        std::map<std::string, Term> body_slot;  // slot name -> body term
        Term guard = Term::bool_lit(true);

        Term slot(const std::string& name) const { return body_slot.at(name); }
    };

    Build start(const HornSystem& sys, int src_pred, int dst_pred) const {
        Build b;
        b.src = &sys.pred(src_pred);
        b.dst = &sys.pred(dst_pred);
        for (const auto& s : b.src->slots()) {
            b.universals.push_back(s);
            b.body_slot[s.name] = tvar(s);
        }
        return b;
    }

    ScalarVar fresh(Build& b, const std::string& stem, Sort sort) const {
        std::string name = stem;
        int i = 0;
        auto taken = [&](const std::string& n) {
            for (const auto& u : b.universals)
                if (u.name == n) return true;
            return false;
        };
        while (taken(name)) name = stem + std::to_string(i++);
        ScalarVar v{name, sort};
        b.universals.push_back(v);
        return v;
    }

    Atom body_atom(const Build& b,
                   const std::map<std::string, Term>& overrides = {}) const {
        Atom a;
        a.pred = b.src->id;
        for (const auto& s : b.src->slots()) {
            auto it = overrides.find(s.name);
            a.args.push_back(it != overrides.end() ? it->second : b.slot(s.name));
        }
        return a;
    }

    // Head over dst slots: identical names carry over, `map` overrides.
    Atom head_atom(const Build& b, const std::map<std::string, Term>& map) const {
        Atom a;
        a.pred = b.dst->id;
        for (const auto& s : b.dst->slots()) {
            auto it = map.find(s.name);
            if (it != map.end()) {
                a.args.push_back(it->second);
            } else if (b.body_slot.count(s.name)) {
                a.args.push_back(b.slot(s.name));
            } else {
                throw EncodeError("unmapped head slot " + s.name + " of " + b.dst->name);
            }
        }
        return a;
    }

    HornClause finish(Build& b, std::vector<Atom> body, Term guard, Atom head) const {
        HornClause c;
        c.body = std::move(body);
        c.constraint = Term::and_(b.guard, guard);
        c.head = std::move(head);
        c.universals = b.universals;
        return c;
    }

    const ArrayBlock* block_of(const PredicateSig& sig, const std::string& array) const {
        for (const auto& b : sig.blocks)
            if (b.array == array) return &b;
        return nullptr;
    }

    std::vector<Term> block_index_terms(const Build& b, const ArrayBlock& blk, int cell) const {
        std::vector<Term> out;
        if (blk.shared_value_only) {
            for (const auto& k : b.src->shared_index_names)
                out.push_back(b.slot(k));
            return out;
        }
        for (int d = 0; d < blk.dims; ++d)
            out.push_back(b.slot(blk.index_names[static_cast<size_t>(cell * blk.dims + d)]));
        return out;
    }

    // Adds 0 <= k < n guards for ranged arrays and cnt >= 0 for count slots.
    void add_bounds_guards(HornClause& c, const HornSystem& sys) const {
        if (!abs_.bounds_guards) return;
        std::set<std::string> seen;
        Term extra = Term::bool_lit(true);
        auto guard_atom = [&](const Atom& a) {
            const PredicateSig& sig = sys.pred(a.pred);
            auto slots = sig.slots();
            for (const auto& blk : sig.blocks) {
                const ArrayDecl* decl = cfg_.find_array(blk.array);
                if (!decl) continue;
                // Locate this block's slots positionally.
                for (int cell = 0; cell < (blk.shared_value_only ? 0 : blk.cells); ++cell) {
                    for (int d = 0; d < blk.dims; ++d) {
                        const std::string& slot_name =
                            blk.index_names[static_cast<size_t>(cell * blk.dims + d)];
                        size_t pos = 0;
                        for (; pos < slots.size(); ++pos)
                            if (slots[pos].name == slot_name) break;
                        if (pos >= slots.size() || pos >= a.args.size()) continue;
                        const Term& idx = a.args[pos];
                        if (decl->ranged() && static_cast<size_t>(d) < decl->range.size()) {
                            std::string key = blk.array + "#" + std::to_string(d) + "#" + idx.str();
                            if (!seen.insert(key).second) continue;
                            extra = Term::and_(
                                extra, Term::and_(Term::le(Term::int_lit(0), idx),
                                                  Term::lt(idx, decl->range[static_cast<size_t>(d)])));
                        }
                    }
                }
                if (blk.counts) {
                    size_t pos = 0;
                    for (; pos < slots.size(); ++pos)
                        if (slots[pos].name == blk.cnt_name) break;
                    if (pos < a.args.size()) {
                        std::string key = blk.array + "#cnt#" + a.args[pos].str();
                        if (seen.insert(key).second) {
                            extra = Term::and_(extra,
                                               Term::le(Term::int_lit(0), a.args[pos]));
                            if (decl->ranged() && decl->dims() == 1)
                                extra = Term::and_(extra,
                                                   Term::le(a.args[pos], decl->range[0]));
                        }
                    }
                    if (blk.counts_orig) {
                        size_t p0 = 0;
                        for (; p0 < slots.size(); ++p0)
                            if (slots[p0].name == blk.cnt0_name) break;
                        if (p0 < a.args.size()) {
                            std::string key = blk.array + "#cnt0#" + a.args[p0].str();
                            if (seen.insert(key).second) {
                                extra = Term::and_(extra,
                                                   Term::le(Term::int_lit(0), a.args[p0]));
                                if (decl->ranged() && decl->dims() == 1)
                                    extra = Term::and_(extra,
                                                       Term::le(a.args[p0], decl->range[0]));
                            }
                        }
                    }
                }
            }
        };
        if (c.head) guard_atom(*c.head);
        for (const auto& a : c.body) guard_atom(a);
        if (!extra.is_true()) c.constraint = Term::and_(extra, c.constraint);
    }

    // --- per-transition rules ---------------------------------------------

    using Clauses = std::vector<std::pair<HornClause, std::string>>;

    Clauses dispatch(const HornSystem& sys, const Edge& e) {
        int sp = sys.point_pred.at(e.src);
        int dp = sys.point_pred.at(e.dst);
        if (auto* r = std::get_if<ArrayRead>(&e.transition)) return read_clauses(sys, *r, sp, dp);
        if (auto* w = std::get_if<ArrayWrite>(&e.transition))
            return write_clauses(sys, *w, sp, dp, e.id);
        if (auto* s = std::get_if<ScalarOp>(&e.transition)) return scalar_clauses(sys, *s, sp, dp);
        if (auto* k = std::get_if<Kill>(&e.transition)) return kill_clauses(sys, *k, sp, dp);
        if (auto* i = std::get_if<ArrayInit>(&e.transition)) return init_clauses(sys, *i, sp, dp);
        if (auto* m = std::get_if<MultisetOp>(&e.transition))
            return multiset_clauses(sys, *m, sp, dp);
        throw EncodeError("unknown transition");
    }

    Clauses scalar_clauses(const HornSystem& sys, const ScalarOp& op, int sp, int dp) const {
        Build b = start(sys, sp, dp);
        std::map<std::string, Term> head;
        for (const auto& [lhs, rhs] : op.assigns) head[lhs] = rhs;
        Clauses out;
        out.emplace_back(finish(b, {body_atom(b)}, op.guard, head_atom(b, head)), "scalar");
        return out;
    }

    Clauses kill_clauses(const HornSystem& sys, const Kill&, int sp, int dp) const {
        Build b = start(sys, sp, dp);
        Clauses out;
        out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true), head_atom(b, {})),
                         "kill");
        return out;
    }

    Clauses init_clauses(const HornSystem& sys, const ArrayInit& init, int sp, int dp) const;
    Clauses read_clauses(const HornSystem& sys, const ArrayRead& r, int sp, int dp) const;
    Clauses write_clauses(const HornSystem& sys, const ArrayWrite& w, int sp, int dp,
                          int edge_id) const;
    Clauses count_write_clauses(const HornSystem& sys, const ArrayWrite& w, int sp, int dp,
                                int edge_id) const;
    Clauses multiset_clauses(const HornSystem& sys, const MultisetOp& m, int sp, int dp) const;
};

// --- initialization ------------------------------------------------------

Encoder::Clauses Encoder::init_clauses(const HornSystem& sys, const ArrayInit& init, int sp,
                                       int dp) const {
    const ArrayDecl* decl = cfg_.find_array(init.array);
    ArrayAbsConfig ac = abs_.for_array(init.array);
    Clauses out;

    const PredicateSig& dst_sig = sys.pred(sys.point_pred.at(dp));
    const ArrayBlock* blk = block_of(dst_sig, init.array);
    if (!blk || (ac.cells == 0 && !blk->counts)) {
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true), head_atom(b, {})),
                         "init-erased");
        return out;
    }

    auto base_build = [&]() { return start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp)); };

    auto count_map = [&](Build& b, std::map<std::string, Term>& head) {
        if (!blk->counts) return;
        ScalarVar z = fresh(b, blk->z_name, blk->value_sort);
        ScalarVar cnt = fresh(b, blk->cnt_name, Sort::Int);
        head[blk->z_name] = tvar(z);
        head[blk->cnt_name] = tvar(cnt);
        if (blk->counts_orig) head[blk->cnt0_name] = tvar(cnt);
    };

    if (decl && decl->copy_of) {
        // b := copy of a. Correlate b's fresh cells with a's tracked cells.
        const std::string& src_arr = *decl->copy_of;
        const PredicateSig& ssig = *base_build().src;
        const ArrayBlock* sblk = block_of(ssig, src_arr);
        int scells = sblk && !sblk->shared_value_only ? sblk->cells : 0;
        if (abs_.shared_index) {
            // Shared index: the copy shares the single tracked index.
            Build b = base_build();
            std::map<std::string, Term> head;
            const ArrayBlock* src_b = block_of(*b.src, src_arr);
            if (src_b) head[blk->value_names[0]] = b.slot(src_b->value_names[0]);
            count_map(b, head);
            out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true), head_atom(b, head)),
                             "init-copy");
            return out;
        }
        for (int c = 0; c < blk->cells; ++c) {
            (void)c;
        }
        // One clause per choice vector: each of b's cells matches one of a's
        // tracked cells or none.
        int bcells = blk->cells;
        std::vector<int> choice(static_cast<size_t>(bcells), -1);
        auto emit_case = [&](const std::vector<int>& ch) {
            Build b = base_build();
            std::map<std::string, Term> head;
            Term g = Term::bool_lit(true);
            std::vector<std::vector<Term>> own_idx;
            for (int cell = 0; cell < bcells; ++cell) {
                if (ch[static_cast<size_t>(cell)] >= 0 && sblk) {
                    int sc = ch[static_cast<size_t>(cell)];
                    std::vector<Term> sidx = block_index_terms(b, *sblk, sc);
                    for (int d = 0; d < blk->dims; ++d)
                        head[blk->index_names[static_cast<size_t>(cell * blk->dims + d)]] =
                            sidx[static_cast<size_t>(d)];
                    head[blk->value_names[static_cast<size_t>(cell)]] =
                        b.slot(sblk->value_names[static_cast<size_t>(sc)]);
                    own_idx.push_back(sidx);
                } else {
                    ScalarVar k = fresh(b, blk->index_names[static_cast<size_t>(cell * blk->dims)],
                                        blk->index_sort);
                    std::vector<Term> kidx = {tvar(k)};
                    head[blk->index_names[static_cast<size_t>(cell * blk->dims)]] = tvar(k);
                    ScalarVar v = fresh(b, blk->value_names[static_cast<size_t>(cell)],
                                        blk->value_sort);
                    head[blk->value_names[static_cast<size_t>(cell)]] = tvar(v);
                    // distinct from every tracked source cell
                    if (sblk)
                        for (int sc = 0; sc < scells; ++sc)
                            g = Term::and_(g, idx_ne(kidx, block_index_terms(b, *sblk, sc)));
                    own_idx.push_back(kidx);
                }
            }
            // Ordered two-cell target keeps k1 <= k2.
            if (bcells == 2 && abs_.ordered)
                g = Term::and_(g, Term::le(own_idx[0][0], own_idx[1][0]));
            count_map(b, head);
            out.emplace_back(finish(b, {body_atom(b)}, g, head_atom(b, head)), "init-copy");
        };
        std::function<void(int)> rec = [&](int cell) {
            if (cell == bcells) {
                emit_case(choice);
                return;
            }
            for (int sc = -1; sc < scells; ++sc) {
                choice[static_cast<size_t>(cell)] = sc;
                rec(cell + 1);
            }
        };
        rec(0);
        return out;
    }

    if (blk->shared_value_only) {
        // Shared index: refresh this array's value slot, everything else
        // rides along. The first initialization also introduces the index.
        Build b = base_build();
        std::map<std::string, Term> head;
        const PredicateSig& dsig = *b.dst;
        if (!dsig.shared_index_names.empty() &&
            !b.body_slot.count(dsig.shared_index_names[0])) {
            ScalarVar k = fresh(b, dsig.shared_index_names[0], dsig.shared_index_sort);
            head[dsig.shared_index_names[0]] = tvar(k);
        }
        if (decl && decl->init_value) {
            head[blk->value_names[0]] = *decl->init_value;
        } else {
            ScalarVar v = fresh(b, blk->value_names[0], blk->value_sort);
            head[blk->value_names[0]] = tvar(v);
        }
        out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true), head_atom(b, head)),
                         "init");
        return out;
    }

    // Nondeterministic or constant-fill initialization.
    if (blk->cells <= 1) {
        Build b = base_build();
        std::map<std::string, Term> head;
        if (blk->cells == 1) {
            for (int d = 0; d < blk->dims; ++d) {
                ScalarVar k = fresh(b, blk->index_names[static_cast<size_t>(d)], blk->index_sort);
                head[blk->index_names[static_cast<size_t>(d)]] = tvar(k);
            }
            if (decl && decl->init_value) {
                head[blk->value_names[0]] = *decl->init_value;
            } else {
                ScalarVar v = fresh(b, blk->value_names[0], blk->value_sort);
                head[blk->value_names[0]] = tvar(v);
            }
        }
        count_map(b, head);
        out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true), head_atom(b, head)),
                         "init");
        return out;
    }

    // Two cells: pairing clause (k1 < k2) and diagonal clause.
    {
        Build b = base_build();
        std::map<std::string, Term> head;
        ScalarVar k1 = fresh(b, blk->index_names[0], blk->index_sort);
        ScalarVar k2 = fresh(b, blk->index_names[1], blk->index_sort);
        Term v1, v2;
        if (decl && decl->init_value) {
            v1 = v2 = *decl->init_value;
        } else {
            v1 = tvar(fresh(b, blk->value_names[0], blk->value_sort));
            v2 = tvar(fresh(b, blk->value_names[1], blk->value_sort));
        }
        head[blk->index_names[0]] = tvar(k1);
        head[blk->index_names[1]] = tvar(k2);
        head[blk->value_names[0]] = v1;
        head[blk->value_names[1]] = v2;
        Term g = abs_.ordered ? Term::lt(tvar(k1), tvar(k2)) : Term::bool_lit(true);
        count_map(b, head);
        out.emplace_back(finish(b, {body_atom(b)}, g, head_atom(b, head)), "init2-pair");
    }
    {
        Build b = base_build();
        std::map<std::string, Term> head;
        ScalarVar k = fresh(b, blk->index_names[0], blk->index_sort);
        Term v;
        if (decl && decl->init_value)
            v = *decl->init_value;
        else
            v = tvar(fresh(b, blk->value_names[0], blk->value_sort));
        head[blk->index_names[0]] = tvar(k);
        head[blk->index_names[1]] = tvar(k);
        head[blk->value_names[0]] = v;
        head[blk->value_names[1]] = v;
        count_map(b, head);
        out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true), head_atom(b, head)),
                         "init2-diag");
    }
    return out;
}

// --- reads -----------------------------------------------------------------

Encoder::Clauses Encoder::read_clauses(const HornSystem& sys, const ArrayRead& r, int sp,
                                       int dp) const {
    ArrayAbsConfig ac = abs_.for_array(r.array);
    Clauses out;
    Build probe = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
    const ArrayBlock* blk = block_of(*probe.src, r.array);

    auto target_map = [&](Term value) {
        std::map<std::string, Term> m;
        m[r.target] = std::move(value);
        return m;
    };

    if (!blk || (blk->cells == 0 && !blk->counts)) {
        // Erased array: the read becomes a nondeterministic choice.
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        ScalarVar v = fresh(b, "nd", r.target_sort);
        out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true),
                                head_atom(b, target_map(tvar(v)))),
                         "read0");
        return out;
    }

    if (abs_.shared_index || blk->shared_value_only) {
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        const std::string& kslot = b.src->shared_index_names[0];
        ScalarVar ai = fresh(b, "ai", blk->value_sort);
        std::map<std::string, Term> atom2;
        atom2[kslot] = r.index[0];
        atom2[blk->value_names[0]] = tvar(ai);
        // Other arrays' values at the read index are unconstrained.
        for (const auto& ob : b.src->blocks)
            if (ob.array != r.array)
                atom2[ob.value_names[0]] = tvar(fresh(b, ob.value_names[0] + "_i", ob.value_sort));
        Term ne = Term::ne(b.slot(kslot), r.index[0]);
        out.emplace_back(finish(b, {body_atom(b), body_atom(b, atom2)}, ne,
                                head_atom(b, target_map(tvar(ai)))),
                         "read1-diff");
        Build b2 = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        ScalarVar ai2 = fresh(b2, "ai", blk->value_sort);
        std::map<std::string, Term> diag;
        diag[kslot] = r.index[0];
        diag[blk->value_names[0]] = tvar(ai2);
        std::map<std::string, Term> head = target_map(tvar(ai2));
        head[kslot] = r.index[0];
        head[blk->value_names[0]] = tvar(ai2);
        out.emplace_back(finish(b2, {body_atom(b2, diag)}, Term::bool_lit(true),
                                head_atom(b2, head)),
                         "read1-same");
        return out;
    }

    if (blk->cells == 1) {
        if (ac.weakened) {
            Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
            ScalarVar v = fresh(b, "nd", r.target_sort);
            Term ne = idx_ne(block_index_terms(b, *blk, 0), r.index);
            out.emplace_back(finish(b, {body_atom(b)}, ne, head_atom(b, target_map(tvar(v)))),
                             "read1-weak-diff");
        } else {
            Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
            ScalarVar ai = fresh(b, "ai", blk->value_sort);
            std::map<std::string, Term> atom2;
            for (int d = 0; d < blk->dims; ++d)
                atom2[blk->index_names[static_cast<size_t>(d)]] = r.index[static_cast<size_t>(d)];
            atom2[blk->value_names[0]] = tvar(ai);
            Term ne = idx_ne(block_index_terms(b, *blk, 0), r.index);
            out.emplace_back(finish(b, {body_atom(b), body_atom(b, atom2)}, ne,
                                    head_atom(b, target_map(tvar(ai)))),
                             "read1-diff");
        }
        // Same-cell clause, shared by both variants.
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        ScalarVar ai = fresh(b, "ai", blk->value_sort);
        std::map<std::string, Term> diag;
        std::map<std::string, Term> head = target_map(tvar(ai));
        for (int d = 0; d < blk->dims; ++d) {
            diag[blk->index_names[static_cast<size_t>(d)]] = r.index[static_cast<size_t>(d)];
            head[blk->index_names[static_cast<size_t>(d)]] = r.index[static_cast<size_t>(d)];
        }
        diag[blk->value_names[0]] = tvar(ai);
        head[blk->value_names[0]] = tvar(ai);
        out.emplace_back(finish(b, {body_atom(b, diag)}, Term::bool_lit(true),
                                head_atom(b, head)),
                         "read1-same");
        return out;
    }

    // Two cells. Case split per the ordered soundness lemma.
    const Term& i = r.index[0];
    auto mk = [&](int rule) {
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        ScalarVar ai = fresh(b, "ai", blk->value_sort);
        Term k1 = b.slot(blk->index_names[0]);
        Term k2 = b.slot(blk->index_names[1]);
        Term v1 = b.slot(blk->value_names[0]);
        Term v2 = b.slot(blk->value_names[1]);
        std::map<std::string, Term> head = target_map(tvar(ai));
        switch (rule) {
            case 1: {  // k1 != i && i < k2 (nonlinear, second atom at (i, k2))
                std::map<std::string, Term> a2;
                a2[blk->index_names[0]] = i;
                a2[blk->value_names[0]] = tvar(ai);
                Term g = Term::and_(Term::ne(k1, i),
                                    abs_.ordered ? Term::lt(i, k2) : Term::ne(k2, i));
                out.emplace_back(finish(b, {body_atom(b), body_atom(b, a2)}, g,
                                        head_atom(b, head)),
                                 "read2-1");
                break;
            }
            case 2: {  // k2 != i && k1 < i (nonlinear, second atom at (k1, i))
                std::map<std::string, Term> a2;
                a2[blk->index_names[1]] = i;
                a2[blk->value_names[1]] = tvar(ai);
                Term g = Term::and_(Term::ne(k2, i),
                                    abs_.ordered ? Term::lt(k1, i) : Term::ne(k1, i));
                out.emplace_back(finish(b, {body_atom(b), body_atom(b, a2)}, g,
                                        head_atom(b, head)),
                                 "read2-2");
                break;
            }
            case 3: {  // k1 = i && i < k2
                std::map<std::string, Term> a2;
                a2[blk->index_names[0]] = i;
                a2[blk->value_names[0]] = tvar(ai);
                head[blk->index_names[0]] = i;
                head[blk->value_names[0]] = tvar(ai);
                Term g = abs_.ordered ? Term::lt(i, k2) : Term::ne(k2, i);
                out.emplace_back(finish(b, {body_atom(b, a2)}, g, head_atom(b, head)),
                                 "read2-3");
                break;
            }
            case 4: {  // k2 = i && k1 <= i
                std::map<std::string, Term> a2;
                a2[blk->index_names[1]] = i;
                a2[blk->value_names[1]] = tvar(ai);
                head[blk->index_names[1]] = i;
                head[blk->value_names[1]] = tvar(ai);
                Term g = abs_.ordered ? Term::le(k1, i) : Term::bool_lit(true);
                out.emplace_back(finish(b, {body_atom(b, a2)}, g, head_atom(b, head)),
                                 "read2-4");
                break;
            }
        }
    };
    mk(1);
    mk(2);
    mk(3);
    mk(4);
    return out;
}

// --- writes ----------------------------------------------------------------

Encoder::Clauses Encoder::write_clauses(const HornSystem& sys, const ArrayWrite& w, int sp,
                                        int dp, int edge_id) const {
    ArrayAbsConfig ac = abs_.for_array(w.array);
    Clauses out;
    Build probe = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
    const ArrayBlock* blk = block_of(*probe.src, w.array);

    if (!blk || (blk->cells == 0 && !blk->counts)) {
        // Erased array: writes are dropped.
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true), head_atom(b, {})),
                         "write0");
        return out;
    }

    // The written value as a term bound to a universal, per Def. write1's
    // variable-only shape; equality substitution later inlines constants.
    auto bind_value = [&](Build& b) -> Term {
        if (w.value.is_var()) return w.value;
        ScalarVar v = fresh(b, "wv", blk->value_sort);
        b.guard = Term::and_(b.guard, Term::eq(tvar(v), w.value));
        return tvar(v);
    };

    if (ac.multiset != ArrayAbsConfig::Multiset::Off)
        return count_write_clauses(sys, w, sp, dp, edge_id);

    if (abs_.shared_index || blk->shared_value_only) {
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        Term wv = bind_value(b);
        const std::string& kslot = b.src->shared_index_names[0];
        Term ne = Term::ne(b.slot(kslot), w.index[0]);
        out.emplace_back(finish(b, {body_atom(b)}, ne, head_atom(b, {})), "write1-diff");
        Build b2 = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        Term wv2 = bind_value(b2);
        std::map<std::string, Term> diag;
        diag[kslot] = w.index[0];
        std::map<std::string, Term> head;
        head[kslot] = w.index[0];
        head[blk->value_names[0]] = wv2;
        out.emplace_back(finish(b2, {body_atom(b2, diag)}, Term::bool_lit(true),
                                head_atom(b2, head)),
                         "write1-same");
        return out;
    }

    if (blk->cells == 1) {
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        Term wv = bind_value(b);
        (void)wv;
        Term ne = idx_ne(block_index_terms(b, *blk, 0), w.index);
        out.emplace_back(finish(b, {body_atom(b)}, ne, head_atom(b, {})), "write1-diff");

        Build b2 = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        Term wv2 = bind_value(b2);
        std::map<std::string, Term> diag;
        std::map<std::string, Term> head;
        for (int d = 0; d < blk->dims; ++d) {
            diag[blk->index_names[static_cast<size_t>(d)]] = w.index[static_cast<size_t>(d)];
            head[blk->index_names[static_cast<size_t>(d)]] = w.index[static_cast<size_t>(d)];
        }
        head[blk->value_names[0]] = wv2;
        out.emplace_back(finish(b2, {body_atom(b2, diag)}, Term::bool_lit(true),
                                head_atom(b2, head)),
                         "write1-same");
        return out;
    }

    // Two cells: exhaustive equality split, all linear.
    const Term& i = w.index[0];
    auto mk = [&](int rule) {
        Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
        Term wv = bind_value(b);
        Term k1 = b.slot(blk->index_names[0]);
        Term k2 = b.slot(blk->index_names[1]);
        std::map<std::string, Term> body, head;
        Term g = Term::bool_lit(true);
        switch (rule) {
            case 1:
                g = Term::and_(Term::ne(i, k1), Term::ne(i, k2));
                break;
            case 2:
                body[blk->index_names[0]] = i;
                head[blk->index_names[0]] = i;
                head[blk->value_names[0]] = wv;
                g = Term::ne(i, k2);
                break;
            case 3:
                body[blk->index_names[1]] = i;
                head[blk->index_names[1]] = i;
                head[blk->value_names[1]] = wv;
                g = Term::ne(i, k1);
                break;
            case 4: {
                // k1 = k2 = i: both tracked cells hold the same old value.
                body[blk->index_names[0]] = i;
                body[blk->index_names[1]] = i;
                body[blk->value_names[1]] = b.slot(blk->value_names[0]);
                head[blk->index_names[0]] = i;
                head[blk->index_names[1]] = i;
                head[blk->value_names[0]] = wv;
                head[blk->value_names[1]] = wv;
                break;
            }
        }
        out.emplace_back(finish(b, {body_atom(b, body)}, g, head_atom(b, head)),
                         "write2-" + std::to_string(rule));
    };
    mk(1);
    mk(2);
    mk(3);
    mk(4);
    return out;
}

// The count-tracked write threads #a through two intermediate predicates:
// decrement at the overwritten value, increment at the new value, then the
// plain cell update.
Encoder::Clauses Encoder::count_write_clauses(const HornSystem& sys, const ArrayWrite& w, int sp,
                                              int dp, int edge_id) const {
    Clauses out;
    int d_pred = intermediate_.at({edge_id, 0});
    int i_pred = intermediate_.at({edge_id, 1});
    int src_pred = sys.point_pred.at(sp);
    int dst_pred = sys.point_pred.at(dp);
    const ArrayBlock* blk = block_of(sys.pred(src_pred), w.array);
    if (!blk) throw EncodeError("count write on untracked array " + w.array);
    const std::string kslot = blk->index_names[0];
    const std::string vslot = blk->value_names[0];
    const std::string zslot = blk->z_name;
    const std::string cslot = blk->cnt_name;

    bool value_is_var = w.value.is_var();
    auto wv_in = [&](Build& b) -> Term {
        // Entering the decrement phase the written value gets its own slot.
        if (value_is_var) return w.value;
        ScalarVar v = fresh(b, "wval", blk->value_sort);
        b.guard = Term::and_(b.guard, Term::eq(tvar(v), w.value));
        return tvar(v);
    };
    auto wv_slot = [&](Build& b) -> Term {
        return value_is_var ? w.value : b.slot("wval");
    };

    // Phase 1: decrement the count at the old value a[i].
    {
        Build b = start(sys, src_pred, d_pred);
        Term wv = wv_in(b);
        ScalarVar ai = fresh(b, "ai", blk->value_sort);
        std::map<std::string, Term> a2{{kslot, w.index[0]}, {vslot, tvar(ai)}};
        std::map<std::string, Term> head;
        if (!value_is_var) head["wval"] = wv;
        Term g = Term::ne(tvar(ai), b.slot(zslot));
        out.emplace_back(finish(b, {body_atom(b), body_atom(b, a2)}, g, head_atom(b, head)),
                         "count-decr-ne");
    }
    {
        Build b = start(sys, src_pred, d_pred);
        Term wv = wv_in(b);
        ScalarVar ai = fresh(b, "ai", blk->value_sort);
        std::map<std::string, Term> a1{{zslot, tvar(ai)}};
        std::map<std::string, Term> a2{{kslot, w.index[0]}, {vslot, tvar(ai)}, {zslot, tvar(ai)}};
        std::map<std::string, Term> head{{zslot, tvar(ai)},
                                         {cslot, Term::sub(b.slot(cslot), Term::int_lit(1))}};
        if (!value_is_var) head["wval"] = wv;
        out.emplace_back(finish(b, {body_atom(b, a1), body_atom(b, a2)}, Term::bool_lit(true),
                                head_atom(b, head)),
                         "count-decr-eq");
    }
    // Phase 2: increment the count at the new value.
    {
        Build b = start(sys, d_pred, i_pred);
        ScalarVar ai = fresh(b, "ai", blk->value_sort);
        std::map<std::string, Term> a2{{kslot, w.index[0]}, {vslot, tvar(ai)}};
        Term g = Term::ne(wv_slot(b), b.slot(zslot));
        out.emplace_back(finish(b, {body_atom(b), body_atom(b, a2)}, g, head_atom(b, {})),
                         "count-incr-ne");
    }
    {
        Build b = start(sys, d_pred, i_pred);
        ScalarVar ai = fresh(b, "ai", blk->value_sort);
        Term wv = wv_slot(b);
        std::map<std::string, Term> a1{{zslot, wv}};
        std::map<std::string, Term> a2{{kslot, w.index[0]}, {vslot, tvar(ai)}, {zslot, wv}};
        std::map<std::string, Term> head{{zslot, wv},
                                         {cslot, Term::add(b.slot(cslot), Term::int_lit(1))}};
        out.emplace_back(finish(b, {body_atom(b, a1), body_atom(b, a2)}, Term::bool_lit(true),
                                head_atom(b, head)),
                         "count-incr-eq");
    }
    // Phase 3: the cell update itself, counts carried.
    {
        Build b = start(sys, i_pred, dst_pred);
        Term ne = idx_ne(block_index_terms(b, *blk, 0), w.index);
        out.emplace_back(finish(b, {body_atom(b)}, ne, head_atom(b, {})), "count-write-diff");
    }
    {
        Build b = start(sys, i_pred, dst_pred);
        std::map<std::string, Term> a1{{kslot, w.index[0]}};
        std::map<std::string, Term> head{{kslot, w.index[0]}, {vslot, wv_slot(b)}};
        out.emplace_back(finish(b, {body_atom(b, a1)}, Term::bool_lit(true), head_atom(b, head)),
                         "count-write-same");
    }
    return out;
}

HornClause Encoder::property_clause(const HornSystem& sys, const PropertySpec& p) const {
    int point = -1;
    if (p.at.empty()) {
        if (cfg_.exits.empty()) throw EncodeError("program has no exit point");
        point = cfg_.exits[0];
    } else {
        auto id = cfg_.point_by_name(p.at);
        if (!id) throw EncodeError("no control point named '" + p.at + "'");
        point = *id;
    }
    const PredicateSig& sig = sys.pred(sys.point_pred.at(point));

    // Re-sort binder variables (the parser defaults them to Int).
    std::map<std::string, Term> binder_fix;
    for (const auto& [name, sort] : p.binders) binder_fix[name] = Term::var(name, sort);
    Term guard = p.guard.substitute(binder_fix);
    Term concl = p.conclusion.substitute(binder_fix);

    // Distinct cell index tuples per array, in order of first occurrence.
    std::map<std::string, std::vector<std::vector<Term>>> cells;
    std::map<std::string, Term> count_arg;
    std::function<void(const Term&)> collect = [&](const Term& t) {
        const TermNode& n = t.n();
        if (n.kind == TermKind::Cell) {
            auto& list = cells[n.name];
            bool found = false;
            for (const auto& existing : list) {
                bool same = existing.size() == n.args.size();
                for (size_t d = 0; same && d < existing.size(); ++d)
                    same = existing[d] == n.args[d];
                if (same) found = true;
            }
            if (!found) list.push_back(n.args);
        }
        if (n.kind == TermKind::Count) {
            auto it = count_arg.find(n.name);
            if (it == count_arg.end())
                count_arg[n.name] = n.args[0];
            else if (!(it->second == n.args[0]))
                throw EncodeError("properties sample one count value per array");
        }
        for (const auto& a : n.args) collect(a);
    };
    collect(guard);
    collect(concl);

    HornClause cl;
    for (const auto& s : sig.scalars) cl.universals.push_back(s);
    for (const auto& [name, sort] : p.binders) cl.universals.push_back({name, sort});

    Atom atom;
    atom.pred = sig.id;
    std::map<std::string, Term> slot_term;  // slot name -> atom argument
    std::map<std::string, Term> cell_value;  // rendered cell -> value var
    std::map<std::string, Term> count_value;

    for (const auto& s : sig.scalars) slot_term[s.name] = tvar(s);
    if (sig.extra) {
        cl.universals.push_back(*sig.extra);
        slot_term[sig.extra->name] = tvar(*sig.extra);
    }
    if (!sig.shared_index_names.empty()) {
        // Shared index: all referenced arrays must sample the same index.
        std::vector<Term> shared_idx;
        for (const auto& [arr, list] : cells) {
            if (list.size() > 1) throw EncodeError("shared-index properties take one cell");
            if (shared_idx.empty()) shared_idx = list[0];
        }
        if (!shared_idx.empty()) {
            slot_term[sig.shared_index_names[0]] = shared_idx[0];
        } else {
            cl.universals.push_back({sig.shared_index_names[0], sig.shared_index_sort});
            slot_term[sig.shared_index_names[0]] =
                Term::var(sig.shared_index_names[0], sig.shared_index_sort);
        }
    }
    // Index constants the program itself accesses, used to pin the cell
    // slots of arrays the property does not mention: a query over free
    // cells also constrains mixed tuples no concrete state produces, which
    // makes valid scalar properties unprovable.
    auto pin_constants = [&](const std::string& array) {
        std::set<int64_t> ints;
        for (const auto& e : cfg_.edges) {
            std::vector<const std::vector<Term>*> idx;
            if (auto* r = std::get_if<ArrayRead>(&e.transition))
                if (r->array == array) idx.push_back(&r->index);
            if (auto* w = std::get_if<ArrayWrite>(&e.transition))
                if (w->array == array) idx.push_back(&w->index);
            for (const auto* terms : idx)
                if (!terms->empty() && (*terms)[0].kind() == TermKind::Lit &&
                    (*terms)[0].n().lit.is_int())
                    ints.insert((*terms)[0].n().lit.num);
        }
        return std::vector<int64_t>(ints.begin(), ints.end());
    };

    for (const auto& blk : sig.blocks) {
        auto it = cells.find(blk.array);
        size_t n_cells = it == cells.end() ? 0 : it->second.size();
        if (blk.shared_value_only) {
            ScalarVar v{blk.value_names[0], blk.value_sort};
            cl.universals.push_back(v);
            slot_term[blk.value_names[0]] = tvar(v);
            if (n_cells == 1) {
                std::string key = Term::cell(blk.array, it->second[0], blk.value_sort).str();
                cell_value[key] = tvar(v);
            }
            continue;
        }
        if (static_cast<int>(n_cells) > blk.cells)
            throw EncodeError("property uses " + std::to_string(n_cells) + " cells of '" +
                              blk.array + "' but the abstraction tracks " +
                              std::to_string(blk.cells));
        std::vector<int64_t> pins =
            n_cells == 0 && blk.dims == 1 ? pin_constants(blk.array) : std::vector<int64_t>{};
        std::optional<ScalarVar> diag_index;  // shared universal when unpinned
        std::optional<ScalarVar> diag_value;
        for (int c = 0; c < blk.cells; ++c) {
            // Instantiate slot c with the c-th distinct cell; a single cell
            // fills both slots of a two-cell block (the diagonal).
            int use = n_cells == 0 ? -1 : static_cast<int>(std::min<size_t>(c, n_cells - 1));
            if (use < 0) {
                if (!pins.empty()) {
                    int64_t k = pins[std::min<size_t>(static_cast<size_t>(c), pins.size() - 1)];
                    slot_term[blk.index_names[static_cast<size_t>(c * blk.dims)]] =
                        blk.index_sort == Sort::Real ? Term::real_lit(Value(k))
                                                     : Term::int_lit(k);
                    ScalarVar v{blk.value_names[static_cast<size_t>(c)], blk.value_sort};
                    // One value variable per distinct pinned index.
                    if (c > 0 && pins.size() == 1) {
                        slot_term[v.name] =
                            slot_term[blk.value_names[static_cast<size_t>(c - 1)]];
                    } else {
                        cl.universals.push_back(v);
                        slot_term[v.name] = tvar(v);
                    }
                    continue;
                }
                // No anchors: keep one universal index on the diagonal.
                if (!diag_index) {
                    ScalarVar k{blk.index_names[static_cast<size_t>(c * blk.dims)],
                                blk.index_sort};
                    cl.universals.push_back(k);
                    diag_index = k;
                    for (int d = 1; d < blk.dims; ++d) {
                        ScalarVar kd{blk.index_names[static_cast<size_t>(c * blk.dims + d)],
                                     blk.index_sort};
                        cl.universals.push_back(kd);
                        slot_term[kd.name] = tvar(kd);
                    }
                    ScalarVar v{blk.value_names[static_cast<size_t>(c)], blk.value_sort};
                    cl.universals.push_back(v);
                    diag_value = v;
                }
                for (int d = 0; d < blk.dims; ++d) {
                    const std::string& slot =
                        blk.index_names[static_cast<size_t>(c * blk.dims + d)];
                    if (!slot_term.count(slot)) slot_term[slot] = tvar(*diag_index);
                }
                slot_term[blk.value_names[static_cast<size_t>(c)]] = tvar(*diag_value);
                continue;
            }
            const auto& idx = it->second[static_cast<size_t>(use)];
            if (static_cast<int>(idx.size()) != blk.dims)
                throw EncodeError("index arity mismatch on '" + blk.array + "'");
            for (int d = 0; d < blk.dims; ++d)
                slot_term[blk.index_names[static_cast<size_t>(c * blk.dims + d)]] =
                    idx[static_cast<size_t>(d)];
            std::string key = Term::cell(blk.array, idx, blk.value_sort).str();
            if (!cell_value.count(key)) {
                ScalarVar v{blk.value_names[static_cast<size_t>(c)], blk.value_sort};
                cl.universals.push_back(v);
                cell_value[key] = tvar(v);
            }
            slot_term[blk.value_names[static_cast<size_t>(c)]] = cell_value[key];
        }
        if (blk.counts) {
            auto ca = count_arg.find(blk.array);
            if (ca != count_arg.end()) {
                slot_term[blk.z_name] = ca->second;
            } else {
                ScalarVar z{blk.z_name, blk.value_sort};
                cl.universals.push_back(z);
                slot_term[blk.z_name] = tvar(z);
            }
            ScalarVar cnt{blk.cnt_name, Sort::Int};
            cl.universals.push_back(cnt);
            slot_term[blk.cnt_name] = tvar(cnt);
            count_value[blk.array + "#"] = tvar(cnt);
            if (blk.counts_orig) {
                ScalarVar cnt0{blk.cnt0_name, Sort::Int};
                cl.universals.push_back(cnt0);
                slot_term[blk.cnt0_name] = tvar(cnt0);
                count_value[blk.array + "#0"] = tvar(cnt0);
            }
        }
    }
    for (const auto& [arr, idx] : count_arg) {
        const ArrayBlock* blk = block_of(sig, arr);
        if (!blk || !blk->counts)
            throw EncodeError("count term on '" + arr + "' without count tracking");
    }
    // Cells of erased arrays become unconstrained universals: the erased
    // abstraction keeps the query well-formed but cannot support it.
    int fresh_cell = 0;
    for (const auto& [arr, list] : cells) {
        const ArrayBlock* blk = block_of(sig, arr);
        if (blk && !blk->shared_value_only) continue;
        if (blk) continue;
        const ArrayDecl* decl = cfg_.find_array(arr);
        Sort vs = decl ? decl->value_sort : Sort::Int;
        for (const auto& idx : list) {
            std::string key = Term::cell(arr, idx, vs).str();
            if (cell_value.count(key)) continue;
            ScalarVar v{"erased" + std::to_string(fresh_cell++), vs};
            cl.universals.push_back(v);
            cell_value[key] = tvar(v);
        }
    }

    for (const auto& s : sig.slots()) {
        auto st = slot_term.find(s.name);
        if (st == slot_term.end()) throw EncodeError("unfilled property slot " + s.name);
        atom.args.push_back(st->second);
    }

    // Replace cell/count references with their value variables.
    std::function<Term(const Term&)> strip = [&](const Term& t) -> Term {
        const TermNode& n = t.n();
        if (n.kind == TermKind::Cell) {
            std::string key = t.str();
            auto it = cell_value.find(key);
            if (it == cell_value.end()) throw EncodeError("unmapped cell " + key);
            return it->second;
        }
        if (n.kind == TermKind::Count) {
            auto it = count_value.find(n.name + (n.count_orig ? "#0" : "#"));
            if (it == count_value.end()) throw EncodeError("unmapped count of " + n.name);
            return it->second;
        }
        if (n.args.empty()) return t;
        TermNode copy = n;
        for (auto& a : copy.args) a = strip(a);
        switch (copy.kind) {
            case TermKind::Add: return Term::add(copy.args[0], copy.args[1]);
            case TermKind::Sub: return Term::sub(copy.args[0], copy.args[1]);
            case TermKind::Neg: return Term::neg(copy.args[0]);
            case TermKind::MulConst: return Term::mul_const(copy.lit, copy.args[0]);
            case TermKind::ModConst: return Term::mod_const(copy.args[0], copy.lit.num);
            case TermKind::Eq:
            case TermKind::Ne:
            case TermKind::Lt:
            case TermKind::Le:
            case TermKind::Gt:
            case TermKind::Ge: return Term::cmp(copy.kind, copy.args[0], copy.args[1]);
            case TermKind::And: return Term::and_(copy.args[0], copy.args[1]);
            case TermKind::Or: return Term::or_(copy.args[0], copy.args[1]);
            case TermKind::Not: return Term::not_(copy.args[0]);
            default: return t;
        }
    };

    cl.body = {atom};
    cl.constraint = strip(guard);
    cl.goal = Goal{strip(concl)};
    return cl;
}

Encoder::Clauses Encoder::multiset_clauses(const HornSystem& sys, const MultisetOp& m, int sp,
                                           int dp) const {
    if (!abs_.shared_index)
        throw EncodeError("set/multiset operations need the shared-index abstraction");
    Build b = start(sys, sys.point_pred.at(sp), sys.point_pred.at(dp));
    const ArrayBlock* tb = block_of(*b.src, m.target);
    const ArrayBlock* lb = block_of(*b.src, m.lhs);
    const ArrayBlock* rb = block_of(*b.src, m.rhs);
    if (!tb || !lb || !rb) throw EncodeError("multiset operands must be tracked arrays");
    Term l = b.slot(lb->value_names[0]);
    Term r = b.slot(rb->value_names[0]);
    Term combined;
    if (m.kind == MultisetOp::Kind::Union) {
        combined = tb->value_sort == Sort::Bool ? Term::or_(l, r) : Term::add(l, r);
    } else {
        if (tb->value_sort != Sort::Bool)
            throw EncodeError("intersection is defined for sets only");
        combined = Term::and_(l, r);
    }
    std::map<std::string, Term> head;
    head[tb->value_names[0]] = combined;
    Clauses out;
    out.emplace_back(finish(b, {body_atom(b)}, Term::bool_lit(true), head_atom(b, head)),
                     m.kind == MultisetOp::Kind::Union ? "union" : "intersection");
    return out;
}

}  // namespace

// The count-tracking write and property encoding live in multiset.cpp /
// below; encode() drives everything.

HornSystem encode(const Cfg& c, const AbstractionConfig& cfg,
                  const std::vector<PropertySpec>& hints) {
    AbstractionConfig eff = cfg;
    // A property mentioning #a0 turns on original-contents tracking.
    auto scan = [&](const PropertySpec& p) {
        for (const Term* t : {&p.guard, &p.conclusion}) {
            std::vector<const TermNode*> stack{&t->n()};
            while (!stack.empty()) {
                const TermNode* n = stack.back();
                stack.pop_back();
                if (n->kind == TermKind::Count && n->count_orig) {
                    ArrayAbsConfig ac = eff.for_array(n->name);
                    ac.multiset = ArrayAbsConfig::Multiset::TrackOrig;
                    eff.per_array[n->name] = ac;
                }
                for (const auto& a : n->args) stack.push_back(&a.n());
            }
        }
    };
    for (const auto& p : c.properties) scan(p);
    for (const auto& p : hints) scan(p);

    Encoder enc(c, eff);
    HornSystem sys = enc.build_sigs();
    {
        // Entry fact: the initial control point holds for every input.
        const PredicateSig& entry = sys.pred(sys.point_pred.at(c.entry));
        HornClause fact;
        fact.universals = entry.slots();
        fact.constraint = Term::bool_lit(true);
        Atom head;
        head.pred = entry.id;
        for (const auto& s : fact.universals) head.args.push_back(Term::var(s.name, s.sort));
        fact.head = std::move(head);
        sys.clauses.push_back(std::move(fact));
        sys.provenance.push_back({{}, "entry", false});
    }
    for (const auto& e : c.edges) {
        auto clauses = enc.edge_clauses(sys, e);
        const auto& rules = enc.last_rules();
        for (size_t i = 0; i < clauses.size(); ++i) {
            sys.clauses.push_back(std::move(clauses[i]));
            sys.provenance.push_back({{e.id}, rules[i], false});
        }
    }
    auto add_prop = [&](const PropertySpec& p) {
        HornClause cl = enc.property_clause(sys, p);
        sys.clauses.push_back(std::move(cl));
        sys.provenance.push_back({{}, p.is_hint ? "hint" : "query", p.is_hint});
    };
    for (const auto& p : c.properties) add_prop(p);
    for (const auto& p : hints) add_prop(p);
    return sys;
}

std::vector<HornClause> abstract_edge(const HornSystem& sigs, const Cfg& c,
                                      const AbstractionConfig& cfg, const Edge& e) {
    Encoder enc(c, cfg);
    HornSystem fresh = enc.build_sigs();
    (void)sigs;
    return enc.edge_clauses(fresh, e);
}

HornClause encode_property(const HornSystem& sigs, const Cfg& c, const AbstractionConfig& cfg,
                           const PropertySpec& p) {
    Encoder enc(c, cfg);
    HornSystem fresh = enc.build_sigs();
    (void)sigs;
    return enc.property_clause(fresh, p);
}

std::vector<HornClause> expand_1_to_2(const PredicateSig& one, const PredicateSig& two) {
    if (one.blocks.size() != 1 || two.blocks.size() != 1)
        throw EncodeError("expansion expects single-array signatures");
    const ArrayBlock& b1 = one.blocks[0];
    const ArrayBlock& b2 = two.blocks[0];
    std::vector<HornClause> out;

    auto scalar_args = [&](std::vector<Term>& args) {
        for (const auto& s : one.scalars) args.push_back(Term::var(s.name, s.sort));
    };

    {  // pairing clause
        HornClause cl;
        for (const auto& s : one.scalars) cl.universals.push_back(s);
        ScalarVar k1{"k1", b1.index_sort}, k2{"k2", b1.index_sort};
        ScalarVar v1{"v1", b1.value_sort}, v2{"v2", b1.value_sort};
        for (const auto& u : {k1, v1, k2, v2}) cl.universals.push_back(u);
        Atom a1{one.id, {}}, a2{one.id, {}}, h{two.id, {}};
        scalar_args(a1.args);
        a1.args.push_back(Term::var("k1", b1.index_sort));
        a1.args.push_back(Term::var("v1", b1.value_sort));
        scalar_args(a2.args);
        a2.args.push_back(Term::var("k2", b1.index_sort));
        a2.args.push_back(Term::var("v2", b1.value_sort));
        scalar_args(h.args);
        h.args.push_back(Term::var("k1", b1.index_sort));
        h.args.push_back(Term::var("v1", b1.value_sort));
        h.args.push_back(Term::var("k2", b1.index_sort));
        h.args.push_back(Term::var("v2", b1.value_sort));
        cl.body = {a1, a2};
        cl.constraint = Term::lt(Term::var("k1", b1.index_sort), Term::var("k2", b1.index_sort));
        cl.head = h;
        out.push_back(std::move(cl));
    }
    {  // diagonal clause
        HornClause cl;
        for (const auto& s : one.scalars) cl.universals.push_back(s);
        cl.universals.push_back({"k", b1.index_sort});
        cl.universals.push_back({"v", b1.value_sort});
        Atom a{one.id, {}}, h{two.id, {}};
        scalar_args(a.args);
        a.args.push_back(Term::var("k", b1.index_sort));
        a.args.push_back(Term::var("v", b1.value_sort));
        scalar_args(h.args);
        h.args.push_back(Term::var("k", b1.index_sort));
        h.args.push_back(Term::var("v", b1.value_sort));
        h.args.push_back(Term::var("k", b1.index_sort));
        h.args.push_back(Term::var("v", b1.value_sort));
        cl.body = {a};
        cl.constraint = Term::bool_lit(true);
        cl.head = h;
        out.push_back(std::move(cl));
    }
    (void)b2;
    return out;
}

}  // namespace cellmorph
