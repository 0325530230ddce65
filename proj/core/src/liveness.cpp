#include <algorithm>
#include <map>
#include <set>

#include "cellmorph/cfg.hpp"

namespace cellmorph {

namespace {

using VarSet = std::set<std::string>;

void transition_uses_defs(const Transition& t, VarSet& uses, VarSet& defs) {
    if (auto* r = std::get_if<ArrayRead>(&t)) {
        for (const auto& ix : r->index)
            for (const auto& v : ix.vars()) uses.insert(v);
        defs.insert(r->target);
        return;
    }
    if (auto* w = std::get_if<ArrayWrite>(&t)) {
        for (const auto& ix : w->index)
            for (const auto& v : ix.vars()) uses.insert(v);
        for (const auto& v : w->value.vars()) uses.insert(v);
        return;
    }
    if (auto* s = std::get_if<ScalarOp>(&t)) {
        for (const auto& v : s->guard.vars()) uses.insert(v);
        for (const auto& [lhs, rhs] : s->assigns) {
            for (const auto& v : rhs.vars()) uses.insert(v);
            defs.insert(lhs);
        }
        return;
    }
    if (auto* k = std::get_if<Kill>(&t)) {
        (void)k;
        return;
    }
    // ArrayInit / MultisetOp: range vars are pinned separately.
}

}  // namespace

Cfg insert_kills(const Cfg& c) {
    Cfg out = c;

    // Vars mentioned in array ranges stay live everywhere (bounds guards
    // reference them in every clause that carries cell blocks).
    VarSet pinned;
    for (const auto& a : out.arrays)
        for (const auto& r : a.range)
            for (const auto& v : r.vars()) pinned.insert(v);

    // Property references keep scalars alive at their attachment point.
    std::map<int, VarSet> prop_uses;
    auto scalar_names = [&]() {
        VarSet s;
        for (const auto& d : out.scalar_decls) s.insert(d.name);
        return s;
    }();
    for (const auto& prop : out.properties) {
        int pt = prop.at.empty() ? (out.exits.empty() ? out.entry : out.exits[0])
                                 : out.point_by_name(prop.at).value_or(out.entry);
        VarSet binders;
        for (const auto& [b, s] : prop.binders) binders.insert(b);
        for (const Term* t : {&prop.guard, &prop.conclusion})
            for (const auto& v : t->vars())
                if (!binders.count(v) && scalar_names.count(v)) prop_uses[pt].insert(v);
    }

    // Backward fixpoint over edges.
    std::map<int, VarSet> live;
    for (const auto& p : out.points) live[p.id] = prop_uses.count(p.id) ? prop_uses[p.id] : VarSet{};
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = out.edges.rbegin(); it != out.edges.rend(); ++it) {
            VarSet uses, defs;
            transition_uses_defs(it->transition, uses, defs);
            VarSet flow = live[it->dst];
            for (const auto& d : defs) flow.erase(d);
            for (const auto& u : uses) flow.insert(u);
            VarSet& src_live = live[it->src];
            size_t before = src_live.size();
            src_live.insert(flow.begin(), flow.end());
            if (src_live.size() != before) changed = true;
        }
    }
    for (auto& [pt, s] : live) s.insert(pinned.begin(), pinned.end());

    // Deaths per edge under the base live sets.
    auto deaths_of = [&](const Edge& e) {
        VarSet uses, defs;
        transition_uses_defs(e.transition, uses, defs);
        VarSet dying = live[e.src];
        dying.insert(defs.begin(), defs.end());
        for (const auto& v : live[e.dst]) dying.erase(v);
        return dying;
    };

    std::map<int, int> in_degree, out_degree;
    for (const auto& e : out.edges) {
        in_degree[e.dst]++;
        out_degree[e.src]++;
    }

    // Batch kills along straight-line segments: accumulate dead variables
    // and flush one Kill edge as late as possible, but always before an
    // edge that reads or rewrites a pending variable and before edges that
    // add no further deaths.
    int next_point = 0;
    for (const auto& p : out.points) next_point = std::max(next_point, p.id + 1);
    int next_edge = 0;
    for (const auto& e : out.edges) next_edge = std::max(next_edge, e.id + 1);

    struct PendingKill {
        int edge_id;  // kill goes right after this edge
        VarSet vars;  // accumulated dead variables
        // Interior points with the variables already pending when crossed.
        std::vector<std::pair<int, VarSet>> carried_points;
    };
    std::vector<PendingKill> batches;

    // Segments: maximal edge chains through 1-in/1-out points.
    std::set<int> segment_started;
    for (const auto& e : out.edges) {
        bool interior = in_degree[e.src] == 1 && out_degree[e.src] == 1;
        if (interior) continue;  // belongs to its predecessor's segment
        // Walk the chain from this head edge.
        std::vector<const Edge*> chain{&e};
        std::set<int> seen{e.id};
        const Edge* cur = &e;
        for (;;) {
            int q = cur->dst;
            if (in_degree[q] != 1 || out_degree[q] != 1) break;
            const Edge* next_e = nullptr;
            for (const auto& cand : out.edges)
                if (cand.src == q) next_e = &cand;
            if (!next_e || seen.count(next_e->id)) break;
            chain.push_back(next_e);
            seen.insert(next_e->id);
            cur = next_e;
        }
        PendingKill pending{-1, {}, {}};
        auto flush = [&]() {
            if (!pending.vars.empty()) batches.push_back(pending);
            pending = {-1, {}, {}};
        };
        for (const Edge* ce : chain) {
            VarSet uses, defs;
            transition_uses_defs(ce->transition, uses, defs);
            VarSet dying = deaths_of(*ce);
            if (!pending.vars.empty()) {
                bool touched = false;
                for (const auto& v : pending.vars)
                    if (uses.count(v) || defs.count(v)) touched = true;
                if (touched || dying.empty()) {
                    flush();
                } else {
                    pending.carried_points.emplace_back(ce->src, pending.vars);
                }
            }
            if (!dying.empty()) {
                pending.vars.insert(dying.begin(), dying.end());
                pending.edge_id = ce->id;
            }
        }
        flush();
    }

    for (const auto& batch : batches) {
        for (const auto& [q, vars] : batch.carried_points) live[q].insert(vars.begin(), vars.end());
        Edge& e = *std::find_if(out.edges.begin(), out.edges.end(),
                                [&](const Edge& x) { return x.id == batch.edge_id; });
        ControlPoint k;
        k.id = next_point++;
        k.name = "p" + std::to_string(k.id);
        k.arrays = out.point(e.dst).arrays;
        int dst = e.dst;
        e.dst = k.id;
        live[k.id] = live[dst];
        live[k.id].insert(batch.vars.begin(), batch.vars.end());
        out.points.push_back(k);
        Edge kill;
        kill.id = next_edge++;
        kill.src = k.id;
        kill.dst = dst;
        kill.transition = Kill{std::vector<std::string>(batch.vars.begin(), batch.vars.end())};
        out.edges.push_back(std::move(kill));
    }

    // Final scalar vectors: live vars in declaration order.
    for (auto& p : out.points) {
        std::vector<ScalarVar> vec;
        for (const auto& d : out.scalar_decls)
            if (live[p.id].count(d.name)) vec.push_back({d.name, d.sort});
        p.scalars = std::move(vec);
    }
    return out;
}

Cfg frontend_pipeline(const Program& p) { return insert_kills(normalize(lower_to_cfg(p))); }

}  // namespace cellmorph
