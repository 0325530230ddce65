#include <gtest/gtest.h>

#include "cellmorph/multiset.hpp"
#include "cellmorph/oracle.hpp"
#include "test_helpers.hpp"

using namespace cellmorph;
using namespace cellmorph::testing;

namespace {

AbstractionConfig tracked() {
    AbstractionConfig cfg = cells(1);
    cfg.multiset = ArrayAbsConfig::Multiset::TrackOrig;
    return cfg;
}

}  // namespace

TEST(Multiset, WriteExpandsToSixClauses) {
    Cfg c = corpus_cfg("selsort_perm.arr");
    HornSystem sys = encode(c, tracked());
    // Two writes, six clauses each, through two fresh predicates apiece.
    EXPECT_EQ(count_rule(sys, "count-decr-ne"), 2u);
    EXPECT_EQ(count_rule(sys, "count-decr-eq"), 2u);
    EXPECT_EQ(count_rule(sys, "count-incr-ne"), 2u);
    EXPECT_EQ(count_rule(sys, "count-incr-eq"), 2u);
    EXPECT_EQ(count_rule(sys, "count-write-diff"), 2u);
    EXPECT_EQ(count_rule(sys, "count-write-same"), 2u);
    size_t decr = 0, incr = 0;
    for (const auto& p : sys.preds) {
        if (p.name.find("__decr") != std::string::npos) ++decr;
        if (p.name.find("__incr") != std::string::npos) ++incr;
        if (p.aux_edge >= 0) EXPECT_TRUE(p.aux_phase == 0 || p.aux_phase == 1);
    }
    EXPECT_EQ(decr, 2u);
    EXPECT_EQ(incr, 2u);
    // Decrement clauses are nonlinear (the old cell value is looked up).
    for (size_t i = 0; i < sys.clauses.size(); ++i)
        if (sys.provenance[i].rule == "count-decr-eq")
            EXPECT_EQ(sys.clauses[i].body.size(), 2u);
}

TEST(Multiset, CountFrameHolds) {
    Cfg c = corpus_cfg("selsort_perm.arr");
    HornSystem sys = encode(c, tracked());
    EXPECT_TRUE(count_frame_violations(sys, "a").empty());
}

TEST(Multiset, OrigCopyAutoEnabledByProperty) {
    // The property mentions #a0, so plain tracking upgrades to the copy.
    Cfg c = corpus_cfg("selsort_perm.arr");
    AbstractionConfig cfg = cells(1);
    cfg.multiset = ArrayAbsConfig::Multiset::Track;
    HornSystem sys = encode(c, cfg);
    const PredicateSig* end = nullptr;
    for (const auto& p : sys.preds)
        if (p.name == "end") end = &p;
    ASSERT_NE(end, nullptr);
    ASSERT_EQ(end->blocks.size(), 1u);
    EXPECT_TRUE(end->blocks[0].counts_orig);
}

TEST(Multiset, PermutationQueryShape) {
    Cfg c = corpus_cfg("selsort_perm.arr");
    HornSystem sys = encode(c, tracked());
    const HornClause* q = nullptr;
    for (const auto& cl : sys.clauses)
        if (cl.is_goal()) q = &cl;
    ASSERT_NE(q, nullptr);
    EXPECT_EQ(q->goal->constraint.kind(), TermKind::Eq);
    EXPECT_EQ(sys.pred(q->body[0].pred).name, "end");
}

TEST(Multiset, WriteSameValueNetZero) {
    // Writing the value already present keeps every count unchanged.
    Program p = parse("int a[]; int i; int v; v = a[i]; a[i] = v;"
                      "assert forall z : true => #a(z) == #a0(z);");
    Cfg c = frontend_pipeline(p);
    AbstractionConfig cfg = tracked();
    HornSystem sys = encode(c, cfg);
    Bounds b;
    b.max_len = 2;
    b.hi = 1;
    Oracle oracle(c, b);
    Tables t = oracle.build_tables(sys, cfg);
    EXPECT_TRUE(oracle.check_rules(sys, cfg, t).empty());
}

TEST(Multiset, ConservationAcrossLoopHeads) {
    // Selection sort only permutes: per state the count of each value is
    // the same at the outer loop head and at exit as it was initially.
    Cfg c = corpus_cfg("selsort_perm.arr");
    Bounds b;
    b.hi = 2;
    Oracle oracle(c, b);
    auto reach = oracle.interpret();
    size_t checked = 0;
    for (const char* point : {"outerloop", "end"}) {
        auto id = c.point_by_name(point);
        ASSERT_TRUE(id.has_value());
        auto it = reach.find(*id);
        if (it == reach.end()) continue;
        for (const auto& s : it->second) {
            const auto& a = s.arrays[0];
            const auto& a0 = s.arrays0[0];
            for (int64_t z = b.lo; z <= b.hi; ++z) {
                int64_t now = 0, orig = 0;
                for (const auto& v : a)
                    if (v == Value(z)) ++now;
                for (const auto& v : a0)
                    if (v == Value(z)) ++orig;
                EXPECT_EQ(now, orig);
                ++checked;
            }
        }
    }
    EXPECT_GT(checked, 0u);
}

TEST(Multiset, SumLawOverTables) {
    Cfg c = corpus_cfg("selsort_perm.arr");
    Bounds b;
    b.hi = 2;
    Oracle oracle(c, b);
    auto reach = oracle.interpret();
    for (const auto& [pt, states] : reach) {
        for (const auto& s : states) {
            if (s.arrays[0].empty()) continue;
            int64_t total = 0;
            for (int64_t z = b.lo; z <= b.hi; ++z)
                for (const auto& v : s.arrays[0])
                    if (v == Value(z)) ++total;
            EXPECT_EQ(total, static_cast<int64_t>(s.arrays[0].size()));
        }
    }
}

namespace {

// Builds a three-array shared-index cfg with one multiset operation.
Cfg union_cfg(MultisetOp::Kind kind, Sort value_sort) {
    Cfg c;
    for (const char* name : {"a", "b", "cc"}) {
        ArrayDecl d;
        d.name = name;
        d.value_sort = value_sort;
        c.arrays.push_back(d);
    }
    ControlPoint p0{0, "init", {}, {}};
    ControlPoint p1{1, "mid", {}, {"a", "b", "cc"}};
    ControlPoint p2{2, "end", {}, {"a", "b", "cc"}};
    c.points = {p0, p1, p2};
    int eid = 0;
    int cur = 0;
    // chain of init edges
    std::vector<std::string> in_scope;
    for (const char* name : {"a", "b", "cc"}) {
        in_scope.push_back(name);
        ControlPoint mid{static_cast<int>(c.points.size()), "q" + std::to_string(eid),
                         {}, in_scope};
        int dst = name == std::string("cc") ? 1 : mid.id;
        if (dst != 1) c.points.push_back(mid);
        c.edges.push_back({eid, cur, dst, ArrayInit{name}});
        cur = dst;
        ++eid;
    }
    c.edges.push_back({eid++, 1, 2, MultisetOp{kind, "a", "b", "cc"}});
    c.entry = 0;
    c.exits = {2};
    return c;
}

}  // namespace

TEST(Multiset, UnionAndIntersectionShapes) {
    AbstractionConfig cfg = cells(1);
    cfg.shared_index = true;
    {
        Cfg c = union_cfg(MultisetOp::Kind::Union, Sort::Bool);
        HornSystem sys = encode(c, cfg);
        EXPECT_EQ(count_rule(sys, "union"), 1u);
        // Boolean union is a disjunction in the head.
        for (size_t i = 0; i < sys.clauses.size(); ++i) {
            if (sys.provenance[i].rule != "union") continue;
            bool found_or = false;
            for (const auto& arg : sys.clauses[i].head->args)
                if (arg.kind() == TermKind::Or) found_or = true;
            EXPECT_TRUE(found_or);
        }
    }
    {
        Cfg c = union_cfg(MultisetOp::Kind::Union, Sort::Int);
        HornSystem sys = encode(c, cfg);
        for (size_t i = 0; i < sys.clauses.size(); ++i) {
            if (sys.provenance[i].rule != "union") continue;
            bool found_add = false;
            for (const auto& arg : sys.clauses[i].head->args)
                if (arg.kind() == TermKind::Add) found_add = true;
            EXPECT_TRUE(found_add);
        }
    }
    {
        Cfg c = union_cfg(MultisetOp::Kind::Intersection, Sort::Int);
        EXPECT_THROW(encode(c, cfg), EncodeError);  // sets only
    }
}

TEST(Multiset, UnionMatchesConcreteSemantics) {
    AbstractionConfig cfg = cells(1);
    cfg.shared_index = true;
    for (auto kind : {MultisetOp::Kind::Union, MultisetOp::Kind::Intersection}) {
        Cfg c = union_cfg(kind, Sort::Bool);
        HornSystem sys = encode(c, cfg);
        Bounds b;
        b.max_len = 3;
        b.lo = 0;
        b.hi = 1;
        Oracle oracle(c, b);
        Tables t = oracle.build_tables(sys, cfg);
        EXPECT_TRUE(oracle.check_rules(sys, cfg, t).empty());
    }
}

TEST(Multiset, DisjointSingletonUnion) {
    // 0 or 1 = 1 at the sampled index.
    AbstractionConfig cfg = cells(1);
    cfg.shared_index = true;
    Cfg c = union_cfg(MultisetOp::Kind::Union, Sort::Bool);
    HornSystem sys = encode(c, cfg);
    Bounds b;
    b.max_len = 1;
    b.lo = 0;
    b.hi = 1;
    Oracle oracle(c, b);
    Tables t = oracle.build_tables(sys, cfg);
    auto end_pred = sys.point_pred.at(2);
    bool found = false;
    for (const auto& row : t.rows[end_pred]) {
        // slots: k, a_k, b_k, cc_k
        if (row[2] == Value(0) && row[3] == Value(1)) {
            EXPECT_EQ(row[1], Value(1));
            found = true;
        }
    }
    EXPECT_TRUE(found);
}
