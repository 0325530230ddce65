#include <gtest/gtest.h>

#include "cellmorph/galois.hpp"
#include "cellmorph/mutate.hpp"
#include "cellmorph/oracle.hpp"
#include "cellmorph/simplify.hpp"
#include "test_helpers.hpp"

using namespace cellmorph;
using namespace cellmorph::testing;

TEST(Interpret, FillEndsAllFortyTwo) {
    Cfg c = corpus_cfg("fill.arr");
    Bounds b;
    Oracle oracle(c, b);
    auto reach = oracle.interpret();
    auto it = reach.find(c.exits[0]);
    ASSERT_NE(it, reach.end());
    ASSERT_FALSE(it->second.empty());
    for (const auto& s : it->second)
        for (const auto& v : s.arrays[0]) EXPECT_EQ(v, Value(42));
}

TEST(Interpret, EmptyProgramHasEntryOnly) {
    Program p = parse("int i;");
    Cfg c = frontend_pipeline(p);
    Bounds b;
    Oracle oracle(c, b);
    auto reach = oracle.interpret();
    EXPECT_EQ(reach.size(), 1u);
}

TEST(Interpret, LoopIjAtTwo) {
    Cfg c = corpus_cfg("loop_ij.arr");
    Bounds b;
    Oracle oracle(c, b);
    auto reach = oracle.interpret();
    auto it = reach.find(c.exits[0]);
    ASSERT_NE(it, reach.end());
    bool found = false;
    for (const auto& s : it->second) {
        if (s.scalars.at("n") == Value(2)) {
            EXPECT_EQ(s.scalars.at("i"), Value(2));
            EXPECT_EQ(s.scalars.at("j"), Value(5));
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(Interpret, OutOfRangeReadHaltsThePath) {
    Program p = parse("int n; int a[n]; int v; v = a[n]; assert true => v == v;");
    Cfg c = frontend_pipeline(p);
    Bounds b;
    Oracle oracle(c, b);
    auto reach = oracle.interpret();
    auto it = reach.find(c.exits[0]);
    EXPECT_TRUE(it == reach.end() || it->second.empty());
}

TEST(Alpha, SingletonStateTwoTuples) {
    Program p = parse("int a[];");
    Cfg c = frontend_pipeline(p);
    Bounds b;
    b.max_len = 2;
    b.hi = 1;
    Oracle oracle(c, b);
    PredicateSig sig;
    sig.id = 0;
    sig.name = "pt";
    ArrayBlock blk;
    blk.array = "a";
    blk.cells = 1;
    blk.index_names = {"k"};
    blk.value_names = {"a_k"};
    sig.blocks = {blk};
    OracleState s;
    s.arrays = {{Value(5), Value(7)}};
    s.arrays0 = s.arrays;
    s.dims = {{2}};
    auto tuples = oracle.state_tuples(sig, s);
    ASSERT_EQ(tuples.size(), 2u);
    EXPECT_EQ(tuples[0], (Tuple{Value(0), Value(5)}));
    EXPECT_EQ(tuples[1], (Tuple{Value(1), Value(7)}));
}

TEST(Alpha, FillLoopHeadTable) {
    Cfg c = corpus_cfg("fill.arr");
    AbstractionConfig cfg = cells(1);
    HornSystem sys = encode(c, cfg);
    Bounds b;
    Oracle oracle(c, b);
    Tables t = oracle.build_tables(sys, cfg);
    int loop = *sys.pred_by_name("loop");
    // At i = 1 the written prefix holds 42 and the suffix any initial value.
    bool prefix = false, suffix = false;
    for (const auto& row : t.rows[loop]) {
        if (row[1] == Value(1) && row[2] == Value(0) && row[3] == Value(42)) prefix = true;
        if (row[1] == Value(1) && row[2] == Value(1) && row[3] == Value(3)) suffix = true;
    }
    EXPECT_TRUE(prefix);
    EXPECT_TRUE(suffix);
}

TEST(Alpha, OrderedPairsContainDiagonal) {
    Cfg c = corpus_cfg("selsort.arr");
    AbstractionConfig cfg = cells(2);
    HornSystem sys = encode(c, cfg);
    Bounds b;
    b.hi = 1;
    Oracle oracle(c, b);
    Tables t = oracle.build_tables(sys, cfg);
    int outer = *sys.pred_by_name("outerloop");
    bool diag = false;
    for (const auto& row : t.rows[outer]) {
        // slots: l0 h l, k1, a_k1, k2, a_k2
        if (row[3] == row[5] && row[4] == row[6]) diag = true;
        EXPECT_TRUE(row[3] <= row[5]);  // ordering invariant
    }
    EXPECT_TRUE(diag);
}

TEST(Alpha, SelectionSortExitIsSorted) {
    Cfg c = corpus_cfg("selsort.arr");
    Bounds b;
    b.hi = 2;
    Oracle oracle(c, b);
    auto reach = oracle.interpret();
    auto it = reach.find(c.exits[0]);
    ASSERT_NE(it, reach.end());
    for (const auto& s : it->second) {
        int64_t l0 = s.scalars.at("l0").num;
        int64_t h = s.scalars.at("h").num;
        const auto& a = s.arrays[0];
        for (int64_t k1 = l0; k1 < h - 1 && k1 + 1 < static_cast<int64_t>(a.size()); ++k1)
            if (k1 >= 0 && k1 + 1 < h)
                EXPECT_TRUE(a[static_cast<size_t>(k1)] <= a[static_cast<size_t>(k1 + 1)]);
    }
}

TEST(Alpha, CountsOfConstantArray) {
    Program p = parse("int a[];");
    Cfg c = frontend_pipeline(p);
    Bounds b;
    b.max_len = 2;
    b.lo = 0;
    b.hi = 3;
    Oracle oracle(c, b);
    PredicateSig sig;
    sig.id = 0;
    sig.name = "pt";
    ArrayBlock blk;
    blk.array = "a";
    blk.cells = 1;
    blk.index_names = {"k"};
    blk.value_names = {"a_k"};
    blk.counts = true;
    blk.z_name = "z";
    blk.cnt_name = "cnt";
    sig.blocks = {blk};
    OracleState s;
    s.arrays = {{Value(42), Value(42)}};
    s.arrays0 = s.arrays;
    s.dims = {{2}};
    for (const auto& row : oracle.state_tuples(sig, s)) {
        // slots: k, a_k, z, cnt
        if (row[2] == Value(42))
            EXPECT_EQ(row[3], Value(2));
        else
            EXPECT_EQ(row[3], Value(0));
    }
}

TEST(Galois, LawsAtBoundTwo) {
    auto c1 = check_galois_cell1(2, 2, 0);
    EXPECT_TRUE(c1.ok()) << c1.alpha_gamma_violations << "/" << c1.gamma_alpha_violations;
    auto c1s = check_galois_cell1(2, 2, 1);
    EXPECT_TRUE(c1s.ok());
    auto c2 = check_galois_cell2_ordered(2, 2, 0);
    EXPECT_TRUE(c2.ok());
    auto c2u = check_galois_cell2_unordered(2, 2, 0);
    EXPECT_TRUE(c2u.ok());
    auto cc = check_galois_count(2, 2, 0);
    EXPECT_TRUE(cc.ok());
}

TEST(CheckRules, CorpusZeroViolations) {
    Bounds b;
    b.hi = 2;
    for (const char* name : {"fill.arr", "find_min.arr", "cex_gvn.arr"}) {
        Cfg c = corpus_cfg(name);
        AbstractionConfig cfg = cells(1);
        HornSystem sys = encode(c, cfg);
        Oracle oracle(c, b);
        Tables t = oracle.build_tables(sys, cfg);
        auto violations = oracle.check_rules(sys, cfg, t);
        EXPECT_TRUE(violations.empty())
            << name << ": " << (violations.empty() ? "" : violations[0].detail);
    }
}

TEST(CheckRules, CorruptedClauseIsCaught) {
    Cfg c = corpus_cfg("fill.arr");
    AbstractionConfig cfg = cells(1);
    HornSystem sys = encode(c, cfg);
    auto mutated = apply_mutation(sys, 0);  // flip i != k in the write copy
    ASSERT_TRUE(mutated.has_value());
    Bounds b;
    Oracle oracle(c, b);
    Tables t = oracle.build_tables(*mutated, cfg);
    EXPECT_FALSE(oracle.check_rules(*mutated, cfg, t).empty());
}

TEST(CheckRules, EmptySystemHasNoViolations) {
    Program p = parse("int i;");
    Cfg c = frontend_pipeline(p);
    HornSystem sys;
    Bounds b;
    Oracle oracle(c, b);
    Tables t;
    EXPECT_TRUE(oracle.check_rules(sys, cells(1), t).empty());
}

TEST(CheckRules, StateBudgetGuard) {
    Program p = parse("int a[]; int i; i = 0;");
    Cfg c = frontend_pipeline(p);
    Bounds b;
    b.state_budget = 2;
    Oracle oracle(c, b);
    EXPECT_THROW(oracle.interpret(), BudgetExceeded);
}
