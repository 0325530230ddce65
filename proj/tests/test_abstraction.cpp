#include <gtest/gtest.h>

#include "cellmorph/oracle.hpp"
#include "cellmorph/simplify.hpp"
#include "cellmorph/smtlib.hpp"
#include "test_helpers.hpp"

using namespace cellmorph;
using namespace cellmorph::testing;

TEST(Encode, FillMatchesThePaperSystem) {
    Cfg c = corpus_cfg("fill.arr");
    HornSystem sys = simplify(encode(c, cells(1)));
    std::set<std::string> names;
    for (const auto& p : sys.preds) names.insert(p.name);
    EXPECT_EQ(names, (std::set<std::string>{"loop", "write", "incr", "end"}));
    size_t rules = 0, queries = 0;
    for (const auto& cl : sys.clauses) (cl.is_goal() ? queries : rules)++;
    EXPECT_EQ(rules, 6u);
    EXPECT_EQ(queries, 1u);
    // The overwrite clause pins the head cell to the written constant.
    bool found_42 = false;
    for (const auto& cl : sys.clauses) {
        if (!cl.head) continue;
        for (const auto& arg : cl.head->args)
            if (arg.kind() == TermKind::Lit && arg.n().lit == Value(42)) found_42 = true;
    }
    EXPECT_TRUE(found_42);
    // The initial fact drives loop(n, 0, k, a_k).
    bool init_fact = false;
    for (const auto& cl : sys.clauses) {
        if (!cl.head || !cl.body.empty()) continue;
        if (sys.pred(cl.head->pred).name == "loop" &&
            cl.head->args[1] == Term::int_lit(0))
            init_fact = true;
    }
    EXPECT_TRUE(init_fact);
}

TEST(Encode, LoopIjFlatScalarEncoding) {
    Cfg c = corpus_cfg("loop_ij.arr");
    HornSystem sys = encode(c, cells(1));
    // One predicate per point; incr_i and incr_j kept in the flat encoding.
    EXPECT_TRUE(sys.pred_by_name("incr_i").has_value());
    EXPECT_TRUE(sys.pred_by_name("incr_j").has_value());
    // No cell slots anywhere: the program has no arrays.
    for (const auto& p : sys.preds) EXPECT_TRUE(p.blocks.empty());
    // After simplification the entry collapses to loop(n, 0, 1).
    HornSystem simp = simplify(sys);
    bool fact = false;
    for (const auto& cl : simp.clauses)
        if (cl.head && cl.body.empty() && sys.pred_by_name("loop") &&
            simp.pred(cl.head->pred).name == "loop" && cl.head->args.size() == 3 &&
            cl.head->args[1] == Term::int_lit(0) && cl.head->args[2] == Term::int_lit(1))
            fact = true;
    EXPECT_TRUE(fact);
}

TEST(Encode, CellsZeroErasesArrays) {
    Cfg c = corpus_cfg("fill.arr");
    HornSystem sys = encode(c, cells(0));
    for (const auto& p : sys.preds) EXPECT_TRUE(p.blocks.empty());
    // Writes are dropped: no clause mentions 42.
    for (const auto& cl : sys.clauses) {
        if (!cl.head) continue;
        for (const auto& arg : cl.head->args)
            EXPECT_FALSE(arg.kind() == TermKind::Lit && arg.n().lit == Value(42));
    }
}

TEST(Encode, CellsZeroReadIsNondeterministic) {
    Program p = parse("int a[]; int v; v = a[1]; assert true => v == v;");
    Cfg c = frontend_pipeline(p);
    HornSystem sys = encode(c, cells(0));
    // The read clause's head target is a fresh universal, unconstrained.
    bool found = false;
    for (size_t i = 0; i < sys.clauses.size(); ++i) {
        if (sys.provenance[i].rule != "read0") continue;
        found = true;
        const HornClause& cl = sys.clauses[i];
        EXPECT_TRUE(cl.constraint.is_true());
        EXPECT_EQ(cl.body.size(), 1u);
    }
    EXPECT_TRUE(found);
}

TEST(Encode, ReadOneCellPair) {
    Cfg c = corpus_cfg("find_min.arr");
    HornSystem sys = encode(c, cells(1));
    size_t diff = count_rule(sys, "read1-diff");
    size_t same = count_rule(sys, "read1-same");
    EXPECT_EQ(diff, same);
    EXPECT_GE(diff, 2u);
    // The combine clause is nonlinear.
    for (size_t i = 0; i < sys.clauses.size(); ++i)
        if (sys.provenance[i].rule == "read1-diff")
            EXPECT_EQ(sys.clauses[i].body.size(), 2u);
}

TEST(Encode, WeakenedReadsAreLinear) {
    AbstractionConfig cfg = cells(1);
    cfg.weakened = true;
    Cfg c = corpus_cfg("find_min.arr");
    HornSystem sys = encode(c, cfg);
    EXPECT_EQ(count_rule(sys, "read1-diff"), 0u);
    EXPECT_GE(count_rule(sys, "read1-weak-diff"), 2u);
    for (size_t i = 0; i < sys.clauses.size(); ++i)
        if (sys.provenance[i].rule == "read1-weak-diff")
            EXPECT_EQ(sys.clauses[i].body.size(), 1u);
}

TEST(Encode, WeakenedDominatesFullReads) {
    // Every tuple imposed by the full rules is imposed by the weakened ones.
    Cfg c = corpus_cfg("find_min.arr");
    AbstractionConfig full = cells(1);
    AbstractionConfig weak = cells(1);
    weak.weakened = true;
    HornSystem fsys = encode(c, full);
    HornSystem wsys = encode(c, weak);
    Bounds b;
    b.hi = 2;
    Oracle oracle(c, b);
    Tables ft = oracle.build_tables(fsys, full);
    Tables wt = oracle.build_tables(wsys, weak);
    for (size_t i = 0; i < fsys.clauses.size(); ++i) {
        if (fsys.provenance[i].rule != "read1-diff") continue;
        // Match it with the weakened clause of the same head.
        for (size_t j = 0; j < wsys.clauses.size(); ++j) {
            if (wsys.provenance[j].rule != "read1-weak-diff") continue;
            if (wsys.clauses[j].head->pred != fsys.clauses[i].head->pred) continue;
            auto full_imposed = oracle.imposed_set(fsys, i, ft);
            auto weak_imposed = oracle.imposed_set(wsys, j, wt);
            for (const auto& t : full_imposed)
                EXPECT_TRUE(weak_imposed.count(t)) << "tuple missing in weakened set";
        }
    }
}

TEST(Encode, ReadTwoCellsCaseSplit) {
    Cfg c = corpus_cfg("selsort.arr");
    HornSystem sys = encode(c, cells(2));
    EXPECT_GE(count_rule(sys, "read2-1"), 2u);
    size_t nonlinear = 0, linear = 0;
    for (size_t i = 0; i < sys.clauses.size(); ++i) {
        const std::string& r = sys.provenance[i].rule;
        if (r == "read2-1" || r == "read2-2") {
            EXPECT_EQ(sys.clauses[i].body.size(), 2u);
            ++nonlinear;
        }
        if (r == "read2-3" || r == "read2-4") {
            EXPECT_EQ(sys.clauses[i].body.size(), 1u);
            ++linear;
        }
    }
    EXPECT_EQ(nonlinear, linear);
}

TEST(Encode, ReadCaseSplitExhaustive) {
    // The soundness lemma's case list covers every ordered triple exactly
    // once; which of the published clause guards apply can overlap.
    for (int i = 0; i <= 2; ++i) {
        for (int k1 = 0; k1 <= 2; ++k1) {
            for (int k2 = k1; k2 <= 2; ++k2) {
                int cases = 0;
                if (k1 != i && i < k2) ++cases;       // case i
                if (k2 < i) ++cases;                  // case ii
                if (k1 == i && i < k2) ++cases;       // case iii
                if (k2 == i && k1 <= i) ++cases;      // case iv
                EXPECT_EQ(cases, 1) << i << " " << k1 << " " << k2;
            }
        }
    }
}

TEST(Encode, WriteCaseSplitExhaustive) {
    for (int i = 0; i <= 2; ++i) {
        for (int k1 = 0; k1 <= 2; ++k1) {
            for (int k2 = k1; k2 <= 2; ++k2) {
                int cases = 0;
                if (i != k1 && i != k2) ++cases;
                if (i == k1 && i != k2) ++cases;
                if (i != k1 && i == k2) ++cases;
                if (i == k1 && i == k2) ++cases;
                EXPECT_EQ(cases, 1);
            }
        }
    }
}

TEST(Encode, WriteTwoCellsAllLinear) {
    Cfg c = corpus_cfg("selsort.arr");
    HornSystem sys = encode(c, cells(2));
    for (size_t i = 0; i < sys.clauses.size(); ++i)
        if (sys.provenance[i].rule.rfind("write2-", 0) == 0)
            EXPECT_EQ(sys.clauses[i].body.size(), 1u);
    EXPECT_EQ(count_rule(sys, "write2-1"), 2u);
    EXPECT_EQ(count_rule(sys, "write2-4"), 2u);
}

TEST(Encode, InitTwoCellsPairingAndDiagonal) {
    Cfg c = corpus_cfg("reverse.arr");
    AbstractionConfig cfg;
    cfg.per_array["a"] = {2, false, ArrayAbsConfig::Multiset::Off};
    cfg.per_array["b"] = {1, false, ArrayAbsConfig::Multiset::Off};
    HornSystem sys = encode(c, cfg);
    EXPECT_EQ(count_rule(sys, "init2-pair"), 1u);
    EXPECT_EQ(count_rule(sys, "init2-diag"), 1u);
    EXPECT_EQ(count_rule(sys, "init-copy"), 3u);  // k = k1, k = k2, k fresh
    // Pairing clause carries the strict order.
    for (size_t i = 0; i < sys.clauses.size(); ++i) {
        if (sys.provenance[i].rule != "init2-pair") continue;
        bool lt = false;
        for (const auto& t : sys.clauses[i].constraint.conjuncts())
            if (t.kind() == TermKind::Lt) lt = true;
        EXPECT_TRUE(lt);
    }
}

TEST(Encode, ExpandOneToTwo) {
    PredicateSig one;
    one.id = 0;
    one.name = "I1";
    one.scalars = {{"n", Sort::Int}};
    ArrayBlock blk;
    blk.array = "a";
    blk.cells = 1;
    blk.index_names = {"k"};
    blk.value_names = {"a_k"};
    one.blocks = {blk};
    PredicateSig two = one;
    two.id = 1;
    two.name = "I2";
    two.blocks[0].cells = 2;
    two.blocks[0].index_names = {"k1", "k2"};
    two.blocks[0].value_names = {"a_k1", "a_k2"};
    auto clauses = expand_1_to_2(one, two);
    ASSERT_EQ(clauses.size(), 2u);
    EXPECT_EQ(clauses[0].body.size(), 2u);  // pairing clause is nonlinear
    EXPECT_EQ(clauses[1].body.size(), 1u);  // diagonal
    // gamma2<=(expansion(T)) includes gamma(T): check by enumeration over
    // arrays of length 2 with values {0,1} and one scalar in {0,1}.
    HornSystem sys;
    sys.preds = {one, two};
    sys.clauses = clauses;
    sys.provenance = {{{}, "expand-pair", false}, {{}, "expand-diag", false}};
    Program prog = parse("int n; int a[];");
    Cfg cfg = frontend_pipeline(prog);
    Bounds b;
    b.max_len = 2;
    b.hi = 1;
    Oracle oracle(cfg, b);
    // T = alpha of all (n, a) states; imposed must contain every alpha2 tuple.
    Tables tables;
    for (int n = 0; n <= 1; ++n) {
        for (int x = 0; x <= 1; ++x) {
            for (int y = 0; y <= 1; ++y) {
                for (int k = 0; k <= 1; ++k)
                    tables.rows[0].insert({Value(n), Value(k), Value(k == 0 ? x : y)});
            }
        }
    }
    auto imposed0 = oracle.imposed_set(sys, 0, tables);
    auto imposed1 = oracle.imposed_set(sys, 1, tables);
    for (int n = 0; n <= 1; ++n) {
        for (int x = 0; x <= 1; ++x) {
            for (int y = 0; y <= 1; ++y) {
                Tuple pair{Value(n), Value(0), Value(x), Value(1), Value(y)};
                Tuple diag{Value(n), Value(0), Value(x), Value(0), Value(x)};
                EXPECT_TRUE(imposed0.count(pair));
                EXPECT_TRUE(imposed1.count(diag));
            }
        }
    }
}

TEST(Encode, PropertyQueries) {
    Cfg c = corpus_cfg("fill.arr");
    HornSystem sys = encode(c, cells(1));
    const HornClause* query = nullptr;
    for (const auto& cl : sys.clauses)
        if (cl.is_goal()) query = &cl;
    ASSERT_NE(query, nullptr);
    EXPECT_EQ(sys.pred(query->body[0].pred).name, "end");
    EXPECT_EQ(query->goal->constraint.kind(), TermKind::Eq);

    // Sortedness query carries both cells.
    Cfg sc = corpus_cfg("selsort.arr");
    HornSystem ss = encode(sc, cells(2));
    for (const auto& cl : ss.clauses) {
        if (!cl.is_goal()) continue;
        EXPECT_EQ(ss.pred(cl.body[0].pred).name, "end");
        EXPECT_EQ(cl.goal->constraint.kind(), TermKind::Le);
    }
}

TEST(Encode, PropertyBinderMismatch) {
    Cfg c = corpus_cfg("selsort.arr");
    EXPECT_THROW(encode(c, cells(1)), EncodeError);  // two cells referenced, one tracked
}

TEST(Encode, VacuousGuardProperty) {
    Program p = parse("int a[]; int i; i = 0; assert forall k : false => a[k] == 0;");
    Cfg c = frontend_pipeline(p);
    HornSystem sys = encode(c, cells(1));
    // The query's guard is unsatisfiable; the oracle finds no violation.
    Bounds b;
    b.hi = 1;
    Oracle oracle(c, b);
    Tables t = oracle.build_tables(sys, cells(1));
    EXPECT_TRUE(oracle.check_rules(sys, cells(1), t).empty());
}

TEST(Encode, NonlinearityWitness) {
    // Every read edge contributes at least one clause with two body atoms.
    for (const char* name : {"find_min.arr", "cex_gvn.arr", "selsort.arr", "reverse.arr"}) {
        Cfg c = corpus_cfg(name);
        AbstractionConfig cfg = cells(name == std::string("selsort.arr") ? 2 : 1);
        HornSystem sys = encode(c, cfg);
        for (const auto& e : c.edges) {
            if (!std::get_if<ArrayRead>(&e.transition)) continue;
            bool nonlinear = false;
            for (size_t i = 0; i < sys.clauses.size(); ++i)
                for (int eid : sys.provenance[i].edges)
                    if (eid == e.id && sys.clauses[i].body.size() >= 2) nonlinear = true;
            EXPECT_TRUE(nonlinear) << name << " edge " << e.id;
        }
    }
}

TEST(Encode, KillLosesConstantness) {
    // With one cell and v live, gamma(T) is exactly the constant arrays;
    // after kill(v) the imposed set concretizes to all arrays.
    Program p = parse("int v; int a[];");
    Cfg c = frontend_pipeline(p);
    (void)c;
    // T = { (v, k, a_k) | a_k = v } over values {0,1}, indices {0,1}.
    HornSystem sys;
    PredicateSig before;
    before.id = 0;
    before.name = "I1";
    before.scalars = {{"v", Sort::Int}};
    ArrayBlock blk;
    blk.array = "a";
    blk.cells = 1;
    blk.index_names = {"k"};
    blk.value_names = {"a_k"};
    before.blocks = {blk};
    PredicateSig after;
    after.id = 1;
    after.name = "I2";
    after.blocks = {blk};
    sys.preds = {before, after};
    HornClause kill;
    kill.universals = {{"v", Sort::Int}, {"k", Sort::Int}, {"a_k", Sort::Int}};
    kill.body = {{0,
                  {Term::var("v", Sort::Int), Term::var("k", Sort::Int),
                   Term::var("a_k", Sort::Int)}}};
    kill.constraint = Term::bool_lit(true);
    kill.head = Atom{1, {Term::var("k", Sort::Int), Term::var("a_k", Sort::Int)}};
    sys.clauses = {kill};
    sys.provenance = {{{}, "kill", false}};
    Tables t;
    for (int v = 0; v <= 1; ++v)
        for (int k = 0; k <= 1; ++k) t.rows[0].insert({Value(v), Value(k), Value(v)});
    Bounds b;
    b.hi = 1;
    Program tiny = parse("int a[];");
    Cfg tc = frontend_pipeline(tiny);
    Oracle oracle(tc, b);
    auto imposed = oracle.imposed_set(sys, 0, t);
    // All (k, value) pairs are imposed: the mixed array [0,1] now lies in
    // gamma, so constantness is no longer derivable.
    for (int k = 0; k <= 1; ++k)
        for (int v = 0; v <= 1; ++v) EXPECT_TRUE(imposed.count({Value(k), Value(v)}));
}

TEST(Encode, DeterministicEmission) {
    for (const char* name : {"fill.arr", "selsort.arr", "reverse.arr", "fill2d.arr"}) {
        Cfg c = corpus_cfg(name);
        AbstractionConfig cfg = cells(name == std::string("selsort.arr") ? 2 : 1);
        std::string a = emit_smtlib(simplify(encode(c, cfg)), &c);
        std::string b = emit_smtlib(simplify(encode(corpus_cfg(name), cfg)), &c);
        EXPECT_EQ(a, b) << name;
    }
}

TEST(Encode, TwoDimensionalFill) {
    Cfg c = corpus_cfg("fill2d.arr");
    HornSystem sys = encode(c, cells(1));
    // Cell blocks carry two index slots.
    const PredicateSig* loop = nullptr;
    for (const auto& p : sys.preds)
        if (p.name == "loop_j") loop = &p;
    ASSERT_NE(loop, nullptr);
    ASSERT_EQ(loop->blocks.size(), 1u);
    EXPECT_EQ(loop->blocks[0].dims, 2);
    // The copy guard on writes is a disjunction of index disequalities.
    bool found_or = false;
    for (size_t i = 0; i < sys.clauses.size(); ++i)
        if (sys.provenance[i].rule == "write1-diff")
            for (const auto& t : sys.clauses[i].constraint.conjuncts())
                if (t.kind() == TermKind::Or) found_or = true;
    EXPECT_TRUE(found_or);
    EXPECT_THROW(encode(c, cells(2)), EncodeError);
}

TEST(Encode, RationalMapInitValue) {
    Cfg c = corpus_cfg("rational_map.arr");
    HornSystem sys = encode(c, cells(1));
    // init(x, 0): the init clause pins the value slot to the annotation.
    bool found = false;
    for (size_t i = 0; i < sys.clauses.size(); ++i) {
        if (sys.provenance[i].rule != "init") continue;
        const HornClause& cl = sys.clauses[i];
        ASSERT_TRUE(cl.head.has_value());
        for (const auto& arg : cl.head->args)
            if (arg.kind() == TermKind::Lit && arg.n().lit == Value(0) &&
                arg.sort() == Sort::Int)
                found = true;
    }
    EXPECT_TRUE(found);
    // Index slots are Real-sorted.
    const PredicateSig& end = *std::find_if(sys.preds.begin(), sys.preds.end(),
                                            [](const PredicateSig& p) { return p.name == "end"; });
    bool real_slot = false;
    for (const auto& s : end.slots())
        if (s.sort == Sort::Real) real_slot = true;
    EXPECT_TRUE(real_slot);
}
