#include <gtest/gtest.h>

#include "cellmorph/simplify.hpp"
#include "cellmorph/trace.hpp"
#include "test_helpers.hpp"

using namespace cellmorph;
using namespace cellmorph::testing;

namespace {

HornSystem system_of(const std::string& name, int cell_count = 1) {
    return simplify(encode(corpus_cfg(name), cells(cell_count)));
}

}  // namespace

TEST(Unfold, WrongPostconditionFoundAtSmallDepth) {
    HornSystem sys = system_of("fill_wrong41.arr");
    auto tree = find_unfolding(sys, UnfoldOptions{5, {}, 2000000});
    ASSERT_TRUE(tree.has_value());
    std::string why;
    EXPECT_TRUE(validate_tree(sys, *tree, &why)) << why;
}

TEST(Unfold, CounterexampleTreeMatchesThePaperShape) {
    HornSystem sys = system_of("cex_gvn.arr");
    auto tree = find_unfolding(sys, UnfoldOptions{6, {}, 2000000});
    ASSERT_TRUE(tree.has_value());
    std::string why;
    ASSERT_TRUE(validate_tree(sys, *tree, &why)) << why;
    // Root violates the query: v1 != v2 at the end point.
    const DerivationNode& root = *tree->root;
    const HornClause& goal = sys.clauses[root.clause];
    ASSERT_TRUE(goal.is_goal());
    EXPECT_EQ(sys.pred(goal.body[0].pred).name, "end");
    Value v1 = root.assignment.at("v1");
    Value v2 = root.assignment.at("v2");
    EXPECT_NE(v1, v2);
    // The leftmost branch walks end <- r4 <- r3 <- cmp <- r2 <- r1.
    Trace tr = extract_branch(sys, *tree);
    ASSERT_EQ(tr.steps.size(), 6u);
    std::vector<std::string> heads;
    for (const auto& step : tr.steps) {
        const HornClause& cl = sys.clauses[step.clause];
        heads.push_back(cl.head ? sys.pred(cl.head->pred).name : "goal");
    }
    EXPECT_EQ(heads, (std::vector<std::string>{"r1", "r2", "cmp", "r3", "r4", "end"}));
}

TEST(Unfold, NoQueriesMeansNoTree) {
    Program p = parse("int i; i = 0;");
    HornSystem sys = simplify(encode(frontend_pipeline(p), cells(1)));
    EXPECT_FALSE(find_unfolding(sys, UnfoldOptions{6, {}, 2000000}).has_value());
}

TEST(Unfold, SatisfiedQueryHasNoTree) {
    HornSystem sys = system_of("loop_ij.arr");
    EXPECT_FALSE(find_unfolding(sys, UnfoldOptions{4, {}, 200000}).has_value());
}

TEST(Unfold, SingleStepTrace) {
    Program p = parse("int x; x = 0; assert true => x == 1;");
    HornSystem sys = simplify(encode(frontend_pipeline(p), cells(1)));
    auto tree = find_unfolding(sys, UnfoldOptions{3, {}, 200000});
    ASSERT_TRUE(tree.has_value());
    Trace tr = extract_branch(sys, *tree);
    EXPECT_EQ(tr.steps.size(), 1u);
}

TEST(Unfold, BranchStepsMapToCfgEdges) {
    for (const char* name : {"fill_wrong41.arr", "cex_gvn.arr"}) {
        Cfg c = corpus_cfg(name);
        HornSystem sys = simplify(encode(c, cells(1)));
        auto tree = find_unfolding(sys, UnfoldOptions{6, {}, 2000000});
        ASSERT_TRUE(tree.has_value()) << name;
        Trace tr = extract_branch(sys, *tree);
        for (const auto& step : tr.steps) {
            for (int eid : step.edges) {
                bool exists = false;
                for (const auto& e : c.edges)
                    if (e.id == eid) exists = true;
                EXPECT_TRUE(exists) << name;
            }
        }
    }
}

TEST(Trace, ConcreteFormulaShape) {
    Cfg c = corpus_cfg("cex_gvn.arr");
    HornSystem sys = simplify(encode(c, cells(1)));
    auto tree = find_unfolding(sys, UnfoldOptions{6, {}, 2000000});
    ASSERT_TRUE(tree.has_value());
    Trace tr = extract_branch(sys, *tree);
    std::string formula = trace_to_concrete_formula(tr, c, sys);
    // Four reads along the branch: four selects, plus re-selects in the
    // negated property instance.
    size_t selects = 0;
    for (size_t pos = formula.find("(select"); pos != std::string::npos;
         pos = formula.find("(select", pos + 1))
        ++selects;
    EXPECT_GE(selects, 4u);
    EXPECT_NE(formula.find("(assert (= v1!1 (select a!0 1)))"), std::string::npos);
    EXPECT_NE(formula.find("(assert (not"), std::string::npos);
    EXPECT_NE(formula.find("(check-sat)"), std::string::npos);
    // The assumed equality shows up as a guard along the branch.
    EXPECT_NE(formula.find("(assert (= v1!"), std::string::npos);
}

TEST(Trace, EmptyTraceGivesTrivialFormula) {
    Trace tr;
    Program p = parse("int x; x = 0; assert true => x == 1;");
    Cfg c = frontend_pipeline(p);
    HornSystem sys = simplify(encode(c, cells(1)));
    auto tree = find_unfolding(sys, UnfoldOptions{3, {}, 200000});
    ASSERT_TRUE(tree.has_value());
    tr = extract_branch(sys, *tree);
    std::string formula = trace_to_concrete_formula(tr, c, sys);
    EXPECT_NE(formula.find("(check-sat)"), std::string::npos);
}

TEST(Trace, WrongFillHasConcreteWitness) {
    Cfg c = corpus_cfg("fill_wrong41.arr");
    HornSystem sys = simplify(encode(c, cells(1)));
    auto tree = find_unfolding(sys, UnfoldOptions{6, {}, 2000000});
    ASSERT_TRUE(tree.has_value());
    Trace tr = extract_branch(sys, *tree);
    Bounds b;
    auto witness = bounded_trace_witness(tr, c, sys, b);
    ASSERT_TRUE(witness.has_value());
    EXPECT_TRUE(replay_witness(*witness, tr, c, sys, b));
    // The final array really holds 42 where 41 was claimed.
    const auto& last = witness->path.back().second;
    bool has42 = false;
    for (const auto& v : last.arrays[0])
        if (v == Value(42)) has42 = true;
    EXPECT_TRUE(has42);
}

TEST(Trace, SpuriousCounterexampleHasNoWitness) {
    Cfg c = corpus_cfg("cex_gvn.arr");
    HornSystem sys = simplify(encode(c, cells(1)));
    auto tree = find_unfolding(sys, UnfoldOptions{6, {}, 2000000});
    ASSERT_TRUE(tree.has_value());
    Trace tr = extract_branch(sys, *tree);
    Bounds b;
    EXPECT_FALSE(bounded_trace_witness(tr, c, sys, b).has_value());
}
