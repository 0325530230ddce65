#include <gtest/gtest.h>

#include "cellmorph/oracle.hpp"
#include "cellmorph/simplify.hpp"
#include "cellmorph/smtlib.hpp"
#include "test_helpers.hpp"

using namespace cellmorph;
using namespace cellmorph::testing;

namespace {

Term ivar(const std::string& n) { return Term::var(n, Sort::Int); }

// fact => I1;  I1(x,y) => I2(x+1,y);  I2(x,y) => I3(x,y+2);  queries keep
// I1 and I3 visible, so exactly I2 is the single-use chain predicate.
HornSystem chain_system() {
    HornSystem s;
    for (int i = 0; i < 3; ++i) {
        PredicateSig p;
        p.id = i;
        p.name = "I" + std::to_string(i + 1);
        p.scalars = {{"x", Sort::Int}, {"y", Sort::Int}};
        s.preds.push_back(p);
    }
    HornClause fact;
    fact.universals = {{"x", Sort::Int}, {"y", Sort::Int}};
    fact.constraint = Term::cmp(TermKind::Ge, ivar("x"), Term::int_lit(0));
    fact.head = Atom{0, {ivar("x"), ivar("y")}};
    HornClause c1;
    c1.universals = {{"x", Sort::Int}, {"y", Sort::Int}};
    c1.body = {{0, {ivar("x"), ivar("y")}}};
    c1.constraint = Term::bool_lit(true);
    c1.head = Atom{1, {Term::add(ivar("x"), Term::int_lit(1)), ivar("y")}};
    HornClause c2 = c1;
    c2.body = {{1, {ivar("x"), ivar("y")}}};
    c2.head = Atom{2, {ivar("x"), Term::add(ivar("y"), Term::int_lit(2))}};
    HornClause q1;
    q1.universals = {{"x", Sort::Int}, {"y", Sort::Int}};
    q1.body = {{0, {ivar("x"), ivar("y")}}};
    q1.constraint = Term::bool_lit(true);
    q1.goal = Goal{Term::le(Term::int_lit(0), ivar("x"))};
    HornClause q2 = q1;
    q2.body = {{2, {ivar("x"), ivar("y")}}};
    s.clauses = {fact, c1, c2, q1, q2};
    s.provenance = {{{}, "entry", false},
                    {{0}, "scalar", false},
                    {{1}, "scalar", false},
                    {{}, "query", false},
                    {{}, "query", false}};
    return s;
}

}  // namespace

TEST(Coalesce, MergesSingleUseChain) {
    HornSystem s = chain_system();
    HornSystem out = coalesce(s);
    // I2 disappears; the two rules become I1(x,y) => I3(x+1,y+2).
    EXPECT_FALSE(out.pred_by_name("I2").has_value());
    ASSERT_TRUE(out.pred_by_name("I1").has_value());
    ASSERT_TRUE(out.pred_by_name("I3").has_value());
    const HornClause* merged = nullptr;
    for (const auto& cl : out.clauses)
        if (cl.head && out.pred(cl.head->pred).name == "I3" && !cl.body.empty()) merged = &cl;
    ASSERT_NE(merged, nullptr);
    EXPECT_EQ(out.pred(merged->body[0].pred).name, "I1");
    EXPECT_EQ(merged->head->args[0].str(), "(x + 1)");
    EXPECT_EQ(merged->head->args[1].str(), "(y + 2)");
}

TEST(Coalesce, QueryPredicatesSurvive) {
    HornSystem s = chain_system();
    HornSystem out = coalesce(s);
    EXPECT_TRUE(out.pred_by_name("I3").has_value());
    size_t queries = 0;
    for (const auto& cl : out.clauses)
        if (cl.is_goal()) ++queries;
    EXPECT_EQ(queries, 2u);
}

TEST(Coalesce, NoSingleUsePredicatesIsIdentity) {
    // Self-recursive predicate with a fact and a query: nothing to merge.
    HornSystem s;
    PredicateSig p;
    p.id = 0;
    p.name = "inv";
    p.scalars = {{"x", Sort::Int}};
    s.preds = {p};
    HornClause fact;
    fact.universals = {{"x", Sort::Int}};
    fact.constraint = Term::eq(ivar("x"), Term::int_lit(0));
    fact.head = Atom{0, {ivar("x")}};
    HornClause loop;
    loop.universals = {{"x", Sort::Int}};
    loop.body = {{0, {ivar("x")}}};
    loop.constraint = Term::bool_lit(true);
    loop.head = Atom{0, {Term::add(ivar("x"), Term::int_lit(1))}};
    HornClause q;
    q.universals = {{"x", Sort::Int}};
    q.body = {{0, {ivar("x")}}};
    q.constraint = Term::bool_lit(true);
    q.goal = Goal{Term::le(Term::int_lit(0), ivar("x"))};
    s.clauses = {fact, loop, q};
    s.provenance = {{{}, "entry", false}, {{0}, "scalar", false}, {{}, "query", false}};
    HornSystem out = coalesce(s);
    EXPECT_EQ(out.clauses.size(), 3u);
    EXPECT_EQ(out.preds.size(), 1u);
}

TEST(SubstituteEqualities, InlinesDefinitions) {
    HornSystem s = chain_system();
    // Add x2 = x + 1 and use x2 in the head.
    HornClause& c1 = s.clauses[1];
    c1.universals.push_back({"x2", Sort::Int});
    c1.constraint = Term::eq(ivar("x2"), Term::add(ivar("x"), Term::int_lit(1)));
    c1.head->args[0] = ivar("x2");
    HornSystem out = substitute_equalities(s);
    EXPECT_TRUE(out.clauses[1].constraint.is_true());
    EXPECT_EQ(out.clauses[1].head->args[0].str(), "(x + 1)");
    EXPECT_EQ(out.clauses[1].universals.size(), 2u);
}

TEST(SubstituteEqualities, NoEqualitiesIsIdentity) {
    HornSystem s = chain_system();
    HornSystem out = substitute_equalities(s);
    ASSERT_EQ(out.clauses.size(), s.clauses.size());
    for (size_t i = 0; i < s.clauses.size(); ++i)
        EXPECT_EQ(out.clauses[i].universals.size(), s.clauses[i].universals.size());
}

TEST(Simplify, PreservesOracleModelsOnCorpus) {
    Bounds b;
    b.hi = 2;
    for (const char* name : {"fill.arr", "loop_ij.arr", "find_min.arr", "cex_gvn.arr"}) {
        Cfg c = corpus_cfg(name);
        AbstractionConfig cfg = cells(1);
        HornSystem raw = encode(c, cfg);
        HornSystem simp = simplify(raw);
        Oracle oracle(c, b);
        Tables traw = oracle.build_tables(raw, cfg);
        Tables tsimp = oracle.build_tables(simp, cfg);
        EXPECT_TRUE(oracle.check_rules(raw, cfg, traw).empty()) << name << " (raw)";
        EXPECT_TRUE(oracle.check_rules(simp, cfg, tsimp).empty()) << name << " (simplified)";
    }
}

TEST(Emit, EmptySystemIsHeaderOnly) {
    HornSystem s;
    EXPECT_EQ(emit_smtlib(s), "(set-logic HORN)\n(check-sat)\n");
}

TEST(Emit, QueriesUseGoalNormalForm) {
    Cfg c = corpus_cfg("fill.arr");
    std::string text = emit_smtlib(simplify(encode(c, cells(1))));
    EXPECT_NE(text.find("false)"), std::string::npos);
    // No implication with a non-false head carries a negated conclusion.
    EXPECT_EQ(text.find("(not (= a_k 42)) (end"), std::string::npos);
}

TEST(Emit, DeterministicBytes) {
    Cfg c = corpus_cfg("reverse.arr");
    AbstractionConfig cfg;
    cfg.per_array["a"] = {2, false, ArrayAbsConfig::Multiset::Off};
    cfg.per_array["b"] = {1, false, ArrayAbsConfig::Multiset::Off};
    std::string once = emit_smtlib(simplify(encode(c, cfg)), &c);
    std::string twice = emit_smtlib(simplify(encode(corpus_cfg("reverse.arr"), cfg)), &c);
    EXPECT_EQ(once, twice);
}
