#include <algorithm>

#include "cellmorph/mutate.hpp"

namespace cellmorph {

namespace {

// Rewrites the first conjunct satisfying `match` via `rewrite`.
bool edit_constraint(HornClause& c, const std::function<bool(const Term&)>& match,
                     const std::function<Term(const Term&)>& rewrite) {
    auto conj = c.constraint.conjuncts();
    for (auto& t : conj) {
        if (match(t)) {
            t = rewrite(t);
            c.constraint = Term::conjoin(conj);
            return true;
        }
    }
    return false;
}

std::optional<size_t> first_clause(const HornSystem& s, const std::string& rule) {
    for (size_t i = 0; i < s.clauses.size(); ++i)
        if (i < s.provenance.size() && s.provenance[i].rule == rule) return i;
    return std::nullopt;
}

}  // namespace

const std::vector<Mutation>& mutation_catalogue() {
    static const std::vector<Mutation> cat = {
        {0, "write copy clause: flip the i != k guard to i == k"},
        {1, "write update clause: head keeps the old cell value"},
        {2, "read combine clause: flip the k != i guard to k == i"},
        {3, "drop the read same-cell clause"},
        {4, "ranged init: shrink 0 <= k to 1 <= k"},
        {5, "scalar update: off-by-one in the first updated head slot"},
        {6, "kill clause: swap two same-sorted head arguments"},
        {7, "count decrement: forget the -1"},
        {8, "count increment: bump by 2 instead of 1"},
        {9, "two-cell read case 1: invert the i < k2 guard"},
    };
    return cat;
}

std::optional<HornSystem> apply_mutation(const HornSystem& s, int id) {
    HornSystem out = s;
    switch (id) {
        case 0: {
            auto i = first_clause(s, "write1-diff");
            if (!i) return std::nullopt;
            bool done = edit_constraint(
                out.clauses[*i], [](const Term& t) { return t.kind() == TermKind::Ne; },
                [](const Term& t) { return Term::eq(t.n().args[0], t.n().args[1]); });
            if (!done) return std::nullopt;
            return out;
        }
        case 1: {
            auto i = first_clause(s, "write1-same");
            if (!i) return std::nullopt;
            HornClause& c = out.clauses[*i];
            if (!c.head || c.body.empty()) return std::nullopt;
            c.head->args = c.body[0].args;
            return out;
        }
        case 2: {
            auto i = first_clause(s, "read1-diff");
            if (!i) return std::nullopt;
            bool done = edit_constraint(
                out.clauses[*i], [](const Term& t) { return t.kind() == TermKind::Ne; },
                [](const Term& t) { return Term::eq(t.n().args[0], t.n().args[1]); });
            if (!done) return std::nullopt;
            return out;
        }
        case 3: {
            auto i = first_clause(s, "read1-same");
            if (!i) return std::nullopt;
            out.clauses.erase(out.clauses.begin() + static_cast<long>(*i));
            out.provenance.erase(out.provenance.begin() + static_cast<long>(*i));
            return out;
        }
        case 4: {
            for (size_t i = 0; i < s.clauses.size(); ++i) {
                if (i >= s.provenance.size() || s.provenance[i].rule.rfind("init", 0) != 0)
                    continue;
                bool done = edit_constraint(
                    out.clauses[i],
                    [](const Term& t) {
                        return t.kind() == TermKind::Le && t.n().args[0].kind() == TermKind::Lit &&
                               t.n().args[0].n().lit == Value(0);
                    },
                    [](const Term& t) { return Term::le(Term::int_lit(1), t.n().args[1]); });
                if (done) return out;
            }
            return std::nullopt;
        }
        case 5: {
            for (size_t i = 0; i < s.clauses.size(); ++i) {
                if (i >= s.provenance.size() || s.provenance[i].rule != "scalar") continue;
                HornClause& c = out.clauses[i];
                if (!c.head || c.body.empty()) continue;
                for (size_t a = 0; a < c.head->args.size(); ++a) {
                    if (a < c.body[0].args.size() && !(c.head->args[a] == c.body[0].args[a]) &&
                        c.head->args[a].sort() == Sort::Int) {
                        c.head->args[a] = Term::add(c.head->args[a], Term::int_lit(1));
                        return out;
                    }
                }
            }
            return std::nullopt;
        }
        case 6: {
            for (size_t i = 0; i < s.clauses.size(); ++i) {
                if (i >= s.provenance.size() || s.provenance[i].rule != "kill") continue;
                HornClause& c = out.clauses[i];
                if (!c.head) continue;
                for (size_t a = 0; a + 1 < c.head->args.size(); ++a) {
                    for (size_t b = a + 1; b < c.head->args.size(); ++b) {
                        if (c.head->args[a].sort() == c.head->args[b].sort() &&
                            !(c.head->args[a] == c.head->args[b])) {
                            std::swap(c.head->args[a], c.head->args[b]);
                            return out;
                        }
                    }
                }
            }
            return std::nullopt;
        }
        case 7: {
            auto i = first_clause(s, "count-decr-eq");
            if (!i) return std::nullopt;
            HornClause& c = out.clauses[*i];
            if (!c.head) return std::nullopt;
            for (auto& arg : c.head->args) {
                if (arg.kind() == TermKind::Sub && arg.n().args[1].kind() == TermKind::Lit) {
                    arg = arg.n().args[0];
                    return out;
                }
            }
            return std::nullopt;
        }
        case 8: {
            auto i = first_clause(s, "count-incr-eq");
            if (!i) return std::nullopt;
            HornClause& c = out.clauses[*i];
            if (!c.head) return std::nullopt;
            for (auto& arg : c.head->args) {
                if (arg.kind() == TermKind::Add && arg.n().args[1].kind() == TermKind::Lit) {
                    arg = Term::add(arg.n().args[0], Term::int_lit(2));
                    return out;
                }
            }
            return std::nullopt;
        }
        case 9: {
            auto i = first_clause(s, "read2-1");
            if (!i) return std::nullopt;
            bool done = edit_constraint(
                out.clauses[*i], [](const Term& t) { return t.kind() == TermKind::Lt; },
                [](const Term& t) { return Term::lt(t.n().args[1], t.n().args[0]); });
            if (!done) return std::nullopt;
            return out;
        }
        default:
            return std::nullopt;
    }
}

}  // namespace cellmorph
