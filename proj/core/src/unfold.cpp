#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "cellmorph/unfold.hpp"

namespace cellmorph {

namespace {

void term_literals(const Term& t, std::set<int64_t>& out) {
    const TermNode& n = t.n();
    if ((n.kind == TermKind::Lit || n.kind == TermKind::MulConst ||
         n.kind == TermKind::ModConst) &&
        n.lit.is_int())
        out.insert(n.lit.num);
    for (const auto& a : n.args) term_literals(a, out);
}

class Search {
public:
    Search(const HornSystem& s, const UnfoldOptions& opts) : sys_(s), opts_(opts) {
        std::set<int64_t> lits{0, 1, 2};
        for (const auto& c : s.clauses) {
            term_literals(c.constraint, lits);
            for (const auto& a : c.body)
                for (const auto& t : a.args) term_literals(t, lits);
            if (c.head)
                for (const auto& t : c.head->args) term_literals(t, lits);
            if (c.goal) term_literals(c.goal->constraint, lits);
        }
        for (int64_t v : opts.extra_values) lits.insert(v);
        std::set<int64_t> widened;
        for (int64_t v : lits) {
            widened.insert(v);
            widened.insert(v - 1);
            widened.insert(v + 1);
        }
        for (int64_t v : widened) universe_.push_back(Value(v));
        for (size_t i = 0; i < s.clauses.size(); ++i)
            if (s.clauses[i].head) by_head_[s.clauses[i].head->pred].push_back(i);
    }

    std::optional<DerivationTree> run() {
        for (size_t ci = 0; ci < sys_.clauses.size(); ++ci) {
            const HornClause& c = sys_.clauses[ci];
            if (!c.is_goal()) continue;
            std::optional<DerivationTree> found;
            // Violation: body derivable, constraint holds, conclusion fails.
            enumerate_assignments(c, {}, [&](const Env& env) -> bool {
                auto concl = c.goal->constraint.eval(env);
                if (!concl || concl->truthy()) return false;
                auto node = std::make_unique<DerivationNode>();
                node->clause = ci;
                node->assignment = env;
                bool ok = true;
                for (const auto& atom : c.body) {
                    Tuple vals;
                    for (const auto& t : atom.args) {
                        auto v = t.eval(env);
                        if (!v) return false;
                        vals.push_back(*v);
                    }
                    node->atom_values.push_back(vals);
                    auto child = derive(atom.pred, vals, opts_.depth);
                    if (!child) {
                        ok = false;
                        break;
                    }
                    node->children.push_back(std::move(child));
                }
                if (!ok) return false;
                found = DerivationTree{std::move(node)};
                return true;
            });
            if (found) return found;
        }
        return std::nullopt;
    }

private:
    const HornSystem& sys_;
    UnfoldOptions opts_;
    std::vector<Value> universe_;
    std::map<int, std::vector<size_t>> by_head_;
    // (pred, args) -> largest depth at which derivation already failed
    std::map<std::pair<int, Tuple>, int> failed_;
    size_t nodes_ = 0;

    std::unique_ptr<DerivationNode> derive(int pred, const Tuple& args, int depth) {
        if (depth <= 0) return nullptr;
        auto fit = failed_.find({pred, args});
        if (fit != failed_.end() && depth <= fit->second) return nullptr;
        if (++nodes_ > opts_.node_budget) return nullptr;
        auto byh = by_head_.find(pred);
        if (byh == by_head_.end()) return nullptr;
        for (size_t ci : byh->second) {
            const HornClause& c = sys_.clauses[ci];
            std::unique_ptr<DerivationNode> result;
            enumerate_assignments(c, {{&c.head->args, &args}}, [&](const Env& env) -> bool {
                auto node = std::make_unique<DerivationNode>();
                node->clause = ci;
                node->assignment = env;
                node->head_values = args;
                for (const auto& atom : c.body) {
                    Tuple vals;
                    for (const auto& t : atom.args) {
                        auto v = t.eval(env);
                        if (!v) return false;
                        vals.push_back(*v);
                    }
                    node->atom_values.push_back(std::move(vals));
                }
                for (size_t a = 0; a < c.body.size(); ++a) {
                    auto child = derive(c.body[a].pred, node->atom_values[a], depth - 1);
                    if (!child) return false;
                    node->children.push_back(std::move(child));
                }
                result = std::move(node);
                return true;
            });
            if (result) return result;
        }
        auto& best = failed_[{pred, args}];
        best = std::max(best, depth);
        return nullptr;
    }

    // Enumerates assignments of the clause universals over the universe,
    // propagating term-to-value pins and pruning on partial constraints.
    // `pins` are (term vector, value vector) pairs that must match.
    using Pins = std::vector<std::pair<const std::vector<Term>*, const Tuple*>>;

    void enumerate_assignments(const HornClause& c, const Pins& pins,
                               const std::function<bool(const Env&)>& sink) {
        Env env;
        // Direct variable pins first.
        std::vector<std::pair<const Term*, const Value*>> residual;
        for (const auto& [terms, vals] : pins) {
            for (size_t i = 0; i < terms->size(); ++i) {
                const Term& t = (*terms)[i];
                const Value& v = (*vals)[i];
                if (t.is_var()) {
                    auto it = env.find(t.n().name);
                    if (it == env.end())
                        env[t.n().name] = v;
                    else if (!(it->second == v))
                        return;
                } else {
                    residual.emplace_back(&t, &v);
                }
            }
        }
        auto conj = c.constraint.conjuncts();
        std::vector<std::string> unbound;
        for (const auto& u : c.universals)
            if (!env.count(u.name)) unbound.push_back(u.name);

        std::function<bool(size_t)> rec = [&](size_t i) -> bool {
            // Prune: residual pins and conjuncts whose vars are all bound.
            for (const auto& [t, v] : residual) {
                auto val = t->eval(env);
                if (val && !(*val == *v)) return false;
            }
            for (const auto& g : conj) {
                auto val = g.eval(env);
                if (val && !val->truthy()) return false;
            }
            if (i == unbound.size()) {
                for (const auto& [t, v] : residual) {
                    auto val = t->eval(env);
                    if (!val || !(*val == *v)) return false;
                }
                for (const auto& g : conj) {
                    auto val = g.eval(env);
                    if (!val || !val->truthy()) return false;
                }
                return sink(env);
            }
            for (const auto& cand : universe_) {
                env[unbound[i]] = cand;
                if (rec(i + 1)) return true;
            }
            env.erase(unbound[i]);
            return false;
        };
        rec(0);
    }
};

}  // namespace

std::optional<DerivationTree> find_unfolding(const HornSystem& s, const UnfoldOptions& opts) {
    Search search(s, opts);
    return search.run();
}

bool validate_tree(const HornSystem& s, const DerivationTree& t, std::string* why) {
    std::function<bool(const DerivationNode&)> check = [&](const DerivationNode& n) -> bool {
        const HornClause& c = s.clauses[n.clause];
        auto fail = [&](const std::string& msg) {
            if (why) *why = "clause " + std::to_string(n.clause) + ": " + msg;
            return false;
        };
        auto cv = c.constraint.eval(n.assignment);
        if (!cv || !cv->truthy()) return fail("constraint not satisfied");
        if (c.is_goal()) {
            auto gv = c.goal->constraint.eval(n.assignment);
            if (!gv || gv->truthy()) return fail("query conclusion not violated");
        } else if (c.head) {
            if (!n.head_values.empty()) {
                for (size_t i = 0; i < c.head->args.size(); ++i) {
                    auto v = c.head->args[i].eval(n.assignment);
                    if (!v || !(*v == n.head_values[i])) return fail("head mismatch");
                }
            }
        }
        if (n.children.size() != c.body.size()) return fail("missing subderivations");
        for (size_t a = 0; a < c.body.size(); ++a) {
            Tuple vals;
            for (const auto& arg : c.body[a].args) {
                auto v = arg.eval(n.assignment);
                if (!v) return fail("unbound atom argument");
                vals.push_back(*v);
            }
            if (vals != n.children[a]->head_values) return fail("child head differs from atom");
            if (!check(*n.children[a])) return false;
        }
        return true;
    };
    if (!t.root) {
        if (why) *why = "empty tree";
        return false;
    }
    return check(*t.root);
}

std::string tree_str(const HornSystem& s, const DerivationTree& t) {
    std::ostringstream os;
    std::function<void(const DerivationNode&, int)> rec = [&](const DerivationNode& n,
                                                              int indent) {
        for (int i = 0; i < indent; ++i) os << "  ";
        const HornClause& c = s.clauses[n.clause];
        if (c.is_goal()) {
            os << "violation of query c" << n.clause;
        } else if (c.head) {
            os << s.pred(c.head->pred).name << "(";
            for (size_t i = 0; i < n.head_values.size(); ++i)
                os << (i ? "," : "") << n.head_values[i].str();
            os << ")  [c" << n.clause << "]";
        }
        os << "\n";
        for (const auto& ch : n.children) rec(*ch, indent + 1);
    };
    if (t.root) rec(*t.root, 0);
    return os.str();
}

}  // namespace cellmorph
