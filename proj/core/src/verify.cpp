#include <algorithm>
#include <fstream>

#include "cellmorph/simplify.hpp"
#include "cellmorph/smtlib.hpp"
#include "cellmorph/verify.hpp"

namespace cellmorph {

bool refine(AbstractionConfig& abs, const std::vector<std::string>& arrays) {
    bool changed = false;
    for (const auto& name : arrays) {
        ArrayAbsConfig ac = abs.for_array(name);
        if (ac.cells == 1 && ac.multiset == ArrayAbsConfig::Multiset::Off) {
            ac.cells = 2;
            abs.per_array[name] = ac;
            changed = true;
        }
    }
    return changed;
}

std::vector<std::string> trace_arrays(const Trace& tr, const Cfg& cfg) {
    std::vector<std::string> out;
    auto add = [&](const std::string& a) {
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    };
    for (const auto& step : tr.steps) {
        for (int eid : step.edges) {
            for (const auto& e : cfg.edges) {
                if (e.id != eid) continue;
                if (auto* r = std::get_if<ArrayRead>(&e.transition)) add(r->array);
                if (auto* w = std::get_if<ArrayWrite>(&e.transition)) add(w->array);
            }
        }
    }
    return out;
}

namespace {

std::string write_file(const std::string& dir, const std::string& name,
                       const std::string& text) {
    std::string path = dir + "/" + name;
    std::ofstream os(path);
    os << text;
    return path;
}

}  // namespace

VerifyResult verify(const Cfg& cfg, const VerifyOptions& opts) {
    VerifyResult res;
    AbstractionConfig abs = opts.abs;
    size_t max_rounds = cfg.arrays.size() + 1;

    for (size_t round = 0; round < max_rounds; ++round) {
        res.final_config = abs;
        HornSystem sys = simplify(encode(cfg, abs, opts.hints));
        std::string smt = emit_smtlib(sys, &cfg);
        std::string path = write_file(opts.work_dir,
                                      "verify_round" + std::to_string(round) + ".smt2", smt);

        bool refuted = false;
        bool answered = false;
        for (SolverKind k : opts.solvers) {
            if (!solver_available(k)) continue;
            SolverVerdict v = run_solver(path, k, opts.solver_timeout);
            if (v.kind == SolverVerdict::Kind::Sat) {
                res.kind = VerifyResult::Kind::Proved;
                res.model = v.model;
                res.refinements = static_cast<int>(round);
                res.detail = "proved by " + solver_name(k) +
                             (round ? " (after " + std::to_string(round) + " refinement" +
                                          (round > 1 ? "s)" : ")")
                                    : "");
                return res;
            }
            if (v.kind == SolverVerdict::Kind::Unsat) {
                refuted = true;
                answered = true;
                break;
            }
            // Unknown / Timeout / Crash: try the next solver.
        }

        // Counterexample reconstruction (also the path when no solver runs).
        std::optional<DerivationTree> tree;
        for (int d = 1; d <= opts.max_depth; d = d * 2) {
            tree = find_unfolding(sys, UnfoldOptions{d, {}, 2000000});
            if (tree) break;
        }
        if (!tree) {
            if (answered && refuted) {
                res.kind = VerifyResult::Kind::Budget;
                res.detail = "solver refuted the abstraction but no unfolding was found within "
                             "depth " +
                             std::to_string(opts.max_depth);
                return res;
            }
            res.kind = VerifyResult::Kind::Budget;
            res.detail = "no solver verdict and no bounded refutation; undecided";
            return res;
        }
        std::string why;
        if (!validate_tree(sys, *tree, &why)) {
            res.kind = VerifyResult::Kind::Budget;
            res.detail = "internal: unfolding failed validation: " + why;
            return res;
        }
        Trace tr = extract_branch(sys, *tree);

        // Concrete replay first: any bounded witness is a real violation.
        auto witness = bounded_trace_witness(tr, cfg, sys, opts.bounds);
        if (witness && replay_witness(*witness, tr, cfg, sys, opts.bounds)) {
            res.kind = VerifyResult::Kind::Violated;
            res.witness = witness;
            res.witness_text = witness_str(*witness, cfg);
            res.refinements = static_cast<int>(round);
            res.detail = "concrete counterexample found";
            return res;
        }

        // Decide spuriousness with an SMT check over arrays when possible.
        std::string formula;
        try {
            formula = trace_to_concrete_formula(tr, cfg, sys);
        } catch (const std::exception& e) {
            res.kind = VerifyResult::Kind::Budget;
            res.detail = std::string("trace formula unavailable: ") + e.what();
            return res;
        }
        std::string fpath = write_file(opts.work_dir,
                                       "trace_round" + std::to_string(round) + ".smt2", formula);
        bool spurious = false;
        if (solver_available(SolverKind::Spacer)) {
            SolverVerdict v = run_solver(fpath, SolverKind::Spacer, opts.solver_timeout);
            if (v.kind == SolverVerdict::Kind::Sat) {
                res.kind = VerifyResult::Kind::Violated;
                res.witness_text = v.model;
                res.refinements = static_cast<int>(round);
                res.detail = "solver found a concrete model for the trace";
                return res;
            }
            if (v.kind == SolverVerdict::Kind::Unsat) spurious = true;
        }
        if (!spurious) {
            res.kind = VerifyResult::Kind::Budget;
            res.detail = "abstract counterexample at " + fpath +
                         " not decided concretely within bounds";
            return res;
        }
        if (!opts.allow_refine) {
            res.kind = VerifyResult::Kind::Exhausted;
            res.detail = "spurious counterexample and refinement disabled";
            return res;
        }
        if (!refine(abs, trace_arrays(tr, cfg))) {
            res.kind = VerifyResult::Kind::Exhausted;
            res.detail = "refinement exhausted: all trace arrays already at two cells";
            return res;
        }
    }
    res.kind = VerifyResult::Kind::Budget;
    res.detail = "refinement budget exceeded";
    return res;
}

}  // namespace cellmorph
