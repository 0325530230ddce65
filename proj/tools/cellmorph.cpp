#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cellmorph/mutate.hpp"
#include "cellmorph/oracle.hpp"
#include "cellmorph/simplify.hpp"
#include "cellmorph/smtlib.hpp"
#include "cellmorph/verify.hpp"

namespace {

using namespace cellmorph;

constexpr int kExitProved = 0;
constexpr int kExitViolated = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 3;

struct CommonArgs {
    std::string file;
    int cells = 1;
    std::vector<std::string> cells_for;  // name=count overrides
    bool unordered = false;
    bool weakened = false;
    std::string multiset;  // "", "track", "track-orig"
    bool shared_index = false;
    bool no_bounds_guards = false;
    bool no_simplify = false;
    std::vector<std::string> solvers;
    int timeout = 60;
    std::string hint_file;
    std::string bounds = "n=3,lo=0,hi=3";
    std::string output;
    int depth = 8;
    int mutate = -1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("file", a.file, "input program (.arr)")->required();
    cmd->add_option("--cells", a.cells, "tracked cells per array: 0, 1 or 2")
        ->check(CLI::Range(0, 2));
    cmd->add_option("--cells-for", a.cells_for,
                    "per-array override, e.g. --cells-for a=2 --cells-for b=1");
    cmd->add_flag("--unordered", a.unordered, "do not order the two cell indices");
    cmd->add_flag("--weakened", a.weakened, "weakened read semantics (one cell)");
    cmd->add_option("--multiset", a.multiset, "count tracking: track or track-orig")
        ->check(CLI::IsMember({"track", "track-orig"}));
    cmd->add_flag("--shared-index", a.shared_index, "one shared index for all arrays");
    cmd->add_flag("--no-bounds-guards", a.no_bounds_guards, "omit 0 <= k < n range guards");
    cmd->add_flag("--no-simplify", a.no_simplify, "skip coalescing and equality substitution");
    cmd->add_option("--solver", a.solvers, "spacer, z3pdr or eldarica (repeatable)");
    cmd->add_option("--timeout", a.timeout, "solver timeout in seconds");
    cmd->add_option("--hint", a.hint_file, "hint file of partial invariants");
    cmd->add_option("--bounds", a.bounds, "oracle bounds, e.g. n=3,lo=0,hi=3");
    cmd->add_option("-o,--output", a.output, "output path");
    cmd->add_option("--depth", a.depth, "max derivation depth for counterexamples");
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

Bounds parse_bounds(const std::string& text) {
    Bounds b;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad bounds entry: " + item);
        std::string key = item.substr(0, eq);
        int64_t val = std::stoll(item.substr(eq + 1));
        if (key == "n")
            b.max_len = val;
        else if (key == "lo")
            b.lo = val;
        else if (key == "hi")
            b.hi = val;
        else if (key == "states")
            b.state_budget = static_cast<size_t>(val);
        else
            throw std::runtime_error("unknown bounds key: " + key);
    }
    return b;
}

AbstractionConfig make_config(const CommonArgs& a) {
    AbstractionConfig cfg;
    cfg.default_cells = a.cells;
    cfg.ordered = !a.unordered;
    cfg.weakened = a.weakened;
    cfg.shared_index = a.shared_index;
    cfg.bounds_guards = !a.no_bounds_guards;
    if (a.multiset == "track") cfg.multiset = ArrayAbsConfig::Multiset::Track;
    if (a.multiset == "track-orig") cfg.multiset = ArrayAbsConfig::Multiset::TrackOrig;
    for (const auto& spec : a.cells_for) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad --cells-for: " + spec);
        ArrayAbsConfig ac;
        ac.cells = std::stoi(spec.substr(eq + 1));
        ac.weakened = cfg.weakened && ac.cells == 1;
        ac.multiset = cfg.multiset;
        cfg.per_array[spec.substr(0, eq)] = ac;
    }
    return cfg;
}

struct Pipeline {
    Program program;
    Cfg cfg;
    AbstractionConfig abs;
    std::vector<PropertySpec> hints;
};

// A wrong hint makes the Horn system unsatisfiable for no good reason, so
// hints are validated against the bounded oracle before any emission.
void validate_hints(const Pipeline& p, const Bounds& bounds) {
    if (p.hints.empty()) return;
    HornSystem sys = encode(p.cfg, p.abs, p.hints);
    Oracle oracle(p.cfg, bounds);
    Tables tables = oracle.build_tables(sys, p.abs);
    for (size_t i = 0; i < sys.clauses.size(); ++i) {
        if (!sys.provenance[i].is_hint) continue;
        auto bad = oracle.find_goal_violation(sys, i, tables);
        if (bad) {
            std::ostringstream os;
            os << "hint does not hold at desk bounds:";
            for (const auto& [k, v] : *bad) os << " " << k << "=" << v.str();
            throw std::runtime_error(os.str());
        }
    }
}

Pipeline run_frontend(const CommonArgs& a) {
    Pipeline p;
    p.program = parse(read_file(a.file));
    p.cfg = frontend_pipeline(p.program);
    p.abs = make_config(a);
    if (!a.hint_file.empty()) {
        p.hints = parse_hints(p.program, read_file(a.hint_file));
        validate_hints(p, parse_bounds(a.bounds));
    }
    return p;
}

std::vector<SolverKind> solver_list(const CommonArgs& a) {
    std::vector<SolverKind> kinds;
    for (const auto& name : a.solvers) {
        auto k = solver_from_name(name);
        if (!k) throw std::runtime_error("unknown solver: " + name);
        kinds.push_back(*k);
    }
    if (kinds.empty())
        kinds = {SolverKind::Spacer, SolverKind::Z3Pdr, SolverKind::Eldarica};
    return kinds;
}

int cmd_emit(const CommonArgs& a) {
    Pipeline p = run_frontend(a);
    HornSystem sys = encode(p.cfg, p.abs, p.hints);
    if (!a.no_simplify) sys = simplify(sys);
    std::string text = emit_smtlib(sys, &p.cfg);
    if (a.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(a.output);
        os << text;
    }
    return kExitProved;
}

int cmd_solve(const CommonArgs& a) {
    Pipeline p = run_frontend(a);
    VerifyOptions opts;
    opts.abs = p.abs;
    opts.solvers = solver_list(a);
    opts.solver_timeout = a.timeout;
    opts.max_depth = a.depth;
    opts.bounds = parse_bounds(a.bounds);
    opts.hints = p.hints;
    opts.work_dir = ".";
    VerifyResult r = verify(p.cfg, opts);
    switch (r.kind) {
        case VerifyResult::Kind::Proved:
            std::cout << "proved";
            if (r.refinements) std::cout << " (after " << r.refinements << " refinement"
                                         << (r.refinements > 1 ? "s" : "") << ")";
            std::cout << "\n";
            return kExitProved;
        case VerifyResult::Kind::Violated: {
            std::cout << "violated: " << r.detail << "\n";
            std::string out = a.output.empty() ? a.file + ".cex" : a.output;
            std::ofstream os(out);
            os << r.witness_text;
            std::cout << "witness written to " << out << "\n";
            return kExitViolated;
        }
        case VerifyResult::Kind::Exhausted:
            std::cout << "unknown (refinement exhausted): " << r.detail << "\n";
            return kExitUnknown;
        case VerifyResult::Kind::Budget:
            std::cout << "unknown (budget): " << r.detail << "\n";
            return kExitUnknown;
    }
    return kExitUnknown;
}

int cmd_check_oracle(const CommonArgs& a, int mutate_id) {
    Pipeline p = run_frontend(a);
    HornSystem sys = encode(p.cfg, p.abs, p.hints);
    if (mutate_id >= 0) {
        auto mutated = apply_mutation(sys, mutate_id);
        if (!mutated) {
            std::cout << "mutation " << mutate_id << " not applicable\n";
            return kExitUsage;
        }
        sys = std::move(*mutated);
        std::cout << "applied mutation " << mutate_id << ": "
                  << mutation_catalogue()[static_cast<size_t>(mutate_id)].description << "\n";
    }
    Bounds b = parse_bounds(a.bounds);
    Oracle oracle(p.cfg, b);
    Tables tables = oracle.build_tables(sys, p.abs);
    auto violations = oracle.check_rules(sys, p.abs, tables);
    for (const auto& v : violations)
        std::cout << "violation clause=" << v.clause << " rule=" << v.rule << " " << v.detail
                  << "\n";
    std::cout << violations.size() << " violation(s)\n";
    return violations.empty() ? kExitProved : kExitViolated;
}

int cmd_cex(const CommonArgs& a) {
    Pipeline p = run_frontend(a);
    HornSystem sys = simplify(encode(p.cfg, p.abs, p.hints));
    std::optional<DerivationTree> tree;
    for (int d = 1; d <= a.depth; d = d * 2) {
        tree = find_unfolding(sys, UnfoldOptions{d, {}, 2000000});
        if (tree) break;
    }
    if (!tree) {
        std::cout << "no counterexample at depth " << a.depth << "\n";
        return kExitProved;
    }
    std::string why;
    if (!validate_tree(sys, *tree, &why)) {
        std::cout << "internal error: invalid unfolding: " << why << "\n";
        return kExitUnknown;
    }
    std::cout << "counterexample unfolding:\n" << tree_str(sys, *tree);
    Trace tr = extract_branch(sys, *tree);
    std::cout << "leftmost branch (" << tr.steps.size() << " steps)\n";
    try {
        std::string formula = trace_to_concrete_formula(tr, p.cfg, sys);
        std::string out = a.output.empty() ? a.file + ".trace.smt2" : a.output;
        std::ofstream os(out);
        os << formula;
        std::cout << "trace formula written to " << out << "\n";
    } catch (const std::exception& e) {
        std::cout << "trace formula unavailable: " << e.what() << "\n";
    }
    auto witness = bounded_trace_witness(tr, p.cfg, sys, parse_bounds(a.bounds));
    if (witness) {
        std::cout << "concrete witness found:\n" << witness_str(*witness, p.cfg);
        return kExitViolated;
    }
    std::cout << "no bounded concrete witness; counterexample may be spurious\n";
    return kExitUnknown;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cellmorph: array programs to array-free Horn clauses"};
    app.require_subcommand(1);

    CommonArgs emit_args, solve_args, oracle_args, cex_args;
    auto* emit = app.add_subcommand("emit", "emit the Horn system as SMT-LIB");
    add_common(emit, emit_args);
    auto* solve = app.add_subcommand("solve", "run solvers with refinement");
    add_common(solve, solve_args);
    auto* oracle = app.add_subcommand("check-oracle", "bounded soundness check, no solver");
    add_common(oracle, oracle_args);
    oracle->add_option("--mutate", oracle_args.mutate, "apply a catalogued unsound mutation");
    auto* cex = app.add_subcommand("cex", "derive and replay a counterexample");
    add_common(cex, cex_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (emit->parsed()) return cmd_emit(emit_args);
        if (solve->parsed()) return cmd_solve(solve_args);
        if (oracle->parsed()) return cmd_check_oracle(oracle_args, oracle_args.mutate);
        if (cex->parsed()) return cmd_cex(cex_args);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const EncodeError& e) {
        std::cerr << "encoding error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
