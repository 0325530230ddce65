#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "cellmorph/oracle.hpp"
#include "cellmorph/simplify.hpp"
#include "cellmorph/smtlib.hpp"

using namespace cellmorph;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream is(std::string(CELLMORPH_CORPUS_DIR) + "/" + name);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

AbstractionConfig cells(int n) {
    AbstractionConfig cfg;
    cfg.default_cells = n;
    return cfg;
}

void BM_frontend_selsort(benchmark::State& state) {
    std::string src = slurp("selsort.arr");
    for (auto _ : state) {
        Cfg c = frontend_pipeline(parse(src));
        benchmark::DoNotOptimize(c.edges.size());
    }
}
BENCHMARK(BM_frontend_selsort);

void BM_encode_selsort_two_cells(benchmark::State& state) {
    Cfg c = frontend_pipeline(parse(slurp("selsort.arr")));
    for (auto _ : state) {
        HornSystem sys = encode(c, cells(2));
        benchmark::DoNotOptimize(sys.clauses.size());
    }
}
BENCHMARK(BM_encode_selsort_two_cells);

void BM_simplify_and_emit_selsort(benchmark::State& state) {
    Cfg c = frontend_pipeline(parse(slurp("selsort.arr")));
    HornSystem sys = encode(c, cells(2));
    for (auto _ : state) {
        std::string text = emit_smtlib(simplify(sys), &c);
        benchmark::DoNotOptimize(text.size());
    }
}
BENCHMARK(BM_simplify_and_emit_selsort);

void BM_oracle_fill(benchmark::State& state) {
    Cfg c = frontend_pipeline(parse(slurp("fill.arr")));
    AbstractionConfig cfg = cells(1);
    HornSystem sys = encode(c, cfg);
    Bounds b;
    for (auto _ : state) {
        Oracle oracle(c, b);
        Tables t = oracle.build_tables(sys, cfg);
        auto violations = oracle.check_rules(sys, cfg, t);
        benchmark::DoNotOptimize(violations.size());
    }
}
BENCHMARK(BM_oracle_fill);

void BM_oracle_selsort_multiset(benchmark::State& state) {
    Cfg c = frontend_pipeline(parse(slurp("selsort_perm.arr")));
    AbstractionConfig cfg = cells(1);
    cfg.multiset = ArrayAbsConfig::Multiset::Track;
    HornSystem sys = encode(c, cfg);
    Bounds b;
    for (auto _ : state) {
        Oracle oracle(c, b);
        Tables t = oracle.build_tables(sys, cfg);
        auto violations = oracle.check_rules(sys, cfg, t);
        benchmark::DoNotOptimize(violations.size());
    }
}
BENCHMARK(BM_oracle_selsort_multiset);

}  // namespace

BENCHMARK_MAIN();
