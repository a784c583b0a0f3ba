// Microbenchmarks for the inference and training hot paths.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "modfuse/inference.hpp"
#include "modfuse/synthetic.hpp"
#include "modfuse/training.hpp"

using namespace modfuse;

namespace {

std::vector<ObservationSequence> make_corpus(int n_districts, int n_weeks) {
    GeneratorConfig cfg;
    cfg.n_districts = n_districts;
    cfg.n_weeks = n_weeks;
    cfg.seed = 1234;
    return generate(cfg).sequences;
}

void BM_ForwardBackward(benchmark::State& state) {
    const ModelParameters p = reference_parameters();
    const std::vector<ObservationSequence> seqs = make_corpus(64, static_cast<int>(state.range(0)));
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_backward(p, seqs[i]));
        i = (i + 1) % seqs.size();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(8)->Arg(42)->Arg(160);

void BM_Viterbi(benchmark::State& state) {
    const ModelParameters p = reference_parameters();
    const std::vector<ObservationSequence> seqs = make_corpus(64, static_cast<int>(state.range(0)));
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(viterbi(p, seqs[i]));
        i = (i + 1) % seqs.size();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(8)->Arg(42)->Arg(160);

void BM_BaumWelchIteration(benchmark::State& state) {
    const std::vector<ObservationSequence> seqs =
        make_corpus(static_cast<int>(state.range(0)), 42);
    const ModelParameters init = reference_parameters();
    TrainConfig cfg;
    cfg.max_iters = 1;
    cfg.tolerance = 0.0;
    for (auto _ : state) benchmark::DoNotOptimize(baum_welch(seqs, init, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 42);
}
BENCHMARK(BM_BaumWelchIteration)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
