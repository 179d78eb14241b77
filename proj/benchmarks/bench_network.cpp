#include "lnn/coldstart.hpp"
#include "lnn/network.hpp"
#include "lnn/trainer.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace lnn;

namespace {

Topology topology(std::size_t hidden) {
    Topology t;
    t.latent_count = 16;
    t.attribute_count = 19;
    if (hidden)
        t.hidden_sizes = {hidden};
    t.output_count = 2113;
    return t;
}

void BM_ForwardBackward(benchmark::State& state) {
    Rng rng(1);
    const Topology topo = topology(static_cast<std::size_t>(state.range(0)));
    WeightSet w = WeightSet::random(topo, 0.1, rng);
    LatentMatrix v = LatentMatrix::random(1, topo.latent_count, 0.1, rng);
    std::vector<double> genres(topo.attribute_count, 0.0);
    genres[3] = 1.0;
    std::vector<double> q;
    ActivationTrace tr;
    WeightGradient g;
    std::vector<double> h(topo.latent_count);
    std::size_t user = 0;
    for (auto _ : state) {
        assemble_input_into(v.row(0), genres, q);
        forward_single(q, w, user, tr);
        error_terms(0.7, tr, w);
        weight_gradient(tr, w, g);
        latent_gradient(tr, w, h);
        apply_updates(w, g, v.row(0), h, 1e-4, 0.01, true);
        user = (user + 97) % topo.output_count;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(16)->Arg(32);

void BM_Epoch(benchmark::State& state) {
    const std::size_t items = 500, users = 300;
    std::mt19937_64 gen(3);
    std::vector<Rating> triples;
    for (std::size_t i = 0; i < items; ++i)
        for (std::size_t j = 0; j < users; ++j)
            if (gen() % 10 == 0)
                triples.push_back({i, j, 0.5 * static_cast<double>(1 + gen() % 10)});
    const SparseRatings r(triples, items, users, RatingScale::movielens());
    const TrainingSet data = TrainingSet::from(r);
    const ItemProfiles profiles(items, 0);
    Topology topo;
    topo.latent_count = 8;
    topo.hidden_sizes = {16};
    topo.output_count = users;
    TrainingState st;
    st.rng.seed(0);
    st.latents = LatentMatrix::random(items, 8, 0.01, st.rng);
    st.weights = WeightSet::random(topo, 0.01, st.rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(train_epoch(data, profiles, st, 0.01, 0.01, true));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.size()));
}
BENCHMARK(BM_Epoch)->Unit(benchmark::kMillisecond);

void BM_NeighborQuery(benchmark::State& state) {
    std::mt19937_64 gen(5);
    const std::size_t items = 10197;
    ItemProfiles p(items, 20);
    for (std::size_t i = 0; i < items; ++i)
        for (std::size_t k = 0; k < 20; ++k)
            if (gen() % 6 == 0)
                p.set(i, k, 1.0);
    const NeighborIndex idx(p);
    const std::vector<double> q(p.row(17).begin(), p.row(17).end());
    for (auto _ : state)
        benchmark::DoNotOptimize(idx.query(q, 100));
}
BENCHMARK(BM_NeighborQuery)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
