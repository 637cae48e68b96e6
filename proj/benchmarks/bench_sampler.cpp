#include <benchmark/benchmark.h>

#include "nel/dataset.hpp"
#include "nel/distributions.hpp"
#include "nel/gibbs.hpp"
#include "nel/stats.hpp"

namespace {

nel::Dataset synthetic(int n) {
  nel::SynthConfig cfg;
  cfg.n_points = n;
  cfg.seed = 17;
  nel::Dataset ds = nel::generate_synthetic(cfg);
  nel::normalize_zscore(ds.points);
  return ds;
}

// One Gibbs scan over unlabeled synthetic data after a short warm-up.
void BM_GibbsSweep(benchmark::State& state) {
  const auto kind = state.range(1) ? nel::ModelKind::I2GMM : nel::ModelKind::IGMM;
  const nel::Dataset ds = synthetic(static_cast<int>(state.range(0)));
  const nel::LabelInfo labels(std::vector<int>(ds.size(), nel::kUnlabeled));
  nel::SamplerContext ctx(kind, nel::HyperState::vague(ds.dim()));
  nel::PartitionState st = kind == nel::ModelKind::IGMM
                               ? nel::make_igmm_partition(ds.points, ctx.hypers, 1.0, 0)
                               : nel::PartitionState(ds.points, 1.0, 1.0, 0);
  const int comp = st.create_component(st.create_class());
  for (int i = 0; i < ds.size(); ++i) st.assign(i, comp, labels);
  nel::Rng rng(3);
  ctx.refresh(st);
  for (int s = 0; s < 20; ++s) {
    nel::gibbs_sweep(st, labels, ctx, rng);
    ctx.refresh(st);
  }
  for (auto _ : state) {
    nel::gibbs_sweep(st, labels, ctx, rng);
    ctx.refresh(st);
  }
  state.SetItemsProcessed(state.iterations() * ds.size());
  state.counters["components"] = st.num_components();
}
BENCHMARK(BM_GibbsSweep)
    ->Args({1500, 0})->Args({3000, 0})->Args({1500, 1})->Args({3000, 1})
    ->Unit(benchmark::kMillisecond);

void BM_StudentTPredictive(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  nel::Rng rng(5);
  nel::NIWParams prior{nel::Vector::Zero(d), nel::Matrix::Identity(d, d), 0.1, d + 2.0};
  nel::NiwPosterior post(prior);
  for (int i = 0; i < 50; ++i) {
    nel::Vector x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.normal();
    post.add(x);
  }
  nel::Vector x = nel::Vector::Constant(d, 0.3);
  nel::Vector work(d);
  for (auto _ : state) benchmark::DoNotOptimize(post.predictive_logpdf(x, work));
}
BENCHMARK(BM_StudentTPredictive)->Arg(2)->Arg(6)->Arg(16);

void BM_CholeskyRankOne(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  nel::CholeskyFactor f(nel::Matrix::Identity(d, d) * 2.0);
  nel::Vector v = nel::Vector::Constant(d, 0.1);
  bool up = true;
  for (auto _ : state) {
    f.rank_one_update(v, up ? 1.0 : -1.0);
    up = !up;
  }
}
BENCHMARK(BM_CholeskyRankOne)->Arg(2)->Arg(6)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
