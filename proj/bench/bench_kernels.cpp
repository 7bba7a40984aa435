#include <benchmark/benchmark.h>

#include <random>

#include "sfca/eval.hpp"
#include "sfca/learners.hpp"
#include "sfca/pipeline.hpp"
#include "sfca/synth.hpp"

using namespace sfca;

namespace {

struct Fixture {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

const Fixture& classification_fixture() {
  static const Fixture f = [] {
    std::mt19937_64 rng(7);
    Fixture f;
    f.x.resize(4000, 40);
    f.y.resize(4000);
    for (Eigen::Index i = 0; i < f.x.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.x.cols(); ++j) f.x(i, j) = uniform01(rng);
      f.y[i] = f.x(i, 0) + 0.5 * f.x(i, 1) + 0.2 * standard_normal(rng) > 0.75 ? 1.0 : 0.0;
    }
    return f;
  }();
  return f;
}

struct Corpus {
  std::vector<CityYearRecord> records;
};

const Corpus& small_corpus() {
  static const Corpus c = [] {
    SynthOptions o;
    o.cities = 12;
    o.years = 1;
    o.days = 14;
    const auto corpus = generate_corpus(o);
    const auto weeks = preprocess_internet(corpus.traces, o.grid);
    return Corpus{join_records(weeks, corpus.outcomes, corpus.statics)};
  }();
  return c;
}

void BM_ForestFit(benchmark::State& state) {
  const auto& f = classification_fixture();
  ModelSpec spec = ModelSpec::defaults(Family::c_tree_bag);
  spec.n_trees = 32;
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, f.x, f.y, {}, {}, exec));
}
BENCHMARK(BM_ForestFit)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const auto& f = classification_fixture();
  ModelSpec spec = ModelSpec::defaults(Family::c_tree_bag);
  spec.n_trees = 32;
  const auto model = fit(spec, f.x, f.y);
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, f.x, exec));
}
BENCHMARK(BM_ForestPredict)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_Loocv(benchmark::State& state) {
  const auto& c = small_corpus();
  const auto schema = FeatureSchema::internet();
  std::vector<FeatureTable> tables;
  for (const auto& r : c.records) tables.push_back(assemble_features(r, schema, SignalSource::internet));
  ModelSpec spec = ModelSpec::defaults(Family::c_tree_bag);
  spec.n_trees = 16;
  LoocvOptions opts;
  opts.exec = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(loocv(c.records, tables, spec, Activity::sleep, opts));
}
BENCHMARK(BM_Loocv)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
