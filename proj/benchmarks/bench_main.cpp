#include <benchmark/benchmark.h>

#include <random>

#include "cullsac/bounding.hpp"
#include "cullsac/engine.hpp"
#include "cullsac/solvers.hpp"
#include "cullsac/verify.hpp"
#include "harness/synth.hpp"

namespace {

using namespace cullsac;

harness::SynthData make_data(ModelFamily family, std::size_t n = 8000, double ratio = 0.1) {
  harness::SynthConfig c;
  c.family = family;
  c.n = n;
  c.inlier_ratio = ratio;
  c.seed = 3;
  return harness::synth_generate(c);
}

JointGrid make_grid(const harness::SynthData& d, int cells) {
  RansacConfig rc;
  rc.family = family_of(d.truth);
  rc.context = d.context;
  rc.cells_per_axis_1 = rc.cells_per_axis_2 = cells;
  return build_grid(CorrespondenceView(d.matches), grid_spec_for(CorrespondenceView(d.matches), rc));
}

// Hypotheses from random (mostly contaminated) minimal samples.
std::vector<Model> hypotheses(const harness::SynthData& d, std::size_t count) {
  const auto family = family_of(d.truth);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, d.matches.size() - 1);
  std::vector<Model> out;
  while (out.size() < count) {
    Correspondences s;
    for (std::size_t i = 0; i < sample_size(family); ++i) s.push_back(d.matches[pick(rng)]);
    for (auto& m : solve_minimal(family, s, d.context)) out.push_back(std::move(m));
  }
  out.resize(count);
  return out;
}

void BM_Cull(benchmark::State& state, ModelFamily family) {
  const auto data = make_data(family);
  const auto grid = make_grid(data, static_cast<int>(state.range(0)));
  const auto models = hypotheses(data, 64);
  CellSelection sel;
  std::size_t i = 0;
  for (auto _ : state) {
    cull_cells(models[i++ % models.size()], grid, 3.0, sel);
    benchmark::DoNotOptimize(sel.candidate_count);
  }
}
BENCHMARK_CAPTURE(BM_Cull, homography, ModelFamily::homography)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK_CAPTURE(BM_Cull, fundamental, ModelFamily::fundamental)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK_CAPTURE(BM_Cull, radial, ModelFamily::radial_homography)->Arg(2)->Arg(4)->Arg(8);

void BM_Verify(benchmark::State& state, ModelFamily family, Strategy strategy) {
  const auto data = make_data(family);
  const auto grid = make_grid(data, 4);
  const auto models = hypotheses(data, 64);
  VerifyConfig vc;
  vc.threshold = 3.0;
  Verifier v(CorrespondenceView(data.matches), &grid, strategy, vc);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto r = v.verify(models[i++ % models.size()], Score{});
    benchmark::DoNotOptimize(r.score.inlier_count);
  }
}
BENCHMARK_CAPTURE(BM_Verify, h_trad, ModelFamily::homography, Strategy::traditional);
BENCHMARK_CAPTURE(BM_Verify, h_grid, ModelFamily::homography, Strategy::partition);
BENCHMARK_CAPTURE(BM_Verify, h_sprt, ModelFamily::homography, Strategy::sprt);
BENCHMARK_CAPTURE(BM_Verify, h_grid_sprt, ModelFamily::homography, Strategy::partition_sprt);
BENCHMARK_CAPTURE(BM_Verify, f_trad, ModelFamily::fundamental, Strategy::traditional);
BENCHMARK_CAPTURE(BM_Verify, f_grid, ModelFamily::fundamental, Strategy::partition);
BENCHMARK_CAPTURE(BM_Verify, f_sprt, ModelFamily::fundamental, Strategy::sprt);
BENCHMARK_CAPTURE(BM_Verify, f_grid_sprt, ModelFamily::fundamental, Strategy::partition_sprt);

void BM_Minimal(benchmark::State& state, ModelFamily family) {
  const auto data = make_data(family, 200, 1.0);
  const std::size_t m = sample_size(family);
  std::size_t offset = 0;
  for (auto _ : state) {
    const Correspondences s(data.matches.begin() + offset, data.matches.begin() + offset + m);
    offset = (offset + m) % (data.matches.size() - m);
    auto sols = solve_minimal(family, s, data.context);
    benchmark::DoNotOptimize(sols.data());
  }
}
BENCHMARK_CAPTURE(BM_Minimal, homography_4pt, ModelFamily::homography);
BENCHMARK_CAPTURE(BM_Minimal, fundamental_7pt, ModelFamily::fundamental);
BENCHMARK_CAPTURE(BM_Minimal, radial_4pt, ModelFamily::radial_homography);

}  // namespace

BENCHMARK_MAIN();
