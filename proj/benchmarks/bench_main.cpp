#include <benchmark/benchmark.h>

#include "sculpt/cluster.hpp"
#include "sculpt/encoder.hpp"
#include "sculpt/metrics.hpp"
#include "sculpt/rng.hpp"
#include "sculpt/sim.hpp"

namespace {

sculpt::PointCloud random_cloud(int n, std::uint64_t seed) {
  sculpt::Rng rng(seed);
  sculpt::PointCloud cloud;
  for (int i = 0; i < n; ++i)
    cloud.points.push_back({rng.uniform(0.0, 0.075), rng.uniform(0.0, 0.075),
                            rng.uniform(0.0, 0.075)});
  return cloud;
}

void BM_Chamfer(benchmark::State& state) {
  auto a = random_cloud(static_cast<int>(state.range(0)), 1);
  auto b = random_cloud(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(sculpt::chamfer(a, b));
}
BENCHMARK(BM_Chamfer)->Arg(256)->Arg(1024);

void BM_Emd(benchmark::State& state) {
  auto a = random_cloud(static_cast<int>(state.range(0)), 3);
  auto b = random_cloud(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(sculpt::emd(a, b));
}
BENCHMARK(BM_Emd)->Arg(64)->Arg(256);

void BM_KMeans(benchmark::State& state) {
  auto cloud = random_cloud(2000, 5);
  for (auto _ : state) benchmark::DoNotOptimize(sculpt::cluster(cloud, 10, 7));
}
BENCHMARK(BM_KMeans);

void BM_EncoderForward(benchmark::State& state) {
  sculpt::EncoderConfig cfg;
  auto params = sculpt::EncoderParams::random_init(cfg, 11);
  auto c = sculpt::Cluster::from_points(0, random_cloud(256, 6));
  for (auto _ : state) benchmark::DoNotOptimize(sculpt::encode(c, params));
}
BENCHMARK(BM_EncoderForward);

void BM_ApplyGrasp(benchmark::State& state) {
  sculpt::SimConfig sim;
  sculpt::ClayBody body;
  body.particles = random_cloud(4000, 8);
  body.particle_volume = 1e-9;
  sculpt::GraspAction action{0.0375, 0.0375, 0.02, 0.3, 0.012};
  for (auto _ : state) benchmark::DoNotOptimize(sculpt::apply_grasp(body, action, sim));
}
BENCHMARK(BM_ApplyGrasp);

}  // namespace

BENCHMARK_MAIN();
