#include <benchmark/benchmark.h>

#include "ffstab/models.hpp"
#include "ffstab/spectra.hpp"
#include "ffstab/spectral_flow.hpp"
#include "ffstab/stability_bounds.hpp"

using namespace ffstab;

namespace {

Interaction orbital_spin(const Interval& lam) {
  return fermion_to_spin(orbital_interaction(default_orbital_model(lam), lam));
}

void BM_LocalHamiltonian(benchmark::State& state) {
  const Interval lam(1, static_cast<int>(state.range(0)));
  const Interaction eta = orbital_spin(lam);
  for (auto _ : state) benchmark::DoNotOptimize(local_hamiltonian(eta, lam).matrix.data());
}
BENCHMARK(BM_LocalHamiltonian)->DenseRange(6, 10, 2);

void BM_Eigh(benchmark::State& state) {
  const Interval lam(1, static_cast<int>(state.range(0)));
  PerturbationParams p;
  const Matrix h = local_hamiltonian(orbital_spin(lam), lam).matrix +
                   0.01 * local_hamiltonian(fermion_to_spin(random_even_perturbation(lam, p, 1)), lam).matrix;
  for (auto _ : state) benchmark::DoNotOptimize(eigh(h).values.data());
}
BENCHMARK(BM_Eigh)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

void BM_FlowGenerator(benchmark::State& state) {
  const Interval lam(1, static_cast<int>(state.range(0)));
  PerturbationParams p;
  const Matrix h = local_hamiltonian(orbital_spin(lam), lam).matrix;
  const Matrix psi = local_hamiltonian(fermion_to_spin(random_even_perturbation(lam, p, 1)), lam).matrix;
  const EigenSystem es = eigh(h);
  const int k = kernel_count(es.values);
  for (auto _ : state) benchmark::DoNotOptimize(flow_generator(es, psi, 0.5, k).data());
}
BENCHMARK(BM_FlowGenerator)->DenseRange(6, 10, 2)->Unit(benchmark::kMillisecond);

void BM_JConstants(benchmark::State& state) {
  const FFunctionSpec F{1.0, 1.0, 3.0, Weight::stretched_exp(0.5, 1.0)};
  const DerivedFSpec F0 = shifted_base(F, 1);
  for (auto _ : state) benchmark::DoNotOptimize(j_constants(OmegaModel::step(3), F0, 1.0).J1.value);
}
BENCHMARK(BM_JConstants)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
