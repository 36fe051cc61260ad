// Classify a point, then compare the predicted |G|/g1 with a handful of simulated replicas.

#include <cstdio>

#include "bootperc/bootperc.hpp"

using namespace bootperc;

int main() {
  const double alpha1 = 0.56;
  const double alpha2 = 0.10;
  const auto limit = AsymptoticParams::make(1.0, 1.0, 0.6, 2, alpha1, alpha2);
  const PhaseDiagnosis d = classify(limit);
  std::printf("regime=%s", std::string(to_string(d.regime)).c_str());
  if (d.fixed_point) std::printf(" z*=%.6f x*=%.6f", d.fixed_point->z, d.fixed_point->x_star);
  std::printf("\n");

  FiniteMapping shape;
  shape.n1 = 50000;
  const ModelParams m = map_to_model(shape, alpha1, alpha2);
  const double g1 = derive_critical_scale(m).g1;
  std::printf("n1=%lld p1=%.3g g1=%.1f a=(%lld, %lld)\n", static_cast<long long>(m.n1), m.p1, g1,
              static_cast<long long>(m.a1), static_cast<long long>(m.a2));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RunRecord rec = run_chain_lazy(m, Strategy::max(), {derive_key(7, {seed}), 64});
    std::printf("replica %llu: |G|=%lld |G|/g1=%.3f\n", static_cast<unsigned long long>(seed),
                static_cast<long long>(rec.final_active), static_cast<double>(rec.final_active) / g1);
  }
  return 0;
}
