// Side/central trade-off at fixed lambda2 for an AR(1) source, against the
// white source of the same entropy power.

#include <cmath>
#include <cstdio>

#include <mdrdf/rdf.hpp>

int main() {
  using namespace mdrdf;
  const Spectrum ar = ar_spectrum({0.9}, 1.0, 2048);
  const Spectrum white = flat_spectrum(entropy_power(ar), 2048);
  const SweepSpec spec{log_range(0.05, 50.0, 13), {3.0}};

  const auto rows = sweep(ar, spec);
  const auto ref = sweep(white, spec);
  std::printf(" lambda1   R[bits]   D_S[dB]   D_C[dB] | white D_S[dB]\n");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& p = rows[i];
    std::printf("%8.3f %9.4f %9.3f %9.3f | %9.3f\n", p.lambdas.lambda1, p.rate * nats_to_bits,
                10 * std::log10(p.d_side), 10 * std::log10(p.d_central), 10 * std::log10(ref[i].d_side));
  }
  return 0;
}
