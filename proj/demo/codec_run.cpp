// End-to-end run of the two-description codec on the cosine source, with
// and without losing a description.

#include <cstdio>

#include <mdrdf/sim.hpp>

int main() {
  using namespace mdrdf;
  const Spectrum s = cosine_spectrum(4096);
  const RdfPoint p = evaluate(s, {0.2380, 2.700});
  std::printf("target: D_S = %.4f, D_C = %.4f, R = %.4f bits\n", p.d_side, p.d_central, p.rate * nats_to_bits);

  SimConfig cfg;
  cfg.num_samples = std::size_t{1} << 18;
  for (auto mode : {NoiseMode::awgn, NoiseMode::ecdq}) {
    cfg.mode = mode;
    const SimReport r = run_md_codec(s, p.spectra, cfg);
    std::printf("%s: side %.4f / %.4f, central %.4f", mode == NoiseMode::awgn ? "awgn" : "ecdq", *r.d_side_1,
                *r.d_side_2, *r.d_central);
    if (r.rate_empirical) std::printf(", index entropy %.3f bits", *r.rate_empirical * nats_to_bits);
    std::printf("\n");
  }

  cfg.mode = NoiseMode::awgn;
  cfg.erasure = Erasure::lose_desc2;
  const SimReport lost = run_md_codec(s, p.spectra, cfg);
  std::printf("description 2 lost: side %.4f, central unavailable\n", *lost.d_side_1);
  return 0;
}
