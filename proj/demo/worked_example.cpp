// Cosine spectrum at lambda = (0.2380, 2.700), then the inverse fit back
// from the distortion pair.

#include <cstdio>

#include <mdrdf/rdf.hpp>

int main() {
  using namespace mdrdf;
  const Spectrum s = cosine_spectrum(4096);

  const RdfPoint p = evaluate(s, {0.2380, 2.700});
  std::printf("evaluate: R = %.4f bits, D_S = %.4f, D_C = %.4f, support %zu/%zu bins\n", p.rate * nats_to_bits,
              p.d_side, p.d_central, p.support_count(), s.size());

  const RdfPoint f = fit_lambdas(s, {0.4, 0.08});
  std::printf("fit:      lambda = (%.4f, %.4f), R = %.4f bits\n", f.lambdas.lambda1, f.lambdas.lambda2,
              f.rate * nats_to_bits);

  std::printf("\n   omega     S      theta+   theta-\n");
  for (std::size_t k = 0; k < s.size(); k += 512)
    std::printf("%8.4f %7.4f %8.5f %8.5f%s\n", s.omega(k), s[k], p.spectra.theta_plus[k], p.spectra.theta_minus[k],
                p.spectra.boundary_mask[k] ? "  (zero rate)" : "");
  return 0;
}
