// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <mdrdf/filters.hpp>
#include <mdrdf/oracle.hpp>
#include <mdrdf/rdf.hpp>
#include <mdrdf/sim.hpp>
#include <mdrdf/spectral_solver.hpp>
#include <mdrdf/verify.hpp>
#include <mdrdf/white_md.hpp>

using namespace mdrdf;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string f(double x, int prec = 5) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

template <class Fn>
double seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome ac1_worked_example() {
  Outcome o;
  RdfPoint p;
  const double t = seconds([&] { p = evaluate(cosine_spectrum(4096), {0.2380, 2.700}); });
  const double bits = p.rate * nats_to_bits;
  o.require(std::fabs(p.d_side - 0.4000) <= 1e-3, "D_S=" + f(p.d_side));
  o.require(std::fabs(p.d_central - 0.0801) <= 1e-3, "D_C=" + f(p.d_central));
  o.require(std::fabs(bits - 0.7468) <= 1e-3, "R=" + f(bits) + " bits");
  o.require(t < 1.0, "t=" + f(t, 3) + "s");
  return o;
}

Outcome ac2_inverse_fit() {
  Outcome o;
  RdfPoint p;
  const double t = seconds([&] { p = fit_lambdas(cosine_spectrum(4096), {0.4, 0.08}); });
  o.require(rel(p.lambdas.lambda1, 0.238) <= 0.02, "lambda1=" + f(p.lambdas.lambda1));
  o.require(rel(p.lambdas.lambda2, 2.70) <= 0.02, "lambda2=" + f(p.lambdas.lambda2));
  o.require(p.rate * nats_to_bits <= 0.7468 + 1e-3, "R=" + f(p.rate * nats_to_bits) + " bits");
  o.require(t < 30.0, "t=" + f(t, 3) + "s");
  return o;
}

// Flat spectra with random variance; distortion pairs drawn inside the
// non-degenerate part of the achievable region.
Outcome ac3_white_source() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_eval = 0.0, worst_fit = 0.0;
  int pairs = 0;
  while (pairs < 100) {
    const double var = std::exp(std::log(0.2) + u(rng) * std::log(25.0));
    const double ds = var * (0.02 + 0.9 * u(rng));
    const double dc = ds * (0.02 + 0.96 * u(rng));
    if (!is_nondegenerate(var, {ds, dc})) continue;
    ++pairs;
    const Spectrum s = flat_spectrum(var, 64);
    const RdfPoint fit = fit_lambdas(s, {ds, dc}, 1e-10);
    worst_fit = std::max(worst_fit, std::fabs(fit.rate - ozarow_rate(var, {ds, dc})));
    const RdfPoint ev = evaluate(s, fit.lambdas);
    worst_eval = std::max(worst_eval, std::fabs(ev.rate - ozarow_rate(var, {ev.d_side, ev.d_central})));
  }
  o.require(worst_eval < 1e-6, "evaluate max gap " + f(worst_eval, 3) + " nats");
  o.require(worst_fit < 1e-6, "fit max gap " + f(worst_fit, 3) + " nats");
  return o;
}

Outcome ac4_high_rate() {
  Outcome o;
  double worst = 0.0;
  const LagrangePair hi{1e4, 1e6};
  for (double s : {0.5, 1.0, 2.0}) {
    const FrequencySolution fs = solve_frequency(s, hi);
    worst = std::max(worst, std::fabs(hi.lambda1 * fs.theta_minus - 0.25));
    worst = std::max(worst, std::fabs((hi.lambda1 + hi.lambda2) * fs.theta_plus - 0.25));
  }
  o.require(worst < 1e-2, "max |lambda theta - 1/4| " + f(worst, 3));

  const LagrangePair ex2{4.0, 3.0};
  const FrequencySolution fs = solve_frequency(2.0, ex2);
  const double minus_db = 10.0 * std::log10(fs.theta_minus), plus_db = 10.0 * std::log10(fs.theta_plus);
  o.require(std::fabs(minus_db - (-12.04)) <= 1.0, "theta- " + f(minus_db, 4) + " dB");
  o.require(std::fabs(plus_db - (-14.47)) <= 1.0, "theta+ " + f(plus_db, 4) + " dB");
  return o;
}

Outcome ac5_oracle() {
  Outcome o;
  OracleStats st;
  const double t = seconds([&] { st = oracle_stats(20240917, 1000, true); });
  o.require(st.worst_theta <= 1e-6, "max theta gap " + f(st.worst_theta, 3));
  o.require(st.worst_gradient < 1e-8, "max gradient " + f(st.worst_gradient, 3));
  o.require(st.max_local_minima <= 1, "interior minima per triple <= " + std::to_string(st.max_local_minima));
  o.detail += "; " + std::to_string(st.interior) + " interior of 1000, t=" + f(t, 3) + "s";
  return o;
}

Outcome ac6_cubic_properties() {
  Outcome o;
  VerifyOptions opt;
  opt.samples = 20000;
  for (auto check : {check_cubic_residuals, check_root_ordering, check_discriminant_forms, check_reduced_roots}) {
    const PropertyResult r = check(opt);
    o.require(r.passed, r.name + " (" + r.detail + ")");
  }
  return o;
}

// Largest relative deviation of any Welch bin from a target function.
double worst_band(const Spectrum& psd, const std::function<double(double)>& target) {
  double worst = 0.0;
  for (std::size_t k = 0; k < psd.size(); ++k) worst = std::max(worst, rel(psd[k], target(psd.omega(k))));
  return worst;
}

// Expected Welch output for a process with spectrum d on the midpoint grid:
// d convolved with the normalized Hann kernel |W|^2, at each output bin.
std::vector<double> welch_expectation(const std::vector<double>& d, std::size_t segment) {
  const std::size_t n = d.size(), bins = segment / 2;
  std::vector<double> win(segment);
  double wsum = 0.0;
  for (std::size_t m = 0; m < segment; ++m) {
    win[m] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(segment));
    wsum += win[m] * win[m];
  }
  auto kernel = [&](double theta) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t m = 0; m < segment; ++m) acc += win[m] * std::polar(1.0, -theta * static_cast<double>(m));
    return std::norm(acc);
  };
  std::vector<double> out(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    const double w = Spectrum::omega(b, bins);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double nu = Spectrum::omega(k, n);
      acc += d[k] * (kernel(w - nu) + kernel(w + nu));
    }
    out[b] = acc / (2.0 * static_cast<double>(n) * wsum);
  }
  return out;
}

double worst_band(const Spectrum& psd, const std::vector<double>& expected) {
  double worst = 0.0;
  for (std::size_t k = 0; k < psd.size(); ++k) worst = std::max(worst, rel(psd[k], expected[k]));
  return worst;
}

Outcome ac7_sd_channel() {
  Outcome o;
  const Spectrum s = ar_spectrum({0.9}, 1.0, 4096);
  SimReport r;
  const double t = seconds([&] { r = run_sd_mask_channel(s, flat_spectrum(0.1, 4096), SimConfig{}); });
  const double pe = entropy_power(s);
  const double white = worst_band(r.psd_y, [&](double) { return pe; });
  o.require(rel(*r.d_side_1, 0.1) <= 0.03, "MSE=" + f(*r.d_side_1));
  o.require(white <= 0.05, "Y bands within " + f(100 * white, 3) + "% of P_e=" + f(pe));
  o.detail += "; t=" + f(t, 3) + "s";
  return o;
}

NoiseSpectra constant_noise(std::size_t n, double tp, double tm) {
  NoiseSpectra ns;
  ns.theta_plus.assign(n, tp);
  ns.theta_minus.assign(n, tm);
  ns.boundary_mask.assign(n, false);
  return ns;
}

Outcome ac8_md_channel() {
  Outcome o;
  double slowest = 0.0;
  auto timed = [&](auto&& fn) {
    SimReport r;
    slowest = std::max(slowest, seconds([&] { r = fn(); }));
    return r;
  };

  const Spectrum white = flat_spectrum(1.0, 4096);
  const NoiseSpectra wn = constant_noise(4096, 0.1, 0.1);
  SimConfig cfg;
  const SimReport wc = timed([&] { return run_md_channel(white, wn, cfg); });
  const SimReport wk = timed([&] { return run_md_codec(white, wn, cfg); });
  for (const SimReport* r : {&wc, &wk}) {
    const std::string tag = r == &wc ? "white channel" : "white codec";
    const bool ok = rel(*r->d_side_1, 0.2) <= 0.03 && rel(*r->d_side_2, 0.2) <= 0.03 && rel(*r->d_central, 0.1111) <= 0.03;
    o.require(ok, tag + " (" + f(*r->d_side_1, 4) + ", " + f(*r->d_side_2, 4) + ", " + f(*r->d_central, 4) + ")");
  }

  const Spectrum s = cosine_spectrum(4096);
  const RdfPoint p = evaluate(s, {0.2380, 2.700});
  const SimReport ch = timed([&] { return run_md_channel(s, p.spectra, cfg); });
  const SimReport cd = timed([&] { return run_md_codec(s, p.spectra, cfg); });
  SimConfig ecfg = cfg;
  ecfg.mode = NoiseMode::ecdq;
  const SimReport ec = timed([&] { return run_md_codec(s, p.spectra, ecfg); });
  for (const SimReport* r : {&ch, &cd, &ec}) {
    const std::string tag = r == &ch ? "ex1 channel" : r == &cd ? "ex1 codec" : "ex1 ecdq";
    const bool ok = rel(*r->d_side_1, 0.4) <= 0.05 && rel(*r->d_side_2, 0.4) <= 0.05 && rel(*r->d_central, 0.0801) <= 0.05;
    o.require(ok, tag + " (" + f(*r->d_side_1, 4) + ", " + f(*r->d_side_2, 4) + ", " + f(*r->d_central, 4) + ")");
  }

  double agree = 0.0;
  for (auto [a, b] : {std::pair{&wc, &wk}, std::pair{&ch, &cd}}) {
    agree = std::max({agree, rel(*b->d_side_1, *a->d_side_1), rel(*b->d_side_2, *a->d_side_2),
                      rel(*b->d_central, *a->d_central)});
  }
  o.require(agree <= 0.01, "codec vs channel " + f(100 * agree, 3) + "%");

  // ECDQ vs AWGN: both are estimates from 2^20 samples with independent
  // noise; the MSE estimates carry well under 1% standard error here, so 2%
  // is a three-sigma-plus band.
  const double ecdq_gap = std::max({rel(*ec.d_side_1, *cd.d_side_1), rel(*ec.d_side_2, *cd.d_side_2),
                                    rel(*ec.d_central, *cd.d_central)});
  o.require(ecdq_gap <= 0.02, "ecdq vs awgn " + f(100 * ecdq_gap, 3) + "%");
  const double step = std::sqrt(12.0 * ec.noise_variance);
  const double pe_tilde = interleave_theta(p.spectra).entropy_power();
  o.require(rel(step * step / 12.0, pe_tilde) < 1e-12, "step^2/12=" + f(step * step / 12.0) + " vs P_e(tilde)=" + f(pe_tilde));
  o.require(slowest < 60.0, "slowest run " + f(slowest, 3) + "s");
  return o;
}

// Dither independence: error of the subtractively dithered quantizer is
// uniform and independent of the input. Pearson chi-square at 1%.
Outcome dither_chi_square() {
  Outcome o;
  constexpr int bins = 20, in_bins = 8, samples = 400000;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  QuantizerState q(0.7, 1234);
  std::vector<double> marg(bins, 0.0), table(bins * in_bins, 0.0);
  const boost::math::normal_distribution<double> stdnorm(0.0, 1.0);
  for (int i = 0; i < samples; ++i) {
    const double x = g(rng);
    q.next_dither();
    const double e = ecdq_quantize(x, q).reconstruction - x;
    int b = static_cast<int>(std::floor((e / q.step + 0.5) * bins));
    b = std::clamp(b, 0, bins - 1);
    int c = static_cast<int>(std::floor(boost::math::cdf(stdnorm, x) * in_bins));
    c = std::clamp(c, 0, in_bins - 1);
    marg[b] += 1.0;
    table[c * bins + b] += 1.0;
  }
  double chi_u = 0.0;
  const double expect = static_cast<double>(samples) / bins;
  for (double m : marg) chi_u += (m - expect) * (m - expect) / expect;
  double chi_i = 0.0;
  std::vector<double> rows(in_bins, 0.0);
  for (int c = 0; c < in_bins; ++c)
    for (int b = 0; b < bins; ++b) rows[c] += table[c * bins + b];
  for (int c = 0; c < in_bins; ++c) {
    for (int b = 0; b < bins; ++b) {
      const double e = rows[c] * marg[b] / samples;
      chi_i += (table[c * bins + b] - e) * (table[c * bins + b] - e) / e;
    }
  }
  const double crit_u = boost::math::quantile(boost::math::chi_squared(bins - 1), 0.99);
  const double crit_i = boost::math::quantile(boost::math::chi_squared((bins - 1) * (in_bins - 1)), 0.99);
  o.require(chi_u < crit_u, "uniformity chi2 " + f(chi_u, 4) + " < " + f(crit_u, 4));
  o.require(chi_i < crit_i, "independence chi2 " + f(chi_i, 4) + " < " + f(crit_i, 4));
  return o;
}

Outcome ac9_property_suite() {
  Outcome o;
  const Spectrum s = cosine_spectrum(4096);
  const RdfPoint p = evaluate(s, {0.2380, 2.700});
  SimConfig cfg;
  cfg.welch_segment = 64;
  const SimReport r = run_md_channel(s, p.spectra, cfg);

  // Whiteness of the description process.
  const double pe = entropy_power(s);
  const double white = worst_band(r.psd_y, [&](double) { return pe; });
  o.require(white <= 0.05, "Y bands within " + f(100 * white, 3) + "% of P_e");

  // Error spectra against D_S(w) and D_C(w), each passed through the Welch
  // estimator's own expectation (the Hann kernel smears the sharp support
  // edge and the steep fall of S near pi).
  std::vector<double> dsw(s.size()), dcw(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double sk = s[k], tp = p.spectra.theta_plus[k], tm = p.spectra.theta_minus[k];
    dsw[k] = p.spectra.boundary_mask[k] ? sk : side_density(sk, tp, tm);
    dcw[k] = p.spectra.boundary_mask[k] ? sk : central_density(sk, tp, tm);
  }
  const auto es = worst_band(*r.psd_err_side, welch_expectation(dsw, cfg.welch_segment));
  const auto ec = worst_band(*r.psd_err_central, welch_expectation(dcw, cfg.welch_segment));
  o.require(es <= 0.05, "side error PSD within " + f(100 * es, 3) + "%");
  o.require(ec <= 0.05, "central error PSD within " + f(100 * ec, 3) + "%");

  // The reported rate is the closed-form spectral rate.
  o.require(rel(r.rate_analytical, p.rate) < 1e-6,
            "rate " + f(r.rate_analytical * nats_to_bits) + " vs " + f(p.rate * nats_to_bits) + " bits");

  const Outcome d = dither_chi_square();
  o.require(d.passed, d.detail);
  return o;
}

}  // namespace

int main() {
  struct Entry {
    const char* id;
    const char* title;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"AC1", "worked example", ac1_worked_example},
      {"AC2", "inverse fit", ac2_inverse_fit},
      {"AC3", "white-source reduction", ac3_white_source},
      {"AC4", "high-rate limits", ac4_high_rate},
      {"AC5", "oracle equivalence", ac5_oracle},
      {"AC6", "cubic root properties", ac6_cubic_properties},
      {"AC7", "single-description mask channel", ac7_sd_channel},
      {"AC8", "two-description channel and codec", ac8_md_channel},
      {"AC9", "desk-scale property suite", ac9_property_suite},
  };
  int failures = 0;
  for (const auto& e : entries) {
    Outcome o;
    double t = 0.0;
    try {
      t = seconds([&] { o = e.fn(); });
    } catch (const std::exception& ex) {
      o.passed = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    failures += o.passed ? 0 : 1;
    std::printf("[%s] %s %s (%.2fs): %s\n", o.passed ? "PASS" : "FAIL", e.id, e.title, t, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(entries)) - failures, std::size(entries));
  return failures == 0 ? 0 : 1;
}
