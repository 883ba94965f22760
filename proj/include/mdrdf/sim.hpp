#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "filters.hpp"
#include "rdf.hpp"
#include "spectrum.hpp"

namespace mdrdf {

enum class NoiseMode { awgn, ecdq };
enum class Erasure { none, lose_desc1, lose_desc2 };

struct SimConfig {
  std::size_t num_samples = std::size_t{1} << 20;
  std::uint64_t seed = 1;
  NoiseMode mode = NoiseMode::awgn;
  std::size_t warmup = 4096;  // trimmed at both ends before measuring
  Erasure erasure = Erasure::none;
  std::size_t welch_segment = 64;
  int predictor_order = 128;
  int shaper_order = 256;
  int interpolator_taps = 1023;
};

inline void validate(const SimConfig& cfg) {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidConfig, what); };
  if (cfg.num_samples < (std::size_t{1} << 16)) bad("num_samples must be at least 65536");
  if (cfg.predictor_order < 1 || cfg.shaper_order < 1) bad("filter orders must be positive");
  if (cfg.interpolator_taps < 63 || cfg.interpolator_taps % 2 == 0) bad("interpolator taps must be odd and >= 63");
  if (cfg.warmup < static_cast<std::size_t>(cfg.interpolator_taps) ||
      cfg.warmup < 2 * static_cast<std::size_t>(cfg.predictor_order))
    bad("warmup shorter than the filter transients");
  if (4 * cfg.warmup >= cfg.num_samples) bad("warmup leaves too few samples to measure");
  const std::size_t seg = cfg.welch_segment;
  if (seg < 4 || (seg & (seg - 1)) != 0) bad("welch segment must be a power of two >= 4");
}

struct SimReport {
  std::optional<double> d_side_1;
  std::optional<double> d_side_2;
  std::optional<double> d_central;
  double rate_analytical = 0.0;  // nats per description per source sample
  std::optional<double> rate_empirical;
  double noise_variance = 0.0;   // injected per (upsampled) sample
  double y_variance = 0.0;       // measured variance of description 1
  Spectrum psd_y;
  std::optional<Spectrum> psd_err_side;
  std::optional<Spectrum> psd_err_central;
  std::size_t shaper_taps = 0;
};

struct QuantizerState {
  double step;
  std::mt19937_64 engine;
  double dither = 0.0;

  QuantizerState(double step_, std::uint64_t seed) : step(step_), engine(seed) {
    if (!(step_ > 0.0)) fail(ErrorCode::InvalidConfig, "quantizer step must be positive");
  }

  // Uniform on (-step/2, step/2].
  double next_dither() {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
    dither = 0.5 * step - step * u;
    return dither;
  }
};

struct QuantizedSample {
  std::int64_t index = 0;
  double reconstruction = 0.0;
};

inline QuantizedSample ecdq_quantize(double x, const QuantizerState& q) {
  const double v = (x + q.dither) / q.step;
  const auto index = static_cast<std::int64_t>(std::floor(v + 0.5));
  return {index, static_cast<double>(index) * q.step - q.dither};
}

struct MeasuredDistortions {
  std::optional<double> side_1;
  std::optional<double> side_2;
  std::optional<double> central;
};

inline double mse(std::span<const double> x, std::span<const double> y, std::size_t warmup) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "signals differ in length");
  if (warmup >= x.size()) fail(ErrorCode::SignalTooShort, "warmup consumes the whole signal");
  double acc = 0.0;
  for (std::size_t i = warmup; i < x.size(); ++i) {
    const double e = y[i] - x[i];
    acc += e * e;
  }
  return acc / static_cast<double>(x.size() - warmup);
}

inline MeasuredDistortions measure_distortions(std::span<const double> x, std::span<const double> side_1,
                                               std::span<const double> side_2, std::span<const double> central,
                                               std::size_t warmup) {
  MeasuredDistortions m;
  if (!side_1.empty()) m.side_1 = mse(x, side_1, warmup);
  if (!side_2.empty()) m.side_2 = mse(x, side_2, warmup);
  if (!central.empty()) m.central = mse(x, central, warmup);
  return m;
}

// Hann-windowed averaged periodogram with 50% overlap, evaluated on the
// midpoint grid of segment/2 bins. White noise of variance v returns v.
inline Spectrum welch_psd(std::span<const double> x, std::size_t segment) {
  if (segment < 2 || (segment & (segment - 1)) != 0) fail(ErrorCode::InvalidConfig, "segment must be a power of two");
  if (segment > x.size() / 8) fail(ErrorCode::SignalTooShort, "signal shorter than eight segments");
  const std::size_t hop = segment / 2, bins = segment / 2;
  const std::size_t count = (x.size() - segment) / hop + 1;
  std::vector<std::complex<double>> tw(segment);
  double wsum = 0.0;
  for (std::size_t n = 0; n < segment; ++n) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(segment));
    wsum += w * w;
    // half-bin shift onto the midpoint grid
    tw[n] = w * std::polar(1.0, -std::numbers::pi * static_cast<double>(n) / static_cast<double>(segment));
  }
  Fft fft(segment, true);
  std::vector<double> acc(bins, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    auto* b = fft.data();
    const double* seg = x.data() + s * hop;
    for (std::size_t n = 0; n < segment; ++n) b[n] = seg[n] * tw[n];
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k) acc[k] += std::norm(b[k]);
  }
  for (double& v : acc) v /= static_cast<double>(count) * wsum;
  return Spectrum(std::move(acc));
}

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

enum StreamTag : std::uint64_t { source_stream = 0, channel_noise = 1, desc1_stream = 2, desc2_stream = 3 };

// Four-accumulator dot product of a[0..n) with b[0..n).
inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

// Stationary Gaussian sequence with PSD S: white noise shaped by sqrt(S) on
// the DFT grid (circular, so there is no start-up transient).
inline std::vector<double> synthesize_source(const Spectrum& s, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(detail::stream_seed(seed, detail::source_stream));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> w(n);
  for (double& v : w) v = gauss(eng);
  return filter_zero_phase(w, [&](double om) { return std::sqrt(s.at(om)); });
}

namespace detail {

inline std::vector<double> apply_response(std::span<const double> x, const Spectrum& mag) {
  return filter_zero_phase(x, [&](double om) { return mag.at(om); });
}

inline double index_entropy(const std::vector<std::int64_t>& idx, std::size_t from, std::size_t to, std::size_t stride) {
  std::map<std::int64_t, std::size_t> hist;
  std::size_t total = 0;
  for (std::size_t i = from; i < to; i += stride, ++total) ++hist[idx[i]];
  double h = 0.0;
  for (const auto& [k, c] : hist) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

// One quantization step: either injected Gaussian noise or the dithered
// scalar quantizer. Returns y and records the index for ecdq.
struct Quantizers {
  NoiseMode mode;
  double sigma;
  std::vector<std::mt19937_64> noise;       // one engine per stream
  std::vector<QuantizerState> dithered;     // one state per stream
  std::normal_distribution<double> gauss{0.0, 1.0};

  Quantizers(NoiseMode m, double variance, const std::vector<std::uint64_t>& seeds) : mode(m), sigma(std::sqrt(variance)) {
    for (auto sd : seeds) {
      if (m == NoiseMode::awgn)
        noise.emplace_back(sd);
      else
        dithered.emplace_back(std::sqrt(12.0 * variance), sd);
    }
  }

  double apply(std::size_t stream, double d, std::int64_t& index) {
    if (mode == NoiseMode::awgn) return d + sigma * gauss(noise[stream]);
    QuantizerState& q = dithered[stream];
    q.next_dither();
    const QuantizedSample r = ecdq_quantize(d, q);
    index = r.index;
    return r.reconstruction;
  }
};

struct LoopOutput {
  std::vector<double> v;  // reconstruction inside the loop
  std::vector<double> y;  // quantizer output (the transmitted process)
  std::vector<std::int64_t> index;
};

// Prediction plus noise-shaping loop. The predictor acts on every
// `pred_stride`-th past reconstruction (stride 2 realizes A(z^2)); sample m
// is quantized by stream (m % streams).
inline LoopOutput shaping_loop(std::span<const double> u, const PredictorCoeffs& a, std::size_t pred_stride,
                               const ShapingFilter& c, Quantizers& qz, std::size_t streams) {
  const std::size_t len = u.size();
  const std::size_t p = a.coeffs.size(), lc = c.coeffs.size();
  std::vector<double> c_rev(c.coeffs.rbegin(), c.coeffs.rend());
  LoopOutput out;
  out.v.assign(len, 0.0);
  out.y.assign(len, 0.0);
  out.index.assign(len, 0);
  std::vector<double> err(len, 0.0);
  for (std::size_t m = 0; m < len; ++m) {
    double pred = 0.0;
    for (std::size_t k = 1; k <= p && k * pred_stride <= m; ++k) pred += a.coeffs[k - 1] * out.v[m - k * pred_stride];
    double shaped = 0.0;
    if (lc > 0) {
      const std::size_t n = std::min(m, lc);
      shaped = detail::dot(c_rev.data() + (lc - n), err.data() + (m - n), n);
    }
    const double d = u[m] - pred + shaped;
    std::int64_t idx = 0;
    const double y = qz.apply(m % streams, d, idx);
    err[m] = y - d;
    out.y[m] = y;
    out.index[m] = idx;
    out.v[m] = y + pred;
  }
  return out;
}

// DPCM decoder of one description: v[n] = y[n] + sum a_k v[n-k].
inline std::vector<double> dpcm_decode(std::span<const double> y, const PredictorCoeffs& a) {
  std::vector<double> v(y.size(), 0.0);
  for (std::size_t n = 0; n < y.size(); ++n) {
    double pred = 0.0;
    for (std::size_t k = 1; k <= a.coeffs.size() && k <= n; ++k) pred += a.coeffs[k - 1] * v[n - k];
    v[n] = y[n] + pred;
  }
  return v;
}

// Upsample by two through the half-band filter with gain 2. Even outputs
// reproduce w exactly.
inline std::vector<double> interpolate_by_two(std::span<const double> w, std::span<const double> h) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(w.size());
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>((h.size() - 1) / 2);
  std::vector<double> u(2 * w.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    u[static_cast<std::size_t>(2 * i)] = w[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (std::ptrdiff_t k = -m; k <= m; k += 1) {
      if ((k & 1) == 0) continue;
      const std::ptrdiff_t j = i - (k - 1) / 2;
      if (j < 0 || j >= n) continue;
      acc += h[static_cast<std::size_t>(k + m)] * w[static_cast<std::size_t>(j)];
    }
    u[static_cast<std::size_t>(2 * i + 1)] = 2.0 * acc;
  }
  return u;
}

// sum over odd k of h[k] v[2i - k]
inline std::vector<double> odd_phase(std::span<const double> v, std::span<const double> h) {
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(v.size());
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>((h.size() - 1) / 2);
  std::vector<double> out(v.size() / 2, 0.0);
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -m; k <= m; ++k) {
      if ((k & 1) == 0) continue;
      const std::ptrdiff_t j = 2 * i - k;
      if (j < 0 || j >= len) continue;
      acc += h[static_cast<std::size_t>(k + m)] * v[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

struct MdDecoded {
  std::vector<double> side_1, side_2, central;  // empty when unavailable
};

// Decoder for the upsampled-rate reconstruction v (odd samples from
// description 2). Side 2 gets the half-sample correction: its samples sit at
// odd instants and are interpolated back onto the even ones.
inline MdDecoded md_decode(std::span<const double> v, std::span<const double> h, const PrePostFilters& pp,
                           Erasure erasure) {
  const std::size_t n = v.size() / 2;
  MdDecoded out;
  std::vector<double> odd;
  if (erasure != Erasure::lose_desc1) {
    std::vector<double> even(n);
    for (std::size_t i = 0; i < n; ++i) even[i] = v[2 * i];
    out.side_1 = apply_response(even, pp.f);
  }
  if (erasure != Erasure::lose_desc2) {
    odd = odd_phase(v, h);
    std::vector<double> s2(n);
    for (std::size_t i = 0; i < n; ++i) s2[i] = 2.0 * odd[i];
    out.side_2 = apply_response(s2, pp.f);
  }
  if (erasure == Erasure::none) {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = 0.5 * v[2 * i] + odd[i];
    out.central = apply_response(c, pp.g);
  }
  return out;
}

inline void fill_report(SimReport& r, std::span<const double> x, const MdDecoded& dec, std::span<const double> y_desc1,
                        const SimConfig& cfg) {
  const std::size_t n = x.size(), w = cfg.warmup, end = n - cfg.warmup;
  auto window = [&](const std::vector<double>& s) { return std::span<const double>(s).subspan(0, s.empty() ? 0 : end); };
  const auto m = measure_distortions(x.subspan(0, end), window(dec.side_1), window(dec.side_2), window(dec.central), w);
  r.d_side_1 = m.side_1;
  r.d_side_2 = m.side_2;
  r.d_central = m.central;
  auto err_psd = [&](const std::vector<double>& s) {
    std::vector<double> e(end - w);
    for (std::size_t i = w; i < end; ++i) e[i - w] = s[i] - x[i];
    return welch_psd(e, cfg.welch_segment);
  };
  if (!dec.side_1.empty())
    r.psd_err_side = err_psd(dec.side_1);
  else if (!dec.side_2.empty())
    r.psd_err_side = err_psd(dec.side_2);
  if (!dec.central.empty()) r.psd_err_central = err_psd(dec.central);
  const auto ys = y_desc1.subspan(w, end - w);
  double acc = 0.0;
  for (double v : ys) acc += v * v;
  r.y_variance = acc / static_cast<double>(ys.size());
  r.psd_y = welch_psd(ys, cfg.welch_segment);
}

struct MdSetup {
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> h;
  PrePostFilters pp;
  PredictorCoeffs a;
  ShapingFilter c;
  double noise_variance = 0.0;
  double rate = 0.0;
};

inline MdSetup md_setup(const Spectrum& s, const NoiseSpectra& n, const SimConfig& cfg) {
  validate(cfg);
  MdSetup st;
  st.pp = pre_post_filters(s, n);
  const InterleavedSpectrum tilde = interleave_theta(n);
  if (!(tilde.spectrum.min() > 0.0)) fail(ErrorCode::NonPositiveSpectrum, "interleaved noise spectrum has zeros");
  st.a = optimal_predictor(s, cfg.predictor_order);
  st.c = noise_shaper(tilde.spectrum, cfg.shaper_order);
  if (st.c.order() > cfg.warmup) fail(ErrorCode::InvalidConfig, "warmup shorter than the noise-shaping filter");
  st.noise_variance = tilde.entropy_power();
  st.rate = 0.5 * std::log(entropy_power(s) / st.noise_variance);
  st.h = halfband_interpolator(cfg.interpolator_taps);
  st.x = synthesize_source(s, cfg.num_samples, cfg.seed);
  st.u = interpolate_by_two(apply_response(st.x, st.pp.f), st.h);
  return st;
}

}  // namespace detail

inline SimReport run_sd_mask_channel(const Spectrum& s, const Spectrum& mask, const SimConfig& cfg) {
  validate(cfg);
  if (s.size() != mask.size()) fail(ErrorCode::LengthMismatch, "mask and source grids differ");
  const Spectrum f = sd_prefilter(s, mask);
  const Spectrum m = regularize(mask, 1e-12 * std::max(1.0, mask.max())).spectrum;
  const PredictorCoeffs a = optimal_predictor(s, cfg.predictor_order);
  const ShapingFilter c = noise_shaper(m, cfg.shaper_order);
  if (c.order() > cfg.warmup) fail(ErrorCode::InvalidConfig, "warmup shorter than the noise-shaping filter");

  SimReport r;
  r.noise_variance = entropy_power(m);
  r.rate_analytical = 0.5 * std::log(entropy_power(s) / r.noise_variance);
  r.shaper_taps = c.order();

  const auto x = synthesize_source(s, cfg.num_samples, cfg.seed);
  const auto u = detail::apply_response(x, f);
  detail::Quantizers qz(cfg.mode, r.noise_variance, {detail::stream_seed(cfg.seed, detail::channel_noise)});
  const auto loop = detail::shaping_loop(u, a, 1, c, qz, 1);
  detail::MdDecoded dec;
  dec.side_1 = detail::apply_response(loop.v, f);
  detail::fill_report(r, x, dec, loop.y, cfg);
  if (cfg.mode == NoiseMode::ecdq)
    r.rate_empirical = detail::index_entropy(loop.index, cfg.warmup, cfg.num_samples - cfg.warmup, 1);
  return r;
}

inline SimReport run_md_channel(const Spectrum& s, const NoiseSpectra& n, const SimConfig& cfg) {
  const detail::MdSetup st = detail::md_setup(s, n, cfg);
  SimReport r;
  r.noise_variance = st.noise_variance;
  r.rate_analytical = st.rate;
  r.shaper_taps = st.c.order();
  detail::Quantizers qz(cfg.mode, st.noise_variance, {detail::stream_seed(cfg.seed, detail::channel_noise)});
  const auto loop = detail::shaping_loop(st.u, st.a, 2, st.c, qz, 1);
  const auto dec = detail::md_decode(loop.v, st.h, st.pp, cfg.erasure);
  std::vector<double> y1(cfg.num_samples);
  for (std::size_t i = 0; i < y1.size(); ++i) y1[i] = loop.y[2 * i];
  detail::fill_report(r, st.x, dec, y1, cfg);
  if (cfg.mode == NoiseMode::ecdq)
    r.rate_empirical = detail::index_entropy(loop.index, 2 * cfg.warmup, 2 * (cfg.num_samples - cfg.warmup), 1);
  return r;
}

inline SimReport run_md_codec(const Spectrum& s, const NoiseSpectra& n, const SimConfig& cfg) {
  const detail::MdSetup st = detail::md_setup(s, n, cfg);
  SimReport r;
  r.noise_variance = st.noise_variance;
  r.rate_analytical = st.rate;
  r.shaper_taps = st.c.order();

  // Encoder: even samples feed description 1, odd samples description 2; each
  // has its own quantizer and its own DPCM loop, all inside the common shaper.
  detail::Quantizers qz(cfg.mode, st.noise_variance,
                        {detail::stream_seed(cfg.seed, detail::desc1_stream), detail::stream_seed(cfg.seed, detail::desc2_stream)});
  const auto loop = detail::shaping_loop(st.u, st.a, 2, st.c, qz, 2);
  const std::size_t len = cfg.num_samples;
  std::vector<double> y1(len), y2(len);
  for (std::size_t i = 0; i < len; ++i) {
    y1[i] = loop.y[2 * i];
    y2[i] = loop.y[2 * i + 1];
  }

  // Decoder: each description is reconstructed from its own stream only.
  std::vector<double> v(2 * len, 0.0);
  if (cfg.erasure != Erasure::lose_desc1) {
    const auto v1 = detail::dpcm_decode(y1, st.a);
    for (std::size_t i = 0; i < len; ++i) v[2 * i] = v1[i];
  }
  if (cfg.erasure != Erasure::lose_desc2) {
    const auto v2 = detail::dpcm_decode(y2, st.a);
    for (std::size_t i = 0; i < len; ++i) v[2 * i + 1] = v2[i];
  }
  const auto dec = detail::md_decode(v, st.h, st.pp, cfg.erasure);
  detail::fill_report(r, st.x, dec, cfg.erasure == Erasure::lose_desc1 ? y2 : y1, cfg);
  if (cfg.mode == NoiseMode::ecdq) {
    const std::size_t from = 2 * cfg.warmup, to = 2 * (len - cfg.warmup);
    r.rate_empirical = 0.5 * (detail::index_entropy(loop.index, from, to, 2) + detail::index_entropy(loop.index, from + 1, to, 2));
  }
  return r;
}

}  // namespace mdrdf
