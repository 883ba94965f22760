#pragma once

// The mdrdf command line: solve | fit | sweep | simulate | verify.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "filters.hpp"
#include "rdf.hpp"
#include "sim.hpp"
#include "spectrum.hpp"
#include "verify.hpp"

namespace mdrdf::cli {

inline constexpr const char* tool_version = "0.1.0";

enum ExitCode : int { ok = 0, verify_failed = 1, config_error = 2, numeric_error = 3, infeasible = 4 };

using Json = nlohmann::ordered_json;

struct SpectrumSpec {
  enum class Kind { flat, cosine, ar, table } kind = Kind::cosine;
  double variance = 1.0;
  std::vector<double> coeffs;
  double innovation_variance = 1.0;
  std::vector<double> omega;
  std::vector<double> value;
  std::size_t grid_size = default_grid_size;
};

struct RunManifest {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::string version = tool_version;
  std::string timestamp;
};

namespace detail {

[[noreturn]] inline void config(const std::string& what) { fail(ErrorCode::InvalidConfig, what); }

inline double parse_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) config("not a number: '" + text + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  return out;
}

// Shortest round-trip decimal form.
inline std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Temp file in the destination directory, then rename over the target.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) config("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) config("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    config("cannot move output into '" + path + "'");
  }
}

inline std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline double to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace detail

// flat:V | cosine | ar:a1,a2,.../V | json:PATH
inline SpectrumSpec parse_spectrum_spec(const std::string& text, std::size_t grid = default_grid_size) {
  SpectrumSpec spec;
  spec.grid_size = grid;
  if (grid < 16) detail::config("grid size must be at least 16");
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "cosine") {
    spec.kind = SpectrumSpec::Kind::cosine;
  } else if (kind == "flat") {
    spec.kind = SpectrumSpec::Kind::flat;
    spec.variance = detail::parse_double(arg);
    if (!(spec.variance > 0.0)) detail::config("flat variance must be positive");
  } else if (kind == "ar") {
    spec.kind = SpectrumSpec::Kind::ar;
    const auto slash = arg.find('/');
    spec.coeffs = detail::parse_list(arg.substr(0, slash));
    spec.innovation_variance = slash == std::string::npos ? 1.0 : detail::parse_double(arg.substr(slash + 1));
    if (spec.coeffs.empty()) detail::config("ar spectrum needs at least one coefficient");
    if (!(spec.innovation_variance > 0.0)) detail::config("ar innovation variance must be positive");
    if (!is_minimum_phase(spec.coeffs)) detail::config("ar coefficients are not minimum phase");
  } else if (kind == "json") {
    spec.kind = SpectrumSpec::Kind::table;
    Json j;
    try {
      j = Json::parse(detail::read_file(arg));
      spec.omega = j.at("omega").get<std::vector<double>>();
      spec.value = j.at("value").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      detail::config("bad spectrum table '" + arg + "': " + e.what());
    }
    if (spec.omega.size() != spec.value.size() || spec.omega.size() < 2)
      detail::config("spectrum table needs equal-length omega/value arrays with at least two entries");
    for (std::size_t i = 0; i < spec.omega.size(); ++i) {
      if (!(spec.value[i] >= 0.0)) detail::config("spectrum table values must be nonnegative");
      if (i > 0 && !(spec.omega[i] > spec.omega[i - 1])) detail::config("spectrum table omega must increase");
    }
  } else {
    detail::config("unknown spectrum kind '" + kind + "'");
  }
  return spec;
}

inline Spectrum build_spectrum(const SpectrumSpec& spec) {
  const std::size_t n = spec.grid_size;
  switch (spec.kind) {
    case SpectrumSpec::Kind::flat: return flat_spectrum(spec.variance, n);
    case SpectrumSpec::Kind::cosine: return cosine_spectrum(n);
    case SpectrumSpec::Kind::ar: return ar_spectrum(spec.coeffs, spec.innovation_variance, n);
    case SpectrumSpec::Kind::table: {
      const auto& w = spec.omega;
      const auto& v = spec.value;
      return Spectrum::sample(n, [&](double om) {
        if (om <= w.front()) return v.front();
        if (om >= w.back()) return v.back();
        const auto it = std::upper_bound(w.begin(), w.end(), om);
        const std::size_t i = static_cast<std::size_t>(it - w.begin());
        const double t = (om - w[i - 1]) / (w[i] - w[i - 1]);
        return v[i - 1] * (1.0 - t) + v[i] * t;
      });
    }
  }
  return cosine_spectrum(n);
}

inline Json to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["seed"] = m.seed ? Json(*m.seed) : Json(nullptr);
  j["tool_version"] = m.version;
  j["timestamp"] = m.timestamp;
  return j;
}

inline Json to_json(const RdfPoint& p) {
  Json j;
  j["lambda1"] = p.lambdas.lambda1;
  j["lambda2"] = p.lambdas.lambda2;
  j["rate_nats"] = p.rate;
  j["rate_bits"] = p.rate * nats_to_bits;
  j["d_side"] = p.d_side;
  j["d_central"] = p.d_central;
  j["d_side_db"] = detail::to_db(p.d_side);
  j["d_central_db"] = detail::to_db(p.d_central);
  j["support_fraction"] = static_cast<double>(p.support_count()) / static_cast<double>(std::max<std::size_t>(1, p.spectra.size()));
  return j;
}

inline Json to_json(const Spectrum& s) { return Json(std::vector<double>(s.values().begin(), s.values().end())); }

inline Json to_json(const SimReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j;
  j["d_side_1"] = opt(r.d_side_1);
  j["d_side_2"] = opt(r.d_side_2);
  j["d_central"] = opt(r.d_central);
  j["rate_analytical_nats"] = r.rate_analytical;
  j["rate_analytical_bits"] = r.rate_analytical * nats_to_bits;
  j["rate_empirical_nats"] = opt(r.rate_empirical);
  j["rate_empirical_bits"] = r.rate_empirical ? Json(*r.rate_empirical * nats_to_bits) : Json(nullptr);
  j["noise_variance"] = r.noise_variance;
  j["y_variance"] = r.y_variance;
  j["shaper_taps"] = r.shaper_taps;
  std::vector<double> om(r.psd_y.size());
  for (std::size_t k = 0; k < om.size(); ++k) om[k] = r.psd_y.omega(k);
  j["psd_omega"] = om;
  j["psd_y"] = to_json(r.psd_y);
  j["psd_err_side"] = r.psd_err_side ? to_json(*r.psd_err_side) : Json(nullptr);
  j["psd_err_central"] = r.psd_err_central ? to_json(*r.psd_err_central) : Json(nullptr);
  return j;
}

// Per-frequency columns of a solved point.
inline std::string spectra_csv(const Spectrum& s, const RdfPoint& p) {
  std::string out = "omega,source,theta_plus,theta_minus,d_side,d_central,rate_nats,boundary\r\n";
  const auto& n = p.spectra;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double sk = s[k], tp = n.theta_plus[k], tm = n.theta_minus[k];
    const bool b = n.boundary_mask[k];
    out += detail::num(s.omega(k)) + ',' + detail::num(sk) + ',' + detail::num(tp) + ',' + detail::num(tm) + ',' +
           detail::num(b ? sk : side_density(sk, tp, tm)) + ',' + detail::num(b ? sk : central_density(sk, tp, tm)) +
           ',' + detail::num(b ? 0.0 : rate_density(sk, tp, tm)) + ',' + (b ? "1" : "0") + "\r\n";
  }
  return out;
}

inline std::string sweep_csv(const std::vector<RdfPoint>& rows) {
  std::string out = "lambda1,lambda2,rate_nats,rate_bits,d_side,d_central,d_side_db,d_central_db\r\n";
  for (const auto& p : rows) {
    out += detail::num(p.lambdas.lambda1) + ',' + detail::num(p.lambdas.lambda2) + ',' + detail::num(p.rate) + ',' +
           detail::num(p.rate * nats_to_bits) + ',' + detail::num(p.d_side) + ',' + detail::num(p.d_central) + ',' +
           detail::num(detail::to_db(p.d_side)) + ',' + detail::num(detail::to_db(p.d_central)) + "\r\n";
  }
  return out;
}

struct LoadedSpectra {
  Spectrum source;
  NoiseSpectra noise;
};

// Reads the per-frequency CSV written by `solve --csv`.
inline LoadedSpectra read_spectra_csv(const std::string& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line)) detail::config("empty spectra file");
  std::vector<double> src;
  NoiseSpectra n;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) detail::config("spectra rows need omega,source,theta_plus,theta_minus");
    src.push_back(detail::parse_double(cells[1]));
    n.theta_plus.push_back(detail::parse_double(cells[2]));
    n.theta_minus.push_back(detail::parse_double(cells[3]));
    const double s = src.back(), tp = n.theta_plus.back(), tm = n.theta_minus.back();
    n.boundary_mask.push_back(tp == 0.5 * s && tm == 0.5 * s);
    if (!in_theta_region(s, {tp, tm})) detail::config("spectra row outside 0 <= theta+ <= theta- <= S/2");
  }
  if (src.size() < 16) detail::config("spectra file needs at least 16 rows");
  return {Spectrum(std::move(src)), std::move(n)};
}

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::TargetInfeasible: return infeasible;
    case ErrorCode::InvalidConfig:
    case ErrorCode::DomainError:
    case ErrorCode::LengthMismatch:
    case ErrorCode::MaskExceedsSource:
    case ErrorCode::NonPositiveSpectrum:
    case ErrorCode::LagTooLarge:
    case ErrorCode::SignalTooShort: return config_error;
    default: return numeric_error;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-description rate-distortion solver and DSQ/DPCM simulator", "mdrdf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version);

  std::string spectrum_text = "cosine", out_path, csv_path;
  std::size_t grid = default_grid_size;
  double eps = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spectrum", spectrum_text, "flat:V | cosine | ar:a1,a2,.../V | json:PATH");
    sub->add_option("--grid", grid, "frequency grid size N");
    sub->add_option("--eps", eps, "spectral floor for sources with zeros (0 = off)");
    sub->add_option("--out", out_path, "write the JSON result here instead of stdout");
  };

  double lambda1 = 0.0, lambda2 = 0.0, ds = 0.0, dc = 0.0, tol = 1e-5;
  auto* solve = app.add_subcommand("solve", "evaluate the RDF at given multipliers");
  add_common(solve);
  solve->add_option("--lambda1", lambda1)->required();
  solve->add_option("--lambda2", lambda2)->required();
  solve->add_option("--csv", csv_path, "per-frequency spectra CSV");

  auto* fit = app.add_subcommand("fit", "find multipliers meeting distortion targets");
  add_common(fit);
  fit->add_option("--ds", ds, "side distortion target")->required();
  fit->add_option("--dc", dc, "central distortion target")->required();
  fit->add_option("--tol", tol, "distortion tolerance");
  fit->add_option("--csv", csv_path, "per-frequency spectra CSV");

  std::string range1, range2, scale = "log";
  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate over a grid of multipliers");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--lambda1", range1, "value or lo:hi:count")->required();
  sweep_cmd->add_option("--lambda2", range2, "value or lo:hi:count")->required();
  sweep_cmd->add_option("--scale", scale, "log | linear")->check(CLI::IsMember({"log", "linear"}));
  sweep_cmd->add_option("--csv", csv_path, "rows as CSV");

  std::string scheme = "codec", mode = "awgn", erasure = "none", mask_text, spectra_path;
  std::optional<double> sim_l1, sim_l2, sim_ds, sim_dc;
  SimConfig cfg;
  auto* simulate = app.add_subcommand("simulate", "run the time-domain coding scheme");
  add_common(simulate);
  simulate->add_option("--lambda1", sim_l1);
  simulate->add_option("--lambda2", sim_l2);
  simulate->add_option("--ds", sim_ds, "fit to this side distortion first");
  simulate->add_option("--dc", sim_dc, "fit to this central distortion first");
  simulate->add_option("--spectra", spectra_path, "use spectra from a solve CSV");
  simulate->add_option("--scheme", scheme, "codec | channel | sd")->check(CLI::IsMember({"codec", "channel", "sd"}));
  simulate->add_option("--mask", mask_text, "distortion mask for --scheme sd (spectrum syntax)");
  simulate->add_option("--mode", mode, "awgn | ecdq")->check(CLI::IsMember({"awgn", "ecdq"}));
  simulate->add_option("--samples", cfg.num_samples, "source samples");
  simulate->add_option("--seed", cfg.seed);
  simulate->add_option("--erasure", erasure, "none | lose_desc1 | lose_desc2")
      ->check(CLI::IsMember({"none", "lose_desc1", "lose_desc2"}));
  simulate->add_option("--welch", cfg.welch_segment, "Welch segment length");
  simulate->add_option("--warmup", cfg.warmup, "samples trimmed at each end");
  simulate->add_option("--predictor-order", cfg.predictor_order);
  simulate->add_option("--shaper-order", cfg.shaper_order);
  simulate->add_option("--taps", cfg.interpolator_taps, "half-band interpolator length");

  VerifyOptions vopt;
  auto* verify = app.add_subcommand("verify", "run the property suites");
  verify->add_option("--seed", vopt.seed);
  verify->add_option("--samples", vopt.samples, "random draws per algebraic suite");
  verify->add_option("--triples", vopt.oracle_triples, "brute-force comparisons");
  verify->add_option("--perturb-cubic", vopt.cubic_perturbation, "relative error injected into a0 (test hook)")
      ->group("");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForVersion& e) {
    out << tool_version << "\n";
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "mdrdf: " << e.what() << "\n";
    return config_error;
  }

  RunManifest manifest;
  manifest.command = "mdrdf";
  for (const auto& a : args) manifest.command += " " + a;
  manifest.timestamp = detail::iso_timestamp();

  auto emit = [&](const Json& j) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
      out << text;
    else
      detail::write_atomic(out_path, text);
  };

  try {
    auto load_source = [&]() {
      Spectrum s = build_spectrum(parse_spectrum_spec(spectrum_text, grid));
      double offset = 0.0;
      if (eps > 0.0) {
        auto r = regularize(s, eps);
        s = std::move(r.spectrum);
        offset = r.distortion_offset;
      } else if (!(s.min() > 0.0)) {
        detail::config("spectrum has zeros; pass --eps to regularize");
      }
      return std::pair{s, offset};
    };
    auto header = [&](const Spectrum& s, double offset) {
      Json j;
      j["manifest"] = to_json(manifest);
      j["spectrum"] = spectrum_text;
      j["grid_size"] = s.size();
      j["variance"] = s.variance();
      j["entropy_power"] = entropy_power(s);
      j["regularization_offset"] = offset;
      return j;
    };
    auto check_lambda = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) detail::config(std::string(name) + " must be positive");
    };

    if (*solve) {
      check_lambda(lambda1, "lambda1");
      check_lambda(lambda2, "lambda2");
      const auto [s, offset] = load_source();
      const RdfPoint p = evaluate(s, {lambda1, lambda2});
      Json j = header(s, offset);
      j.update(to_json(p));
      if (!csv_path.empty()) {
        detail::write_atomic(csv_path, spectra_csv(s, p));
        detail::write_atomic(csv_path + ".manifest.json", to_json(manifest).dump(2) + "\n");
        j["csv"] = csv_path;
      }
      emit(j);
      return ok;
    }

    if (*fit) {
      const auto [s, offset] = load_source();
      const RdfPoint p = fit_lambdas(s, {ds + offset, dc + offset}, tol);
      Json j = header(s, offset);
      j["target_d_side"] = ds;
      j["target_d_central"] = dc;
      j.update(to_json(p));
      if (!csv_path.empty()) {
        detail::write_atomic(csv_path, spectra_csv(s, p));
        detail::write_atomic(csv_path + ".manifest.json", to_json(manifest).dump(2) + "\n");
        j["csv"] = csv_path;
      }
      emit(j);
      return ok;
    }

    if (*sweep_cmd) {
      auto parse_range = [&](const std::string& text) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(part);
        if (parts.size() == 1) return std::vector<double>{detail::parse_double(parts[0])};
        if (parts.size() != 3) detail::config("range must be a value or lo:hi:count");
        const double lo = detail::parse_double(parts[0]), hi = detail::parse_double(parts[1]);
        const int count = static_cast<int>(detail::parse_double(parts[2]));
        return scale == "log" ? log_range(lo, hi, count) : linear_range(lo, hi, count);
      };
      SweepSpec spec{parse_range(range1), parse_range(range2)};
      for (double v : spec.lambda1) check_lambda(v, "lambda1");
      for (double v : spec.lambda2) check_lambda(v, "lambda2");
      const auto [s, offset] = load_source();
      const auto rows = sweep(s, spec);
      Json j = header(s, offset);
      Json arr = Json::array();
      for (const auto& p : rows) arr.push_back(to_json(p));
      j["rows"] = std::move(arr);
      if (!csv_path.empty()) {
        detail::write_atomic(csv_path, sweep_csv(rows));
        detail::write_atomic(csv_path + ".manifest.json", to_json(manifest).dump(2) + "\n");
        j["csv"] = csv_path;
      }
      emit(j);
      return ok;
    }

    if (*simulate) {
      manifest.seed = cfg.seed;
      cfg.mode = mode == "ecdq" ? NoiseMode::ecdq : NoiseMode::awgn;
      cfg.erasure = erasure == "lose_desc1" ? Erasure::lose_desc1
                    : erasure == "lose_desc2" ? Erasure::lose_desc2
                                              : Erasure::none;
      Json j;
      SimReport r;
      if (scheme == "sd") {
        if (mask_text.empty()) detail::config("--scheme sd needs --mask");
        const auto [s, offset] = load_source();
        const Spectrum mask = build_spectrum(parse_spectrum_spec(mask_text, s.size()));
        j = header(s, offset);
        j["scheme"] = scheme;
        j["target_mse"] = mask.variance();
        r = run_sd_mask_channel(s, mask, cfg);
      } else {
        Spectrum s;
        NoiseSpectra n;
        double offset = 0.0;
        std::optional<RdfPoint> point;
        if (!spectra_path.empty()) {
          auto loaded = read_spectra_csv(spectra_path);
          s = std::move(loaded.source);
          n = std::move(loaded.noise);
        } else {
          auto src = load_source();
          s = std::move(src.first);
          offset = src.second;
          if (sim_l1 && sim_l2) {
            check_lambda(*sim_l1, "lambda1");
            check_lambda(*sim_l2, "lambda2");
            point = evaluate(s, {*sim_l1, *sim_l2});
          } else if (sim_ds && sim_dc) {
            point = fit_lambdas(s, {*sim_ds + offset, *sim_dc + offset}, tol);
          } else {
            detail::config("simulate needs --lambda1/--lambda2, --ds/--dc or --spectra");
          }
          n = point->spectra;
        }
        j = header(s, offset);
        j["scheme"] = scheme;
        if (point) j["analytical"] = to_json(*point);
        r = scheme == "channel" ? run_md_channel(s, n, cfg) : run_md_codec(s, n, cfg);
      }
      j["mode"] = mode;
      j["erasure"] = erasure;
      j["samples"] = cfg.num_samples;
      j["report"] = to_json(r);
      emit(j);
      return ok;
    }

    if (*verify) {
      const auto results = run_verify(vopt);
      int passed = 0;
      for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        passed += r.passed ? 1 : 0;
      }
      out << "verify: " << passed << "/" << results.size() << " properties passed\n";
      return passed == static_cast<int>(results.size()) ? ok : verify_failed;
    }
  } catch (const Error& e) {
    err << "mdrdf: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "mdrdf: " << e.what() << "\n";
    return numeric_error;
  }
  return config_error;
}

}  // namespace mdrdf::cli
