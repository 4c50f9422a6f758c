// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lfx/amplitude.hpp"
#include "lfx/core.hpp"
#include "lfx/gabor.hpp"
#include "lfx/grad.hpp"
#include "lfx/io.hpp"
#include "lfx/oracle.hpp"
#include "lfx/phase.hpp"

namespace lfx::cli {

namespace {

FrontendConfig resolve_config(const std::string &config_path) {
  return config_path.empty() ? default_config() : io::load_config(config_path);
}

FrontendParams resolve_params(const std::string &params_path,
                              const FrontendConfig &config) {
  if (!params_path.empty()) return io::load_params(params_path);
  const double fmax = 0.4875 * config.sample_rate_hint;
  return init_params_mel(config, 60.0, fmax);
}

}  // namespace

int cmd_features(const FeaturesOptions &opt) {
  FrontendConfig config = resolve_config(opt.config_path);
  if (opt.features_set) {
    config.selected_features = io::parse_feature_list(opt.features_csv);
  }
  if (opt.pow_gate_set) {
    config.pow_gate = io::parse_feature_list(opt.pow_gate_csv);
  }
  validate_config(config);
  const FrontendParams params = resolve_params(opt.params_path, config);
  set_max_threads(opt.threads);

  const Waveform wave = io::read_wav(opt.input_wav);
  const FeatureBundle bundle = extract_features(wave, params, config);
  const io::FeatureContainer fc = io::container_from_bundle(bundle);
  io::write_container(opt.output_path, fc);
  std::printf("wrote %s: %u channels x %u bins x %u frames\n",
              opt.output_path.c_str(), fc.channel_count(), fc.bins, fc.frames);
  return kExitOk;
}

int cmd_render(const RenderOptions &opt) {
  const io::FeatureContainer fc = io::read_container(opt.container_path);
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + opt.out_dir + ": " +
                  ec.message());
  }
  for (std::uint32_t c = 0; c < fc.channel_count(); ++c) {
    const std::string path = opt.out_dir + "/" + fc.names[c] + ".pgm";
    io::write_pgm(path, fc.planes[c], fc.masks[c], fc.bins, fc.frames);
  }
  std::printf("wrote %u images to %s\n", fc.channel_count(),
              opt.out_dir.c_str());
  return kExitOk;
}

namespace {

/// Compact all-feature configuration used when gradcheck is run without an
/// explicit config: small enough that finite-difference steps stay inside
/// the wrap-boundary margin the preconditions demand.
FrontendConfig gradcheck_config() {
  FrontendConfig cfg = default_config();
  cfg.num_bins = 8;
  cfg.tap_half_width = 24;
  cfg.lowpass_stride = 6;
  cfg.selected_features = FeatureSet::all();
  cfg.pow_gate = FeatureSet::none();
  cfg.pow_gate.add(Feature::kPhs2);
  cfg.pow_gate.add(Feature::kIf1);
  return cfg;
}

/// Uniform frequency grid with one probe tone per bin. The rational bin
/// spacing (1/20 cycle per sample) makes the cross-bin phase steps cycle
/// through twenty values that all keep a wide margin from +-pi, so the
/// gradient-check preconditions hold by construction.
FrontendParams gradcheck_params(const FrontendConfig &cfg) {
  FrontendParams p = init_params_mel(cfg, 400.0, 7200.0);
  for (int m = 0; m < cfg.num_bins; ++m) {
    p.eta[m] = 0.06 + 0.05 * m;
    p.sigma_gabor[m] = 8.0;
  }
  return p;
}

Waveform gradcheck_wave(const FrontendParams &params) {
  Waveform wave;
  wave.sample_rate = 16000.0;
  wave.samples.assign(480, 0.0);
  for (std::size_t t = 0; t < wave.samples.size(); ++t) {
    double x = 0.0;
    for (std::size_t m = 0; m < params.eta.size(); ++m) {
      x += std::cos(2.0 * M_PI * params.eta[m] * static_cast<double>(t) +
                    0.15 * static_cast<double>(m));
    }
    wave.samples[t] = x;
  }
  return wave;
}

}  // namespace

int cmd_gradcheck(const GradcheckOptions &opt) {
  grad::set_vjp_fault_injection(opt.inject_fault);
  bool ok = true;

  std::printf("stage VJP checks (seed %llu):\n",
              static_cast<unsigned long long>(opt.seed));
  for (const grad::StageCheck &c : grad::stage_checks(opt.seed)) {
    std::printf("  [%s] %-24s rel err %.3e (tol %.0e)\n",
                c.pass ? "ok" : "FAIL", c.name.c_str(), c.rel_err, c.tol);
    ok = ok && c.pass;
  }

  const FrontendConfig config = opt.config_path.empty()
                                    ? gradcheck_config()
                                    : io::load_config(opt.config_path);
  const FrontendParams params = opt.params_path.empty()
                                    ? gradcheck_params(config)
                                    : io::load_params(opt.params_path);
  const Waveform wave = gradcheck_wave(params);

  std::printf("pipeline gradient check:\n");
  const grad::GradCheckReport report =
      grad::grad_check(wave, params, config, opt.seed, 1e-5);
  std::printf(
      "  smoothness: step margin %.3e, min magnitude %.3e, min base %.3e\n",
      report.diag.min_step_margin, report.diag.min_magnitude,
      report.diag.min_spcen_base);
  if (!report.preconditions_ok) {
    std::printf("  FAIL: preconditions violated, gradients not comparable\n");
    ok = false;
  } else {
    constexpr double kTol = 1e-3;
    for (const grad::GradCheckEntry &e : report.entries) {
      const bool pass = e.rel_err <= kTol;
      std::printf("  [%s] %-18s analytic % .9e numeric % .9e rel %.3e\n",
                  pass ? "ok" : "FAIL", e.param.c_str(), e.analytic, e.numeric,
                  e.rel_err);
      ok = ok && pass;
    }
    std::printf("  max rel err %.3e (tol %.0e)\n", report.max_rel_err, kTol);
  }

  std::printf("%s\n", ok ? "PASS" : "FAIL");
  grad::set_vjp_fault_injection(false);
  return ok ? kExitOk : kExitTolerance;
}

namespace {

Waveform oracle_wave(std::uint64_t seed) {
  // Two tones plus low-level noise from a splitmix-style generator;
  // deterministic for a given seed.
  Waveform wave;
  wave.sample_rate = 16000.0;
  wave.samples.assign(3000, 0.0);
  std::uint64_t state = seed * 0x9E3779B97F4A7C15ull + 1;
  auto next_unit = [&state]() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
  };
  const double phi1 = M_PI * next_unit();
  const double phi2 = M_PI * next_unit();
  for (std::size_t t = 0; t < wave.samples.size(); ++t) {
    const double td = static_cast<double>(t);
    wave.samples[t] = 0.8 * std::cos(2.0 * M_PI * 0.07 * td + phi1) +
                      0.5 * std::cos(2.0 * M_PI * 0.19 * td + phi2) +
                      0.05 * next_unit();
  }
  return wave;
}

}  // namespace

int cmd_oracle_compare(const OracleCompareOptions &opt) {
  FrontendConfig config = default_config();
  config.num_bins = 6;
  config.tap_half_width = 128;
  FrontendParams params = init_params_mel(config, 400.0, 7200.0);
  std::vector<double> freqs(config.num_bins);
  for (int k = 0; k < config.num_bins; ++k) {
    freqs[k] = 0.05 + 0.035 * k;
    params.eta[k] = freqs[k];
    params.sigma_gabor[k] = 30.0;
  }
  const Waveform wave = oracle_wave(opt.seed);

  const oracle::StftSpec spec = oracle::make_stft_spec(
      config.tap_half_width, 30.0, freqs, 1, PhaseConvention::kConv1);
  const oracle::RelationReport rel = oracle::verify_relations(wave, spec);
  const oracle::CompareReport cmp =
      oracle::compare_to_frontend(wave, params, config);

  bool ok = true;
  auto line = [&ok](const char *what, double value, double tol) {
    const bool pass = value <= tol;
    std::printf("  [%s] %-34s %.6e (tol %.0e)\n", pass ? "ok" : "FAIL", what,
                value, tol);
    ok = ok && pass;
  };
  std::printf("direct STFT oracle (seed %llu, %d bins, %zu samples):\n",
              static_cast<unsigned long long>(opt.seed), config.num_bins,
              wave.samples.size());
  line("filterbank vs oracle rel err", cmp.max_complex_rel_err, 1e-5);
  line("conv2 rotation dev (rad)", cmp.max_theta2_dev, 1e-9);
  line("anchor identity dev (rad)", rel.max_anchor_dev, 1e-9);
  line("IF identity dev (rad)", rel.max_if_dev, 1e-6);
  line("GD identity dev (rad)", rel.max_gd_dev, 1e-6);
  std::printf("  checked: %lld anchor, %lld IF, %lld GD elements above "
              "magnitude floor %.3e\n",
              static_cast<long long>(rel.checked_anchor),
              static_cast<long long>(rel.checked_if),
              static_cast<long long>(rel.checked_gd), rel.magnitude_floor);
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitTolerance;
}

int run_cli(int argc, const char *const *argv) {
  CLI::App app{"Learnable Gabor filterbank front-end with phase features"};
  app.require_subcommand(1);

  FeaturesOptions fopt;
  CLI::App *features = app.add_subcommand(
      "features", "Extract a feature container from a wav file");
  features->add_option("input", fopt.input_wav, "input wav path")->required();
  features->add_option("--out", fopt.output_path, "output container path")
      ->required();
  features->add_option("--config", fopt.config_path, "config text file");
  features->add_option("--params", fopt.params_path, "parameter text file");
  features->add_option("--features", fopt.features_csv,
                       "comma-separated feature subset (pow,phs1,phs2,if1,"
                       "if2,gd1,gd2)");
  features->add_option("--pow-gate", fopt.pow_gate_csv,
                       "features multiplied by the compressed power map");
  features->add_option("--threads", fopt.threads, "worker thread count")
      ->check(CLI::PositiveNumber);

  RenderOptions ropt;
  CLI::App *render = app.add_subcommand(
      "render", "Render a feature container to PGM images");
  render->add_option("input", ropt.container_path, "feature container path")
      ->required();
  render->add_option("--out", ropt.out_dir, "output directory")->required();

  GradcheckOptions gopt;
  CLI::App *gradcheck = app.add_subcommand(
      "gradcheck", "Verify parameter gradients against finite differences");
  gradcheck->add_option("--config", gopt.config_path, "config text file");
  gradcheck->add_option("--params", gopt.params_path, "parameter text file");
  gradcheck->add_option("--seed", gopt.seed, "probe direction seed");
  gradcheck
      ->add_flag("--inject-vjp-error", gopt.inject_fault,
                 "corrupt one VJP on purpose (harness self-test)")
      ->group("");  // hidden

  OracleCompareOptions oopt;
  CLI::App *oracle_cmd = app.add_subcommand(
      "oracle-compare", "Compare the filterbank against a direct STFT");
  oracle_cmd->add_option("--seed", oopt.seed, "test signal seed");

  try {
    app.parse(argc, argv);
    if (features->parsed()) {
      fopt.features_set = features->count("--features") > 0;
      fopt.pow_gate_set = features->count("--pow-gate") > 0;
      return cmd_features(fopt);
    }
    if (render->parsed()) return cmd_render(ropt);
    if (gradcheck->parsed()) return cmd_gradcheck(gopt);
    if (oracle_cmd->parsed()) return cmd_oracle_compare(oopt);
    return kExitUsage;
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const IoError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const FormatError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFormat;
  } catch (const std::invalid_argument &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFormat;
  }
}

}  // namespace lfx::cli
