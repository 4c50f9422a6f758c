// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>

namespace lfx::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitFormat = 3,
  kExitTolerance = 4,
};

struct FeaturesOptions {
  std::string input_wav;
  std::string output_path;
  std::string config_path;    ///< empty: built-in defaults
  std::string params_path;    ///< empty: mel initialization
  std::string features_csv;   ///< override of selected_features when set
  std::string pow_gate_csv;   ///< override of pow_gate when set
  bool features_set = false;
  bool pow_gate_set = false;
  int threads = 1;
};

/// wav in, feature container out.
int cmd_features(const FeaturesOptions &opt);

struct RenderOptions {
  std::string container_path;
  std::string out_dir;
};

/// Feature container in, one PGM image per channel plane out.
int cmd_render(const RenderOptions &opt);

struct GradcheckOptions {
  std::string config_path;  ///< empty: compact built-in check config
  std::string params_path;  ///< empty: deterministic check parameters
  std::uint64_t seed = 1;
  bool inject_fault = false;  ///< test hook; forces a failing check
};

/// Stage VJP checks plus a full-pipeline gradient check against central
/// differences. Exits kExitTolerance when any comparison fails.
int cmd_gradcheck(const GradcheckOptions &opt);

struct OracleCompareOptions {
  std::uint64_t seed = 1;
};

/// Compares the filterbank against the direct-sum STFT oracle and checks
/// the cross-convention phase identities on a seeded tones-plus-noise
/// signal. Exits kExitTolerance when any deviation exceeds its bound.
int cmd_oracle_compare(const OracleCompareOptions &opt);

/// Full argv interface: parses subcommands and flags, maps exceptions to
/// exit codes (usage 1, I/O 2, format 3, tolerance 4).
int run_cli(int argc, const char *const *argv);

}  // namespace lfx::cli
