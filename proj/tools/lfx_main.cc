// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/cli.hpp"

int main(int argc, char **argv) { return lfx::cli::run_cli(argc, argv); }
