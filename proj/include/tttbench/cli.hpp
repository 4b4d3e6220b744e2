#pragma once

namespace tttbench {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerification = 1,
  kExitConfig = 2,
  kExitNetwork = 3,
  kExitData = 4,
  kExitIo = 5,
};

/// Entry point of the `tttbench` binary.
int run_cli(int argc, const char* const* argv);

}  // namespace tttbench
