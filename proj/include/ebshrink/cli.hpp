#pragma once

// Command-line front end. `ebshrink <subcommand> ...`:
//   estimate       shrink the arms of each experiment in a CSV file
//   static-sim     bootstrap study of shrunk vs raw means (fig3-fig7 series)
//   bandit-sim     EB vs uniform prior Thompson sampling (fig8-fig10 series)
//   make-scenario  write a synthetic truth fixture
// `ebshrink --verify REPORT` checks a report's input digests and re-runs it.

#include <iosfwd>
#include <string>
#include <vector>

namespace ebshrink {

enum ExitCode : int {
  kExitOk = 0,
  kExitMismatch = 1,
  kExitInvalid = 2,
  kExitDegenerate = 3,
};

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ebshrink
