#ifndef RELPROBE_TOOLS_CLI_H_
#define RELPROBE_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace relprobe::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
};

// Entry point shared by main() and the tests. `args` excludes argv[0].
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int RunScore(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);
int RunValidate(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

// Thrown for flag combinations that cannot work together.
struct UsageError {
  std::string message;
};

}  // namespace relprobe::cli

#endif  // RELPROBE_TOOLS_CLI_H_
