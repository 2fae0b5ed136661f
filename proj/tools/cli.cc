#include "cli.h"

#include <ostream>

namespace relprobe::cli {

namespace {

constexpr const char* kUsage =
    "usage: relprobe <command> [options]\n"
    "\n"
    "commands:\n"
    "  score      score association methods against a relation dataset\n"
    "  validate   check interchange files for schema violations\n"
    "\n"
    "Run `relprobe <command> --help` for command options.\n";

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  if (args.empty() || args[0] == "-h" || args[0] == "--help") {
    (args.empty() ? err : out) << kUsage;
    return args.empty() ? kUsageError : kOk;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  if (args[0] == "score") return RunScore(rest, out, err);
  if (args[0] == "validate") return RunValidate(rest, out, err);
  if (args[0] == "--version") {
    out << "relprobe " << RELPROBE_VERSION << "\n";
    return kOk;
  }
  err << "relprobe: unknown command '" << args[0] << "'\n" << kUsage;
  return kUsageError;
}

}  // namespace relprobe::cli
