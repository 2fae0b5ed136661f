#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.h"
#include "relprobe/contextual.h"
#include "relprobe/dataset.h"
#include "relprobe/embeddings.h"
#include "relprobe/evaluation.h"
#include "relprobe/probscores.h"
#include "relprobe/text.h"

namespace relprobe::cli {
namespace {

namespace fs = std::filesystem;

// Picks a kind from the extension; .jsonl files are sniffed for the field
// that distinguishes vectors from probabilities.
std::string DetectKind(const fs::path& path) {
  const std::string ext = AsciiLower(path.extension().string());
  if (ext == ".json") return "dataset";
  if (ext == ".tsv") return "freq";
  if (ext == ".jsonl") {
    const std::string text = ReadFile(path);
    if (text.find("\"vector\"") != std::string::npos) return "contextual";
    if (text.find("\"prob\"") != std::string::npos) return "probs";
    return "probs";
  }
  return "embeddings";
}

// Returns the number of violations found.
std::size_t ValidateOne(const fs::path& path, const std::string& kind,
                        std::ostream& out) {
  if (kind == "dataset") {
    const RelationDataset ds = LoadDataset(path);
    out << path.string() << ": dataset '" << ds.relation << "', "
        << ds.records.size() << " records, " << ds.Sources().size()
        << " sources, " << ds.targets.size() << " targets\n";
    return 0;
  }
  if (kind == "embeddings") {
    EmbeddingLoadStats stats;
    const EmbeddingStore store =
        LoadStaticEmbeddings(path, EmbeddingFormat::kAuto, nullptr, &stats);
    out << path.string() << ": embeddings, " << stats.rows_kept << " rows, dim "
        << store.dimension() << "\n";
    for (const auto& row : stats.skipped) {
      out << path.string() << ":" << row.line << ": " << row.reason << "\n";
    }
    if (stats.duplicate_rows > 0) {
      out << path.string() << ": " << stats.duplicate_rows
          << " duplicate token row(s)\n";
    }
    return stats.skipped.size() + stats.duplicate_rows;
  }
  if (kind == "contextual") {
    const ContextualVectorSet set = LoadContextualVectors(path);
    out << path.string() << ": contextual vectors, " << set.size()
        << " words, dim " << set.dimension() << "\n";
    return 0;
  }
  if (kind == "probs") {
    const ProbabilityTable table = LoadProbabilityTable(path);
    out << path.string() << ": probability table, " << table.size()
        << " records\n";
    return 0;
  }
  const auto freq = LoadFrequencies(path);
  out << path.string() << ": frequencies, " << freq.size() << " entries\n";
  return 0;
}

}  // namespace

int RunValidate(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"Check interchange files for schema violations",
               "relprobe validate"};
  std::vector<std::string> files;
  std::string kind = "auto";
  app.add_option("files", files, "files to check")->required();
  app.add_option("--kind", kind, "auto | dataset | embeddings | contextual | "
                                 "probs | freq")
      ->check(CLI::IsMember(
          {"auto", "dataset", "embeddings", "contextual", "probs", "freq"}));
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "relprobe validate: " << e.what() << "\n";
    return kUsageError;
  }

  std::size_t violations = 0;
  for (const auto& file : files) {
    try {
      const std::string k = kind == "auto" ? DetectKind(file) : kind;
      violations += ValidateOne(file, k, out);
    } catch (const std::exception& e) {
      err << file << ": " << e.what() << "\n";
      ++violations;
    }
  }
  return violations == 0 ? kOk : kDataError;
}

}  // namespace relprobe::cli
