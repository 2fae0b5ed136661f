#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.h"
#include "relprobe/classifiers.h"
#include "relprobe/contextual.h"
#include "relprobe/dataset.h"
#include "relprobe/embeddings.h"
#include "relprobe/error.h"
#include "relprobe/evaluation.h"
#include "relprobe/measures.h"
#include "relprobe/probscores.h"
#include "relprobe/report.h"
#include "relprobe/text.h"

namespace relprobe::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

enum class Needs { kVectors, kProbs };

struct MethodInfo {
  std::string_view name;
  Needs needs;
};

constexpr MethodInfo kMethods[] = {
    {"cos", Needs::kVectors},   {"dist", Needs::kVectors},
    {"kend", Needs::kVectors},  {"pear", Needs::kVectors},
    {"spear", Needs::kVectors}, {"maha", Needs::kVectors},
    {"knn", Needs::kVectors},   {"svm", Needs::kVectors},
    {"ffn", Needs::kVectors},   {"m-s", Needs::kProbs},
    {"m-t", Needs::kProbs},     {"p-s", Needs::kProbs},
    {"p-s-l", Needs::kProbs},   {"p-t", Needs::kProbs},
    {"p-t-l", Needs::kProbs},
};

const MethodInfo* FindMethod(std::string_view name) {
  for (const auto& m : kMethods) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

struct ScoreOptions {
  std::string dataset;
  std::string embeddings;
  std::vector<std::string> contextual;
  std::string probs;
  std::string embeddings_format = "auto";
  bool keep_case = false;
  std::string model;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  int permutations = kDefaultPermutations;
  int repeats = 100;
  std::string out;
  std::string format = "csv";
  bool emit_heatmaps = false;
  std::string freq;
  bool allow_drop = false;
  ClassifierSpec classifier;
};

// FNV-1a over the file contents, for the manifest. Large files (full
// embedding dumps) are identified by size only.
std::string Fingerprint(const fs::path& path) {
  constexpr std::uintmax_t kMaxHashed = 64u << 20;
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) return "unreadable";
  if (size > kMaxHashed) return "size:" + std::to_string(size);
  const std::string data = ReadFile(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

std::string SafeFileName(std::string name) {
  for (char& c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
          c == '_' || c == '.')) {
      c = '_';
    }
  }
  return name;
}

// The representation every vector method reads from.
struct Representation {
  std::optional<EmbeddingStore> store;
  std::optional<ContextualVectorSet> sources;
  std::optional<ContextualVectorSet> targets;
  std::optional<ProbabilityTable> probs;
  std::string model;
};

std::optional<Measure> MeasureFor(std::string_view method) {
  if (method == "cos") return Measure::kCosine;
  if (method == "dist") return Measure::kDistanceCorrelation;
  if (method == "kend") return Measure::kKendall;
  if (method == "pear") return Measure::kPearson;
  if (method == "spear") return Measure::kSpearman;
  if (method == "maha") return Measure::kNegMahalanobis;
  return std::nullopt;
}

std::optional<ClassifierKind> ClassifierFor(std::string_view method) {
  if (method == "knn") return ClassifierKind::kKnn;
  if (method == "svm") return ClassifierKind::kLinearSvm;
  if (method == "ffn") return ClassifierKind::kFfn;
  return std::nullopt;
}

// Source vectors for the classifiers, aligned with dataset.Sources().
std::vector<std::optional<Vector>> SourceVectors(const Representation& rep,
                                                 const RelationDataset& ds,
                                                 bool lowercase) {
  std::vector<std::optional<Vector>> out;
  for (const auto& source : ds.Sources()) {
    if (rep.store) {
      out.push_back(LookupPhrase(*rep.store, source, lowercase));
    } else {
      const auto* set = rep.sources->Find(source);
      out.push_back(set ? std::optional<Vector>(MeanPool(*set)) : std::nullopt);
    }
  }
  return out;
}

// Either a matrix to evaluate, or nullopt when the method legitimately has
// nothing to score (CLM predict-target without prompts).
std::optional<AssociationMatrix> ComputeMethod(const std::string& method,
                                               const Representation& rep,
                                               const RelationDataset& ds,
                                               const ScoreOptions& opt,
                                               std::vector<std::string>* notes) {
  if (auto measure = MeasureFor(method)) {
    MissingWords missing;
    AssociationMatrix m =
        rep.store ? BuildAssociationMatrix(*rep.store, ds, *measure,
                                           !opt.keep_case, &missing)
                  : BuildAssociationMatrix(*rep.sources, *rep.targets, ds,
                                           *measure, &missing);
    for (const auto& w : missing.sources) {
      notes->push_back(method + ": no vector for source '" + w + "'");
    }
    for (const auto& w : missing.targets) {
      notes->push_back(method + ": no vector for target '" + w + "'");
    }
    return m;
  }
  if (auto kind = ClassifierFor(method)) {
    ClassifierSpec spec = opt.classifier;
    spec.kind = *kind;
    spec.seed = opt.seed;
    const auto vectors = SourceVectors(rep, ds, !opt.keep_case);
    const auto sources = ds.Sources();
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (!vectors[i]) {
        notes->push_back(method + ": no vector for source '" + sources[i] + "'");
      }
    }
    LooResult loo = LooAssociation(spec, MakeLabeledVectors(ds, vectors),
                                   opt.repeats);
    return std::move(loo.matrix);
  }
  const auto& table = *rep.probs;
  if (method == "m-s") return MlmAssociation(table, ds, MaskDirection::kMaskSource);
  if (method == "m-t") return MlmAssociation(table, ds, MaskDirection::kMaskTarget);
  const ClmDirection dir = method.starts_with("p-s") ? ClmDirection::kPredictSource
                                                     : ClmDirection::kPredictTarget;
  const ClmWeighting weighting =
      method.ends_with("-l") ? ClmWeighting::kLogPriorRatio : ClmWeighting::kRaw;
  auto m = ClmAssociation(table, ds, dir, weighting);
  if (!m) notes->push_back(method + ": no clm_next records; column left empty");
  return m;
}

void ParseFlags(CLI::App& app, ScoreOptions& opt) {
  app.add_option("--dataset", opt.dataset, "relation dataset (JSON)")
      ->required();
  auto* emb = app.add_option("--embeddings", opt.embeddings,
                             "static embedding text file");
  auto* ctx = app.add_option("--contextual", opt.contextual,
                             "contextual vector files: <sources> <targets>")
                  ->expected(2);
  auto* probs = app.add_option("--probs", opt.probs, "probability table (JSONL)");
  emb->excludes(ctx)->excludes(probs);
  ctx->excludes(probs);
  app.add_option("--embeddings-format", opt.embeddings_format,
                 "auto | header | headerless")
      ->check(CLI::IsMember({"auto", "header", "headerless"}));
  app.add_flag("--keep-case", opt.keep_case,
               "do not lowercase phrases before embedding lookup");
  app.add_option("--model", opt.model, "model label used in reports");
  app.add_option("--method", opt.methods,
                 "comma-separated: cos,dist,kend,pear,spear,maha,m-s,m-t,"
                 "p-s,p-s-l,p-t,p-t-l,knn,svm,ffn")
      ->required()
      ->delimiter(',');
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--permutations", opt.permutations,
                 "permutations per significance test")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--repeats", opt.repeats,
                 "leave-one-out repetitions for classifiers")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", opt.out,
                 "output directory (default: $RELPROBE_OUT or ./relprobe-out)");
  app.add_option("--format", opt.format, "csv | markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));
  app.add_flag("--emit-heatmaps", opt.emit_heatmaps, "write SVG heatmaps");
  app.add_option("--freq", opt.freq, "word frequency file (phrase<TAB>value)");
  app.add_flag("--allow-drop", opt.allow_drop,
               "prune sources with missing association cells");
  app.add_option("--knn-k", opt.classifier.knn_k, "KNN neighbours");
  app.add_option("--ffn-hidden", opt.classifier.ffn_hidden, "FFN hidden units");
  app.add_option("--ffn-epochs", opt.classifier.ffn_epochs, "FFN epochs");
  app.add_option("--ffn-lr", opt.classifier.ffn_learning_rate,
                 "FFN Adam learning rate");
  app.add_option("--svm-epochs", opt.classifier.svm_epochs, "SVM epochs");
  app.add_option("--svm-reg", opt.classifier.svm_reg, "SVM L2 strength");
}

void CheckCompatibility(const ScoreOptions& opt) {
  const bool vectors = !opt.embeddings.empty() || !opt.contextual.empty();
  const bool probs = !opt.probs.empty();
  if (!vectors && !probs) {
    throw UsageError{
        "one of --embeddings, --contextual or --probs is required"};
  }
  std::set<std::string> seen;
  for (const auto& method : opt.methods) {
    const MethodInfo* info = FindMethod(method);
    if (info == nullptr) throw UsageError{"unknown method '" + method + "'"};
    if (!seen.insert(method).second) {
      throw UsageError{"method '" + method + "' listed twice"};
    }
    if (info->needs == Needs::kProbs && !probs) {
      throw UsageError{"method '" + method + "' needs --probs; it cannot run on " +
                       (opt.embeddings.empty() ? "--contextual vectors"
                                               : "--embeddings")};
    }
    if (info->needs == Needs::kVectors && !vectors) {
      throw UsageError{"method '" + method +
                       "' needs --embeddings or --contextual; it cannot run "
                       "on --probs"};
    }
  }
}

Representation LoadRepresentation(const ScoreOptions& opt,
                                  const RelationDataset& ds) {
  Representation rep;
  if (!opt.embeddings.empty()) {
    std::unordered_set<std::string> vocab;
    auto add = [&](const std::string& phrase) {
      for (auto& key : PhraseLookupKeys(phrase, !opt.keep_case)) {
        vocab.insert(std::move(key));
      }
    };
    for (const auto& s : ds.Sources()) add(s);
    for (const auto& t : ds.targets) add(t);
    const EmbeddingFormat format =
        opt.embeddings_format == "header"       ? EmbeddingFormat::kTextWithHeader
        : opt.embeddings_format == "headerless" ? EmbeddingFormat::kTextHeaderless
                                                : EmbeddingFormat::kAuto;
    rep.store = LoadStaticEmbeddings(opt.embeddings, format, &vocab);
    rep.model = rep.store->name();
  } else if (!opt.contextual.empty()) {
    rep.sources = LoadContextualVectors(opt.contextual[0]);
    rep.targets = LoadContextualVectors(opt.contextual[1]);
    rep.model = rep.sources->model();
  } else {
    rep.probs = LoadProbabilityTable(opt.probs);
    rep.model = rep.probs->model();
  }
  if (!opt.model.empty()) {
    rep.model = opt.model;
    if (rep.store) rep.store->set_name(opt.model);
    if (rep.sources) rep.sources->set_model(opt.model);
    if (rep.probs) rep.probs->set_model(opt.model);
  }
  return rep;
}

ordered_json Manifest(const ScoreOptions& opt, const fs::path& out_dir,
                      const std::vector<std::string>& notes,
                      const std::vector<std::string>& files) {
  ordered_json m;
  m["tool"] = "relprobe";
  m["version"] = RELPROBE_VERSION;
  m["command"] = "score";
  ordered_json inputs;
  auto input = [&](const std::string& role, const std::string& path) {
    inputs.push_back({{"role", role}, {"path", path},
                      {"fingerprint", Fingerprint(path)}});
  };
  input("dataset", opt.dataset);
  if (!opt.embeddings.empty()) input("embeddings", opt.embeddings);
  if (!opt.contextual.empty()) {
    input("contextual-sources", opt.contextual[0]);
    input("contextual-targets", opt.contextual[1]);
  }
  if (!opt.probs.empty()) input("probs", opt.probs);
  if (!opt.freq.empty()) input("freq", opt.freq);
  m["inputs"] = inputs;
  m["flags"] = {
      {"methods", opt.methods},
      {"seed", opt.seed},
      {"permutations", opt.permutations},
      {"repeats", opt.repeats},
      {"format", opt.format},
      {"emit_heatmaps", opt.emit_heatmaps},
      {"allow_drop", opt.allow_drop},
      {"keep_case", opt.keep_case},
      {"embeddings_format", opt.embeddings_format},
      {"model", opt.model},
  };
  m["classifier"] = {
      {"knn_k", opt.classifier.knn_k},
      {"ffn_hidden", opt.classifier.ffn_hidden},
      {"ffn_epochs", opt.classifier.ffn_epochs},
      {"ffn_learning_rate", opt.classifier.ffn_learning_rate},
      {"svm_epochs", opt.classifier.svm_epochs},
      {"svm_reg", opt.classifier.svm_reg},
      {"standardize", opt.classifier.standardize},
  };
  m["settings"] = {
      {"gold_fill", "zeros"},
      {"template_aggregation", "mean"},
      {"log_base", "e"},
      {"significance", 0.01},
      {"frequency_significance", 0.1},
      {"conc_flatten", "column-major"},
  };
  m["notes"] = notes;
  m["outputs"] = files;
  (void)out_dir;
  return m;
}

std::string Timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int RunScore(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Score association methods against a relation dataset",
               "relprobe score"};
  ScoreOptions opt;
  ParseFlags(app, opt);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "relprobe score: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    CheckCompatibility(opt);
    if (opt.out.empty()) {
      const char* env = std::getenv("RELPROBE_OUT");
      opt.out = env != nullptr && *env != '\0' ? env : "relprobe-out";
    }

    const RelationDataset ds = LoadDataset(opt.dataset);
    const Representation rep = LoadRepresentation(opt, ds);
    std::optional<std::map<std::string, double>> freq;
    if (!opt.freq.empty()) freq = LoadFrequencies(opt.freq);

    const fs::path out_dir(opt.out);
    fs::create_directories(out_dir / "assoc");
    if (opt.emit_heatmaps) fs::create_directories(out_dir / "heatmaps");

    const TableFormat format =
        opt.format == "markdown" ? TableFormat::kMarkdown : TableFormat::kCsv;
    const std::string ext = opt.format == "markdown" ? ".md" : ".csv";
    const GoldMatrix gold = ToGoldMatrix(ds);
    EvaluationOptions eval{opt.permutations, opt.seed, opt.allow_drop};

    std::vector<ScoreReport> reports, freq_reports;
    std::vector<std::string> notes, files;
    for (const auto& method : opt.methods) {
      auto matrix = ComputeMethod(method, rep, ds, opt, &notes);
      if (!matrix) {
        ScoreReport empty;
        empty.model = rep.model;
        empty.method = method;
        empty.relation = ds.relation;
        empty.targets = ds.targets;
        reports.push_back(std::move(empty));
        continue;
      }
      matrix->model = rep.model;
      matrix->method = method;
      ScoreReport report = Evaluate(*matrix, ds, eval);
      for (const auto& s : report.dropped_sources) {
        notes.push_back(method + ": dropped source '" + s +
                        "' (missing association cells)");
      }
      reports.push_back(std::move(report));

      const std::string stem = SafeFileName(method);
      WriteFile(out_dir / "assoc" / (stem + ".csv"), AssociationToCsv(*matrix));
      files.push_back("assoc/" + stem + ".csv");
      if (opt.emit_heatmaps) {
        EmitHeatmap(*matrix, gold, out_dir / "heatmaps" / (stem + ".svg"));
        files.push_back("heatmaps/" + stem + ".svg");
      }
      if (freq) {
        freq_reports.push_back(FrequencyCorrelation(*matrix, *freq, ds, eval));
      }
    }

    WriteFile(out_dir / ("scores" + ext), EmitScoreTable(reports, format));
    files.push_back("scores" + ext);
    if (freq) {
      WriteFile(out_dir / ("frequency_scores" + ext),
                EmitScoreTable(freq_reports, format, 0.1));
      files.push_back("frequency_scores" + ext);
    }
    std::sort(files.begin(), files.end());
    WriteFile(out_dir / "manifest.json",
              Manifest(opt, out_dir, notes, files).dump(2) + "\n");
    WriteFile(out_dir / "run_time.txt", Timestamp() + "\n");

    for (const auto& note : notes) err << "relprobe score: warning: " << note << "\n";
    out << EmitScoreTable(reports, format);
    return kOk;
  } catch (const UsageError& e) {
    err << "relprobe score: " << e.message << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "relprobe score: error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace relprobe::cli
