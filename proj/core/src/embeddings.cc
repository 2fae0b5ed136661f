#include "relprobe/embeddings.h"

#include <charconv>
#include <cmath>
#include <fstream>

#include "relprobe/error.h"
#include "relprobe/text.h"

namespace relprobe {
namespace {

bool ParseDouble(std::string_view field, double* out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), *out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

bool ParseSize(std::string_view field, std::size_t* out) {
  if (field.empty()) return false;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), *out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

// Splits on ' ' and '\t', dropping empty pieces (tolerates trailing blanks).
void SplitFields(std::string_view line, std::vector<std::string_view>* out) {
  out->clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out->push_back(line.substr(start, i - start));
  }
}

class Parser {
 public:
  Parser(EmbeddingFormat format,
         const std::unordered_set<std::string>* vocab_filter,
         EmbeddingLoadStats* stats)
      : format_(format), filter_(vocab_filter), stats_(stats) {}

  void Line(std::string_view line) {
    ++line_number_;
    line = StripCr(line);
    if (line_number_ == 1 && line.size() >= 3 &&
        line.substr(0, 3) == "\xEF\xBB\xBF") {
      line.remove_prefix(3);
    }
    SplitFields(line, &fields_);
    if (line_number_ == 1 && format_ != EmbeddingFormat::kTextHeaderless) {
      std::size_t count = 0, dim = 0;
      const bool looks_like_header = fields_.size() == 2 &&
                                     ParseSize(fields_[0], &count) &&
                                     ParseSize(fields_[1], &dim);
      if (format_ == EmbeddingFormat::kTextWithHeader) {
        if (!looks_like_header || dim == 0) {
          throw DataError("line 1: expected header `count dim`");
        }
      }
      if (looks_like_header && dim > 0) {
        dimension_ = dim;
        return;
      }
    }
    if (fields_.empty()) return;  // blank line
    ++stats_->rows_read;

    const std::string_view token = fields_[0];
    const std::size_t values = fields_.size() - 1;
    if (dimension_ != 0 && values != dimension_) {
      Skip("expected " + std::to_string(dimension_) + " values, found " +
           std::to_string(values));
      return;
    }
    if (dimension_ != 0 && filter_ != nullptr &&
        !filter_->contains(std::string(token))) {
      ++stats_->rows_filtered;
      return;
    }
    row_.resize(values);
    bool finite = true;
    for (std::size_t i = 0; i < values; ++i) {
      if (!ParseDouble(fields_[i + 1], &row_[i])) {
        Skip("unparseable value in column " + std::to_string(i + 2));
        return;
      }
      finite = finite && std::isfinite(row_[i]);
    }
    if (values == 0) {
      Skip("no vector values");
      return;
    }
    if (!finite) {
      ++stats_->nonfinite_rows;
      Skip("non-finite value");
      return;
    }
    if (dimension_ == 0) dimension_ = values;
    if (filter_ != nullptr && !filter_->contains(std::string(token))) {
      ++stats_->rows_filtered;
      return;
    }
    if (store_.dimension() == 0) store_ = EmbeddingStore("", dimension_);
    if (store_.Insert(std::string(token), row_)) {
      ++stats_->rows_kept;
    } else {
      ++stats_->duplicate_rows;
    }
  }

  EmbeddingStore Finish() && { return std::move(store_); }

 private:
  void Skip(std::string reason) {
    stats_->skipped.push_back({line_number_, std::move(reason)});
  }

  EmbeddingFormat format_;
  const std::unordered_set<std::string>* filter_;
  EmbeddingLoadStats* stats_;
  std::size_t line_number_ = 0;
  std::size_t dimension_ = 0;
  std::vector<std::string_view> fields_;
  Vector row_;
  EmbeddingStore store_;
};

}  // namespace

bool EmbeddingStore::Insert(std::string token, Vector vector) {
  if (vector.size() != dimension_) {
    throw InvalidArgumentError("embedding for '" + token + "' has length " +
                               std::to_string(vector.size()) + ", expected " +
                               std::to_string(dimension_));
  }
  for (double x : vector) {
    if (!std::isfinite(x)) {
      throw InvalidArgumentError("embedding for '" + token +
                                 "' has a non-finite component");
    }
  }
  return entries_.try_emplace(std::move(token), std::move(vector)).second;
}

const Vector* EmbeddingStore::Find(std::string_view token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

EmbeddingStore ParseStaticEmbeddings(
    std::string_view text, EmbeddingFormat format,
    const std::unordered_set<std::string>* vocab_filter,
    EmbeddingLoadStats* stats) {
  EmbeddingLoadStats local;
  if (stats == nullptr) stats = &local;
  *stats = {};
  Parser parser(format, vocab_filter, stats);
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    parser.Line(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  EmbeddingStore store = std::move(parser).Finish();
  if (store.empty()) throw DataError("no embeddings loaded");
  return store;
}

EmbeddingStore LoadStaticEmbeddings(
    const std::filesystem::path& path, EmbeddingFormat format,
    const std::unordered_set<std::string>* vocab_filter,
    EmbeddingLoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings file: " + path.string());

  EmbeddingLoadStats local;
  if (stats == nullptr) stats = &local;
  *stats = {};
  Parser parser(format, vocab_filter, stats);
  std::string line;
  try {
    while (std::getline(in, line)) parser.Line(line);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (in.bad()) throw DataError("error reading " + path.string());
  EmbeddingStore store = std::move(parser).Finish();
  if (store.empty()) {
    throw DataError("no embeddings loaded from " + path.string());
  }
  store.set_name(path.stem().string());
  return store;
}

std::optional<Vector> LookupPhrase(const EmbeddingStore& store,
                                   std::string_view phrase, bool lowercase) {
  const std::string key =
      lowercase ? AsciiLower(Trim(phrase)) : std::string(Trim(phrase));
  if (key.empty()) return std::nullopt;
  if (const Vector* hit = store.Find(key)) return *hit;

  const std::vector<std::string> tokens = SplitWhitespace(key);
  if (tokens.size() > 1) {
    if (const Vector* hit = store.Find(UnderscoreJoin(key))) return *hit;
  }

  Vector sum(store.dimension(), 0.0);
  std::size_t found = 0;
  for (const auto& token : tokens) {
    if (const Vector* v = store.Find(token)) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
      ++found;
    }
  }
  if (found == 0) return std::nullopt;
  for (double& x : sum) x /= static_cast<double>(found);
  return sum;
}

std::vector<std::string> PhraseLookupKeys(std::string_view phrase,
                                          bool lowercase) {
  const std::string key =
      lowercase ? AsciiLower(Trim(phrase)) : std::string(Trim(phrase));
  std::vector<std::string> keys{key};
  std::vector<std::string> tokens = SplitWhitespace(key);
  if (tokens.size() > 1) {
    keys.push_back(UnderscoreJoin(key));
    for (auto& token : tokens) keys.push_back(std::move(token));
  }
  return keys;
}

}  // namespace relprobe
