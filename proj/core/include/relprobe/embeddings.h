#ifndef RELPROBE_EMBEDDINGS_H_
#define RELPROBE_EMBEDDINGS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace relprobe {

using Vector = std::vector<double>;

// Word -> dense vector table for a static model. Immutable once loaded;
// concurrent reads are safe.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::string name, std::size_t dimension)
      : name_(std::move(name)), dimension_(dimension) {}

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Returns false (and leaves the store unchanged) if `token` is already
  // present. Throws InvalidArgumentError on a dimension mismatch or a
  // non-finite component.
  bool Insert(std::string token, Vector vector);

  const Vector* Find(std::string_view token) const;
  bool Contains(std::string_view token) const { return Find(token) != nullptr; }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::string name_;
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, Vector, StringHash, std::equal_to<>>
      entries_;
};

enum class EmbeddingFormat {
  kTextWithHeader,  // first line "count dim"
  kTextHeaderless,
  kAuto,            // header iff the first line is exactly two integers
};

// One rejected line of an embedding file.
struct SkippedRow {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct EmbeddingLoadStats {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_filtered = 0;   // token not in the vocabulary filter
  std::size_t duplicate_rows = 0;  // later occurrences are dropped
  std::size_t nonfinite_rows = 0;
  std::vector<SkippedRow> skipped;  // malformed / wrong length / non-finite
};

// Parses a word2vec/GloVe style text file: `token v1 ... vd` per line,
// single-space separated, optional `count dim` header. The dimension is
// taken from the header if present, otherwise from the first well-formed
// row. Throws DataError if the file is unreadable or nothing survives.
EmbeddingStore LoadStaticEmbeddings(
    const std::filesystem::path& path,
    EmbeddingFormat format = EmbeddingFormat::kAuto,
    const std::unordered_set<std::string>* vocab_filter = nullptr,
    EmbeddingLoadStats* stats = nullptr);

// Same as above over an in-memory buffer.
EmbeddingStore ParseStaticEmbeddings(
    std::string_view text, EmbeddingFormat format = EmbeddingFormat::kAuto,
    const std::unordered_set<std::string>* vocab_filter = nullptr,
    EmbeddingLoadStats* stats = nullptr);

// Resolves a word or multiword expression. Tries the phrase as given, then
// the underscore-joined form, then averages the vectors of the in-vocabulary
// component tokens. Returns nullopt if no component is known.
std::optional<Vector> LookupPhrase(const EmbeddingStore& store,
                                   std::string_view phrase,
                                   bool lowercase = true);

// Every token LookupPhrase may consult for `phrase`. Useful as a load-time
// vocabulary filter.
std::vector<std::string> PhraseLookupKeys(std::string_view phrase,
                                          bool lowercase = true);

}  // namespace relprobe

#endif  // RELPROBE_EMBEDDINGS_H_
