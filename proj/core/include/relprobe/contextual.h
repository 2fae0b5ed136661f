#ifndef RELPROBE_CONTEXTUAL_H_
#define RELPROBE_CONTEXTUAL_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "relprobe/embeddings.h"

namespace relprobe {

struct TemplateVector {
  std::string template_id;
  Vector vector;
};

// Per-word sets of contextualized vectors, one per sentence template.
class ContextualVectorSet {
 public:
  ContextualVectorSet() = default;
  explicit ContextualVectorSet(std::string model) : model_(std::move(model)) {}

  const std::string& model() const { return model_; }
  void set_model(std::string model) { model_ = std::move(model); }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  // Throws InvalidArgumentError on dimension mismatch, non-finite values,
  // or a repeated (word, template_id).
  void Add(std::string word, std::string template_id, Vector vector);

  // nullptr if the word has no vectors.
  const std::vector<TemplateVector>* Find(std::string_view word) const;

  // Words in lexicographic order.
  std::vector<std::string> Words() const;

  // Free-form metadata carried through from the file header line.
  std::map<std::string, std::string> metadata;

 private:
  std::string model_;
  std::size_t dimension_ = 0;
  std::map<std::string, std::vector<TemplateVector>, std::less<>> words_;
};

// Componentwise mean of the vectors of one word.
// Throws InvalidArgumentError on an empty set.
Vector MeanPool(const std::vector<TemplateVector>& set);
Vector MeanPool(const std::vector<Vector>& set);

// Contextual vector interchange format (JSON Lines, UTF-8, LF or CRLF):
//
//   {"meta": {"model": "bert-base-uncased", "layer": "final", ...}}   optional, first line only
//   {"word": "toilet", "template_id": "this-is", "vector": [0.1, -2.5, ...]}
//
// Blank lines are ignored. Every vector must have the same length.
// Throws DataError naming the 1-based line of the first violation.
ContextualVectorSet ParseContextualVectors(std::string_view text);
ContextualVectorSet LoadContextualVectors(const std::filesystem::path& path);

// Writes records sorted by word then template id.
std::string SerializeContextualVectors(const ContextualVectorSet& set);

}  // namespace relprobe

#endif  // RELPROBE_CONTEXTUAL_H_
