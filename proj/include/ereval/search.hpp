#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ereval/core_model.hpp"

namespace ereval {

// Optimal string alignment distance (Levenshtein plus adjacent
// transpositions) over Unicode code points.
std::size_t osa_distance(std::u32string_view a, std::u32string_view b);
std::u32string to_code_points(std::string_view utf8);

// Inverted index over case-folded label tokens. A query token matches an
// indexed token within one edit (insertion, deletion, substitution or
// adjacent transposition); candidates come from a deletion-neighbourhood
// table so lookups never scan the vocabulary.
class TokenIndex {
 public:
  TokenIndex() = default;
  explicit TokenIndex(const AttributeTable& attrs);

  struct Hit {
    std::string record;
    std::size_t matched_tokens = 0;
  };

  // Every record matching at least one query token, by matched-token count
  // (descending) then record id. Throws on a query without tokens.
  std::vector<Hit> search(std::string_view query) const;

  std::size_t vocabulary_size() const { return vocabulary_.size(); }

 private:
  std::vector<std::u32string> vocabulary_;
  std::vector<std::vector<std::uint32_t>> postings_;  // token -> record slots
  std::unordered_map<std::u32string, std::vector<std::uint32_t>> deletions_;  // variant -> tokens
  std::vector<std::string> records_;
};

// Top `limit` record ids for `query` (see TokenIndex::search).
std::vector<std::string> search_records(const AttributeTable& attrs, std::string_view query, std::size_t limit);

}  // namespace ereval
