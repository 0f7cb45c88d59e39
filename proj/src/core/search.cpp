#include "ereval/search.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include <unicode/unistr.h>

#include "ereval/error.hpp"
#include "ereval/text.hpp"

namespace ereval {
namespace {

// Tokens shorter than this only match exactly; one edit on a one- or
// two-letter token matches nearly everything.
constexpr std::size_t kMinFuzzyLength = 3;

std::vector<std::u32string> single_deletions(const std::u32string& token) {
  std::vector<std::u32string> out;
  if (token.size() < kMinFuzzyLength) return out;
  out.reserve(token.size());
  for (std::size_t i = 0; i < token.size(); ++i) {
    std::u32string v = token;
    v.erase(i, 1);
    if (out.empty() || out.back() != v) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::u32string to_code_points(std::string_view utf8) {
  icu::UnicodeString u =
      icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  std::u32string out(static_cast<std::size_t>(u.countChar32()), U'\0');
  UErrorCode status = U_ZERO_ERROR;
  u.toUTF32(reinterpret_cast<UChar32*>(out.data()), static_cast<int32_t>(out.size()), status);
  if (U_FAILURE(status) && status != U_STRING_NOT_TERMINATED_WARNING)
    fail(ErrorKind::kInvalidInput, "text is not valid UTF-8");
  return out;
}

std::size_t osa_distance(std::u32string_view a, std::u32string_view b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) cur[j] = std::min(cur[j], prev2[j - 2] + 1);
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

TokenIndex::TokenIndex(const AttributeTable& attrs) : records_(attrs.records()) {
  std::unordered_map<std::u32string, std::uint32_t> ids;
  for (std::uint32_t slot = 0; slot < records_.size(); ++slot) {
    for (const auto& tok : text::tokens(attrs.label(records_[slot]))) {
      std::u32string cp = to_code_points(tok);
      auto [it, inserted] = ids.emplace(cp, static_cast<std::uint32_t>(vocabulary_.size()));
      if (inserted) {
        vocabulary_.push_back(cp);
        postings_.emplace_back();
        deletions_[cp].push_back(it->second);
        for (auto& v : single_deletions(cp)) deletions_[std::move(v)].push_back(it->second);
      }
      auto& post = postings_[it->second];
      if (post.empty() || post.back() != slot) post.push_back(slot);
    }
  }
}

std::vector<TokenIndex::Hit> TokenIndex::search(std::string_view query) const {
  const auto query_tokens = text::tokens(query);
  if (query_tokens.empty()) fail(ErrorKind::kInvalidInput, "search query is empty");

  std::unordered_set<std::u32string> seen;
  std::unordered_map<std::uint32_t, std::size_t> matched;  // record slot -> query tokens matched
  for (const auto& qt : query_tokens) {
    std::u32string q = to_code_points(qt);
    if (!seen.insert(q).second) continue;
    std::vector<std::u32string> keys{q};
    for (auto& v : single_deletions(q)) keys.push_back(std::move(v));

    std::unordered_set<std::uint32_t> tokens;
    for (const auto& key : keys) {
      auto it = deletions_.find(key);
      if (it == deletions_.end()) continue;
      for (std::uint32_t t : it->second) {
        const auto& cand = vocabulary_[t];
        if (cand == q || (q.size() >= kMinFuzzyLength && cand.size() >= kMinFuzzyLength && osa_distance(q, cand) <= 1))
          tokens.insert(t);
      }
    }
    std::unordered_set<std::uint32_t> slots;
    for (std::uint32_t t : tokens) slots.insert(postings_[t].begin(), postings_[t].end());
    for (std::uint32_t s : slots) ++matched[s];
  }

  std::vector<Hit> hits;
  hits.reserve(matched.size());
  for (const auto& [slot, count] : matched) hits.push_back({records_[slot], count});
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.matched_tokens != b.matched_tokens) return a.matched_tokens > b.matched_tokens;
    return a.record < b.record;
  });
  return hits;
}

std::vector<std::string> search_records(const AttributeTable& attrs, std::string_view query, std::size_t limit) {
  TokenIndex index(attrs);
  std::vector<std::string> out;
  for (auto& hit : index.search(query)) {
    if (out.size() >= limit) break;
    out.push_back(std::move(hit.record));
  }
  return out;
}

}  // namespace ereval
