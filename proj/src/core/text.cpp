#include "ereval/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "ereval/error.hpp"

namespace ereval::text {
namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) fail(ErrorKind::kIo, "ICU NFC normalizer unavailable");
  return *n;
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

icu::UnicodeString trim_ws(const icu::UnicodeString& u) {
  int32_t begin = 0;
  int32_t end = u.length();
  while (begin < end && u_isUWhiteSpace(u.char32At(begin))) begin = u.moveIndex32(begin, 1);
  while (end > begin) {
    int32_t prev = u.moveIndex32(end, -1);
    if (!u_isUWhiteSpace(u.char32At(prev))) break;
    end = prev;
  }
  return icu::UnicodeString(u, begin, end - begin);
}

}  // namespace

std::string normalize_label(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString normalized = nfc().normalize(u, status);
  if (U_FAILURE(status)) fail(ErrorKind::kInvalidInput, "label is not valid UTF-8: " + std::string(raw));
  return to_utf8(trim_ws(normalized));
}

std::string case_fold(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase();
  icu::UnicodeString normalized = nfc().normalize(u, status);
  if (U_FAILURE(status)) fail(ErrorKind::kInvalidInput, "text is not valid UTF-8");
  return to_utf8(normalized);
}

std::vector<std::string> tokens(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase();
  u = nfc().normalize(u, status);
  if (U_FAILURE(status)) fail(ErrorKind::kInvalidInput, "text is not valid UTF-8");

  std::vector<std::string> out;
  int32_t i = 0;
  const int32_t n = u.length();
  while (i < n) {
    while (i < n && u_isUWhiteSpace(u.char32At(i))) i = u.moveIndex32(i, 1);
    int32_t start = i;
    while (i < n && !u_isUWhiteSpace(u.char32At(i))) i = u.moveIndex32(i, 1);
    if (i > start) out.push_back(to_utf8(icu::UnicodeString(u, start, i - start)));
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) next = s.size();
    if (next > pos) out.emplace_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

}  // namespace ereval::text
