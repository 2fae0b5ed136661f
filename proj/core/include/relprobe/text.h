#ifndef RELPROBE_TEXT_H_
#define RELPROBE_TEXT_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace relprobe {

// Splits on runs of ASCII whitespace; no empty pieces.
std::vector<std::string> SplitWhitespace(std::string_view text);

// ASCII-only lowercasing; non-ASCII UTF-8 bytes pass through unchanged.
std::string AsciiLower(std::string_view text);

std::string_view Trim(std::string_view text);

// Joins the whitespace-separated tokens of `phrase` with '_'.
std::string UnderscoreJoin(std::string_view phrase);

// Strips a trailing '\r' so LF and CRLF files read the same.
inline std::string_view StripCr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// Reads a whole file; throws DataError if it cannot be opened.
std::string ReadFile(const std::filesystem::path& path);

// Shortest decimal text that parses back to exactly `value`.
std::string FormatDouble(double value);

}  // namespace relprobe

#endif  // RELPROBE_TEXT_H_
