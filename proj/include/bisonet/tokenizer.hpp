#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace bisonet {

struct TokenizerOptions {
  // Tokens shorter than this many code points are dropped.
  std::size_t min_token_length = 3;
  bool use_builtin_stopwords = true;
  // Extra stopwords, e.g. loaded from a file; merged with the builtin list.
  std::vector<std::string> extra_stopwords = {};
  // Remove <...> tag spans before tokenizing (idea exports often carry HTML).
  bool strip_html = true;
  // Light plural stemming (-ies/-es/-s rules). Off by default.
  bool stem = false;

  bool operator==(const TokenizerOptions&) const = default;
};

// Turns free text into lowercase letter-run tokens:
//   * <...> spans removed first when strip_html is set
//   * a token is a maximal run of letters; digits/punctuation separate
//   * ASCII is lowercased; Latin-1 uppercase accents are folded; other
//     multi-byte UTF-8 sequences pass through intact
//   * short tokens and stopwords are dropped, then the optional stemmer runs
// Pure: identical input and options always give identical output.
class Tokenizer {
 public:
  explicit Tokenizer(TokenizerOptions options = {});

  std::vector<std::string> tokenize(std::string_view text) const;

  const TokenizerOptions& options() const { return options_; }

 private:
  TokenizerOptions options_;
  std::unordered_set<std::string> stopwords_;
};

// One-off convenience wrapper around Tokenizer.
std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {});

const std::vector<std::string>& builtin_stopwords();

// One token per line, UTF-8; '#' lines and blank lines ignored.
std::vector<std::string> load_stopword_file(const std::string& path);

// Harman S-stemmer: -ies -> -y, -es -> -e, -s dropped, with the usual guards.
std::string s_stem(std::string token);

}  // namespace bisonet
