#include "bisonet/tokenizer.hpp"

#include <fstream>
#include <stdexcept>

namespace bisonet {

namespace {

bool is_ascii_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Count code points, not bytes, so accented tokens measure correctly.
std::size_t codepoint_length(std::string_view token) {
  std::size_t n = 0;
  for (unsigned char c : token) {
    if ((c & 0xc0) != 0x80) ++n;  // skip UTF-8 continuation bytes
  }
  return n;
}

std::string strip_tags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_tag = false;
  for (char c : text) {
    if (c == '<') {
      in_tag = true;
      out.push_back(' ');
    } else if (c == '>') {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string s_stem(std::string token) {
  const auto ends_with = [&](std::string_view suffix) {
    return token.size() >= suffix.size() &&
           token.compare(token.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("ies")) {
    if (!ends_with("eies") && !ends_with("aies")) {
      token.replace(token.size() - 3, 3, "y");
    }
  } else if (ends_with("es")) {
    if (!ends_with("aes") && !ends_with("ees") && !ends_with("oes")) {
      token.pop_back();
    }
  } else if (ends_with("s")) {
    if (!ends_with("us") && !ends_with("ss")) {
      token.pop_back();
    }
  }
  return token;
}

Tokenizer::Tokenizer(TokenizerOptions options) : options_(std::move(options)) {
  if (options_.use_builtin_stopwords) {
    for (const auto& w : builtin_stopwords()) stopwords_.insert(w);
  }
  for (const auto& w : options_.extra_stopwords) stopwords_.insert(w);
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::string cleaned;
  if (options_.strip_html) {
    cleaned = strip_tags(text);
    text = cleaned;
  }

  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (current.empty()) return;
    std::string token = std::move(current);
    current.clear();
    if (codepoint_length(token) < options_.min_token_length) return;
    if (stopwords_.count(token)) return;
    if (options_.stem) {
      token = s_stem(std::move(token));
      if (codepoint_length(token) < options_.min_token_length) return;
    }
    tokens.push_back(std::move(token));
  };

  const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n;) {
    const unsigned char c = bytes[i];
    if (is_ascii_letter(c)) {
      current.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
      ++i;
    } else if (c == 0xc3 && i + 1 < n) {
      // Latin-1 supplement: fold A-grave..Thorn to lowercase (0xd7 is the
      // multiplication sign, not a letter).
      unsigned char c2 = bytes[i + 1];
      if (c2 >= 0x80 && c2 <= 0x9e && c2 != 0x97) c2 += 0x20;
      if (c2 != 0x97 && c2 != 0xb7) {
        current.push_back(static_cast<char>(c));
        current.push_back(static_cast<char>(c2));
      } else {
        flush();
      }
      i += 2;
    } else if (c >= 0x80) {
      // Other multi-byte sequences pass through as letter characters.
      current.push_back(static_cast<char>(c));
      ++i;
    } else {
      flush();
      ++i;
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options) {
  return Tokenizer(options).tokenize(text);
}

std::vector<std::string> load_stopword_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    words.push_back(line);
  }
  return words;
}

}  // namespace bisonet
