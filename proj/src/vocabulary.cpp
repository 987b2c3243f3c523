#include "bisonet/vocabulary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bisonet/hash.hpp"

namespace bisonet {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::int32_t> document_frequency)
    : tokens_(std::move(tokens)), document_frequency_(std::move(document_frequency)) {
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    ids_.emplace(tokens_[i], static_cast<std::int32_t>(i));
  }
}

std::int32_t Vocabulary::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? -1 : it->second;
}

std::uint64_t Vocabulary::content_hash() const {
  Fnv1a64 h;
  for (const auto& t : tokens_) {
    h.update(t);
    h.update("\x1f", 1);
  }
  return h.digest();
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                            const VocabularyOptions& options) {
  if (options.min_df < 1) throw std::invalid_argument("vocabulary: min_df must be >= 1");
  if (!(options.max_df_frac > 0.0) || options.max_df_frac > 1.0) {
    throw std::invalid_argument("vocabulary: max_df_frac must be in (0, 1]");
  }

  struct Counts {
    std::int32_t df = 0;
    std::int64_t cf = 0;
  };
  // std::map keeps tokens ordered, which makes the tie-break below a stable
  // sort key without a second pass.
  std::map<std::string, Counts> counts;
  for (const auto& doc : documents) {
    std::map<std::string, std::int32_t> per_doc;
    for (const auto& token : doc) ++per_doc[token];
    for (const auto& [token, n] : per_doc) {
      auto& c = counts[token];
      c.df += 1;
      c.cf += n;
    }
  }

  const double max_df = options.max_df_frac * static_cast<double>(documents.size());
  std::vector<std::pair<std::string, Counts>> kept;
  kept.reserve(counts.size());
  for (auto& [token, c] : counts) {
    if (c.df < options.min_df) continue;
    if (static_cast<double>(c.df) > max_df) continue;
    kept.emplace_back(token, c);
  }
  if (kept.empty()) {
    throw std::runtime_error("vocabulary: no token satisfies the document-frequency bounds");
  }

  // Descending corpus frequency; lexicographic order breaks ties (already
  // the relative order coming out of the map, stable_sort preserves it).
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second.cf > b.second.cf; });

  std::vector<std::string> tokens;
  std::vector<std::int32_t> df;
  tokens.reserve(kept.size());
  df.reserve(kept.size());
  for (auto& [token, c] : kept) {
    tokens.push_back(std::move(token));
    df.push_back(c.df);
  }
  return Vocabulary(std::move(tokens), std::move(df));
}

}  // namespace bisonet
