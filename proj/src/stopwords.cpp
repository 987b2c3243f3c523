#include "bisonet/tokenizer.hpp"

namespace bisonet {

// Snowball-style English list, plus the stems that contractions leave behind
// once apostrophes split tokens ("don't" -> "don" + "t").
const std::vector<std::string>& builtin_stopwords() {
  static const std::vector<std::string> words = {
      "about",   "above",   "after",   "again",   "against", "all",
      "and",     "any",     "are",     "aren",    "because", "been",
      "before",  "being",   "below",   "between", "both",    "but",
      "can",     "cannot",  "could",   "couldn",  "did",     "didn",
      "does",    "doesn",   "doing",   "don",     "down",    "during",
      "each",    "few",     "for",     "from",    "further", "had",
      "hadn",    "has",     "hasn",    "have",    "haven",   "having",
      "her",     "here",    "hers",    "herself", "him",     "himself",
      "his",     "how",     "into",    "isn",     "its",     "itself",
      "just",    "let",     "may",     "might",   "more",    "most",
      "must",    "mustn",   "myself",  "nor",     "not",     "now",
      "off",     "once",    "only",    "other",   "ought",   "our",
      "ours",    "ourselves", "out",   "over",    "own",     "same",
      "shall",   "shan",    "she",     "should",  "shouldn", "some",
      "such",    "than",    "that",    "the",     "their",   "theirs",
      "them",    "themselves", "then", "there",   "these",   "they",
      "this",    "those",   "through", "too",     "under",   "until",
      "very",    "was",     "wasn",    "were",    "weren",   "what",
      "when",    "where",   "which",   "while",   "who",     "whom",
      "why",     "will",    "with",    "won",     "would",   "wouldn",
      "you",     "your",    "yours",   "yourself", "yourselves",
  };
  return words;
}

}  // namespace bisonet
