#include "bisonet/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "bisonet/csv.hpp"
#include "bisonet/hash.hpp"

namespace bisonet {

using nlohmann::json;

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  throw std::invalid_argument("unknown corpus format: " + std::string(name) +
                              " (expected jsonl or csv)");
}

std::string_view to_string(CorpusFormat format) {
  return format == CorpusFormat::jsonl ? "jsonl" : "csv";
}

std::vector<int> Corpus::labels() const {
  std::vector<int> out;
  out.reserve(documents.size());
  for (const auto& d : documents) out.push_back(d.domain);
  return out;
}

std::vector<std::size_t> Corpus::domain_docs(std::int32_t domain) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].domain == domain) out.push_back(i);
  }
  return out;
}

std::int32_t Corpus::domain_id(std::string_view name) const {
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i] == name) return static_cast<std::int32_t>(i);
  }
  return -1;
}

std::int64_t Corpus::document_index(std::string_view doc_id) const {
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].doc_id == doc_id) return static_cast<std::int64_t>(i);
  }
  return -1;
}

std::uint64_t Corpus::content_hash() const {
  Fnv1a64 h;
  for (const auto& d : domains) h.update(d).update("\x1f", 1);
  for (const auto& doc : documents) {
    h.update(doc.doc_id).update("\x1f", 1);
    h.update_i64(doc.domain);
    for (const auto& [id, count] : doc.bag) {
      h.update_i64(id);
      h.update_i64(count);
    }
  }
  h.update_u64(vocab.content_hash());
  return h.digest();
}

namespace {

[[noreturn]] void record_error(std::size_t line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) record_error(line, std::string("missing field \"") + key + "\"");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  record_error(line, std::string("field \"") + key + "\" must be a string");
}

std::vector<RawDocument> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<RawDocument> docs;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      record_error(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) record_error(line_no, "record is not a JSON object");
    RawDocument doc;
    doc.doc_id = require_string(obj, "doc_id", line_no);
    doc.domain = require_string(obj, "domain", line_no);
    doc.body = require_string(obj, "body", line_no);
    if (obj.contains("title") && !obj["title"].is_null()) {
      doc.title = require_string(obj, "title", line_no);
    }
    if (doc.domain.empty()) record_error(line_no, "empty domain");
    if (!seen_ids.insert(doc.doc_id).second) {
      record_error(line_no, "duplicate doc_id \"" + doc.doc_id + "\"");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<RawDocument> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto records = parse_csv(buffer.str());
  if (records.empty()) throw std::runtime_error("empty CSV file: " + path);

  const auto& header = records.front().fields;
  std::unordered_map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < header.size(); ++i) columns[header[i]] = i;
  for (const char* required : {"doc_id", "domain", "body"}) {
    if (!columns.count(required)) {
      throw std::runtime_error(std::string("CSV header missing column \"") + required + "\"");
    }
  }
  const bool has_title = columns.count("title") > 0;

  std::vector<RawDocument> docs;
  std::unordered_set<std::string> seen_ids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      record_error(rec.line, "expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(rec.fields.size()));
    }
    RawDocument doc;
    doc.doc_id = rec.fields[columns["doc_id"]];
    doc.domain = rec.fields[columns["domain"]];
    doc.body = rec.fields[columns["body"]];
    if (has_title) doc.title = rec.fields[columns["title"]];
    if (doc.doc_id.empty()) record_error(rec.line, "empty doc_id");
    if (doc.domain.empty()) record_error(rec.line, "empty domain");
    if (!seen_ids.insert(doc.doc_id).second) {
      record_error(rec.line, "duplicate doc_id \"" + doc.doc_id + "\"");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace

std::vector<RawDocument> read_raw_documents(const std::string& path, CorpusFormat format) {
  return format == CorpusFormat::jsonl ? read_jsonl(path) : read_csv(path);
}

CorpusLoadResult build_corpus(const std::vector<RawDocument>& raw, const Tokenizer& tokenizer,
                              const VocabularyOptions& vocab_options) {
  LoadReport report;
  report.records = raw.size();

  {
    std::unordered_set<std::string> ids;
    for (const auto& doc : raw) {
      if (!ids.insert(doc.doc_id).second) {
        throw std::runtime_error("duplicate doc_id \"" + doc.doc_id + "\"");
      }
    }
  }

  struct Tokenized {
    const RawDocument* raw;
    std::vector<std::string> tokens;
  };
  std::vector<Tokenized> tokenized;
  tokenized.reserve(raw.size());
  for (const auto& doc : raw) {
    std::string text = doc.title.empty() ? doc.body : doc.title + " " + doc.body;
    auto tokens = tokenizer.tokenize(text);
    if (tokens.empty()) {
      ++report.dropped_empty;
      report.dropped_doc_ids.push_back(doc.doc_id);
      continue;
    }
    tokenized.push_back({&doc, std::move(tokens)});
  }

  std::vector<std::vector<std::string>> token_lists;
  token_lists.reserve(tokenized.size());
  for (const auto& t : tokenized) token_lists.push_back(t.tokens);
  Vocabulary vocab = build_vocabulary(token_lists, vocab_options);

  Corpus corpus;
  std::unordered_map<std::string, std::int32_t> domain_ids;
  for (const auto& t : tokenized) {
    std::map<std::int32_t, std::int32_t> bag;
    for (const auto& token : t.tokens) {
      const std::int32_t id = vocab.id_of(token);
      if (id >= 0) ++bag[id];
    }
    if (bag.empty()) {
      ++report.dropped_out_of_vocab;
      report.dropped_doc_ids.push_back(t.raw->doc_id);
      continue;
    }
    Document doc;
    doc.doc_id = t.raw->doc_id;
    doc.title = t.raw->title;
    auto [it, inserted] = domain_ids.try_emplace(
        t.raw->domain, static_cast<std::int32_t>(corpus.domains.size()));
    if (inserted) corpus.domains.push_back(t.raw->domain);
    doc.domain = it->second;
    doc.bag.assign(bag.begin(), bag.end());
    for (const auto& [id, count] : doc.bag) doc.token_total += count;
    corpus.documents.push_back(std::move(doc));
  }

  if (corpus.domains.size() < 2) {
    throw std::runtime_error("corpus must contain at least 2 domains, got " +
                             std::to_string(corpus.domains.size()));
  }
  corpus.vocab = std::move(vocab);
  return {std::move(corpus), std::move(report)};
}

CorpusLoadResult load_corpus(const std::string& path, CorpusFormat format,
                             const TokenizerOptions& tokenizer_options,
                             const VocabularyOptions& vocab_options) {
  const auto raw = read_raw_documents(path, format);
  return build_corpus(raw, Tokenizer(tokenizer_options), vocab_options);
}

namespace {
constexpr const char* kCorpusFormatTag = "bisonet-corpus";
constexpr int kCorpusVersion = 1;
}  // namespace

void save_corpus_json(const CorpusLoadResult& result, const std::string& path) {
  const Corpus& corpus = result.corpus;
  json j;
  j["format"] = kCorpusFormatTag;
  j["version"] = kCorpusVersion;
  j["domains"] = corpus.domains;
  j["vocabulary"] = {{"tokens", corpus.vocab.tokens()},
                     {"df", corpus.vocab.document_frequencies()}};
  json docs = json::array();
  for (const auto& doc : corpus.documents) {
    json bag = json::array();
    for (const auto& [id, count] : doc.bag) bag.push_back({id, count});
    docs.push_back({{"id", doc.doc_id},
                    {"title", doc.title},
                    {"domain", doc.domain},
                    {"bag", std::move(bag)}});
  }
  j["documents"] = std::move(docs);
  j["report"] = {{"records", result.report.records},
                 {"dropped_empty", result.report.dropped_empty},
                 {"dropped_out_of_vocab", result.report.dropped_out_of_vocab},
                 {"dropped_doc_ids", result.report.dropped_doc_ids}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus artifact: " + path);
  out << j.dump() << "\n";
}

CorpusLoadResult load_corpus_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus artifact: " + path);
  json j;
  in >> j;
  if (j.value("format", "") != kCorpusFormatTag || j.value("version", 0) != kCorpusVersion) {
    throw std::runtime_error("not a corpus artifact (or unsupported version): " + path);
  }
  CorpusLoadResult result;
  Corpus& corpus = result.corpus;
  corpus.domains = j.at("domains").get<std::vector<std::string>>();
  corpus.vocab = Vocabulary(j.at("vocabulary").at("tokens").get<std::vector<std::string>>(),
                            j.at("vocabulary").at("df").get<std::vector<std::int32_t>>());
  for (const auto& d : j.at("documents")) {
    Document doc;
    doc.doc_id = d.at("id").get<std::string>();
    doc.title = d.value("title", "");
    doc.domain = d.at("domain").get<std::int32_t>();
    for (const auto& pair : d.at("bag")) {
      doc.bag.emplace_back(pair.at(0).get<std::int32_t>(), pair.at(1).get<std::int32_t>());
      doc.token_total += pair.at(1).get<std::int32_t>();
    }
    corpus.documents.push_back(std::move(doc));
  }
  const auto& rep = j.at("report");
  result.report.records = rep.at("records").get<std::size_t>();
  result.report.dropped_empty = rep.at("dropped_empty").get<std::size_t>();
  result.report.dropped_out_of_vocab = rep.at("dropped_out_of_vocab").get<std::size_t>();
  result.report.dropped_doc_ids = rep.at("dropped_doc_ids").get<std::vector<std::string>>();
  return result;
}

}  // namespace bisonet
