#include "bisonet/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bisonet/bisociation.hpp"
#include "bisonet/coherence.hpp"
#include "bisonet/csv.hpp"
#include "bisonet/graph_export.hpp"
#include "bisonet/hash.hpp"
#include "bisonet/rng.hpp"

namespace fs = std::filesystem;

namespace bisonet {

using nlohmann::json;

namespace {

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Markdown tables only; machine-readable CSVs keep the exact form above.
std::string format_rounded(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing file: " + path);
}

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw std::invalid_argument("config: field \"" + field + "\" " + what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void PipelineConfig::validate() const {
  if (corpus_path.empty()) config_error("corpus.path", "must not be empty");
  if (tokenizer.min_token_length < 1) config_error("tokenizer.min_token_length", "must be >= 1");
  if (vocabulary.min_df < 1) config_error("vocabulary.min_df", "must be >= 1");
  if (!(vocabulary.max_df_frac > 0.0) || vocabulary.max_df_frac > 1.0) {
    config_error("vocabulary.max_df_frac", "must be in (0, 1]");
  }
  if (lda.topics < 2) config_error("lda.topics", "must be >= 2");
  if (lda.burn_in < 0) config_error("lda.burn_in", "must be >= 0");
  if (lda.iterations <= lda.burn_in) config_error("lda.iterations", "must be > lda.burn_in");
  if (lda.thinning < 1) config_error("lda.thinning", "must be >= 1");
  if (lda.alpha < 0.0) config_error("lda.alpha", "must be >= 0 (0 selects 50/T)");
  if (!(lda.beta > 0.0)) config_error("lda.beta", "must be > 0");
  if (k_folds < 2) config_error("classify.k_folds", "must be >= 2");
  if (top_k < 1) config_error("bisociation.top_k", "must be >= 1");
  if (baseline_candidates < 1) config_error("bisociation.baseline_candidates", "must be >= 1");
  if (!(npmi_tolerance > 0.0)) config_error("bisociation.npmi_tolerance", "must be > 0");
  if (npmi_top_words < 2) config_error("bisociation.npmi_top_words", "must be >= 2");
  if (graph.admission == NodeAdmission::top_k && graph.top_k < 1) {
    config_error("graph.top_k", "must be >= 1");
  }
  if (graph.tau < 0.0) config_error("graph.tau", "must be >= 0");
  if (graph.epsilon < 0.0) config_error("graph.epsilon", "must be >= 0");
  if (!(graph.top_fraction > 0.0) || graph.top_fraction > 1.0) {
    config_error("graph.top_fraction", "must be in (0, 1]");
  }
  if (!(graph.k > 0.0)) config_error("graph.k", "must be > 0");
  if (graph.words_per_node < 1) config_error("graph.words_per_node", "must be >= 1");
  if (export_formats.empty()) config_error("export.formats", "must not be empty");
  for (const auto& f : export_formats) {
    if (f != "dot" && f != "graphml" && f != "json") {
      config_error("export.formats", "contains unknown format \"" + f + "\"");
    }
  }
  if (output_dir.empty()) config_error("output_dir", "must not be empty");
}

namespace {

json graph_options_to_json(const BisoNetOptions& g, const std::vector<std::string>& domain_names) {
  json j;
  switch (g.admission) {
    case NodeAdmission::top_k: j["admission"] = "top_k"; break;
    case NodeAdmission::threshold: j["admission"] = "tau"; break;
    case NodeAdmission::all: j["admission"] = "all"; break;
  }
  j["top_k"] = g.top_k;
  j["tau"] = g.tau;
  switch (g.edge_rule) {
    case EdgeRule::none: j["edge_rule"] = "none"; break;
    case EdgeRule::threshold: j["edge_rule"] = "epsilon"; break;
    case EdgeRule::top_fraction: j["edge_rule"] = "top_fraction"; break;
  }
  j["epsilon"] = g.epsilon;
  j["top_fraction"] = g.top_fraction;
  j["k"] = g.k;
  j["root"] = g.symmetric_root ? "symmetric" : "literal";
  j["cross_domain_only"] = g.cross_domain_only;
  j["domains"] = domain_names;
  j["words_per_node"] = g.words_per_node;
  return j;
}

}  // namespace

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["corpus"] = {{"path", c.corpus_path}, {"format", std::string(to_string(c.corpus_format))}};
  j["tokenizer"] = {{"min_token_length", c.tokenizer.min_token_length},
                    {"use_builtin_stopwords", c.tokenizer.use_builtin_stopwords},
                    {"stopword_file", c.stopword_file},
                    {"strip_html", c.tokenizer.strip_html},
                    {"stem", c.tokenizer.stem}};
  j["vocabulary"] = {{"min_df", c.vocabulary.min_df}, {"max_df_frac", c.vocabulary.max_df_frac}};
  j["lda"] = {{"topics", c.lda.topics},     {"alpha", c.lda.alpha},
              {"beta", c.lda.beta},         {"iterations", c.lda.iterations},
              {"burn_in", c.lda.burn_in},   {"thinning", c.lda.thinning}};
  j["classify"] = {{"k_folds", c.k_folds}};
  j["bisociation"] = {{"top_k", c.top_k},
                      {"baseline_candidates", c.baseline_candidates},
                      {"npmi_tolerance", c.npmi_tolerance},
                      {"npmi_top_words", c.npmi_top_words}};
  j["graph"] = graph_options_to_json(c.graph, c.graph_domains);
  j["export"] = {{"formats", c.export_formats}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  PipelineConfig c;
  if (j.contains("corpus")) {
    const auto& corpus = j["corpus"];
    c.corpus_path = corpus.value("path", "");
    c.corpus_format = parse_corpus_format(corpus.value("format", "jsonl"));
  }
  if (j.contains("tokenizer")) {
    const auto& t = j["tokenizer"];
    c.tokenizer.min_token_length = t.value("min_token_length", std::size_t{3});
    c.tokenizer.use_builtin_stopwords = t.value("use_builtin_stopwords", true);
    c.stopword_file = t.value("stopword_file", "");
    c.tokenizer.strip_html = t.value("strip_html", true);
    c.tokenizer.stem = t.value("stem", false);
  }
  if (j.contains("vocabulary")) {
    const auto& v = j["vocabulary"];
    c.vocabulary.min_df = v.value("min_df", 5);
    c.vocabulary.max_df_frac = v.value("max_df_frac", 0.5);
  }
  if (j.contains("lda")) {
    const auto& l = j["lda"];
    c.lda.topics = l.value("topics", 100);
    c.lda.alpha = l.value("alpha", 0.0);
    c.lda.beta = l.value("beta", 0.1);
    c.lda.iterations = l.value("iterations", 1000);
    c.lda.burn_in = l.value("burn_in", 500);
    c.lda.thinning = l.value("thinning", 50);
  }
  if (j.contains("classify")) c.k_folds = j["classify"].value("k_folds", 5);
  if (j.contains("bisociation")) {
    const auto& b = j["bisociation"];
    c.top_k = b.value("top_k", 10);
    c.baseline_candidates = b.value("baseline_candidates", 3);
    c.npmi_tolerance = b.value("npmi_tolerance", 0.05);
    c.npmi_top_words = b.value("npmi_top_words", 10);
  }
  if (j.contains("graph")) {
    const auto& g = j["graph"];
    const std::string admission = g.value("admission", "top_k");
    if (admission == "top_k") c.graph.admission = NodeAdmission::top_k;
    else if (admission == "tau") c.graph.admission = NodeAdmission::threshold;
    else if (admission == "all") c.graph.admission = NodeAdmission::all;
    else config_error("graph.admission", "must be one of top_k, tau, all");
    c.graph.top_k = g.value("top_k", 10);
    c.graph.tau = g.value("tau", 0.0);
    const std::string edge_rule = g.value("edge_rule", "none");
    if (edge_rule == "none") c.graph.edge_rule = EdgeRule::none;
    else if (edge_rule == "epsilon") c.graph.edge_rule = EdgeRule::threshold;
    else if (edge_rule == "top_fraction") c.graph.edge_rule = EdgeRule::top_fraction;
    else config_error("graph.edge_rule", "must be one of none, epsilon, top_fraction");
    c.graph.epsilon = g.value("epsilon", 0.0);
    c.graph.top_fraction = g.value("top_fraction", 1.0);
    c.graph.k = g.value("k", 0.5);
    const std::string root = g.value("root", "symmetric");
    if (root != "symmetric" && root != "literal") {
      config_error("graph.root", "must be symmetric or literal");
    }
    c.graph.symmetric_root = root == "symmetric";
    c.graph.cross_domain_only = g.value("cross_domain_only", false);
    c.graph_domains = g.value("domains", std::vector<std::string>{});
    c.graph.words_per_node = g.value("words_per_node", 10);
  }
  if (j.contains("export")) {
    c.export_formats = j["export"].value("formats", c.export_formats);
  }
  c.seed = j.value("seed", std::uint64_t{1});
  c.output_dir = j.value("output_dir", "run");
  return c;
}

PipelineConfig load_config(const std::string& path) {
  return config_from_json(read_file(path));
}

std::uint64_t PipelineConfig::content_hash() const {
  Fnv1a64 h;
  h.update(config_to_json(*this));
  return h.digest();
}

// ---------------------------------------------------------------------------
// Manifest

void RunManifest::save(const std::string& path) const {
  json j;
  j["config_hash"] = config_hash;
  j["corpus_hash"] = corpus_hash;
  j["model_hash"] = model_hash;
  j["created_at"] = created_at;
  j["updated_at"] = updated_at;
  json stages_json = json::object();
  for (const auto& [name, record] : stages) {
    stages_json[name] = {{"status", record.status},
                         {"input_hash", record.input_hash},
                         {"outputs", record.outputs},
                         {"completed_at", record.completed_at},
                         {"error", record.error}};
  }
  j["stages"] = std::move(stages_json);
  write_file(path, j.dump(2) + "\n");
}

RunManifest RunManifest::load(const std::string& path) {
  json j = json::parse(read_file(path));
  RunManifest m;
  m.config_hash = j.value("config_hash", "");
  m.corpus_hash = j.value("corpus_hash", "");
  m.model_hash = j.value("model_hash", "");
  m.created_at = j.value("created_at", "");
  m.updated_at = j.value("updated_at", "");
  if (j.contains("stages")) {
    for (const auto& [name, record] : j["stages"].items()) {
      StageRecord r;
      r.status = record.value("status", "");
      r.input_hash = record.value("input_hash", "");
      r.outputs = record.value("outputs", std::map<std::string, std::string>{});
      r.completed_at = record.value("completed_at", "");
      r.error = record.value("error", "");
      m.stages[name] = std::move(r);
    }
  }
  return m;
}

const std::vector<std::string>& pipeline_stage_names() {
  static const std::vector<std::string> names = {"ingest", "fit-topics", "classify",
                                                 "score",  "graph",      "export"};
  return names;
}

std::string resolve_output_dir(const std::string& output_dir) {
  const char* root = std::getenv("BISONET_OUTPUT_ROOT");
  if (root != nullptr && *root != '\0' && fs::path(output_dir).is_relative()) {
    return (fs::path(root) / output_dir).string();
  }
  return output_dir;
}

// ---------------------------------------------------------------------------
// Runner

PipelineRunner::PipelineRunner(PipelineConfig config, bool force)
    : config_(std::move(config)), force_(force) {
  config_.validate();
  run_dir_ = resolve_output_dir(config_.output_dir);
  fs::create_directories(run_dir_);

  const std::string lock_path = artifact(".lock");
  lock_fd_ = ::open(lock_path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (lock_fd_ < 0) {
    throw std::runtime_error("run directory \"" + run_dir_ +
                             "\" is locked by another run (remove .lock if stale)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] ssize_t written = ::write(lock_fd_, pid.data(), pid.size());

  const std::string manifest_path = artifact("manifest.json");
  if (fs::exists(manifest_path)) {
    manifest_ = RunManifest::load(manifest_path);
  } else {
    manifest_.created_at = iso_now();
  }
  manifest_.config_hash = hex64(config_.content_hash());
}

PipelineRunner::~PipelineRunner() {
  if (lock_fd_ >= 0) {
    ::close(lock_fd_);
    std::error_code ec;
    fs::remove(artifact(".lock"), ec);
  }
}

std::string PipelineRunner::artifact(const std::string& name) const {
  return (fs::path(run_dir_) / name).string();
}

std::string PipelineRunner::artifact_hash(const std::string& name) const {
  return hex64(hash_file(artifact(name)));
}

PipelineRunner::StageOutcome PipelineRunner::execute(const std::string& name,
                                                     const std::string& input_hash,
                                                     const std::vector<std::string>& outputs,
                                                     const std::function<void()>& body) {
  const auto it = manifest_.stages.find(name);
  if (!force_ && it != manifest_.stages.end() && it->second.status == "ok" &&
      it->second.input_hash == input_hash) {
    bool intact = true;
    for (const auto& [file, hash] : it->second.outputs) {
      if (!fs::exists(artifact(file)) || artifact_hash(file) != hash) {
        intact = false;
        break;
      }
    }
    if (intact) {
      manifest_.updated_at = iso_now();
      manifest_.save(artifact("manifest.json"));
      return {true};
    }
  }

  body();

  StageRecord record;
  record.status = "ok";
  record.input_hash = input_hash;
  for (const auto& file : outputs) record.outputs[file] = artifact_hash(file);
  record.completed_at = iso_now();
  manifest_.stages[name] = std::move(record);
  manifest_.updated_at = iso_now();
  manifest_.save(artifact("manifest.json"));
  return {false};
}

void PipelineRunner::stage_ingest() {
  Fnv1a64 h;
  h.update_u64(hash_file(config_.corpus_path));
  h.update(std::string(to_string(config_.corpus_format)));
  h.update_u64(config_.tokenizer.min_token_length);
  h.update_u64(config_.tokenizer.use_builtin_stopwords ? 1 : 0);
  h.update_u64(config_.tokenizer.strip_html ? 1 : 0);
  h.update_u64(config_.tokenizer.stem ? 1 : 0);
  if (!config_.stopword_file.empty()) h.update_u64(hash_file(config_.stopword_file));
  h.update_i64(config_.vocabulary.min_df);
  h.update_double(config_.vocabulary.max_df_frac);

  execute("ingest", hex64(h.digest()), {"corpus.json"}, [&] {
    TokenizerOptions options = config_.tokenizer;
    if (!config_.stopword_file.empty()) {
      options.extra_stopwords = load_stopword_file(config_.stopword_file);
    }
    const auto result =
        load_corpus(config_.corpus_path, config_.corpus_format, options, config_.vocabulary);
    save_corpus_json(result, artifact("corpus.json"));
    manifest_.corpus_hash = hex64(result.corpus.content_hash());
  });
}

void PipelineRunner::stage_fit_topics() {
  Fnv1a64 h;
  h.update(artifact_hash("corpus.json"));
  LdaConfig lda = config_.lda;
  lda.seed = derive_seed(config_.seed, "lda");
  h.update_i64(lda.topics).update_double(lda.alpha).update_double(lda.beta);
  h.update_i64(lda.iterations).update_i64(lda.burn_in).update_i64(lda.thinning);
  h.update_u64(lda.seed);

  execute("fit-topics", hex64(h.digest()), {"model.json"}, [&] {
    const auto loaded = load_corpus_json(artifact("corpus.json"));
    const TopicModel model = fit_lda(loaded.corpus, lda);
    save_topic_model(model, artifact("model.json"));
    manifest_.model_hash = hex64(model.content_hash());
    manifest_.corpus_hash = hex64(loaded.corpus.content_hash());
  });
}

void PipelineRunner::stage_classify() {
  Fnv1a64 h;
  h.update(artifact_hash("corpus.json"));
  h.update(artifact_hash("model.json"));
  h.update_i64(config_.k_folds);
  h.update_u64(derive_seed(config_.seed, "classify"));

  execute("classify", hex64(h.digest()), {"cv_report.json", "outliers.csv"}, [&] {
    const auto loaded = load_corpus_json(artifact("corpus.json"));
    const TopicModel model = load_topic_model(artifact("model.json"));
    require_compatible(model, loaded.corpus);
    const auto labels = loaded.corpus.labels();
    const auto result =
        train_ensemble(model.X, labels, static_cast<int>(loaded.corpus.num_domains()),
                       config_.k_folds, derive_seed(config_.seed, "classify"));
    save_cv_report_json(result.report, artifact("cv_report.json"));

    const OutlierSet outliers = find_outliers(result.ensemble, model.X, labels);
    std::string csv = csv_row({"doc_id", "true_domain", "predicted_domain"});
    for (std::size_t d = 0; d < outliers.by_domain.size(); ++d) {
      for (std::size_t i : outliers.by_domain[d]) {
        csv += csv_row({loaded.corpus.documents[i].doc_id, loaded.corpus.domains[d],
                        loaded.corpus.domains[static_cast<std::size_t>(outliers.predicted[i])]});
      }
    }
    write_file(artifact("outliers.csv"), csv);
  });
}

namespace {

OutlierSet read_outliers_csv(const std::string& path, const Corpus& corpus) {
  const auto records = parse_csv(read_file(path));
  OutlierSet out;
  out.by_domain.resize(corpus.num_domains());
  out.predicted.assign(corpus.size(), -1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out.predicted[i] = corpus.documents[i].domain;  // non-outliers predict true
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& fields = records[r].fields;
    if (fields.size() != 3) {
      throw std::runtime_error("outliers.csv line " + std::to_string(records[r].line) +
                               ": expected 3 fields");
    }
    const std::int64_t doc = corpus.document_index(fields[0]);
    const std::int32_t true_domain = corpus.domain_id(fields[1]);
    const std::int32_t predicted = corpus.domain_id(fields[2]);
    if (doc < 0 || true_domain < 0 || predicted < 0) {
      throw std::runtime_error("outliers.csv line " + std::to_string(records[r].line) +
                               ": unknown doc or domain");
    }
    out.by_domain[static_cast<std::size_t>(true_domain)].push_back(
        static_cast<std::size_t>(doc));
    out.predicted[static_cast<std::size_t>(doc)] = predicted;
  }
  for (auto& docs : out.by_domain) std::sort(docs.begin(), docs.end());
  return out;
}

constexpr const char* kScoresFormatTag = "bisonet-scores";
constexpr int kScoresVersion = 1;

}  // namespace

void PipelineRunner::stage_score() {
  Fnv1a64 h;
  h.update(artifact_hash("corpus.json"));
  h.update(artifact_hash("model.json"));
  h.update(artifact_hash("outliers.csv"));
  h.update_i64(config_.top_k).update_i64(config_.baseline_candidates);
  h.update_double(config_.npmi_tolerance).update_i64(config_.npmi_top_words);
  h.update_u64(config_.seed);

  execute("score", hex64(h.digest()), {"scores.csv", "scores.json"}, [&] {
    const auto loaded = load_corpus_json(artifact("corpus.json"));
    const Corpus& corpus = loaded.corpus;
    const TopicModel model = load_topic_model(artifact("model.json"));
    require_compatible(model, corpus);
    const OutlierSet outliers = read_outliers_csv(artifact("outliers.csv"), corpus);

    const CooccurrenceTable cooccurrence = CooccurrenceTable::build(corpus);
    const std::int32_t T = model.num_topics;
    std::vector<double> npmi(static_cast<std::size_t>(T));
    std::vector<std::vector<std::string>> words(static_cast<std::size_t>(T));
    for (std::int32_t t = 0; t < T; ++t) {
      npmi[static_cast<std::size_t>(t)] =
          npmi_coherence(model, corpus.vocab, t, config_.npmi_top_words, cooccurrence);
      words[static_cast<std::size_t>(t)] = top_words(model, corpus.vocab, t, 10).words;
    }
    const std::vector<std::int32_t> usage = topic_usage_ranks(model.X);

    json j;
    j["format"] = kScoresFormatTag;
    j["version"] = kScoresVersion;
    j["top_k"] = config_.top_k;
    j["npmi_top_words"] = config_.npmi_top_words;
    json topics_json = json::array();
    for (std::int32_t t = 0; t < T; ++t) {
      topics_json.push_back({{"topic", t},
                             {"npmi", npmi[static_cast<std::size_t>(t)]},
                             {"usage_rank", usage[static_cast<std::size_t>(t)]},
                             {"words", words[static_cast<std::size_t>(t)]}});
    }
    j["topics"] = std::move(topics_json);

    std::string csv = csv_row({"domain", "rank", "topic_id", "score", "top_10_words"});
    json domains_json = json::array();
    for (std::size_t d = 0; d < corpus.num_domains(); ++d) {
      const auto domain = static_cast<std::int32_t>(d);
      const RankedTopicList ranked =
          rank_bisociative_topics(corpus, model, outliers, domain);
      const auto scores_by_topic = score_all_topics(model.X, outliers.by_domain[d], domain);

      json ranked_json = json::array();
      for (std::size_t r = 0; r < ranked.topics.size(); ++r) {
        const auto& entry = ranked.topics[r];
        ranked_json.push_back({{"rank", r + 1},
                               {"topic", entry.topic},
                               {"score", entry.score},
                               {"zero_denominator", entry.zero_denominator}});
        std::string joined;
        for (const auto& w : words[static_cast<std::size_t>(entry.topic)]) {
          if (!joined.empty()) joined.push_back(' ');
          joined += w;
        }
        csv += csv_row({corpus.domains[d], std::to_string(r + 1), std::to_string(entry.topic),
                        format_double(entry.score), joined});
      }

      json baselines_json = json::array();
      const std::int32_t limit = std::min<std::int32_t>(config_.top_k, T);
      for (std::int32_t r = 0; r < limit; ++r) {
        const std::int32_t b_topic = ranked.topics[static_cast<std::size_t>(r)].topic;
        const std::uint64_t seed =
            derive_seed(config_.seed, "baseline/" + corpus.domains[d] + "/" +
                                          std::to_string(b_topic));
        const std::int32_t baseline = select_baseline_topic(
            b_topic, scores_by_topic, npmi, config_.baseline_candidates,
            config_.npmi_tolerance, seed);
        baselines_json.push_back({{"topic", b_topic}, {"baseline", baseline}});
      }
      domains_json.push_back({{"domain", domain},
                              {"name", corpus.domains[d]},
                              {"outliers", outliers.by_domain[d].size()},
                              {"ranked", std::move(ranked_json)},
                              {"baselines", std::move(baselines_json)}});
    }
    j["domains"] = std::move(domains_json);
    write_file(artifact("scores.json"), j.dump(2) + "\n");
    write_file(artifact("scores.csv"), csv);
  });
}

void PipelineRunner::stage_graph() {
  Fnv1a64 h;
  h.update(artifact_hash("corpus.json"));
  h.update(artifact_hash("model.json"));
  h.update(artifact_hash("scores.json"));
  h.update(graph_options_to_json(config_.graph, config_.graph_domains).dump());

  execute("graph", hex64(h.digest()), {"bisonet.json"}, [&] {
    const auto loaded = load_corpus_json(artifact("corpus.json"));
    const Corpus& corpus = loaded.corpus;
    const TopicModel model = load_topic_model(artifact("model.json"));
    const json scores = json::parse(read_file(artifact("scores.json")));

    std::vector<RankedTopicList> ranked;
    for (const auto& dj : scores.at("domains")) {
      RankedTopicList list;
      list.domain = dj.at("domain").get<std::int32_t>();
      for (const auto& rj : dj.at("ranked")) {
        TopicBisociationScore s;
        s.domain = list.domain;
        s.topic = rj.at("topic").get<std::int32_t>();
        s.score = rj.at("score").get<double>();
        s.zero_denominator = rj.at("zero_denominator").get<bool>();
        list.topics.push_back(s);
      }
      ranked.push_back(std::move(list));
    }

    BisoNetOptions options = config_.graph;
    options.domains.clear();
    for (const auto& name : config_.graph_domains) {
      const std::int32_t d = corpus.domain_id(name);
      if (d < 0) throw std::runtime_error("graph: unknown domain \"" + name + "\"");
      options.domains.push_back(d);
    }
    const BisoNet graph = generate_bisonet(corpus, model, ranked, options);
    export_graph(graph, GraphFormat::json, artifact("bisonet.json"));
  });
}

void PipelineRunner::stage_export() {
  Fnv1a64 h;
  h.update(artifact_hash("bisonet.json"));
  for (const auto& f : config_.export_formats) h.update(f).update("|");

  std::vector<std::string> outputs;
  for (const auto& f : config_.export_formats) outputs.push_back("graph." + f);

  execute("export", hex64(h.digest()), outputs, [&] {
    const BisoNet graph = load_bisonet_json(artifact("bisonet.json"));
    for (const auto& f : config_.export_formats) {
      export_graph(graph, parse_graph_format(f), artifact("graph." + f));
    }
  });
}

void PipelineRunner::run_stage(const std::string& name) {
  const auto& names = pipeline_stage_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw std::invalid_argument("unknown stage: " + name);
  }
  try {
    if (name == "ingest") stage_ingest();
    else if (name == "fit-topics") stage_fit_topics();
    else if (name == "classify") stage_classify();
    else if (name == "score") stage_score();
    else if (name == "graph") stage_graph();
    else if (name == "export") stage_export();
  } catch (const std::exception& e) {
    // Record the failure (input hashing included) and keep partial outputs.
    StageRecord record;
    record.status = "failed";
    record.completed_at = iso_now();
    record.error = e.what();
    manifest_.stages[name] = std::move(record);
    manifest_.updated_at = iso_now();
    manifest_.save(artifact("manifest.json"));
    throw std::runtime_error("stage " + name + " failed: " + e.what());
  }
}

RunManifest PipelineRunner::run() {
  for (const auto& name : pipeline_stage_names()) run_stage(name);
  return manifest_;
}

// ---------------------------------------------------------------------------
// Report

namespace {

std::string require_artifact(const std::string& run_dir, const std::string& file,
                             const std::string& stage) {
  const std::string path = (fs::path(run_dir) / file).string();
  if (!fs::exists(path)) {
    throw std::runtime_error("missing output of stage \"" + stage + "\": " + file);
  }
  return path;
}

}  // namespace

std::vector<std::string> write_report(const std::string& run_dir) {
  const auto loaded =
      load_corpus_json(require_artifact(run_dir, "corpus.json", "ingest"));
  const Corpus& corpus = loaded.corpus;
  const CvReport cv =
      load_cv_report_json(require_artifact(run_dir, "cv_report.json", "classify"));
  const OutlierSet outliers =
      read_outliers_csv(require_artifact(run_dir, "outliers.csv", "classify"), corpus);
  const json scores = json::parse(read_file(require_artifact(run_dir, "scores.json", "score")));

  std::vector<std::size_t> idea_counts(corpus.num_domains(), 0);
  for (const auto& doc : corpus.documents) ++idea_counts[static_cast<std::size_t>(doc.domain)];

  // domains.csv
  std::string domains_csv = csv_row({"domain", "ideas", "outliers"});
  for (std::size_t d = 0; d < corpus.num_domains(); ++d) {
    domains_csv += csv_row({corpus.domains[d], std::to_string(idea_counts[d]),
                            std::to_string(outliers.by_domain[d].size())});
  }

  // btopics.csv + markdown
  const std::int32_t top_k = scores.at("top_k").get<std::int32_t>();
  const auto& topics_meta = scores.at("topics");
  std::string btopics_csv = csv_row({"domain", "rank", "topic_id", "score", "npmi", "usage_rank",
                                     "baseline_topic", "top_10_words"});

  std::ostringstream md;
  md << "# Run report\n\n## Domains\n\n| Domain | Ideas | Outliers |\n|---|---:|---:|\n";
  std::size_t total_ideas = 0, total_outliers = 0;
  for (std::size_t d = 0; d < corpus.num_domains(); ++d) {
    md << "| " << corpus.domains[d] << " | " << idea_counts[d] << " | "
       << outliers.by_domain[d].size() << " |\n";
    total_ideas += idea_counts[d];
    total_outliers += outliers.by_domain[d].size();
  }
  md << "\nTotal: " << total_ideas << " ideas, " << total_outliers << " outliers across "
     << corpus.num_domains() << " domains.\n";

  md << "\n## Classifier ensemble\n\n| Candidate | CV accuracy | Selected |\n|---|---:|:---:|\n";
  for (const auto& c : cv.candidates) {
    md << "| " << c.name << " | " << format_rounded(c.cv_accuracy) << " | "
       << (c.selected ? "yes" : "no") << " |\n";
  }
  md << "\nEnsemble in-sample accuracy: " << format_rounded(cv.ensemble_in_sample_accuracy)
     << "  \nEnsemble macro-F1: " << format_rounded(cv.ensemble_macro_f1) << "\n";
  if (cv.low_accuracy_warning) {
    md << "\n**Warning:** in-sample accuracy is below 0.8; outlier sets (and with them the "
          "bisociation scores) are unreliable at this accuracy.\n";
  }

  md << "\n## Bridging topics (top " << top_k << " per domain)\n";
  for (const auto& dj : scores.at("domains")) {
    const std::string name = dj.at("name").get<std::string>();
    md << "\n### " << name << "\n\n"
       << "| Rank | Topic | Score | NPMI | Usage rank | Baseline | Top words |\n"
       << "|---:|---:|---:|---:|---:|---:|---|\n";
    std::map<std::int32_t, std::int32_t> baseline_of;
    for (const auto& bj : dj.at("baselines")) {
      baseline_of[bj.at("topic").get<std::int32_t>()] = bj.at("baseline").get<std::int32_t>();
    }
    const auto& ranked = dj.at("ranked");
    const std::size_t limit =
        std::min<std::size_t>(static_cast<std::size_t>(top_k), ranked.size());
    for (std::size_t r = 0; r < limit; ++r) {
      const auto& entry = ranked[r];
      const std::int32_t topic = entry.at("topic").get<std::int32_t>();
      const auto& meta = topics_meta.at(static_cast<std::size_t>(topic));
      std::string joined;
      for (const auto& w : meta.at("words")) {
        if (!joined.empty()) joined.push_back(' ');
        joined += w.get<std::string>();
      }
      const double npmi = meta.at("npmi").get<double>();
      const std::int32_t usage_rank = meta.at("usage_rank").get<std::int32_t>();
      const std::int32_t baseline = baseline_of.count(topic) ? baseline_of[topic] : -1;
      md << "| " << (r + 1) << " | " << topic << " | "
         << format_rounded(entry.at("score").get<double>()) << " | " << format_rounded(npmi)
         << " | " << usage_rank << " | " << baseline << " | " << joined << " |\n";
      btopics_csv += csv_row({name, std::to_string(r + 1), std::to_string(topic),
                              format_rounded(entry.at("score").get<double>()),
                              format_rounded(npmi), std::to_string(usage_rank),
                              std::to_string(baseline), joined});
    }
  }

  const std::string report_md = (fs::path(run_dir) / "report.md").string();
  const std::string domains_path = (fs::path(run_dir) / "domains.csv").string();
  const std::string btopics_path = (fs::path(run_dir) / "btopics.csv").string();
  write_file(report_md, md.str());
  write_file(domains_path, domains_csv);
  write_file(btopics_path, btopics_csv);
  return {report_md, domains_path, btopics_path};
}

// ---------------------------------------------------------------------------
// Topic inspection

std::string inspect_topic(const std::string& run_dir, const std::string& domain,
                          std::int32_t topic, std::int32_t top_docs) {
  const auto loaded =
      load_corpus_json(require_artifact(run_dir, "corpus.json", "ingest"));
  const Corpus& corpus = loaded.corpus;
  const TopicModel model = load_topic_model(require_artifact(run_dir, "model.json", "fit-topics"));
  const json scores = json::parse(read_file(require_artifact(run_dir, "scores.json", "score")));

  std::int32_t d = corpus.domain_id(domain);
  if (d < 0) {
    // Maybe an index was passed instead of a name.
    try {
      d = static_cast<std::int32_t>(std::stol(domain));
    } catch (...) {
      d = -1;
    }
    if (d < 0 || static_cast<std::size_t>(d) >= corpus.num_domains()) {
      throw std::invalid_argument("unknown domain \"" + domain + "\"");
    }
  }
  if (topic < 0 || topic >= model.num_topics) {
    throw std::invalid_argument("topic " + std::to_string(topic) + " out of range");
  }

  double score = 0.0;
  std::size_t rank = 0;
  for (const auto& dj : scores.at("domains")) {
    if (dj.at("domain").get<std::int32_t>() != d) continue;
    for (const auto& rj : dj.at("ranked")) {
      if (rj.at("topic").get<std::int32_t>() == topic) {
        score = rj.at("score").get<double>();
        rank = rj.at("rank").get<std::size_t>();
        break;
      }
    }
  }
  const auto& meta = scores.at("topics").at(static_cast<std::size_t>(topic));

  std::ostringstream out;
  out << "topic " << topic << " in domain " << corpus.domains[static_cast<std::size_t>(d)]
      << " (" << d << "_" << topic << ")\n";
  const TopicSummary summary = top_words(model, corpus.vocab, topic, 10);
  out << "top words:";
  for (const auto& w : summary.words) out << " " << w;
  out << "\nbisociation score: " << format_double(score) << " (rank " << rank << " of "
      << model.num_topics << ")\n";
  out << "usage rank: " << meta.at("usage_rank").get<std::int32_t>() << " (1 = least used)\n";
  out << "npmi: " << format_double(meta.at("npmi").get<double>()) << "\n";

  const auto list_top_docs = [&](const std::vector<std::size_t>& candidates,
                                 const std::string& heading) {
    std::vector<std::size_t> order = candidates;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double xa = model.X(a, static_cast<std::size_t>(topic));
      const double xb = model.X(b, static_cast<std::size_t>(topic));
      if (xa != xb) return xa > xb;
      return a < b;
    });
    out << heading << "\n";
    const std::size_t limit = std::min<std::size_t>(order.size(),
                                                    static_cast<std::size_t>(top_docs));
    for (std::size_t i = 0; i < limit; ++i) {
      const auto& doc = corpus.documents[order[i]];
      out << "  " << format_double(model.X(order[i], static_cast<std::size_t>(topic))) << "  "
          << doc.doc_id << " [" << corpus.domains[static_cast<std::size_t>(doc.domain)] << "]";
      if (!doc.title.empty()) out << "  " << doc.title;
      out << "\n";
    }
  };

  list_top_docs(corpus.domain_docs(d), "top documents in domain:");
  std::vector<std::size_t> all(corpus.size());
  std::iota(all.begin(), all.end(), 0);
  list_top_docs(all, "top documents corpus-wide:");
  return out.str();
}

}  // namespace bisonet
