#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bisonet/classify.hpp"
#include "bisonet/corpus.hpp"
#include "bisonet/graph.hpp"
#include "bisonet/topic_model.hpp"

namespace bisonet {

// Everything one run needs, loadable from a single JSON file. CLI flags
// override individual fields after loading.
struct PipelineConfig {
  std::string corpus_path;
  CorpusFormat corpus_format = CorpusFormat::jsonl;

  TokenizerOptions tokenizer;
  std::string stopword_file;  // optional; merged into tokenizer stopwords
  VocabularyOptions vocabulary;

  LdaConfig lda;                 // lda.seed is derived from `seed` at run time
  int k_folds = 5;

  std::int32_t top_k = 10;       // b-topics per domain in reports/scores
  int baseline_candidates = 3;
  double npmi_tolerance = 0.05;
  std::int32_t npmi_top_words = 10;

  BisoNetOptions graph;
  std::vector<std::string> graph_domains;  // domain names; empty = all
  std::vector<std::string> export_formats = {"json", "dot", "graphml"};

  std::uint64_t seed = 1;
  std::string output_dir = "run";

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::uint64_t content_hash() const;
};

PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::string& path);

struct StageRecord {
  std::string status;  // "ok", "failed", or "skipped"
  std::string input_hash;
  std::map<std::string, std::string> outputs;  // file name -> content hash
  std::string completed_at;
  std::string error;
};

struct RunManifest {
  std::string config_hash;
  std::string corpus_hash;
  std::string model_hash;
  std::string created_at;
  std::string updated_at;
  std::map<std::string, StageRecord> stages;

  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

// The stage names, in execution order.
const std::vector<std::string>& pipeline_stage_names();

// Resolves the run directory: relative paths land under the
// BISONET_OUTPUT_ROOT environment variable when it is set.
std::string resolve_output_dir(const std::string& output_dir);

// Runs stages against a run directory. Stages whose input hashes match the
// manifest are skipped unless force is set; a failing stage is recorded in
// the manifest and rethrown. The run directory is locked for the lifetime
// of the runner.
class PipelineRunner {
 public:
  PipelineRunner(PipelineConfig config, bool force = false);
  ~PipelineRunner();

  PipelineRunner(const PipelineRunner&) = delete;
  PipelineRunner& operator=(const PipelineRunner&) = delete;

  // All six stages: ingest, fit-topics, classify, score, graph, export.
  RunManifest run();
  void run_stage(const std::string& name);

  const std::string& run_dir() const { return run_dir_; }
  const RunManifest& manifest() const { return manifest_; }

 private:
  struct StageOutcome {
    bool skipped = false;
  };
  StageOutcome execute(const std::string& name, const std::string& input_hash,
                       const std::vector<std::string>& outputs,
                       const std::function<void()>& body);

  void stage_ingest();
  void stage_fit_topics();
  void stage_classify();
  void stage_score();
  void stage_graph();
  void stage_export();

  std::string artifact(const std::string& name) const;
  std::string artifact_hash(const std::string& name) const;

  PipelineConfig config_;
  bool force_ = false;
  std::string run_dir_;
  RunManifest manifest_;
  int lock_fd_ = -1;
};

// Emits report.md, domains.csv, and btopics.csv into the run directory:
// the per-domain idea/outlier table, classifier accuracy and F1, and the
// per-domain top-k b-topics with words, usage rank, NPMI, and the matched
// baseline topic. Throws when a required stage artifact is missing.
std::vector<std::string> write_report(const std::string& run_dir);

// Topic detail view: top words, bisociation score, usage rank, and the
// documents with the highest proportion of the topic within the domain and
// corpus-wide.
std::string inspect_topic(const std::string& run_dir, const std::string& domain,
                          std::int32_t topic, std::int32_t top_docs = 5);

}  // namespace bisonet
