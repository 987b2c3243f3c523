// bisonet command line: runs the bridging-topic pipeline end to end or one
// stage at a time, and renders reports and topic detail views.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bisonet/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<std::string> corpus_path;
  std::optional<std::string> corpus_format;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::int32_t> topics;
  std::optional<std::int32_t> iterations;
  std::optional<std::int32_t> burn_in;
  std::optional<std::int32_t> thinning;
  std::optional<int> k_folds;
  std::optional<std::int32_t> top_k;
  std::optional<double> tau;
  std::optional<double> epsilon;
  std::optional<double> edge_fraction;
  std::optional<double> bison_k;
  std::optional<std::vector<std::string>> graph_domains;
  std::optional<std::vector<std::string>> formats;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--corpus", o.corpus_path, "Corpus file (overrides config)");
  cmd->add_option("--corpus-format", o.corpus_format, "jsonl or csv");
  cmd->add_option("--output-dir", o.output_dir, "Run directory");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--topics", o.topics, "Topic count T");
  cmd->add_option("--iterations", o.iterations, "Gibbs sweeps");
  cmd->add_option("--burn-in", o.burn_in, "Burn-in sweeps");
  cmd->add_option("--thinning", o.thinning, "Sweeps between posterior samples");
  cmd->add_option("--k-folds", o.k_folds, "Cross-validation folds");
  cmd->add_option("--top-k", o.top_k, "B-topics per domain");
  cmd->add_option("--tau", o.tau, "Bisociation threshold for graph nodes");
  cmd->add_option("--epsilon", o.epsilon, "Bison-measure threshold for edges");
  cmd->add_option("--edge-fraction", o.edge_fraction, "Keep this fraction of top edges");
  cmd->add_option("--bison-k", o.bison_k, "Root parameter k of the bison measure");
  cmd->add_option("--graph-domains", o.graph_domains, "Domain names to graph (default all)");
  cmd->add_option("--export-formats", o.formats, "Graph export formats (dot graphml json)");
}

// Config file first, flags win.
bisonet::PipelineConfig assemble_config(const std::string& config_path, const Overrides& o) {
  bisonet::PipelineConfig config;
  if (!config_path.empty()) config = bisonet::load_config(config_path);
  if (o.corpus_path) config.corpus_path = *o.corpus_path;
  if (o.corpus_format) config.corpus_format = bisonet::parse_corpus_format(*o.corpus_format);
  if (o.output_dir) config.output_dir = *o.output_dir;
  if (o.seed) config.seed = *o.seed;
  if (o.topics) config.lda.topics = *o.topics;
  if (o.iterations) config.lda.iterations = *o.iterations;
  if (o.burn_in) config.lda.burn_in = *o.burn_in;
  if (o.thinning) config.lda.thinning = *o.thinning;
  if (o.k_folds) config.k_folds = *o.k_folds;
  if (o.top_k) {
    config.top_k = *o.top_k;
    config.graph.top_k = *o.top_k;
  }
  if (o.tau) {
    config.graph.admission = bisonet::NodeAdmission::threshold;
    config.graph.tau = *o.tau;
  }
  if (o.epsilon) {
    config.graph.edge_rule = bisonet::EdgeRule::threshold;
    config.graph.epsilon = *o.epsilon;
  }
  if (o.edge_fraction) {
    config.graph.edge_rule = bisonet::EdgeRule::top_fraction;
    config.graph.top_fraction = *o.edge_fraction;
  }
  if (o.bison_k) config.graph.k = *o.bison_k;
  if (o.graph_domains) config.graph_domains = *o.graph_domains;
  if (o.formats) config.export_formats = *o.formats;
  config.validate();
  return config;
}

int run_stages(const std::string& config_path, const Overrides& o, bool force,
               const std::vector<std::string>& stages) {
  const auto config = assemble_config(config_path, o);
  bisonet::PipelineRunner runner(config, force);
  for (const auto& stage : stages) {
    runner.run_stage(stage);
    std::cout << "stage " << stage << ": "
              << runner.manifest().stages.at(stage).status << "\n";
  }
  std::cout << "run directory: " << runner.run_dir() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bridging-topic discovery and BisoNet generation"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  app.add_option("-c,--config", config_path, "Pipeline config JSON");
  app.add_flag("--force", force, "Re-run stages even when inputs are unchanged");

  Overrides overrides;

  auto* cmd_run = app.add_subcommand("run", "Run the whole pipeline");
  cmd_run->fallthrough();
  add_override_flags(cmd_run, overrides);

  // One subcommand per stage.
  std::vector<CLI::App*> stage_cmds;
  for (const auto& stage : bisonet::pipeline_stage_names()) {
    auto* cmd = app.add_subcommand(stage, "Run the " + stage + " stage");
    cmd->fallthrough();
    add_override_flags(cmd, overrides);
    stage_cmds.push_back(cmd);
  }

  auto* cmd_report = app.add_subcommand("report", "Write report.md, domains.csv, btopics.csv");
  cmd_report->fallthrough();
  std::string report_dir;
  cmd_report->add_option("--run-dir", report_dir, "Run directory (defaults to config output)");

  auto* cmd_inspect = app.add_subcommand("inspect-topic", "Show one topic in detail");
  cmd_inspect->fallthrough();
  std::string inspect_dir, inspect_domain;
  std::int32_t inspect_topic_id = -1;
  std::int32_t inspect_top_docs = 5;
  cmd_inspect->add_option("--run-dir", inspect_dir, "Run directory (defaults to config output)");
  cmd_inspect->add_option("--domain", inspect_domain, "Domain name or index")->required();
  cmd_inspect->add_option("--topic", inspect_topic_id, "Topic id")->required();
  cmd_inspect->add_option("--top-docs", inspect_top_docs, "Documents to list");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      return run_stages(config_path, overrides, force, bisonet::pipeline_stage_names());
    }
    for (std::size_t i = 0; i < stage_cmds.size(); ++i) {
      if (stage_cmds[i]->parsed()) {
        return run_stages(config_path, overrides, force,
                          {bisonet::pipeline_stage_names()[i]});
      }
    }
    if (cmd_report->parsed()) {
      std::string dir = report_dir;
      if (dir.empty()) {
        if (config_path.empty()) throw std::invalid_argument("report: need --run-dir or --config");
        dir = bisonet::resolve_output_dir(bisonet::load_config(config_path).output_dir);
      }
      for (const auto& path : bisonet::write_report(dir)) std::cout << path << "\n";
      return 0;
    }
    if (cmd_inspect->parsed()) {
      std::string dir = inspect_dir;
      if (dir.empty()) {
        if (config_path.empty()) {
          throw std::invalid_argument("inspect-topic: need --run-dir or --config");
        }
        dir = bisonet::resolve_output_dir(bisonet::load_config(config_path).output_dir);
      }
      std::cout << bisonet::inspect_topic(dir, inspect_domain, inspect_topic_id,
                                          inspect_top_docs);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
