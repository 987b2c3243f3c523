#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bisonet/bisociation.hpp"
#include "bisonet/corpus.hpp"
#include "bisonet/topic_model.hpp"

namespace bisonet {

// A (domain, topic) vertex. The label follows the "<domain>_<topic>"
// convention, e.g. "6_9" for domain index 6, topic 9.
struct BisoNetNode {
  std::int32_t domain = -1;
  std::int32_t topic = -1;
  double score = 0.0;
  std::string label;
  std::string domain_name;
  std::vector<std::string> words;  // top words, for display
};

struct BisoNetEdge {
  std::size_t u = 0;  // node indices, u < v
  std::size_t v = 0;
  double weight = 0.0;
};

enum class NodeAdmission { top_k, threshold, all };
enum class EdgeRule { none, threshold, top_fraction };

struct BisoNetOptions {
  NodeAdmission admission = NodeAdmission::top_k;
  std::int32_t top_k = 10;
  double tau = 0.0;

  EdgeRule edge_rule = EdgeRule::none;
  double epsilon = 0.0;
  double top_fraction = 1.0;

  // Root parameter of the bison measure.
  double k = 0.5;
  // The symmetric form roots the product of both proportions; the literal
  // form roots only the first one (then the measure is not symmetric).
  bool symmetric_root = true;
  // Strict k-partite mode: only connect nodes from different domains.
  bool cross_domain_only = false;

  // Domain indices to include; empty means all.
  std::vector<std::int32_t> domains = {};
  std::int32_t words_per_node = 10;

  bool operator==(const BisoNetOptions&) const = default;
};

struct BisoNet {
  std::vector<BisoNetNode> nodes;  // sorted by (domain, topic)
  std::vector<BisoNetEdge> edges;  // sorted by (u, v)
  BisoNetOptions params;
  std::uint64_t model_hash = 0;
  std::uint64_t corpus_hash = 0;
};

// Association strength between topics p and q over the documents in `docs`:
// a sum over documents of a co-occurrence factor (the rooted product of the
// two proportions) times a similarity factor
// 1 - |atan(Xp) - atan(Xq)| / atan(1). Symmetric in (p, q) unless the
// literal root form is requested.
double topic_bison_measure(const Matrix& X, std::span<const std::size_t> docs, std::int32_t p,
                           std::int32_t q, double k, bool symmetric_root = true);

// Builds the graph: admits topics per domain from the ranked lists, then
// weights every admissible node pair over the union of the endpoint
// domains' documents. Throws when no node survives admission.
BisoNet generate_bisonet(const Corpus& corpus, const TopicModel& model,
                         const std::vector<RankedTopicList>& ranked, const BisoNetOptions& options);

// Keeps exactly ceil(fraction * |E|) highest-weight edges (weight ties break
// by lexicographic node-pair label). Nodes are untouched, so pruning can
// leave isolated vertices.
BisoNet prune_top_fraction(const BisoNet& graph, double fraction);

// Subgraph induced by the largest connected component; size ties go to the
// component with the smallest minimum node label.
BisoNet largest_connected_component(const BisoNet& graph);

// Structural equality on sorted node labels and edge endpoint labels.
bool graph_equal(const BisoNet& a, const BisoNet& b);

}  // namespace bisonet
