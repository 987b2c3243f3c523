#include "bisonet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bisonet {

double topic_bison_measure(const Matrix& X, std::span<const std::size_t> docs, std::int32_t p,
                           std::int32_t q, double k, bool symmetric_root) {
  if (!(k > 0.0)) throw std::invalid_argument("topic_bison_measure: k must be > 0");
  if (p < 0 || q < 0 || static_cast<std::size_t>(p) >= X.cols() ||
      static_cast<std::size_t>(q) >= X.cols()) {
    throw std::invalid_argument("topic_bison_measure: topic out of range");
  }
  if (docs.empty()) throw std::invalid_argument("topic_bison_measure: empty document set");

  const double inv_k = 1.0 / k;
  const double atan_one = std::atan(1.0);
  double total = 0.0;
  for (std::size_t i : docs) {
    if (i >= X.rows()) throw std::invalid_argument("topic_bison_measure: document out of range");
    const double xp = X(i, static_cast<std::size_t>(p));
    const double xq = X(i, static_cast<std::size_t>(q));
    double cooccurrence;
    if (symmetric_root) {
      cooccurrence = std::pow(xp * xq, inv_k);
    } else {
      cooccurrence = std::pow(xp, inv_k) * xq;
    }
    const double similarity = 1.0 - std::abs(std::atan(xp) - std::atan(xq)) / atan_one;
    total += cooccurrence * similarity;
  }
  return total;
}

namespace {

std::string node_label(std::int32_t domain, std::int32_t topic) {
  return std::to_string(domain) + "_" + std::to_string(topic);
}

// Same sum as topic_bison_measure, with the atan values precomputed once per
// graph. pow with an exact integer exponent is correctly rounded, so the
// k = 0.5 / k = 1 fast paths return the identical doubles.
double bison_over_region(const Matrix& X, const Matrix& atan_x,
                         std::span<const std::size_t> docs, std::int32_t p, std::int32_t q,
                         double inv_k, bool symmetric_root) {
  const double atan_one = std::atan(1.0);
  const auto tp = static_cast<std::size_t>(p);
  const auto tq = static_cast<std::size_t>(q);
  double total = 0.0;
  for (std::size_t i : docs) {
    const double xp = X(i, tp);
    const double xq = X(i, tq);
    double cooccurrence;
    if (symmetric_root) {
      const double product = xp * xq;
      if (inv_k == 2.0) {
        cooccurrence = product * product;
      } else if (inv_k == 1.0) {
        cooccurrence = product;
      } else {
        cooccurrence = std::pow(product, inv_k);
      }
    } else {
      cooccurrence = std::pow(xp, inv_k) * xq;
    }
    total += cooccurrence * (1.0 - std::abs(atan_x(i, tp) - atan_x(i, tq)) / atan_one);
  }
  return total;
}

// Lexicographic (min label, max label) pair used for deterministic edge
// ordering and tie-breaks.
std::pair<std::string, std::string> edge_pair_label(const BisoNet& graph, const BisoNetEdge& e) {
  const std::string& a = graph.nodes[e.u].label;
  const std::string& b = graph.nodes[e.v].label;
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

BisoNet generate_bisonet(const Corpus& corpus, const TopicModel& model,
                         const std::vector<RankedTopicList>& ranked,
                         const BisoNetOptions& options) {
  require_compatible(model, corpus);
  if (!(options.k > 0.0)) throw std::invalid_argument("generate_bisonet: k must be > 0");

  std::vector<std::int32_t> wanted = options.domains;
  if (wanted.empty()) {
    wanted.resize(corpus.num_domains());
    std::iota(wanted.begin(), wanted.end(), 0);
  }
  for (std::int32_t d : wanted) {
    if (d < 0 || static_cast<std::size_t>(d) >= corpus.num_domains()) {
      throw std::invalid_argument("generate_bisonet: unknown domain " + std::to_string(d));
    }
  }

  const auto list_for = [&](std::int32_t domain) -> const RankedTopicList& {
    for (const auto& list : ranked) {
      if (list.domain == domain) return list;
    }
    throw std::invalid_argument("generate_bisonet: no ranked topic list for domain " +
                                std::to_string(domain));
  };

  BisoNet graph;
  graph.params = options;
  graph.model_hash = model.content_hash();
  graph.corpus_hash = corpus.content_hash();

  for (std::int32_t d : wanted) {
    const RankedTopicList& list = list_for(d);
    std::size_t admitted = 0;
    for (const auto& entry : list.topics) {
      bool admit = false;
      switch (options.admission) {
        case NodeAdmission::top_k:
          admit = admitted < static_cast<std::size_t>(options.top_k);
          break;
        case NodeAdmission::threshold:
          admit = entry.score >= options.tau;
          break;
        case NodeAdmission::all:
          admit = true;
          break;
      }
      if (!admit) break;  // lists are sorted, nothing further qualifies
      BisoNetNode node;
      node.domain = d;
      node.topic = entry.topic;
      node.score = entry.score;
      node.label = node_label(d, entry.topic);
      node.domain_name = corpus.domains[static_cast<std::size_t>(d)];
      node.words = top_words(model, corpus.vocab, entry.topic,
                             options.words_per_node)
                       .words;
      graph.nodes.push_back(std::move(node));
      ++admitted;
    }
  }
  if (graph.nodes.empty()) {
    throw std::runtime_error(
        "generate_bisonet: no topic passed the admission rule; lower tau or raise top_k");
  }

  std::sort(graph.nodes.begin(), graph.nodes.end(),
            [](const BisoNetNode& a, const BisoNetNode& b) {
              if (a.domain != b.domain) return a.domain < b.domain;
              return a.topic < b.topic;
            });

  // Documents per domain and the atan matrix, computed once.
  std::vector<std::vector<std::size_t>> docs_of(corpus.num_domains());
  for (std::int32_t d : wanted) {
    docs_of[static_cast<std::size_t>(d)] = corpus.domain_docs(d);
  }
  Matrix atan_x(model.X.rows(), model.X.cols());
  for (std::size_t i = 0; i < model.X.data().size(); ++i) {
    atan_x.data()[i] = std::atan(model.X.data()[i]);
  }
  const double inv_k = 1.0 / options.k;

  for (std::size_t u = 0; u < graph.nodes.size(); ++u) {
    for (std::size_t v = u + 1; v < graph.nodes.size(); ++v) {
      const BisoNetNode& nu = graph.nodes[u];
      const BisoNetNode& nv = graph.nodes[v];
      if (options.cross_domain_only && nu.domain == nv.domain) continue;

      std::vector<std::size_t> region;
      const auto& du = docs_of[static_cast<std::size_t>(nu.domain)];
      if (nu.domain == nv.domain) {
        region = du;
      } else {
        const auto& dv = docs_of[static_cast<std::size_t>(nv.domain)];
        region.reserve(du.size() + dv.size());
        std::merge(du.begin(), du.end(), dv.begin(), dv.end(), std::back_inserter(region));
      }
      const double weight = bison_over_region(model.X, atan_x, region, nu.topic, nv.topic,
                                              inv_k, options.symmetric_root);
      if (options.edge_rule == EdgeRule::threshold && weight < options.epsilon) continue;
      graph.edges.push_back({u, v, weight});
    }
  }

  if (options.edge_rule == EdgeRule::top_fraction) {
    return prune_top_fraction(graph, options.top_fraction);
  }
  return graph;
}

BisoNet prune_top_fraction(const BisoNet& graph, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("prune_top_fraction: fraction must be in (0, 1]");
  }
  const std::size_t keep =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(graph.edges.size())));

  std::vector<std::size_t> order(graph.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (graph.edges[a].weight != graph.edges[b].weight) {
      return graph.edges[a].weight > graph.edges[b].weight;
    }
    return edge_pair_label(graph, graph.edges[a]) < edge_pair_label(graph, graph.edges[b]);
  });

  BisoNet pruned;
  pruned.nodes = graph.nodes;
  pruned.params = graph.params;
  pruned.model_hash = graph.model_hash;
  pruned.corpus_hash = graph.corpus_hash;
  for (std::size_t i = 0; i < keep; ++i) pruned.edges.push_back(graph.edges[order[i]]);
  std::sort(pruned.edges.begin(), pruned.edges.end(),
            [](const BisoNetEdge& a, const BisoNetEdge& b) {
              return a.u != b.u ? a.u < b.u : a.v < b.v;
            });
  return pruned;
}

BisoNet largest_connected_component(const BisoNet& graph) {
  BisoNet out;
  out.params = graph.params;
  out.model_hash = graph.model_hash;
  out.corpus_hash = graph.corpus_hash;
  if (graph.nodes.empty()) return out;

  // Union-find over node indices.
  std::vector<std::size_t> parent(graph.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : graph.edges) {
    const std::size_t ru = find(e.u);
    const std::size_t rv = find(e.v);
    if (ru != rv) parent[ru] = rv;
  }

  std::vector<std::size_t> component_size(graph.nodes.size(), 0);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) ++component_size[find(i)];

  std::size_t best_root = find(0);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const std::size_t root = find(i);
    if (component_size[root] > component_size[best_root]) {
      best_root = root;
    } else if (component_size[root] == component_size[best_root] && root != best_root) {
      // Tie: prefer the component whose minimum node label is smaller.
      // Node labels inside one component: the smallest-index node has the
      // smallest (domain, topic), but compare labels per the contract.
      std::string min_a, min_b;
      for (std::size_t j = 0; j < graph.nodes.size(); ++j) {
        if (find(j) == best_root && (min_a.empty() || graph.nodes[j].label < min_a)) {
          min_a = graph.nodes[j].label;
        }
        if (find(j) == root && (min_b.empty() || graph.nodes[j].label < min_b)) {
          min_b = graph.nodes[j].label;
        }
      }
      if (min_b < min_a) best_root = root;
    }
  }

  std::vector<std::int64_t> remap(graph.nodes.size(), -1);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (find(i) == best_root) {
      remap[i] = static_cast<std::int64_t>(out.nodes.size());
      out.nodes.push_back(graph.nodes[i]);
    }
  }
  for (const auto& e : graph.edges) {
    if (remap[e.u] >= 0 && remap[e.v] >= 0) {
      out.edges.push_back({static_cast<std::size_t>(remap[e.u]),
                           static_cast<std::size_t>(remap[e.v]), e.weight});
    }
  }
  return out;
}

bool graph_equal(const BisoNet& a, const BisoNet& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  const auto node_key = [](const BisoNetNode& n) {
    return std::tuple(n.domain, n.topic, n.score, n.label, n.domain_name, n.words);
  };
  auto nodes_a = a.nodes;
  auto nodes_b = b.nodes;
  const auto node_less = [&](const BisoNetNode& x, const BisoNetNode& y) {
    return node_key(x) < node_key(y);
  };
  std::sort(nodes_a.begin(), nodes_a.end(), node_less);
  std::sort(nodes_b.begin(), nodes_b.end(), node_less);
  for (std::size_t i = 0; i < nodes_a.size(); ++i) {
    if (node_key(nodes_a[i]) != node_key(nodes_b[i])) return false;
  }

  using EdgeKey = std::tuple<std::string, std::string, double>;
  const auto edge_keys = [](const BisoNet& g) {
    std::vector<EdgeKey> keys;
    keys.reserve(g.edges.size());
    for (const auto& e : g.edges) {
      const std::string& lu = g.nodes[e.u].label;
      const std::string& lv = g.nodes[e.v].label;
      keys.emplace_back(std::min(lu, lv), std::max(lu, lv), e.weight);
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  return edge_keys(a) == edge_keys(b);
}

}  // namespace bisonet
