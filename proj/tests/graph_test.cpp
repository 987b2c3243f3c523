#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bisonet/graph.hpp"
#include "bisonet/graph_export.hpp"
#include "bisonet/rng.hpp"
#include "support/synthetic.hpp"

using namespace bisonet;
using testsupport::TempDir;

namespace {

Matrix random_x(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(rows, cols);
  for (double& v : X.data()) v = rng.uniform01();
  return X;
}

// Two domains, three topics, six docs; X rows normalized by hand.
struct SmallWorld {
  Corpus corpus;
  TopicModel model;
  OutlierSet outliers;
  std::vector<RankedTopicList> ranked;
};

SmallWorld make_small_world() {
  SmallWorld world;
  std::vector<std::vector<std::string>> docs(6);
  std::vector<int> labels = {0, 0, 0, 1, 1, 1};
  const char* words[] = {"redx", "bluey", "greenz"};
  Rng rng(13);
  for (auto& d : docs) {
    for (int i = 0; i < 12; ++i) d.push_back(words[rng.uniform_index(3)]);
  }
  world.corpus = testsupport::make_corpus_from_tokens(docs, labels, {"left", "right"});

  TopicModel& model = world.model;
  model.num_topics = 3;
  model.vocab_size = world.corpus.vocab.size();
  model.alpha = 1.0;
  model.beta = 0.1;
  model.phi = Matrix(3, static_cast<std::size_t>(model.vocab_size), 1.0 / model.vocab_size);
  model.X = Matrix(6, 3);
  const double rows[6][3] = {{0.7, 0.2, 0.1}, {0.5, 0.3, 0.2}, {0.6, 0.1, 0.3},
                             {0.1, 0.8, 0.1}, {0.2, 0.6, 0.2}, {0.3, 0.3, 0.4}};
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t t = 0; t < 3; ++t) model.X(i, t) = rows[i][t];
  }
  model.vocab_hash = world.corpus.vocab.content_hash();
  model.corpus_hash = world.corpus.content_hash();

  world.outliers.by_domain = {{2}, {5}};
  world.outliers.predicted = {0, 0, 1, 1, 1, 0};
  for (std::int32_t d = 0; d < 2; ++d) {
    world.ranked.push_back(rank_bisociative_topics(world.corpus, model, world.outliers, d));
  }
  return world;
}

BisoNetOptions all_nodes_options() {
  BisoNetOptions options;
  options.admission = NodeAdmission::all;
  options.edge_rule = EdgeRule::none;
  options.k = 0.5;
  return options;
}

}  // namespace

// ---------------------------------------------------------------------------
// topic_bison_measure

TEST_CASE("a vanishing topic column yields weight zero") {
  Matrix X = random_x(8, 3, 1);
  for (std::size_t i = 0; i < 8; ++i) X(i, 1) = 0.0;
  std::vector<std::size_t> docs(8);
  std::iota(docs.begin(), docs.end(), 0);
  CHECK(topic_bison_measure(X, docs, 1, 2, 0.5) == 0.0);
  CHECK(topic_bison_measure(X, docs, 2, 1, 0.5) == 0.0);
}

TEST_CASE("equal proportions with k=1 give the squared proportion") {
  Matrix X(1, 2);
  X(0, 0) = 0.4;
  X(0, 1) = 0.4;
  const std::vector<std::size_t> docs = {0};
  CHECK(topic_bison_measure(X, docs, 0, 1, 1.0) == doctest::Approx(0.16).epsilon(1e-12));
}

TEST_CASE("single-document closed form matches for k=0.5") {
  Matrix X(1, 2);
  X(0, 0) = 1.0;
  X(0, 1) = 0.5;
  const std::vector<std::size_t> docs = {0};
  // (1 * 0.5)^2 * (1 - (atan 1 - atan 0.5) / atan 1) = 0.25 * atan(0.5)/atan(1)
  const double expected = 0.25 * (std::atan(0.5) / std::atan(1.0));
  CHECK(topic_bison_measure(X, docs, 0, 1, 0.5) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the measure is exactly symmetric") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(20);
    const Matrix X = random_x(n, 4, 100 + static_cast<std::uint64_t>(trial));
    std::vector<std::size_t> docs;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform01() < 0.7) docs.push_back(i);
    }
    if (docs.empty()) docs.push_back(0);
    const double k = std::vector<double>{0.5, 1.0, 2.0}[trial % 3];
    const std::int32_t p = static_cast<std::int32_t>(rng.uniform_index(4));
    const std::int32_t q = static_cast<std::int32_t>(rng.uniform_index(4));
    CHECK(topic_bison_measure(X, docs, p, q, k) == topic_bison_measure(X, docs, q, p, k));
  }
}

TEST_CASE("per-document terms stay in the unit interval for k <= 1") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix X = random_x(1, 2, 200 + static_cast<std::uint64_t>(trial));
    const std::vector<std::size_t> docs = {0};
    for (double k : {0.3, 0.5, 1.0}) {
      const double term = topic_bison_measure(X, docs, 0, 1, k);
      CHECK(term >= 0.0);
      CHECK(term <= 1.0);
    }
  }
  // Hence a weight never exceeds the document count.
  const Matrix X = random_x(40, 3, 999);
  std::vector<std::size_t> docs(40);
  std::iota(docs.begin(), docs.end(), 0);
  CHECK(topic_bison_measure(X, docs, 0, 1, 0.5) <= 40.0);
}

TEST_CASE("documents with zero proportion in both topics do not change the weight") {
  Matrix X = random_x(5, 2, 7);
  std::vector<std::size_t> docs = {0, 1, 2, 3, 4};
  const double before = topic_bison_measure(X, docs, 0, 1, 0.5);
  Matrix extended(7, 2, 0.0);
  for (std::size_t i = 0; i < 5; ++i) {
    extended(i, 0) = X(i, 0);
    extended(i, 1) = X(i, 1);
  }
  std::vector<std::size_t> extended_docs = {0, 1, 2, 3, 4, 5, 6};
  CHECK(topic_bison_measure(extended, extended_docs, 0, 1, 0.5) == before);
}

TEST_CASE("the literal root form is available and asymmetric") {
  Matrix X(1, 2);
  X(0, 0) = 0.9;
  X(0, 1) = 0.2;
  const std::vector<std::size_t> docs = {0};
  const double sim = 1.0 - std::abs(std::atan(0.9) - std::atan(0.2)) / std::atan(1.0);
  const double literal_pq = std::pow(0.9, 2.0) * 0.2 * sim;  // root on the first factor only
  const double literal_qp = std::pow(0.2, 2.0) * 0.9 * sim;
  CHECK(topic_bison_measure(X, docs, 0, 1, 0.5, false) ==
        doctest::Approx(literal_pq).epsilon(1e-12));
  CHECK(topic_bison_measure(X, docs, 1, 0, 0.5, false) ==
        doctest::Approx(literal_qp).epsilon(1e-12));
  CHECK(topic_bison_measure(X, docs, 0, 1, 0.5, false) !=
        topic_bison_measure(X, docs, 1, 0, 0.5, false));
}

TEST_CASE("bison measure rejects bad arguments") {
  const Matrix X = random_x(3, 2, 8);
  const std::vector<std::size_t> docs = {0, 1};
  CHECK_THROWS_AS(topic_bison_measure(X, docs, 0, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(topic_bison_measure(X, docs, 0, 1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(topic_bison_measure(X, docs, 0, 2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(topic_bison_measure(X, {}, 0, 1, 1.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// generate_bisonet

TEST_CASE("a tau admitting one topic in one domain gives a single-node graph") {
  SmallWorld world = make_small_world();
  BisoNetOptions options;
  options.admission = NodeAdmission::threshold;
  // Highest score across domains is unique; set tau just below it.
  double best = 0.0;
  for (const auto& list : world.ranked) best = std::max(best, list.topics.front().score);
  options.tau = best - 1e-9;
  const BisoNet graph = generate_bisonet(world.corpus, world.model, world.ranked, options);
  CHECK(graph.nodes.size() == 1);
  CHECK(graph.edges.empty());
}

TEST_CASE("an impossible tau is rejected with advice") {
  SmallWorld world = make_small_world();
  BisoNetOptions options;
  options.admission = NodeAdmission::threshold;
  options.tau = 2.0;
  CHECK_THROWS_WITH_AS(generate_bisonet(world.corpus, world.model, world.ranked, options),
                       doctest::Contains("lower tau"), std::runtime_error);
}

TEST_CASE("full 6-node graph weights match a brute-force evaluation") {
  SmallWorld world = make_small_world();
  const BisoNet graph =
      generate_bisonet(world.corpus, world.model, world.ranked, all_nodes_options());
  CHECK(graph.nodes.size() == 6);
  CHECK(graph.edges.size() == 15);

  const double atan_one = std::atan(1.0);
  for (const auto& edge : graph.edges) {
    const auto& nu = graph.nodes[edge.u];
    const auto& nv = graph.nodes[edge.v];
    // Union of the endpoint domains' documents (all six when they differ).
    std::vector<std::size_t> region;
    for (std::size_t i = 0; i < 6; ++i) {
      const std::int32_t d = world.corpus.documents[i].domain;
      if (d == nu.domain || d == nv.domain) region.push_back(i);
    }
    double expected = 0.0;
    for (std::size_t i : region) {
      const double xp = world.model.X(i, static_cast<std::size_t>(nu.topic));
      const double xq = world.model.X(i, static_cast<std::size_t>(nv.topic));
      expected += std::pow(xp * xq, 2.0) *
                  (1.0 - std::abs(std::atan(xp) - std::atan(xq)) / atan_one);
    }
    CHECK(edge.weight == doctest::Approx(expected).epsilon(1e-12));
    // The contract: edge weights are exactly what the public measure gives.
    CHECK(edge.weight == topic_bison_measure(world.model.X, region, nu.topic, nv.topic, 0.5));
  }
}

TEST_CASE("cross-domain-only mode drops same-domain edges") {
  SmallWorld world = make_small_world();
  BisoNetOptions options = all_nodes_options();
  options.cross_domain_only = true;
  const BisoNet graph = generate_bisonet(world.corpus, world.model, world.ranked, options);
  CHECK(graph.nodes.size() == 6);
  CHECK(graph.edges.size() == 9);  // 3 x 3 cross pairs
  for (const auto& e : graph.edges) {
    CHECK(graph.nodes[e.u].domain != graph.nodes[e.v].domain);
  }
}

TEST_CASE("top-k admission takes the k best per domain") {
  SmallWorld world = make_small_world();
  BisoNetOptions options;
  options.admission = NodeAdmission::top_k;
  options.top_k = 2;
  const BisoNet graph = generate_bisonet(world.corpus, world.model, world.ranked, options);
  CHECK(graph.nodes.size() == 4);
  for (const auto& node : graph.nodes) {
    // Each admitted topic must be one of its domain's two best.
    const auto& list = world.ranked[static_cast<std::size_t>(node.domain)];
    const bool in_top2 = node.topic == list.topics[0].topic || node.topic == list.topics[1].topic;
    CHECK(in_top2);
  }
}

TEST_CASE("node labels follow the domain_topic convention") {
  SmallWorld world = make_small_world();
  const BisoNet graph =
      generate_bisonet(world.corpus, world.model, world.ranked, all_nodes_options());
  std::set<std::string> labels;
  for (const auto& node : graph.nodes) {
    CHECK(node.label == std::to_string(node.domain) + "_" + std::to_string(node.topic));
    CHECK(labels.insert(node.label).second);  // unique (domain, topic)
    CHECK(node.words.size() <= 10);
    CHECK(node.domain_name == world.corpus.domains[static_cast<std::size_t>(node.domain)]);
  }
}

// ---------------------------------------------------------------------------
// prune_top_fraction

namespace {

BisoNet synthetic_graph(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  BisoNet graph;
  for (std::size_t i = 0; i < nodes; ++i) {
    BisoNetNode node;
    node.domain = static_cast<std::int32_t>(i % 3);
    node.topic = static_cast<std::int32_t>(i);
    node.score = 0.5;
    node.label = std::to_string(node.domain) + "_" + std::to_string(node.topic);
    graph.nodes.push_back(std::move(node));
  }
  Rng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (graph.edges.size() < edges) {
    std::size_t u = rng.uniform_index(nodes);
    std::size_t v = rng.uniform_index(nodes);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) continue;
    graph.edges.push_back({u, v, rng.uniform01()});
  }
  std::sort(graph.edges.begin(), graph.edges.end(),
            [](const BisoNetEdge& a, const BisoNetEdge& b) {
              return a.u != b.u ? a.u < b.u : a.v < b.v;
            });
  return graph;
}

}  // namespace

TEST_CASE("fraction one is the identity") {
  const BisoNet graph = synthetic_graph(20, 60, 5);
  const BisoNet pruned = prune_top_fraction(graph, 1.0);
  CHECK(graph_equal(graph, pruned));
}

TEST_CASE("a tiny fraction keeps exactly the heaviest edge") {
  const BisoNet graph = synthetic_graph(30, 200, 6);
  const BisoNet pruned = prune_top_fraction(graph, 0.005);  // ceil(1.0) = 1
  REQUIRE(pruned.edges.size() == 1);
  double max_weight = 0.0;
  for (const auto& e : graph.edges) max_weight = std::max(max_weight, e.weight);
  CHECK(pruned.edges[0].weight == max_weight);
  CHECK(pruned.nodes.size() == graph.nodes.size());  // isolated nodes retained
}

TEST_CASE("pruning matches a full-sort oracle") {
  const BisoNet graph = synthetic_graph(60, 1000, 7);
  const double fraction = 0.01;
  const BisoNet pruned = prune_top_fraction(graph, fraction);

  auto weights = std::vector<double>();
  for (const auto& e : graph.edges) weights.push_back(e.weight);
  std::sort(weights.begin(), weights.end(), std::greater<>());
  const std::size_t keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(graph.edges.size())));
  REQUIRE(pruned.edges.size() == keep);
  std::vector<double> kept;
  for (const auto& e : pruned.edges) kept.push_back(e.weight);
  std::sort(kept.begin(), kept.end(), std::greater<>());
  for (std::size_t i = 0; i < keep; ++i) CHECK(kept[i] == weights[i]);
}

TEST_CASE("pruning is monotone in the fraction") {
  const BisoNet graph = synthetic_graph(40, 300, 8);
  const BisoNet loose = prune_top_fraction(graph, 0.5);
  const BisoNet tight = prune_top_fraction(graph, 0.1);
  std::set<std::pair<std::size_t, std::size_t>> loose_edges;
  for (const auto& e : loose.edges) loose_edges.insert({e.u, e.v});
  for (const auto& e : tight.edges) CHECK(loose_edges.count({e.u, e.v}) == 1);
}

TEST_CASE("prune validates the fraction") {
  const BisoNet graph = synthetic_graph(5, 4, 9);
  CHECK_THROWS_AS(prune_top_fraction(graph, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prune_top_fraction(graph, 1.5), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// largest_connected_component

TEST_CASE("a connected graph passes through unchanged") {
  BisoNet graph = synthetic_graph(6, 0, 10);
  for (std::size_t i = 0; i + 1 < 6; ++i) graph.edges.push_back({i, i + 1, 1.0});
  const BisoNet lcc = largest_connected_component(graph);
  CHECK(graph_equal(graph, lcc));
}

TEST_CASE("the larger of two components wins") {
  BisoNet graph = synthetic_graph(5, 0, 11);
  graph.edges.push_back({0, 1, 1.0});
  graph.edges.push_back({1, 2, 1.0});
  graph.edges.push_back({3, 4, 1.0});
  const BisoNet lcc = largest_connected_component(graph);
  CHECK(lcc.nodes.size() == 3);
  CHECK(lcc.edges.size() == 2);
}

TEST_CASE("empty input gives an empty graph") {
  BisoNet graph;
  const BisoNet lcc = largest_connected_component(graph);
  CHECK(lcc.nodes.empty());
  CHECK(lcc.edges.empty());
}

TEST_CASE("lcc matches a union-find oracle on random graphs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    BisoNet graph = synthetic_graph(50, 0, 100 + seed);
    Rng rng(seed);
    const std::size_t edges = 20 + rng.uniform_index(40);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t i = 0; i < edges; ++i) {
      std::size_t u = rng.uniform_index(50);
      std::size_t v = rng.uniform_index(50);
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      if (seen.insert({u, v}).second) graph.edges.push_back({u, v, rng.uniform01()});
    }

    // Oracle: naive union-find with full path scans.
    std::vector<std::size_t> root(50);
    std::iota(root.begin(), root.end(), 0);
    const auto find_root = [&](std::size_t x) {
      while (root[x] != x) x = root[x];
      return x;
    };
    for (const auto& e : graph.edges) root[find_root(e.u)] = find_root(e.v);
    std::map<std::size_t, std::size_t> sizes;
    for (std::size_t i = 0; i < 50; ++i) ++sizes[find_root(i)];
    std::size_t best = 0;
    for (const auto& [r, s] : sizes) best = std::max(best, s);

    const BisoNet lcc = largest_connected_component(graph);
    CHECK(lcc.nodes.size() == best);
    // Every kept edge joins kept nodes; count edges fully inside the chosen
    // component for the oracle comparison.
    std::set<std::string> kept_labels;
    for (const auto& n : lcc.nodes) kept_labels.insert(n.label);
    std::size_t expected_edges = 0;
    for (const auto& e : graph.edges) {
      if (kept_labels.count(graph.nodes[e.u].label) &&
          kept_labels.count(graph.nodes[e.v].label)) {
        ++expected_edges;
      }
    }
    CHECK(lcc.edges.size() == expected_edges);
  }
}

// ---------------------------------------------------------------------------
// exports

namespace {
BisoNet one_node_graph() {
  BisoNet graph;
  BisoNetNode node;
  node.domain = 0;
  node.topic = 3;
  node.score = 0.25;
  node.label = "0_3";
  node.domain_name = "food";
  node.words = {"soup", "kitchen"};
  graph.nodes.push_back(node);
  graph.params.k = 0.5;
  return graph;
}
}  // namespace

TEST_CASE("one-node graph exports match golden bytes") {
  const BisoNet graph = one_node_graph();
  CHECK(to_dot(graph) ==
        "graph bisonet {\n"
        "  \"0_3\" [domain=\"food\", topic=3, score=0.25, words=\"soup kitchen\"];\n"
        "}\n");
  CHECK(to_graphml(graph) ==
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        "  <key id=\"domain\" for=\"node\" attr.name=\"domain\" attr.type=\"string\"/>\n"
        "  <key id=\"topic\" for=\"node\" attr.name=\"topic\" attr.type=\"int\"/>\n"
        "  <key id=\"score\" for=\"node\" attr.name=\"score\" attr.type=\"double\"/>\n"
        "  <key id=\"words\" for=\"node\" attr.name=\"words\" attr.type=\"string\"/>\n"
        "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        "  <graph id=\"bisonet\" edgedefault=\"undirected\">\n"
        "    <node id=\"0_3\">\n"
        "      <data key=\"domain\">food</data>\n"
        "      <data key=\"topic\">3</data>\n"
        "      <data key=\"score\">0.25</data>\n"
        "      <data key=\"words\">soup kitchen</data>\n"
        "    </node>\n"
        "  </graph>\n"
        "</graphml>\n");
}

TEST_CASE("json export round-trips to an equal graph") {
  SmallWorld world = make_small_world();
  const BisoNet graph =
      generate_bisonet(world.corpus, world.model, world.ranked, all_nodes_options());
  const BisoNet loaded = parse_bisonet_json(to_json_string(graph));
  CHECK(graph_equal(graph, loaded));
  CHECK(loaded.params == graph.params);
  CHECK(loaded.model_hash == graph.model_hash);
  CHECK(loaded.corpus_hash == graph.corpus_hash);
}

TEST_CASE("exports are byte-stable across reruns") {
  SmallWorld world = make_small_world();
  const BisoNet graph =
      generate_bisonet(world.corpus, world.model, world.ranked, all_nodes_options());
  CHECK(to_dot(graph) == to_dot(graph));
  CHECK(to_graphml(graph) == to_graphml(graph));
  CHECK(to_json_string(graph) == to_json_string(graph));

  TempDir dir("export");
  export_graph(graph, GraphFormat::json, dir.file("a.json"));
  const BisoNet reloaded = load_bisonet_json(dir.file("a.json"));
  CHECK(to_dot(reloaded) == to_dot(graph));
  CHECK(to_graphml(reloaded) == to_graphml(graph));
}

TEST_CASE("dot export escapes quotes and scales penwidth") {
  BisoNet graph = one_node_graph();
  graph.nodes[0].domain_name = "fo\"od";
  BisoNetNode other = graph.nodes[0];
  other.topic = 4;
  other.label = "0_4";
  graph.nodes.push_back(other);
  graph.edges.push_back({0, 1, 2.0});
  const std::string dot = to_dot(graph);
  CHECK(dot.find("fo\\\"od") != std::string::npos);
  CHECK(dot.find("penwidth=5") != std::string::npos);  // max weight gets the full width
}
