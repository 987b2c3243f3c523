#include "bisonet/graph_export.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "bisonet/hash.hpp"

namespace bisonet {

using nlohmann::json;

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "dot") return GraphFormat::dot;
  if (name == "graphml") return GraphFormat::graphml;
  if (name == "json") return GraphFormat::json;
  throw std::invalid_argument("unknown graph format: " + std::string(name));
}

std::string_view to_string(GraphFormat format) {
  switch (format) {
    case GraphFormat::dot:
      return "dot";
    case GraphFormat::graphml:
      return "graphml";
    case GraphFormat::json:
      return "json";
  }
  return "";
}

namespace {

// Shortest round-trip decimal form; deterministic across runs.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string escape_dot(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Node indices sorted by label; edges sorted by (min label, max label).
struct SortedView {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> edges;
};

SortedView sorted_view(const BisoNet& graph) {
  SortedView view;
  view.nodes.resize(graph.nodes.size());
  std::iota(view.nodes.begin(), view.nodes.end(), 0);
  std::sort(view.nodes.begin(), view.nodes.end(), [&](std::size_t a, std::size_t b) {
    return graph.nodes[a].label < graph.nodes[b].label;
  });
  view.edges.resize(graph.edges.size());
  std::iota(view.edges.begin(), view.edges.end(), 0);
  const auto pair_label = [&](std::size_t e) {
    const std::string& a = graph.nodes[graph.edges[e].u].label;
    const std::string& b = graph.nodes[graph.edges[e].v].label;
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  std::sort(view.edges.begin(), view.edges.end(),
            [&](std::size_t a, std::size_t b) { return pair_label(a) < pair_label(b); });
  return view;
}

json params_to_json(const BisoNetOptions& p) {
  json j;
  switch (p.admission) {
    case NodeAdmission::top_k: j["admission"] = "top_k"; break;
    case NodeAdmission::threshold: j["admission"] = "tau"; break;
    case NodeAdmission::all: j["admission"] = "all"; break;
  }
  j["top_k"] = p.top_k;
  j["tau"] = p.tau;
  switch (p.edge_rule) {
    case EdgeRule::none: j["edge_rule"] = "none"; break;
    case EdgeRule::threshold: j["edge_rule"] = "epsilon"; break;
    case EdgeRule::top_fraction: j["edge_rule"] = "top_fraction"; break;
  }
  j["epsilon"] = p.epsilon;
  j["top_fraction"] = p.top_fraction;
  j["k"] = p.k;
  j["root"] = p.symmetric_root ? "symmetric" : "literal";
  j["cross_domain_only"] = p.cross_domain_only;
  j["domains"] = p.domains;
  j["words_per_node"] = p.words_per_node;
  return j;
}

BisoNetOptions params_from_json(const json& j) {
  BisoNetOptions p;
  const std::string admission = j.value("admission", "top_k");
  if (admission == "top_k") p.admission = NodeAdmission::top_k;
  else if (admission == "tau") p.admission = NodeAdmission::threshold;
  else if (admission == "all") p.admission = NodeAdmission::all;
  else throw std::runtime_error("graph artifact: unknown admission rule " + admission);
  p.top_k = j.value("top_k", 10);
  p.tau = j.value("tau", 0.0);
  const std::string edge_rule = j.value("edge_rule", "none");
  if (edge_rule == "none") p.edge_rule = EdgeRule::none;
  else if (edge_rule == "epsilon") p.edge_rule = EdgeRule::threshold;
  else if (edge_rule == "top_fraction") p.edge_rule = EdgeRule::top_fraction;
  else throw std::runtime_error("graph artifact: unknown edge rule " + edge_rule);
  p.epsilon = j.value("epsilon", 0.0);
  p.top_fraction = j.value("top_fraction", 1.0);
  p.k = j.value("k", 0.5);
  p.symmetric_root = j.value("root", "symmetric") == "symmetric";
  p.cross_domain_only = j.value("cross_domain_only", false);
  p.domains = j.value("domains", std::vector<std::int32_t>{});
  p.words_per_node = j.value("words_per_node", 10);
  return p;
}

constexpr const char* kGraphFormatTag = "bisonet-graph";
constexpr int kGraphVersion = 1;

}  // namespace

std::string to_dot(const BisoNet& graph) {
  const SortedView view = sorted_view(graph);
  double max_weight = 0.0;
  for (const auto& e : graph.edges) max_weight = std::max(max_weight, e.weight);

  std::ostringstream out;
  out << "graph bisonet {\n";
  for (std::size_t i : view.nodes) {
    const BisoNetNode& n = graph.nodes[i];
    out << "  \"" << escape_dot(n.label) << "\" [domain=\"" << escape_dot(n.domain_name)
        << "\", topic=" << n.topic << ", score=" << format_double(n.score) << ", words=\""
        << escape_dot(join_words(n.words)) << "\"];\n";
  }
  for (std::size_t i : view.edges) {
    const BisoNetEdge& e = graph.edges[i];
    const std::string& lu = graph.nodes[e.u].label;
    const std::string& lv = graph.nodes[e.v].label;
    const std::string& first = std::min(lu, lv);
    const std::string& second = std::max(lu, lv);
    // Pen width scales linearly with weight so viewers show strength at a
    // glance.
    const double penwidth = max_weight > 0.0 ? 0.5 + 4.5 * e.weight / max_weight : 0.5;
    out << "  \"" << escape_dot(first) << "\" -- \"" << escape_dot(second)
        << "\" [weight=" << format_double(e.weight)
        << ", penwidth=" << format_double(penwidth) << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string to_graphml(const BisoNet& graph) {
  const SortedView view = sorted_view(graph);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"domain\" for=\"node\" attr.name=\"domain\" attr.type=\"string\"/>\n"
      << "  <key id=\"topic\" for=\"node\" attr.name=\"topic\" attr.type=\"int\"/>\n"
      << "  <key id=\"score\" for=\"node\" attr.name=\"score\" attr.type=\"double\"/>\n"
      << "  <key id=\"words\" for=\"node\" attr.name=\"words\" attr.type=\"string\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <graph id=\"bisonet\" edgedefault=\"undirected\">\n";
  for (std::size_t i : view.nodes) {
    const BisoNetNode& n = graph.nodes[i];
    out << "    <node id=\"" << escape_xml(n.label) << "\">\n"
        << "      <data key=\"domain\">" << escape_xml(n.domain_name) << "</data>\n"
        << "      <data key=\"topic\">" << n.topic << "</data>\n"
        << "      <data key=\"score\">" << format_double(n.score) << "</data>\n"
        << "      <data key=\"words\">" << escape_xml(join_words(n.words)) << "</data>\n"
        << "    </node>\n";
  }
  std::size_t edge_id = 0;
  for (std::size_t i : view.edges) {
    const BisoNetEdge& e = graph.edges[i];
    const std::string& lu = graph.nodes[e.u].label;
    const std::string& lv = graph.nodes[e.v].label;
    out << "    <edge id=\"e" << edge_id++ << "\" source=\"" << escape_xml(std::min(lu, lv))
        << "\" target=\"" << escape_xml(std::max(lu, lv)) << "\">\n"
        << "      <data key=\"weight\">" << format_double(e.weight) << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

std::string to_json_string(const BisoNet& graph) {
  const SortedView view = sorted_view(graph);
  json j;
  j["format"] = kGraphFormatTag;
  j["version"] = kGraphVersion;
  j["parameters"] = params_to_json(graph.params);
  j["model_hash"] = hex64(graph.model_hash);
  j["corpus_hash"] = hex64(graph.corpus_hash);
  json nodes = json::array();
  for (std::size_t i : view.nodes) {
    const BisoNetNode& n = graph.nodes[i];
    nodes.push_back({{"label", n.label},
                     {"domain", n.domain},
                     {"domain_name", n.domain_name},
                     {"topic", n.topic},
                     {"score", n.score},
                     {"words", n.words}});
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (std::size_t i : view.edges) {
    const BisoNetEdge& e = graph.edges[i];
    const std::string& lu = graph.nodes[e.u].label;
    const std::string& lv = graph.nodes[e.v].label;
    edges.push_back({{"source", std::min(lu, lv)},
                     {"target", std::max(lu, lv)},
                     {"weight", e.weight}});
  }
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

void export_graph(const BisoNet& graph, GraphFormat format, const std::string& path) {
  std::string payload;
  switch (format) {
    case GraphFormat::dot: payload = to_dot(graph); break;
    case GraphFormat::graphml: payload = to_graphml(graph); break;
    case GraphFormat::json: payload = to_json_string(graph); break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write graph export: " + path);
  out << payload;
  if (!out) throw std::runtime_error("failed writing graph export: " + path);
}

BisoNet parse_bisonet_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != kGraphFormatTag || j.value("version", 0) != kGraphVersion) {
    throw std::runtime_error("not a graph artifact (or unsupported version)");
  }
  BisoNet graph;
  graph.params = params_from_json(j.at("parameters"));
  graph.model_hash = std::stoull(j.at("model_hash").get<std::string>(), nullptr, 16);
  graph.corpus_hash = std::stoull(j.at("corpus_hash").get<std::string>(), nullptr, 16);
  std::unordered_map<std::string, std::size_t> index_of;
  for (const auto& n : j.at("nodes")) {
    BisoNetNode node;
    node.label = n.at("label").get<std::string>();
    node.domain = n.at("domain").get<std::int32_t>();
    node.domain_name = n.value("domain_name", "");
    node.topic = n.at("topic").get<std::int32_t>();
    node.score = n.at("score").get<double>();
    node.words = n.value("words", std::vector<std::string>{});
    index_of[node.label] = graph.nodes.size();
    graph.nodes.push_back(std::move(node));
  }
  for (const auto& e : j.at("edges")) {
    const auto su = index_of.find(e.at("source").get<std::string>());
    const auto sv = index_of.find(e.at("target").get<std::string>());
    if (su == index_of.end() || sv == index_of.end()) {
      throw std::runtime_error("graph artifact: edge references unknown node");
    }
    std::size_t u = su->second;
    std::size_t v = sv->second;
    if (u > v) std::swap(u, v);
    graph.edges.push_back({u, v, e.at("weight").get<double>()});
  }
  return graph;
}

BisoNet load_bisonet_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open graph artifact: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_bisonet_json(buffer.str());
}

}  // namespace bisonet
