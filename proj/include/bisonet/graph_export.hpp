#pragma once

#include <string>
#include <string_view>

#include "bisonet/graph.hpp"

namespace bisonet {

enum class GraphFormat { dot, graphml, json };

GraphFormat parse_graph_format(std::string_view name);
std::string_view to_string(GraphFormat format);

// All three serializations order nodes and edges by label, format doubles
// with shortest round-trip notation, and are byte-stable across reruns.
std::string to_dot(const BisoNet& graph);
std::string to_graphml(const BisoNet& graph);
std::string to_json_string(const BisoNet& graph);

void export_graph(const BisoNet& graph, GraphFormat format, const std::string& path);

// Parses the JSON serialization back into a graph (params included).
BisoNet load_bisonet_json(const std::string& path);
BisoNet parse_bisonet_json(const std::string& text);

}  // namespace bisonet
