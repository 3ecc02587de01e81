#pragma once

// Plain-text graph files:
//
//   # comments and blank lines are ignored
//   N
//   symmetric: true        (optional; each listed edge is mirrored)
//   i j w                  (1-based; weight w on the edge carrying j's state into i)

#include <fstream>
#include <sstream>
#include <string>

#include "sdcons/errors.hpp"
#include "sdcons/cli/format.hpp"
#include "sdcons/graph.hpp"

namespace sdcons::cli {

inline graph::WeightedDigraph parse_graph(std::istream& in, const std::string& origin = "<graph>") {
  std::string line;
  std::size_t lineno = 0;
  std::optional<graph::WeightedDigraph> g;
  bool symmetric = false;
  bool edges_started = false;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (!g) {
      std::size_t n = 0;
      std::istringstream ns(first);
      std::string rest;
      if (!(ns >> n) || (ns >> rest) || (ls >> rest)) fail("expected agent count N");
      try {
        g.emplace(n);
      } catch (const std::exception& e) {
        fail(e.what());
      }
      continue;
    }
    if (first == "symmetric:") {
      std::string v, rest;
      if (edges_started) fail("'symmetric:' must precede the edge list");
      if (!(ls >> v) || (ls >> rest) || (v != "true" && v != "false")) fail("expected 'symmetric: true|false'");
      symmetric = v == "true";
      continue;
    }
    edges_started = true;
    std::istringstream es(line);
    long i = 0, j = 0;
    double w = 0.0;
    std::string rest;
    if (!(es >> i >> j >> w) || (es >> rest)) fail("expected 'i j w'");
    if (i < 1 || j < 1 || static_cast<std::size_t>(i) > g->size() || static_cast<std::size_t>(j) > g->size())
      fail("node index out of range");
    try {
      if (symmetric)
        g->set_undirected(i - 1, j - 1, w);
      else
        g->set_weight(i - 1, j - 1, w);
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (!g) throw ConfigError(origin + ": missing agent count");
  return *g;
}

inline graph::WeightedDigraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file '" + path + "'");
  return parse_graph(in, path);
}

inline void write_graph(std::ostream& os, const graph::WeightedDigraph& g) {
  const bool sym = graph::is_balanced(g, 0.0);
  os << g.size() << '\n';
  if (sym) os << "symmetric: true\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (sym && j < i) continue;
      if (g.weight(i, j) != 0.0) os << i + 1 << ' ' << j + 1 << ' ' << shortest(g.weight(i, j)) << '\n';
    }
}

}  // namespace sdcons::cli
