#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kwx/corpus.hpp"

namespace kwx {

// Undirected weighted simple graph.  Node ids are strings at the boundary,
// mapped to dense indices in insertion order; no self-loops; adding an
// existing edge accumulates its weight.
class Graph {
public:
    std::size_t add_node(const std::string& id); // idempotent, returns index
    void add_edge(const std::string& a, const std::string& b, double weight = 1.0);
    void add_edge_idx(std::size_t a, std::size_t b, double weight = 1.0);
    bool has_edge_idx(std::size_t a, std::size_t b) const;

    std::size_t node_count() const { return ids_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    double total_weight() const { return total_weight_; } // m

    const std::string& node_id(std::size_t idx) const { return ids_[idx]; }
    std::optional<std::size_t> node_index(const std::string& id) const;

    // Neighbor lists sorted by node index (deterministic iteration order).
    const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t idx) const;
    double strength(std::size_t idx) const; // sum of incident edge weights
    std::size_t degree(std::size_t idx) const;

    // Deterministic edge enumeration: (a, b, w) with a < b, sorted.
    std::vector<std::tuple<std::size_t, std::size_t, double>> edge_list() const;

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::uint64_t, double> edges_; // key packs (min,max)
    double total_weight_ = 0.0;
    mutable std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
    mutable bool adjacency_dirty_ = true;
    void build_adjacency() const;
};

// Flat community assignment over a graph's node indices.  Labels are
// canonical (0..k-1 in order of first appearance) after canonicalize();
// filtered-out nodes carry label -1.
struct Partition {
    std::vector<int> labels;
    int community_count = 0;
    void canonicalize();
};

// One node per document; an undirected unit-weight edge whenever either
// document's reference list names the other.  Out-of-corpus references are
// ignored; mutual citations collapse to a single edge.
Graph build_citation_network(const Corpus& corpus);

// Newman-Girvan Q = sum_c (e_cc/m - (S_c/2m)^2); nodes labeled -1 are
// treated as singleton spectators (their edges to labeled nodes count in
// neither community's internal weight).
double modularity(const Graph& g, const Partition& p);

Partition connected_components(const Graph& g);

// Edge list "a<TAB>b<TAB>weight" plus a node-list file for isolates.
void save_graph(const Graph& g, const std::string& edges_path, const std::string& nodes_path);
Graph load_graph(const std::string& edges_path, const std::string& nodes_path);

// Partition file "node<TAB>label".
void save_partition(const Graph& g, const Partition& p, const std::string& path);
Partition load_partition(const Graph& g, const std::string& path);

} // namespace kwx
