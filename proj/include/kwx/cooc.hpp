#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "kwx/graph.hpp"
#include "kwx/ranking.hpp"

namespace kwx {

using EmbeddingTable = std::unordered_map<std::string, std::vector<double>>;

struct CoocParams {
    int window = 2;
    // Virtual links: extra unit-weight edges between still-unlinked token
    // pairs whose embedding vectors reach the cosine threshold.
    const EmbeddingTable* embeddings = nullptr;
    double similarity_threshold = 0.8;
};

// Node per distinct token; edge weight = number of position pairs i < j with
// j - i <= window and tokens[i] != tokens[j].
Graph build_cooc_network(const std::vector<std::string>& tokens, const CoocParams& params);

enum class CentralityMetric { degree, pagerank, betweenness, closeness, eigenvector };

// degree = strength (weighted); pagerank: damping 0.85, tolerance 1e-10,
// dangling mass spread uniformly; betweenness: exact unit-length
// shortest-path pair counts (weights ignored as lengths); closeness:
// harmonic (finite on disconnected graphs); eigenvector: power iteration on
// the weighted adjacency, tolerance 1e-10, convergence error after 10,000
// iterations (bipartite oscillation).
std::unordered_map<std::string, double> centrality(const Graph& g, CentralityMetric metric);

// PageRank with an explicit damping factor in (0,1); centrality(pagerank)
// is exactly this function at 0.85, and textrank scores through it too so
// the compositional identity between the two holds bit-for-bit.
std::unordered_map<std::string, double> pagerank_centrality(const Graph& g, double damping);

// kappa_h(i) = exp(-sum_j p_h(i,j) ln p_h(i,j)) over the h-step
// degree-normalized transition probabilities, h in {1,2}; isolated nodes
// get 0.
std::unordered_map<std::string, double> accessibility(const Graph& g, int h);

// Descending by score, ties lexicographic, truncated to k.
KeywordRanking rank_by_centrality(const std::unordered_map<std::string, double>& scores,
                                  std::size_t k);

// "token<TAB>v1 v2 ... vd" rows; shared with statkw.embedding_rank.
EmbeddingTable load_embeddings(const std::string& path);

} // namespace kwx
