#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kwx/graph.hpp"

namespace kwx {

struct DetectorParams {
    std::uint64_t seed = 42;
    int max_passes = 50;          // aggregation rounds / sweeps cap
    double tolerance = 1e-9;      // minimum objective gain to continue
    int min_community_size = 10;  // downstream filtering default
};

// Greedy modularity optimization: local moves to the best positive-gain
// neighbor community, then aggregation into super-nodes, repeated until no
// gain above tolerance; returns the flattened base-level partition.
Partition multilevel(const Graph& g, const DetectorParams& params);

// Asynchronous label propagation: unique initial labels, seeded-random node
// order reshuffled each sweep, weighted neighborhood majority with uniform
// random tie-breaking; stops once every node holds a majority label of its
// neighborhood, capped at 100 sweeps.
Partition label_propagation(const Graph& g, const DetectorParams& params);

// Local moving + refinement (communities split into well-connected
// subcommunities before aggregation).  Every returned community induces a
// connected subgraph.
Partition leiden(const Graph& g, const DetectorParams& params);

// Agglomerative modularity clustering from singletons, always merging the
// connected community pair with the largest Q increase (exact gain ties
// ordered by seeded draw), stopping when no merge improves Q, then
// polishing with seeded single-node moves (merges cannot be undone, so an
// early merge can wall off the optimum); Q never decreases, and the
// maximum-Q partition observed is returned.
Partition fast_greedy(const Graph& g, const DetectorParams& params);

// Two-level map-equation minimizer with seeded greedy node moves and
// aggregation passes; stationary visit rates from the degree-proportional
// random walk.
Partition infomap(const Graph& g, const DetectorParams& params);

// Two-level description length L(M) in bits for a given partition.
double map_equation(const Graph& g, const Partition& p);

// Drops communities smaller than min_size; their members get label -1 in
// the returned partition and are listed in the removed set.  Errors when
// nothing survives.
std::pair<Partition, std::vector<std::size_t>> filter_small_communities(const Partition& p,
                                                                        int min_size);

// Adjusted Rand index between two partitions over the same node set.
double compare_partitions(const Partition& a, const Partition& b);

} // namespace kwx
