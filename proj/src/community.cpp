#include "kwx/community.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <unordered_map>

#include "kwx/errors.hpp"
#include "kwx/rng.hpp"

namespace kwx {

namespace {

// Internal graph representation for the aggregation-based optimizers.
// Unlike Graph, it allows self-loops (collapsed intra-community weight);
// strength includes twice the self-loop weight, so total strength stays 2m
// across aggregation levels.
struct WorkGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj; // no self-loops here
    std::vector<double> self_loop;
    std::vector<double> strength;
    double two_m = 0.0;
    std::size_t size() const { return adj.size(); }
};

WorkGraph from_graph(const Graph& g) {
    WorkGraph wg;
    std::size_t n = g.node_count();
    wg.adj.resize(n);
    wg.self_loop.assign(n, 0.0);
    wg.strength.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        wg.adj[i] = g.neighbors(i);
        wg.strength[i] = g.strength(i);
    }
    wg.two_m = 2.0 * g.total_weight();
    return wg;
}

// labels must be canonical 0..k-1.
WorkGraph aggregate(const WorkGraph& wg, const std::vector<int>& labels, int k) {
    WorkGraph out;
    out.adj.resize(k);
    out.self_loop.assign(k, 0.0);
    out.strength.assign(k, 0.0);
    out.two_m = wg.two_m;
    std::map<std::pair<int, int>, double> cross;
    for (std::size_t i = 0; i < wg.size(); ++i) {
        int ci = labels[i];
        out.self_loop[ci] += wg.self_loop[i];
        out.strength[ci] += wg.strength[i];
        for (const auto& [j, w] : wg.adj[i]) {
            if (j <= i) continue;
            int cj = labels[j];
            if (ci == cj) {
                out.self_loop[ci] += w;
            } else {
                cross[{std::min(ci, cj), std::max(ci, cj)}] += w;
            }
        }
    }
    for (const auto& [pair, w] : cross) {
        out.adj[pair.first].emplace_back(pair.second, w);
        out.adj[pair.second].emplace_back(pair.first, w);
    }
    for (auto& nbrs : out.adj) std::sort(nbrs.begin(), nbrs.end());
    return out;
}

std::vector<int> singleton_labels(std::size_t n) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i);
    return labels;
}

int canonicalize_labels(std::vector<int>& labels) {
    std::unordered_map<int, int> remap;
    int next = 0;
    for (int& l : labels) {
        auto [it, inserted] = remap.emplace(l, next);
        if (inserted) ++next;
        l = it->second;
    }
    return next;
}

void require_edges(const Graph& g, const char* op) {
    if (g.node_count() == 0 || !(g.total_weight() > 0.0))
        throw precondition_error(std::string(op) + ": graph has no edge weight");
}

// One round of greedy modularity moves over the whole graph: nodes visited
// in seeded-random order, each moved to the neighbor community with the
// best gain above tolerance; sweeps repeat until a full sweep moves nothing.
// Returns true when at least one move happened.
bool local_move_modularity(const WorkGraph& wg, std::vector<int>& labels, Rng& rng,
                           double tolerance) {
    std::size_t n = wg.size();
    double m = wg.two_m / 2.0;
    std::vector<double> comm_strength(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) comm_strength[labels[i]] += wg.strength[i];

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> weight_to(n, 0.0); // scratch: community -> w(i, community)
    std::vector<int> touched;

    bool any_move = false;
    for (;;) {
        bool moved = false;
        rng.shuffle(order);
        for (std::size_t idx = 0; idx < n; ++idx) {
            std::size_t i = order[idx];
            int a = labels[i];
            touched.clear();
            for (const auto& [j, w] : wg.adj[i]) {
                int c = labels[j];
                if (weight_to[c] == 0.0) touched.push_back(c);
                weight_to[c] += w;
            }
            double s_i = wg.strength[i];
            double w_ia = weight_to[a]; // w(i, a \ i)
            double strength_a_less = comm_strength[a] - s_i;
            int best = a;
            double best_gain = tolerance;
            for (const auto& [j, w] : wg.adj[i]) {
                int b = labels[j];
                if (b == a || weight_to[b] == 0.0) continue;
                double gain = (weight_to[b] - w_ia) / m -
                              s_i * (comm_strength[b] - strength_a_less) / (2.0 * m * m);
                if (gain > best_gain) {
                    best_gain = gain;
                    best = b;
                }
                weight_to[b] = 0.0; // mark candidate as handled
            }
            // reset scratch for communities not zeroed in the loop
            for (int c : touched) weight_to[c] = 0.0;
            if (best != a) {
                comm_strength[a] -= s_i;
                comm_strength[best] += s_i;
                labels[i] = best;
                moved = true;
                any_move = true;
            }
        }
        if (!moved) break;
    }
    return any_move;
}

} // namespace

Partition multilevel(const Graph& g, const DetectorParams& params) {
    require_edges(g, "multilevel");
    Rng rng(params.seed);
    WorkGraph wg = from_graph(g);
    std::vector<int> node_to_super = singleton_labels(g.node_count());
    std::vector<int> base_labels = node_to_super;

    for (int pass = 0; pass < params.max_passes; ++pass) {
        std::vector<int> labels = singleton_labels(wg.size());
        bool improved = local_move_modularity(wg, labels, rng, params.tolerance);
        int k = canonicalize_labels(labels);
        for (std::size_t v = 0; v < base_labels.size(); ++v)
            base_labels[v] = labels[node_to_super[v]];
        if (!improved || static_cast<std::size_t>(k) == wg.size()) break;
        node_to_super = base_labels;
        wg = aggregate(wg, labels, k);
    }

    Partition p;
    p.labels = std::move(base_labels);
    p.canonicalize();
    return p;
}

Partition label_propagation(const Graph& g, const DetectorParams& params) {
    require_edges(g, "label_propagation");
    Rng rng(params.seed);
    std::size_t n = g.node_count();
    std::vector<int> labels = singleton_labels(n);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> weight_of(n, 0.0);
    std::vector<int> touched;
    std::vector<int> tied;

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        rng.shuffle(order);
        for (std::size_t idx = 0; idx < n; ++idx) {
            std::size_t i = order[idx];
            if (g.degree(i) == 0) continue;
            touched.clear();
            double best_w = 0.0;
            for (const auto& [j, w] : g.neighbors(i)) {
                int c = labels[j];
                if (weight_of[c] == 0.0) touched.push_back(c);
                weight_of[c] += w;
                best_w = std::max(best_w, weight_of[c]);
            }
            tied.clear();
            for (int c : touched)
                if (weight_of[c] == best_w) tied.push_back(c);
            for (int c : touched) weight_of[c] = 0.0;
            std::sort(tied.begin(), tied.end());
            labels[i] = tied.size() == 1 ? tied[0]
                                         : tied[rng.below(tied.size())];
        }
        // converged once every node already holds one of its neighborhood's
        // majority labels
        bool stable = true;
        for (std::size_t i = 0; i < n && stable; ++i) {
            if (g.degree(i) == 0) continue;
            touched.clear();
            double best_w = 0.0;
            for (const auto& [j, w] : g.neighbors(i)) {
                int c = labels[j];
                if (weight_of[c] == 0.0) touched.push_back(c);
                weight_of[c] += w;
                best_w = std::max(best_w, weight_of[c]);
            }
            if (weight_of[labels[i]] != best_w) stable = false;
            for (int c : touched) weight_of[c] = 0.0;
        }
        if (stable) break;
    }

    Partition p;
    p.labels = std::move(labels);
    p.canonicalize();
    return p;
}

namespace {

// Leiden refinement: inside each local-move community, grow well-connected
// subcommunities by merging singleton nodes into connected refined groups
// with positive modularity gain.  Returns canonical refined labels.
std::vector<int> refine_partition(const WorkGraph& wg, const std::vector<int>& labels, Rng& rng,
                                  int& k_out) {
    std::size_t n = wg.size();
    double m = wg.two_m / 2.0;
    std::vector<int> refined = singleton_labels(n);
    std::vector<double> sub_strength(wg.strength);
    std::vector<std::size_t> sub_size(n, 1);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<double> weight_to(n, 0.0);
    std::vector<int> touched;
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t i = order[idx];
        if (sub_size[refined[i]] != 1) continue; // only singletons move
        touched.clear();
        for (const auto& [j, w] : wg.adj[i]) {
            if (labels[j] != labels[i]) continue; // refinement stays within communities
            int r = refined[j];
            if (r == refined[i]) continue;
            if (weight_to[r] == 0.0) touched.push_back(r);
            weight_to[r] += w;
        }
        double s_i = wg.strength[i];
        int best = -1;
        double best_gain = 0.0;
        for (const auto& [j, w] : wg.adj[i]) {
            if (labels[j] != labels[i]) continue;
            int r = refined[j];
            if (r == refined[i] || weight_to[r] == 0.0) continue;
            double gain = weight_to[r] / m - s_i * sub_strength[r] / (2.0 * m * m);
            if (gain > best_gain) {
                best_gain = gain;
                best = r;
            }
            weight_to[r] = 0.0;
        }
        for (int r : touched) weight_to[r] = 0.0;
        if (best >= 0) {
            sub_strength[best] += s_i;
            sub_size[best] += 1;
            sub_size[refined[i]] = 0;
            refined[i] = best;
        }
    }
    k_out = canonicalize_labels(refined);
    return refined;
}

// Splits every community that induces a disconnected subgraph into its
// connected components.  Never decreases modularity (components share no
// edges, and the squared-strength penalty is superadditive).
void split_disconnected(const Graph& g, std::vector<int>& labels) {
    std::size_t n = g.node_count();
    std::vector<int> component(n, -1);
    int next = 0;
    for (std::size_t start = 0; start < n; ++start) {
        if (component[start] >= 0) continue;
        component[start] = next;
        std::queue<std::size_t> frontier;
        frontier.push(start);
        while (!frontier.empty()) {
            std::size_t u = frontier.front();
            frontier.pop();
            for (const auto& [v, w] : g.neighbors(u)) {
                if (component[v] < 0 && labels[v] == labels[u]) {
                    component[v] = next;
                    frontier.push(v);
                }
            }
        }
        ++next;
    }
    labels = component;
}

} // namespace

Partition leiden(const Graph& g, const DetectorParams& params) {
    require_edges(g, "leiden");
    Rng rng(params.seed);
    WorkGraph wg = from_graph(g);
    std::vector<int> node_to_super = singleton_labels(g.node_count());
    std::vector<int> base_labels = node_to_super;
    std::vector<int> init_labels = singleton_labels(wg.size());

    for (int pass = 0; pass < params.max_passes; ++pass) {
        std::vector<int> labels = init_labels;
        bool improved = local_move_modularity(wg, labels, rng, params.tolerance);
        int k = canonicalize_labels(labels);
        for (std::size_t v = 0; v < base_labels.size(); ++v)
            base_labels[v] = labels[node_to_super[v]];
        if (!improved || static_cast<std::size_t>(k) == wg.size()) break;

        int rk = 0;
        std::vector<int> refined = refine_partition(wg, labels, rng, rk);
        // next level starts from the community assignment projected onto
        // the refined super-nodes
        std::vector<int> proj(rk, 0);
        for (std::size_t v = 0; v < wg.size(); ++v) proj[refined[v]] = labels[v];
        for (std::size_t v = 0; v < base_labels.size(); ++v)
            node_to_super[v] = refined[node_to_super[v]];
        wg = aggregate(wg, refined, rk);
        init_labels = std::move(proj);
    }

    split_disconnected(g, base_labels);
    Partition p;
    p.labels = std::move(base_labels);
    p.canonicalize();
    return p;
}

Partition fast_greedy(const Graph& g, const DetectorParams& params) {
    require_edges(g, "fast_greedy");
    std::size_t n = g.node_count();
    double m = g.total_weight();
    // seeded randomness enters twice: equal-gain merge candidates are
    // ordered by a random draw (diversifying dendrograms on tie-heavy
    // graphs), and the final single-node polish visits nodes in shuffled
    // order — so a multi-seed sweep explores genuinely different optima
    Rng rng(params.seed);

    std::vector<int> labels = singleton_labels(n);
    std::vector<double> comm_strength(n);
    std::vector<bool> alive(n, true);
    std::vector<std::uint32_t> generation(n, 0);
    std::vector<std::unordered_map<int, double>> cross(n); // community -> between weight
    for (std::size_t i = 0; i < n; ++i) comm_strength[i] = g.strength(i);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, w] : g.neighbors(i))
            if (j > i) {
                cross[i][static_cast<int>(j)] += w;
                cross[j][static_cast<int>(i)] += w;
            }

    struct Candidate {
        double gain;
        std::uint64_t tie; // seeded draw, breaks exact gain ties
        int a, b;          // a < b
        std::uint32_t gen_a, gen_b;
    };
    auto worse = [](const Candidate& x, const Candidate& y) {
        if (x.gain != y.gain) return x.gain < y.gain;
        return x.tie > y.tie;
    };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);

    auto gain_of = [&](int a, int b, double e_ab) {
        return e_ab / m - comm_strength[a] * comm_strength[b] / (2.0 * m * m);
    };
    auto push_pair = [&](int a, int b, double e_ab) {
        if (a > b) std::swap(a, b);
        heap.push({gain_of(a, b, e_ab), rng.next_u64(), a, b, generation[a], generation[b]});
    };
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, w] : cross[i])
            if (static_cast<int>(i) < j) push_pair(static_cast<int>(i), j, w);

    while (!heap.empty()) {
        Candidate top = heap.top();
        heap.pop();
        if (!alive[top.a] || !alive[top.b] || generation[top.a] != top.gen_a ||
            generation[top.b] != top.gen_b)
            continue;
        if (!(top.gain > 0.0)) break; // no merge improves Q

        int a = top.a, b = top.b; // merge b into a
        alive[b] = false;
        for (std::size_t v = 0; v < n; ++v)
            if (labels[v] == b) labels[v] = a;
        comm_strength[a] += comm_strength[b];
        cross[a].erase(b);
        cross[b].erase(a);
        for (const auto& [c, w] : cross[b]) {
            cross[a][c] += w;
            cross[c].erase(b);
            cross[c][a] = cross[a][c];
        }
        cross[b].clear();
        generation[a] += 1;
        for (const auto& [c, w] : cross[a]) push_pair(a, c, w);
    }

    // pair merges cannot re-route a node once its community was absorbed, so
    // an early high-gain merge can wall off the optimum; single-node moves
    // (the multilevel rule) undo such merge-order artifacts, and Q only
    // rises, keeping the returned partition the maximum-Q one observed
    local_move_modularity(from_graph(g), labels, rng, params.tolerance);

    Partition p;
    p.labels = std::move(labels);
    p.canonicalize();
    return p;
}

namespace {

double plogp(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Partition-dependent part of the two-level map equation, in bits:
// plogp(q_tot) - 2 sum plogp(q_m) + sum plogp(q_m + P_m).  The node-rate
// entropy term is constant for a fixed graph and omitted during search.
struct MapState {
    double two_m;
    std::vector<double> exit_w;     // per module, edge-weight units
    std::vector<double> strength_w; // per module
    double exit_total = 0.0;

    double nq(double w) const { return std::max(w, 0.0) / two_m; }
    double objective() const {
        double value = plogp(nq(exit_total));
        for (std::size_t c = 0; c < exit_w.size(); ++c) {
            value -= 2.0 * plogp(nq(exit_w[c]));
            value += plogp(nq(exit_w[c] + strength_w[c]));
        }
        return value;
    }
};

bool local_move_mapeq(const WorkGraph& wg, std::vector<int>& labels, Rng& rng, double tolerance) {
    std::size_t n = wg.size();
    MapState st;
    st.two_m = wg.two_m;
    st.exit_w.assign(n, 0.0);
    st.strength_w.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) st.strength_w[labels[i]] += wg.strength[i];
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, w] : wg.adj[i])
            if (labels[j] != labels[i]) st.exit_w[labels[i]] += w;
    st.exit_total = 0.0;
    for (double e : st.exit_w) st.exit_total += e;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> weight_to(n, 0.0);
    std::vector<int> touched;

    auto move_delta = [&](std::size_t i, int a, int b, double w_ia, double w_ib) {
        double s_i = wg.strength[i];
        double ext_i = s_i - 2.0 * wg.self_loop[i];
        double ea = st.exit_w[a], eb = st.exit_w[b];
        double sa = st.strength_w[a], sb = st.strength_w[b];
        double ea2 = ea - ext_i + 2.0 * w_ia;
        double eb2 = eb + ext_i - 2.0 * w_ib;
        double et2 = st.exit_total + (ea2 - ea) + (eb2 - eb);
        double delta = plogp(st.nq(et2)) - plogp(st.nq(st.exit_total));
        delta -= 2.0 * (plogp(st.nq(ea2)) - plogp(st.nq(ea)));
        delta -= 2.0 * (plogp(st.nq(eb2)) - plogp(st.nq(eb)));
        delta += plogp(st.nq(ea2 + sa - s_i)) - plogp(st.nq(ea + sa));
        delta += plogp(st.nq(eb2 + sb + s_i)) - plogp(st.nq(eb + sb));
        return delta;
    };

    bool any_move = false;
    for (;;) {
        bool moved = false;
        rng.shuffle(order);
        for (std::size_t idx = 0; idx < n; ++idx) {
            std::size_t i = order[idx];
            int a = labels[i];
            touched.clear();
            for (const auto& [j, w] : wg.adj[i]) {
                int c = labels[j];
                if (weight_to[c] == 0.0) touched.push_back(c);
                weight_to[c] += w;
            }
            double w_ia = weight_to[a];
            int best = a;
            double best_delta = -tolerance;
            for (const auto& [j, w] : wg.adj[i]) {
                int b = labels[j];
                if (b == a || weight_to[b] == 0.0) continue;
                double delta = move_delta(i, a, b, w_ia, weight_to[b]);
                if (delta < best_delta) {
                    best_delta = delta;
                    best = b;
                }
                weight_to[b] = 0.0;
            }
            double w_ib_chosen = 0.0;
            if (best != a) {
                // recompute w(i, best) (scratch was zeroed during scan)
                for (const auto& [j, w] : wg.adj[i])
                    if (labels[j] == best) w_ib_chosen += w;
            }
            for (int c : touched) weight_to[c] = 0.0;
            if (best != a) {
                double s_i = wg.strength[i];
                double ext_i = s_i - 2.0 * wg.self_loop[i];
                double ea2 = st.exit_w[a] - ext_i + 2.0 * w_ia;
                double eb2 = st.exit_w[best] + ext_i - 2.0 * w_ib_chosen;
                st.exit_total += (ea2 - st.exit_w[a]) + (eb2 - st.exit_w[best]);
                st.exit_w[a] = ea2;
                st.exit_w[best] = eb2;
                st.strength_w[a] -= s_i;
                st.strength_w[best] += s_i;
                labels[i] = best;
                moved = true;
                any_move = true;
            }
        }
        if (!moved) break;
    }
    return any_move;
}

} // namespace

Partition infomap(const Graph& g, const DetectorParams& params) {
    require_edges(g, "infomap");
    Rng rng(params.seed);
    WorkGraph wg = from_graph(g);
    std::vector<int> node_to_super = singleton_labels(g.node_count());
    std::vector<int> base_labels = node_to_super;

    for (int pass = 0; pass < params.max_passes; ++pass) {
        std::vector<int> labels = singleton_labels(wg.size());
        bool improved = local_move_mapeq(wg, labels, rng, params.tolerance);
        int k = canonicalize_labels(labels);
        for (std::size_t v = 0; v < base_labels.size(); ++v)
            base_labels[v] = labels[node_to_super[v]];
        if (!improved || static_cast<std::size_t>(k) == wg.size()) break;
        node_to_super = base_labels;
        wg = aggregate(wg, labels, k);
    }

    Partition p;
    p.labels = std::move(base_labels);
    p.canonicalize();
    return p;
}

double map_equation(const Graph& g, const Partition& p) {
    require_edges(g, "map_equation");
    if (p.labels.size() != g.node_count())
        throw precondition_error("map_equation: partition size mismatch");
    double two_m = 2.0 * g.total_weight();
    int k = 0;
    for (int l : p.labels) {
        if (l < 0) throw precondition_error("map_equation: partition not total");
        k = std::max(k, l + 1);
    }
    std::vector<double> exit_w(k, 0.0), strength_w(k, 0.0);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        strength_w[p.labels[i]] += g.strength(i);
        for (const auto& [j, w] : g.neighbors(i))
            if (p.labels[j] != p.labels[i]) exit_w[p.labels[i]] += w;
    }
    double exit_total = 0.0;
    for (double e : exit_w) exit_total += e;

    double value = plogp(exit_total / two_m);
    for (int c = 0; c < k; ++c) {
        value -= 2.0 * plogp(exit_w[c] / two_m);
        value += plogp((exit_w[c] + strength_w[c]) / two_m);
    }
    for (std::size_t i = 0; i < g.node_count(); ++i) value -= plogp(g.strength(i) / two_m);
    return value;
}

std::pair<Partition, std::vector<std::size_t>> filter_small_communities(const Partition& p,
                                                                        int min_size) {
    if (min_size < 1) throw parameter_error("filter_small_communities: min_size must be >= 1");
    std::unordered_map<int, std::size_t> sizes;
    for (int l : p.labels)
        if (l >= 0) ++sizes[l];
    Partition out;
    out.labels.assign(p.labels.size(), -1);
    std::vector<std::size_t> removed;
    bool any_kept = false;
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
        int l = p.labels[i];
        if (l >= 0 && sizes[l] >= static_cast<std::size_t>(min_size)) {
            out.labels[i] = l;
            any_kept = true;
        } else if (l >= 0) {
            removed.push_back(i);
        }
    }
    if (!any_kept)
        throw degenerate_error("filter_small_communities: no community reaches size " +
                               std::to_string(min_size));
    out.canonicalize();
    return {std::move(out), std::move(removed)};
}

double compare_partitions(const Partition& a, const Partition& b) {
    if (a.labels.size() != b.labels.size())
        throw precondition_error("compare_partitions: node sets differ");
    std::size_t n = a.labels.size();
    std::map<std::pair<int, int>, double> contingency;
    std::map<int, double> row_sum, col_sum;
    for (std::size_t i = 0; i < n; ++i) {
        contingency[{a.labels[i], b.labels[i]}] += 1.0;
        row_sum[a.labels[i]] += 1.0;
        col_sum[b.labels[i]] += 1.0;
    }
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& kv : contingency) sum_ij += choose2(kv.second);
    for (const auto& kv : row_sum) sum_a += choose2(kv.second);
    for (const auto& kv : col_sum) sum_b += choose2(kv.second);
    double total_pairs = choose2(static_cast<double>(n));
    if (total_pairs == 0.0) return 1.0;
    double expected = sum_a * sum_b / total_pairs;
    double max_index = 0.5 * (sum_a + sum_b);
    double denom = max_index - expected;
    if (denom == 0.0) return 1.0;
    return (sum_ij - expected) / denom;
}

} // namespace kwx
