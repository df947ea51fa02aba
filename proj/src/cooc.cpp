#include "kwx/cooc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "kwx/errors.hpp"

namespace kwx {

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    std::size_t d = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < d; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace

Graph build_cooc_network(const std::vector<std::string>& tokens, const CoocParams& params) {
    if (tokens.empty()) throw precondition_error("build_cooc_network: empty token sequence");
    if (params.window < 1) throw parameter_error("build_cooc_network: window must be >= 1");

    Graph g;
    for (const auto& t : tokens) g.add_node(t);
    std::size_t n = tokens.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t stop = std::min(n, i + static_cast<std::size_t>(params.window) + 1);
        for (std::size_t j = i + 1; j < stop; ++j) {
            if (tokens[i] == tokens[j]) continue;
            g.add_edge(tokens[i], tokens[j], 1.0);
        }
    }

    if (params.embeddings != nullptr) {
        // virtual links: unit-weight edges for still-unlinked similar pairs
        std::size_t nn = g.node_count();
        for (std::size_t i = 0; i < nn; ++i) {
            auto it_i = params.embeddings->find(g.node_id(i));
            if (it_i == params.embeddings->end()) continue;
            for (std::size_t j = i + 1; j < nn; ++j) {
                if (g.has_edge_idx(i, j)) continue;
                auto it_j = params.embeddings->find(g.node_id(j));
                if (it_j == params.embeddings->end()) continue;
                if (cosine(it_i->second, it_j->second) >= params.similarity_threshold)
                    g.add_edge_idx(i, j, 1.0);
            }
        }
    }
    return g;
}

namespace {

std::vector<double> pagerank_scores(const Graph& g, double damping) {
    std::size_t n = g.node_count();
    const double tol = 1e-10;
    std::vector<double> x(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
    for (int iter = 0; iter < 10000; ++iter) {
        double dangling = 0.0;
        for (std::size_t u = 0; u < n; ++u)
            if (g.strength(u) == 0.0) dangling += x[u];
        double base = (1.0 - damping) / static_cast<double>(n) +
                      damping * dangling / static_cast<double>(n);
        std::fill(next.begin(), next.end(), base);
        for (std::size_t u = 0; u < n; ++u) {
            double s = g.strength(u);
            if (s == 0.0) continue;
            double share = damping * x[u] / s;
            for (const auto& [v, w] : g.neighbors(u)) next[v] += share * w;
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff += std::fabs(next[i] - x[i]);
        x.swap(next);
        if (diff < tol) return x;
    }
    throw convergence_error("pagerank: no convergence within 10000 iterations");
}

std::vector<double> betweenness_scores(const Graph& g) {
    std::size_t n = g.node_count();
    std::vector<double> cb(n, 0.0);
    std::vector<int> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<std::size_t>> preds(n);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        stack.clear();
        dist[s] = 0;
        sigma[s] = 1.0;
        std::queue<std::size_t> q;
        q.push(s);
        while (!q.empty()) {
            std::size_t u = q.front();
            q.pop();
            stack.push_back(u);
            for (const auto& [v, w] : g.neighbors(u)) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
                if (dist[v] == dist[u] + 1) {
                    sigma[v] += sigma[u];
                    preds[v].push_back(u);
                }
            }
        }
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            std::size_t v = *it;
            for (std::size_t u : preds[v])
                delta[u] += sigma[u] / sigma[v] * (1.0 + delta[v]);
            if (v != s) cb[v] += delta[v];
        }
    }
    for (double& c : cb) c /= 2.0; // each undirected pair counted twice
    return cb;
}

std::vector<double> closeness_scores(const Graph& g) {
    std::size_t n = g.node_count();
    std::vector<double> scores(n, 0.0);
    std::vector<int> dist(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::queue<std::size_t> q;
        q.push(s);
        double total = 0.0;
        while (!q.empty()) {
            std::size_t u = q.front();
            q.pop();
            if (u != s) total += 1.0 / static_cast<double>(dist[u]);
            for (const auto& [v, w] : g.neighbors(u)) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
            }
        }
        scores[s] = total;
    }
    return scores;
}

std::vector<double> eigenvector_scores(const Graph& g) {
    std::size_t n = g.node_count();
    const double tol = 1e-10;
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
    for (int iter = 0; iter < 10000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t u = 0; u < n; ++u)
            for (const auto& [v, w] : g.neighbors(u)) next[v] += w * x[u];
        double norm = 0.0;
        for (double v : next) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0)
            throw convergence_error("eigenvector: zero iterate (graph has no edges)");
        for (double& v : next) v /= norm;
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::fabs(next[i] - x[i]));
        x.swap(next);
        if (diff < tol) return x;
    }
    throw convergence_error("eigenvector: no convergence within 10000 iterations");
}

} // namespace

std::unordered_map<std::string, double> centrality(const Graph& g, CentralityMetric metric) {
    if (g.node_count() == 0) throw precondition_error("centrality: empty graph");
    std::vector<double> values;
    switch (metric) {
        case CentralityMetric::degree:
            values.resize(g.node_count());
            for (std::size_t i = 0; i < g.node_count(); ++i) values[i] = g.strength(i);
            break;
        case CentralityMetric::pagerank: values = pagerank_scores(g, 0.85); break;
        case CentralityMetric::betweenness: values = betweenness_scores(g); break;
        case CentralityMetric::closeness: values = closeness_scores(g); break;
        case CentralityMetric::eigenvector: values = eigenvector_scores(g); break;
    }
    std::unordered_map<std::string, double> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[g.node_id(i)] = values[i];
    return out;
}

std::unordered_map<std::string, double> pagerank_centrality(const Graph& g, double damping) {
    if (g.node_count() == 0) throw precondition_error("pagerank_centrality: empty graph");
    if (!(damping > 0.0) || !(damping < 1.0))
        throw parameter_error("pagerank_centrality: damping must lie in (0,1)");
    auto values = pagerank_scores(g, damping);
    std::unordered_map<std::string, double> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[g.node_id(i)] = values[i];
    return out;
}

std::unordered_map<std::string, double> accessibility(const Graph& g, int h) {
    if (g.node_count() == 0) throw precondition_error("accessibility: empty graph");
    if (h != 1 && h != 2) throw parameter_error("accessibility: h must be 1 or 2");
    std::size_t n = g.node_count();
    std::unordered_map<std::string, double> out;
    std::vector<double> p2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s_i = g.strength(i);
        if (s_i == 0.0) {
            out[g.node_id(i)] = 0.0;
            continue;
        }
        double entropy = 0.0;
        if (h == 1) {
            for (const auto& [j, w] : g.neighbors(i)) {
                double p = w / s_i;
                entropy -= p * std::log(p);
            }
        } else {
            std::vector<std::size_t> touched;
            for (const auto& [k, w_ik] : g.neighbors(i)) {
                double p_ik = w_ik / s_i;
                double s_k = g.strength(k);
                for (const auto& [j, w_kj] : g.neighbors(k)) {
                    if (p2[j] == 0.0) touched.push_back(j);
                    p2[j] += p_ik * (w_kj / s_k);
                }
            }
            for (std::size_t j : touched) {
                entropy -= p2[j] * std::log(p2[j]);
                p2[j] = 0.0;
            }
        }
        out[g.node_id(i)] = std::exp(entropy);
    }
    return out;
}

KeywordRanking rank_by_centrality(const std::unordered_map<std::string, double>& scores,
                                  std::size_t k) {
    KeywordRanking r;
    r.entries.assign(scores.begin(), scores.end());
    sort_and_truncate(r.entries, k);
    return r;
}

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open embeddings file: " + path);
    EmbeddingTable table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw parse_error(path + " line " + std::to_string(line_no) +
                              ": expected token<TAB>values");
        std::string token = line.substr(0, tab);
        std::vector<double> vec;
        std::istringstream rest(line.substr(tab + 1));
        double v;
        while (rest >> v) vec.push_back(v);
        if (!rest.eof())
            throw parse_error(path + " line " + std::to_string(line_no) +
                              ": malformed vector component");
        if (vec.empty())
            throw parse_error(path + " line " + std::to_string(line_no) + ": empty vector");
        if (dim == 0) dim = vec.size();
        if (vec.size() != dim)
            throw parse_error(path + " line " + std::to_string(line_no) +
                              ": inconsistent vector dimension");
        table[token] = std::move(vec);
    }
    return table;
}

} // namespace kwx
