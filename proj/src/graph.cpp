#include "kwx/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include "kwx/errors.hpp"
#include "kwx/ranking.hpp"

namespace kwx {

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

} // namespace

std::size_t Graph::add_node(const std::string& id) {
    auto it = index_.find(id);
    if (it != index_.end()) return it->second;
    std::size_t idx = ids_.size();
    ids_.push_back(id);
    index_.emplace(id, idx);
    adjacency_dirty_ = true;
    return idx;
}

void Graph::add_edge(const std::string& a, const std::string& b, double weight) {
    // sequenced explicitly: argument evaluation order must not decide node indices
    std::size_t ia = add_node(a);
    std::size_t ib = add_node(b);
    add_edge_idx(ia, ib, weight);
}

void Graph::add_edge_idx(std::size_t a, std::size_t b, double weight) {
    if (a >= ids_.size() || b >= ids_.size())
        throw precondition_error("add_edge: node index out of range");
    if (a == b) throw precondition_error("add_edge: self-loop on node '" + ids_[a] + "'");
    if (!(weight > 0.0)) throw precondition_error("add_edge: weight must be positive");
    edges_[edge_key(a, b)] += weight;
    total_weight_ += weight;
    adjacency_dirty_ = true;
}

bool Graph::has_edge_idx(std::size_t a, std::size_t b) const {
    return edges_.find(edge_key(a, b)) != edges_.end();
}

std::optional<std::size_t> Graph::node_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void Graph::build_adjacency() const {
    adjacency_.assign(ids_.size(), {});
    for (const auto& [key, w] : edges_) {
        std::size_t a = static_cast<std::size_t>(key >> 32);
        std::size_t b = static_cast<std::size_t>(key & 0xffffffffu);
        adjacency_[a].emplace_back(b, w);
        adjacency_[b].emplace_back(a, w);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
    adjacency_dirty_ = false;
}

const std::vector<std::pair<std::size_t, double>>& Graph::neighbors(std::size_t idx) const {
    if (adjacency_dirty_) build_adjacency();
    return adjacency_[idx];
}

double Graph::strength(std::size_t idx) const {
    double s = 0.0;
    for (const auto& [nbr, w] : neighbors(idx)) s += w;
    return s;
}

std::size_t Graph::degree(std::size_t idx) const { return neighbors(idx).size(); }

std::vector<std::tuple<std::size_t, std::size_t, double>> Graph::edge_list() const {
    std::vector<std::tuple<std::size_t, std::size_t, double>> out;
    out.reserve(edges_.size());
    for (const auto& [key, w] : edges_) {
        out.emplace_back(static_cast<std::size_t>(key >> 32),
                         static_cast<std::size_t>(key & 0xffffffffu), w);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void Partition::canonicalize() {
    std::unordered_map<int, int> remap;
    int next = 0;
    for (int& label : labels) {
        if (label < 0) {
            label = -1;
            continue;
        }
        auto [it, inserted] = remap.emplace(label, next);
        if (inserted) ++next;
        label = it->second;
    }
    community_count = next;
}

Graph build_citation_network(const Corpus& corpus) {
    Graph g;
    for (const Document& doc : corpus) g.add_node(doc.id);
    for (const Document& doc : corpus) {
        std::size_t a = *g.node_index(doc.id);
        for (const std::string& ref : doc.references) {
            auto b = g.node_index(ref);
            if (!b || *b == a) continue;
            if (!g.has_edge_idx(a, *b)) g.add_edge_idx(a, *b, 1.0);
        }
    }
    return g;
}

double modularity(const Graph& g, const Partition& p) {
    if (g.node_count() == 0 || !(g.total_weight() > 0.0))
        throw precondition_error("modularity: graph has no edge weight");
    if (p.labels.size() != g.node_count())
        throw precondition_error("modularity: partition size mismatch");
    double m = g.total_weight();
    std::unordered_map<int, double> internal; // e_cc * m (sum of in-community edge weight)
    std::unordered_map<int, double> strength; // S_c
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        int ci = p.labels[i];
        if (ci < 0) continue;
        strength[ci] += g.strength(i);
        for (const auto& [j, w] : g.neighbors(i)) {
            if (j > i) continue; // count each edge once
            if (p.labels[j] == ci) internal[ci] += w;
        }
    }
    double q = 0.0;
    for (const auto& [c, s] : strength) {
        double in_c = 0.0;
        auto it = internal.find(c);
        if (it != internal.end()) in_c = it->second;
        double frac = s / (2.0 * m);
        q += in_c / m - frac * frac;
    }
    return q;
}

Partition connected_components(const Graph& g) {
    Partition p;
    p.labels.assign(g.node_count(), -1);
    int label = 0;
    for (std::size_t start = 0; start < g.node_count(); ++start) {
        if (p.labels[start] >= 0) continue;
        std::queue<std::size_t> frontier;
        frontier.push(start);
        p.labels[start] = label;
        while (!frontier.empty()) {
            std::size_t u = frontier.front();
            frontier.pop();
            for (const auto& [v, w] : g.neighbors(u)) {
                if (p.labels[v] < 0) {
                    p.labels[v] = label;
                    frontier.push(v);
                }
            }
        }
        ++label;
    }
    p.community_count = label;
    return p;
}

void save_graph(const Graph& g, const std::string& edges_path, const std::string& nodes_path) {
    std::ofstream edges(edges_path, std::ios::binary);
    if (!edges) throw io_error("cannot write edge list: " + edges_path);
    for (const auto& [a, b, w] : g.edge_list())
        edges << g.node_id(a) << '\t' << g.node_id(b) << '\t' << format_score(w) << '\n';
    std::ofstream nodes(nodes_path, std::ios::binary);
    if (!nodes) throw io_error("cannot write node list: " + nodes_path);
    for (std::size_t i = 0; i < g.node_count(); ++i) nodes << g.node_id(i) << '\n';
}

Graph load_graph(const std::string& edges_path, const std::string& nodes_path) {
    Graph g;
    {
        std::ifstream in(nodes_path);
        if (!in) throw io_error("cannot open node list: " + nodes_path);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) g.add_node(line);
        }
    }
    std::ifstream in(edges_path);
    if (!in) throw io_error("cannot open edge list: " + edges_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, w_str;
        if (!std::getline(row, a, '\t') || !std::getline(row, b, '\t') ||
            !std::getline(row, w_str, '\t'))
            throw parse_error("edge list line " + std::to_string(line_no) +
                              ": expected 'a<TAB>b<TAB>weight'");
        double w;
        try {
            w = std::stod(w_str);
        } catch (const std::exception&) {
            throw parse_error("edge list line " + std::to_string(line_no) + ": bad weight '" +
                              w_str + "'");
        }
        g.add_edge(a, b, w);
    }
    return g;
}

void save_partition(const Graph& g, const Partition& p, const std::string& path) {
    if (p.labels.size() != g.node_count())
        throw precondition_error("save_partition: partition size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write partition: " + path);
    for (std::size_t i = 0; i < g.node_count(); ++i)
        out << g.node_id(i) << '\t' << p.labels[i] << '\n';
}

Partition load_partition(const Graph& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open partition: " + path);
    Partition p;
    p.labels.assign(g.node_count(), -1);
    std::vector<bool> seen(g.node_count(), false);
    std::string line;
    std::size_t line_no = 0;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw parse_error("partition line " + std::to_string(line_no) +
                              ": expected 'node<TAB>label'");
        std::string id = line.substr(0, tab);
        auto idx = g.node_index(id);
        if (!idx)
            throw integrity_error("partition line " + std::to_string(line_no) +
                                  ": unknown node '" + id + "'");
        int label;
        try {
            label = std::stoi(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw parse_error("partition line " + std::to_string(line_no) + ": bad label");
        }
        p.labels[*idx] = label;
        seen[*idx] = true;
        max_label = std::max(max_label, label);
    }
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (!seen[i])
            throw integrity_error("partition missing node '" + g.node_id(i) + "'");
    p.community_count = max_label + 1;
    return p;
}

} // namespace kwx
