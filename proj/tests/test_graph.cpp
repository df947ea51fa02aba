#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "kwx/errors.hpp"
#include "kwx/graph.hpp"
#include "kwx/rng.hpp"

using namespace kwx;
namespace fs = std::filesystem;

namespace {

// independent modularity oracle: Q = (1/2m) sum_ij (A_ij - s_i s_j / 2m) d(c_i,c_j)
double brute_modularity(const Graph& g, const std::vector<int>& labels) {
    std::size_t n = g.node_count();
    double two_m = 2.0 * g.total_weight();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (const auto& [u, v, w] : g.edge_list()) {
        a[u][v] = w;
        a[v][u] = w;
    }
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s[i] += a[i][j];
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (labels[i] >= 0 && labels[i] == labels[j]) q += a[i][j] - s[i] * s[j] / two_m;
    return q / two_m;
}

// enumerate all set partitions of n items as restricted growth strings
void all_partitions(std::size_t n, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> rgs(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_used) {
        if (i == n) {
            visit(rgs);
            return;
        }
        for (int c = 0; c <= max_used + 1; ++c) {
            rgs[i] = c;
            rec(i + 1, std::max(max_used, c));
        }
    };
    rec(1, 0); // rgs[0] = 0 fixed
    if (n == 0) visit(rgs);
}

Graph two_triangles() {
    Graph g;
    g.add_edge("a", "b");
    g.add_edge("b", "c");
    g.add_edge("a", "c");
    g.add_edge("d", "e");
    g.add_edge("e", "f");
    g.add_edge("d", "f");
    return g;
}

Graph random_graph(Rng& rng, std::size_t n, double p) {
    Graph g;
    for (std::size_t i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) g.add_edge_idx(i, j, 1.0 + rng.below(3));
    return g;
}

} // namespace

TEST_CASE("graph basics") {
    Graph g;
    CHECK(g.add_node("a") == 0);
    CHECK(g.add_node("b") == 1);
    CHECK(g.add_node("a") == 0); // idempotent
    g.add_edge("a", "b", 2.0);
    g.add_edge("b", "a", 0.5); // same undirected edge: weight accumulates
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 1);
    CHECK(g.total_weight() == doctest::Approx(2.5));
    CHECK(g.strength(0) == doctest::Approx(2.5));
    CHECK(g.degree(0) == 1);
    CHECK(g.has_edge_idx(0, 1));
    CHECK(g.has_edge_idx(1, 0));
    CHECK(g.node_index("b").value() == 1);
    CHECK(!g.node_index("zz").has_value());
    CHECK_THROWS_AS(g.add_edge("a", "a"), precondition_error);
}

TEST_CASE("neighbors sorted by index and edge_list sorted") {
    Graph g;
    g.add_node("a");
    g.add_node("b");
    g.add_node("c");
    g.add_node("d");
    g.add_edge("a", "d");
    g.add_edge("a", "b");
    g.add_edge("a", "c");
    auto nb = g.neighbors(0);
    REQUIRE(nb.size() == 3);
    CHECK(nb[0].first == 1);
    CHECK(nb[1].first == 2);
    CHECK(nb[2].first == 3);
    auto el = g.edge_list();
    REQUIRE(el.size() == 3);
    CHECK(std::get<1>(el[0]) == 1);
    CHECK(std::get<1>(el[2]) == 3);
}

TEST_CASE("build_citation_network") {
    Corpus c;
    Document a, b, x;
    a.id = "a";
    a.references = {"b", "ghost"};
    b.id = "b";
    b.references = {"a"}; // mutual with a: still one edge of weight 1
    x.id = "x";
    x.references = {"ghost"};
    c = {a, b, x};
    Graph g = build_citation_network(c);
    CHECK(g.node_count() == 3); // node count == corpus size regardless of coverage
    CHECK(g.edge_count() == 1);
    CHECK(g.total_weight() == doctest::Approx(1.0));
    CHECK(g.has_edge_idx(0, 1));
    CHECK(g.degree(2) == 0); // out-of-corpus reference leaves x isolated
}

TEST_CASE("modularity fixtures") {
    Graph tri = two_triangles();

    Partition one;
    one.labels = {0, 0, 0, 0, 0, 0};
    one.community_count = 1;
    CHECK(modularity(tri, one) == doctest::Approx(0.0).epsilon(1e-12));

    Partition by_comp;
    by_comp.labels = {0, 0, 0, 1, 1, 1};
    by_comp.community_count = 2;
    CHECK(modularity(tri, by_comp) == doctest::Approx(0.5).epsilon(1e-12));

    Graph edge;
    edge.add_edge("a", "b");
    Partition singletons;
    singletons.labels = {0, 1};
    singletons.community_count = 2;
    CHECK(modularity(edge, singletons) == doctest::Approx(-0.5).epsilon(1e-12));

    Graph empty;
    empty.add_node("a");
    Partition p0;
    p0.labels = {0};
    p0.community_count = 1;
    CHECK_THROWS_AS(modularity(empty, p0), precondition_error);
}

TEST_CASE("modularity invariant under label permutation") {
    Graph g = two_triangles();
    g.add_edge("c", "d"); // bridge
    Partition p;
    p.labels = {0, 0, 0, 1, 1, 1};
    p.community_count = 2;
    Partition swapped;
    swapped.labels = {1, 1, 1, 0, 0, 0};
    swapped.community_count = 2;
    CHECK(modularity(g, p) == doctest::Approx(modularity(g, swapped)).epsilon(1e-15));
}

TEST_CASE("modularity treats -1 nodes as spectators") {
    Graph g = two_triangles();
    Partition p;
    p.labels = {0, 0, 0, -1, -1, -1};
    p.community_count = 1;
    // labeled triangle: e_cc = 3/6, S_c = 6, (6/12)^2 = 0.25
    CHECK(modularity(g, p) == doctest::Approx(0.5 - 0.25).epsilon(1e-12));
}

TEST_CASE("modularity equals pairwise oracle over all partitions of small graphs") {
    Rng rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        std::size_t n = 3 + rng.below(4); // 3..6 nodes keeps enumeration fast
        Graph g = random_graph(rng, n, 0.6);
        if (g.edge_count() == 0) continue;
        all_partitions(n, [&](const std::vector<int>& labels) {
            Partition p;
            p.labels = labels;
            p.community_count = 1 + *std::max_element(labels.begin(), labels.end());
            double lib = modularity(g, p);
            double oracle = brute_modularity(g, labels);
            CHECK(lib == doctest::Approx(oracle).epsilon(1e-12));
        });
    }
}

TEST_CASE("connected_components") {
    Graph tri = two_triangles();
    Partition p = connected_components(tri);
    CHECK(p.community_count == 2);
    CHECK(p.labels == std::vector<int>{0, 0, 0, 1, 1, 1});

    Graph edgeless;
    edgeless.add_node("a");
    edgeless.add_node("b");
    edgeless.add_node("c");
    Partition q = connected_components(edgeless);
    CHECK(q.community_count == 3);
    CHECK(q.labels == std::vector<int>{0, 1, 2});

    Graph path;
    path.add_edge("a", "b");
    path.add_edge("b", "c");
    CHECK(connected_components(path).community_count == 1);
}

TEST_CASE("partition canonicalize") {
    Partition p;
    p.labels = {5, 5, 2, 9, 2};
    p.canonicalize();
    CHECK(p.labels == std::vector<int>{0, 0, 1, 2, 1});
    CHECK(p.community_count == 3);

    Partition with_removed;
    with_removed.labels = {7, -1, 7, 3};
    with_removed.canonicalize();
    CHECK(with_removed.labels == std::vector<int>{0, -1, 0, 1});
    CHECK(with_removed.community_count == 2);
}

TEST_CASE("graph save/load roundtrip with isolates") {
    fs::path dir = fs::temp_directory_path() / "kwx_graph_test";
    fs::create_directories(dir);
    fs::path edges = dir / "e.tsv";
    fs::path nodes = dir / "n.tsv";

    Graph g = two_triangles();
    g.add_node("lonely");
    g.add_edge("a", "d", 2.5);
    save_graph(g, edges.string(), nodes.string());
    Graph back = load_graph(edges.string(), nodes.string());

    CHECK(back.node_count() == g.node_count());
    CHECK(back.edge_count() == g.edge_count());
    CHECK(back.total_weight() == doctest::Approx(g.total_weight()).epsilon(1e-15));
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(back.node_id(i) == g.node_id(i));
    CHECK(back.has_edge_idx(0, 3));
    CHECK(back.degree(back.node_index("lonely").value()) == 0);

    CHECK_THROWS_AS(load_graph((dir / "missing.tsv").string(), nodes.string()), io_error);
    fs::remove_all(dir);
}

TEST_CASE("partition save/load roundtrip") {
    fs::path dir = fs::temp_directory_path() / "kwx_part_test";
    fs::create_directories(dir);
    fs::path path = dir / "p.tsv";

    Graph g = two_triangles();
    Partition p;
    p.labels = {0, 0, 0, 1, 1, -1};
    p.community_count = 2;
    save_partition(g, p, path.string());
    Partition back = load_partition(g, path.string());
    CHECK(back.labels == p.labels);
    CHECK(back.community_count == 2);

    CHECK_THROWS_AS(load_partition(g, (dir / "missing.tsv").string()), io_error);
    fs::remove_all(dir);
}
