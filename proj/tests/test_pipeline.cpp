// configuration, staged pipeline composition, determinism, and the
// parallel map helper.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "kwx/errors.hpp"
#include "kwx/eval.hpp"
#include "kwx/pipeline.hpp"

using namespace kwx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("kwx_pipe_" + std::to_string(static_cast<unsigned>(::getpid())) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

// small two-topic corpus with dense intra-topic citations
void write_synth_corpus(const std::string& path, int docs_per_topic = 6,
                        int fulltext_tokens = 100) {
    SyntheticSpec spec;
    spec.topics = 2;
    spec.docs_per_topic = docs_per_topic;
    spec.topic_vocab = 10;
    spec.abstract_tokens = 40;
    spec.fulltext_tokens = fulltext_tokens;
    spec.intra_citation_p = 0.8;
    spec.inter_citation_p = 0.0;
    spec.seed = 11;
    save_corpus_jsonl(path, generate_synthetic_corpus(spec).corpus);
}

PipelineConfig small_config(const std::string& corpus, const std::string& out_dir) {
    PipelineConfig c;
    c.corpus_path = corpus;
    c.out_dir = out_dir;
    c.short_methods = {"multilevel", "tfidf", "kmeans"};
    c.kmeans_range = {2, 3, 1};
    c.long_methods = {"freq", "tfidf", "entropy", "yake", "textrank", "vote"};
    c.n_values = {5, 10};
    c.top_k = 30;
    c.workers = 2;
    c.detector.min_community_size = 2; // tiny corpus, tiny communities
    return c;
}

} // namespace

TEST_CASE("load_config parses sections, lists, and comments") {
    TempDir tmp;
    auto path = tmp.file("kwx.ini");
    write_file(path,
               "# full configuration\n"
               "[corpus]\n"
               "path = corpus.jsonl\n"
               "format = directory\n"
               "stopwords = stop.txt\n"
               "concat_title = false\n"
               "\n"
               "[community]\n"
               "method = leiden\n"
               "max_passes = 7\n"
               "tolerance = 1e-7\n"
               "min_community_size = 2\n"
               "[short]\n"
               "methods = tfidf, kmeans\n"
               "kmeans_lo = 2\n"
               "kmeans_hi = 8\n"
               "kmeans_step = 2\n"
               "[long]\n"
               "methods = freq, entropy\n"
               "window = 3\n"
               "entropy_segments = 10\n"
               "embeddings = vec.tsv\n"
               "[eval]\n"
               "n = 5, 15\n"
               "top_k = 40\n"
               "[synth]\n"
               "topics = 3\n"
               "docs_per_topic = 9\n"
               "topic_vocab = 12\n"
               "shared_vocab = 4\n"
               "abstract_tokens = 50\n"
               "fulltext_tokens = 200\n"
               "intra_p = 0.25\n"
               "inter_p = 0.01\n"
               "replacement = true\n"
               "seed = 77\n"
               "[output]\n"
               "dir = results\n"
               "workers = 3\n"
               "seed = 99\n");
    auto c = load_config(path);
    CHECK(c.corpus_path == "corpus.jsonl");
    CHECK(c.corpus_format == CorpusFormat::directory);
    CHECK(c.stopword_path == "stop.txt");
    CHECK(c.concat_title == false);
    CHECK(c.community_method == "leiden");
    CHECK(c.detector.max_passes == 7);
    CHECK(c.detector.tolerance == doctest::Approx(1e-7));
    CHECK(c.detector.min_community_size == 2);
    CHECK(c.short_methods == std::vector<std::string>{"tfidf", "kmeans"});
    CHECK(c.kmeans_range.lo == 2);
    CHECK(c.kmeans_range.hi == 8);
    CHECK(c.kmeans_range.step == 2);
    CHECK(c.long_methods == std::vector<std::string>{"freq", "entropy"});
    CHECK(c.window == 3);
    CHECK(c.entropy_segments == 10);
    CHECK(c.embeddings_path == "vec.tsv");
    CHECK(c.n_values == std::vector<int>{5, 15});
    CHECK(c.top_k == 40);
    CHECK(c.synth.topics == 3);
    CHECK(c.synth.docs_per_topic == 9);
    CHECK(c.synth.topic_vocab == 12);
    CHECK(c.synth.shared_vocab == 4);
    CHECK(c.synth.abstract_tokens == 50);
    CHECK(c.synth.fulltext_tokens == 200);
    CHECK(c.synth.intra_citation_p == doctest::Approx(0.25));
    CHECK(c.synth.inter_citation_p == doctest::Approx(0.01));
    CHECK(c.synth.sample_with_replacement == true);
    CHECK(c.synth.seed == 77);
    CHECK(c.out_dir == "results");
    CHECK(c.workers == 3);
    CHECK(c.seed == 99);
}

TEST_CASE("load_config rejects malformed input") {
    TempDir tmp;
    auto bad = [&](const std::string& body) {
        auto p = tmp.file("bad.ini");
        write_file(p, body);
        return p;
    };
    CHECK_THROWS_AS(load_config(tmp.file("missing.ini")), io_error);
    CHECK_THROWS_AS(load_config(bad("[corpus]\nnope = 1\n")), parameter_error);
    CHECK_THROWS_AS(load_config(bad("[weird]\npath = x\n")), parameter_error);
    CHECK_THROWS_AS(load_config(bad("[corpus]\njust a line\n")), parameter_error);
    CHECK_THROWS_AS(load_config(bad("[corpus]\nformat = xml\n")), parameter_error);
    CHECK_THROWS_AS(load_config(bad("[output]\nworkers = many\n")), parameter_error);
    CHECK_THROWS_AS(load_config(bad("[synth]\nintra_p = high\n")), parameter_error);
    CHECK_THROWS_AS(load_config(bad("[corpus]\nconcat_title = yep\n")), parameter_error);
    CHECK_THROWS_AS(load_config(bad("path = orphan\n")), parameter_error); // key before section
}

TEST_CASE("validate_config rules") {
    TempDir tmp;
    auto corpus = tmp.file("corpus.jsonl");
    write_file(corpus, "{\"id\":\"d\",\"abstract\":\"alpha beta\"}\n");
    auto vectors = tmp.file("vec.tsv");
    write_file(vectors, "alpha\t1.0\t0.0\n");

    PipelineConfig base;
    base.corpus_path = corpus;
    base.out_dir = tmp.file("out");
    CHECK_NOTHROW(validate_config(base));

    auto expect_param = [&](void (*mutate)(PipelineConfig&), PipelineConfig c) {
        mutate(c);
        CHECK_THROWS_AS(validate_config(c), parameter_error);
    };
    expect_param([](PipelineConfig& c) { c.corpus_path.clear(); }, base);
    expect_param([](PipelineConfig& c) { c.corpus_path = "/no/such/file.jsonl"; }, base);
    expect_param([](PipelineConfig& c) { c.stopword_path = "/no/such/stop.txt"; }, base);
    expect_param([](PipelineConfig& c) { c.out_dir.clear(); }, base);
    expect_param([](PipelineConfig& c) { c.short_methods = {"bogus"}; }, base);
    expect_param([](PipelineConfig& c) { c.short_methods.clear(); }, base);
    expect_param([](PipelineConfig& c) { c.long_methods = {"nope"}; }, base);
    expect_param([](PipelineConfig& c) { c.long_methods = {"bert", "freq", "tfidf"}; }, base);
    expect_param([](PipelineConfig& c) { c.long_methods = {"vote", "freq"}; }, base);
    expect_param(
        [](PipelineConfig& c) {
            c.long_methods = {"textrank"};
            c.window = 1;
        },
        base);
    expect_param([](PipelineConfig& c) { c.window = 0; }, base);
    expect_param([](PipelineConfig& c) { c.n_values.clear(); }, base);
    expect_param([](PipelineConfig& c) { c.n_values = {0}; }, base);
    expect_param([](PipelineConfig& c) { c.n_values = {250}; }, base);
    expect_param(
        [](PipelineConfig& c) {
            c.n_values = {10};
            c.top_k = 5;
        },
        base);
    expect_param([](PipelineConfig& c) { c.community_method = "tfidf"; }, base);
    expect_param([](PipelineConfig& c) { c.detector.max_passes = 0; }, base);
    expect_param([](PipelineConfig& c) { c.detector.tolerance = 0.0; }, base);
    expect_param([](PipelineConfig& c) { c.detector.min_community_size = 0; }, base);
    expect_param([](PipelineConfig& c) { c.kmeans_range = {1, 10, 1}; }, base);
    expect_param([](PipelineConfig& c) { c.kmeans_range = {5, 4, 1}; }, base);
    expect_param([](PipelineConfig& c) { c.entropy_segments = -1; }, base);

    // bert is legal once vectors exist; a bad k range is ignored without kmeans
    PipelineConfig with_bert = base;
    with_bert.long_methods = {"bert", "freq", "tfidf"};
    with_bert.embeddings_path = vectors;
    CHECK_NOTHROW(validate_config(with_bert));
    PipelineConfig no_kmeans = base;
    no_kmeans.short_methods = {"tfidf"};
    no_kmeans.kmeans_range = {1, 0, 0};
    CHECK_NOTHROW(validate_config(no_kmeans));
}

TEST_CASE("run_pipeline is deterministic and stage composition matches") {
    TempDir tmp;
    auto corpus = tmp.file("corpus.jsonl");
    write_synth_corpus(corpus);

    auto run1 = small_config(corpus, tmp.file("out1"));
    auto report = run_pipeline(run1);
    CHECK(report.accuracy.at("multilevel").at("freq").at(10) >= 0.0);
    CHECK(report.accuracy.count("kmeans") == 1);

    // expected artifacts
    fs::path root = tmp.path / "out1";
    for (const char* name :
         {"processed.jsonl", "citations_edges.tsv", "citations_nodes.tsv",
          "partition_multilevel.tsv", "rankings_short.csv", "rankings_long.csv",
          "fallback_docs.tsv", "report.json", "manifest.json"})
        CHECK(fs::exists(root / name));
    auto manifest = nlohmann::json::parse(slurp(root / "manifest.json"));
    CHECK(manifest["failed"].is_null());
    CHECK(manifest["completed"].size() == 5);

    // identical rerun in a fresh directory: byte-identical outputs
    auto run2 = small_config(corpus, tmp.file("out2"));
    run_pipeline(run2);
    // more workers must not change a single byte
    auto run3 = small_config(corpus, tmp.file("out3"));
    run3.workers = 4;
    run_pipeline(run3);

    // the staged path writes the same bytes as the single shot
    auto staged = small_config(corpus, tmp.file("out4"));
    stage_ingest(staged);
    stage_communities(staged);
    stage_extract_short(staged);
    stage_extract_long(staged);
    stage_eval(staged);

    for (const char* name : {"report.json", "rankings_short.csv", "rankings_long.csv",
                             "citations_edges.tsv", "partition_multilevel.tsv"}) {
        auto want = slurp(root / name);
        CHECK(slurp(tmp.path / "out2" / name) == want);
        CHECK(slurp(tmp.path / "out3" / name) == want);
        CHECK(slurp(tmp.path / "out4" / name) == want);
    }
}

TEST_CASE("documents outside every surviving community fall back to tf-idf") {
    TempDir tmp;
    // two cited blocks plus one document nobody cites
    SyntheticSpec spec;
    spec.topics = 2;
    spec.docs_per_topic = 4;
    spec.topic_vocab = 8;
    spec.abstract_tokens = 30;
    spec.fulltext_tokens = 60;
    spec.intra_citation_p = 1.0;
    spec.inter_citation_p = 0.0;
    spec.seed = 4;
    auto synth = generate_synthetic_corpus(spec);
    Document lone;
    lone.id = "lone";
    lone.abstract_raw = "zzqpl wwqpl zzqpl wwqpl zzqpl";
    lone.fulltext_raw = "zzqpl wwqpl qqrst zzqpl wwqpl qqrst zzqpl";
    synth.corpus.push_back(lone);
    auto corpus = tmp.file("corpus.jsonl");
    save_corpus_jsonl(corpus, synth.corpus);

    auto config = small_config(corpus, tmp.file("out"));
    config.short_methods = {"multilevel", "tfidf"};
    config.long_methods = {"freq", "tfidf"};
    config.detector.min_community_size = 2; // the isolated doc's singleton dies
    run_pipeline(config);

    auto fallback = slurp(tmp.path / "out" / "fallback_docs.tsv");
    CHECK(fallback.find("multilevel\tlone") != std::string::npos);

    // the fallback ranking is still labeled with the detector's method name
    auto rankings = load_rankings_csv((tmp.path / "out" / "rankings_short.csv").string());
    bool found = false;
    for (const auto& r : rankings)
        if (r.method == "multilevel" && r.doc_id == "lone" && !r.entries.empty()) found = true;
    CHECK(found);
}

TEST_CASE("failures are recorded in the manifest with stage context") {
    TempDir tmp;
    auto corpus = tmp.file("corpus.jsonl");
    write_synth_corpus(corpus, 4, 0); // no fulltexts anywhere

    auto config = small_config(corpus, tmp.file("out"));
    try {
        run_pipeline(config);
        FAIL("expected precondition_error");
    } catch (const precondition_error& e) {
        CHECK(std::string(e.what()).find("stage extract-long") != std::string::npos);
        CHECK(std::string(e.what()).find("fulltext") != std::string::npos);
    }

    fs::path root = tmp.path / "out";
    auto manifest = nlohmann::json::parse(slurp(root / "manifest.json"));
    CHECK(manifest["failed"] == "extract-long");
    CHECK(!manifest["error"].get<std::string>().empty());
    std::vector<std::string> completed = manifest["completed"];
    CHECK(std::find(completed.begin(), completed.end(), "extract-short") != completed.end());
    CHECK(std::find(completed.begin(), completed.end(), "extract-long") == completed.end());
    // partial outputs from completed stages survive
    CHECK(fs::exists(root / "rankings_short.csv"));

    // stages demand their inputs: eval without rankings names the missing file
    auto cold = small_config(corpus, tmp.file("cold"));
    try {
        stage_eval(cold);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(std::string(e.what()).find("ingest") != std::string::npos);
    }
}

TEST_CASE("stage_synth writes a loadable corpus") {
    TempDir tmp;
    PipelineConfig config;
    config.synth.topics = 2;
    config.synth.docs_per_topic = 3;
    config.synth.topic_vocab = 6;
    config.synth.abstract_tokens = 20;
    config.synth.fulltext_tokens = 30;
    config.synth.seed = 9;
    config.out_dir = tmp.file("synth");
    stage_synth(config);

    fs::path root = tmp.path / "synth";
    auto corpus = load_corpus((root / "corpus.jsonl").string(), CorpusFormat::jsonl);
    CHECK(corpus.size() == 6);
    auto planted = load_rankings_csv((root / "planted_keywords.csv").string());
    CHECK(planted.size() == 6);
    CHECK(planted[0].method == "planted");
    auto partition = load_doc_partition((root / "planted_partition.tsv").string());
    CHECK(partition.doc_ids.size() == 6);
}

TEST_CASE("parallel_for covers every index exactly once") {
    for (unsigned workers : {0u, 1u, 3u, 16u}) {
        std::vector<int> hits(37, 0);
        parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
    // n == 0: the callback never runs
    std::atomic<int> calls{0};
    parallel_for(0, 4, [&](std::size_t) { calls.fetch_add(1); });
    CHECK(calls.load() == 0);
}

TEST_CASE("parallel_for rethrows the lowest-index exception") {
    for (int trial = 0; trial < 5; ++trial) {
        try {
            parallel_for(64, 8, [&](std::size_t i) {
                if (i == 3 || i == 7 || i == 50)
                    throw std::runtime_error("boom " + std::to_string(i));
            });
            FAIL("expected runtime_error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "boom 3");
        }
    }
}
