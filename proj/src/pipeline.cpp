#include "kwx/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kwx/cooc.hpp"
#include "kwx/errors.hpp"
#include "kwx/statkw.hpp"

namespace kwx {

namespace fs = std::filesystem;

namespace {

// Rethrows the in-flight exception with added context, preserving its
// dynamic type for the exit-code mapping.
[[noreturn]] void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const precondition_error& e) {
        throw precondition_error(context + ": " + e.what());
    } catch (const parameter_error& e) {
        throw parameter_error(context + ": " + e.what());
    } catch (const io_error& e) {
        throw io_error(context + ": " + e.what());
    } catch (const parse_error& e) {
        throw parse_error(context + ": " + e.what());
    } catch (const integrity_error& e) {
        throw integrity_error(context + ": " + e.what());
    } catch (const convergence_error& e) {
        throw convergence_error(context + ": " + e.what());
    } catch (const degenerate_error& e) {
        throw degenerate_error(context + ": " + e.what());
    } catch (const validation_error& e) {
        throw validation_error(context + ": " + e.what());
    } catch (const data_error& e) {
        throw data_error(context + ": " + e.what());
    } catch (const numeric_error& e) {
        throw numeric_error(context + ": " + e.what());
    } catch (...) {
        throw;
    }
}

struct OutPaths {
    fs::path root;
    explicit OutPaths(const std::string& dir) : root(dir) {}
    fs::path processed() const { return root / "processed.jsonl"; }
    fs::path edges() const { return root / "citations_edges.tsv"; }
    fs::path nodes() const { return root / "citations_nodes.tsv"; }
    fs::path partition(const std::string& m) const { return root / ("partition_" + m + ".tsv"); }
    fs::path rankings_short() const { return root / "rankings_short.csv"; }
    fs::path fallback() const { return root / "fallback_docs.tsv"; }
    fs::path rankings_long() const { return root / "rankings_long.csv"; }
    fs::path report_json() const { return root / "report.json"; }
    fs::path tables() const { return root / "tables"; }
    fs::path manifest() const { return root / "manifest.json"; }
};

struct ProcessedEntry {
    ProcessedDocument doc;
    std::vector<std::string> references;
};

void write_processed(const fs::path& path, const std::vector<ProcessedEntry>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path.string());
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["id"] = e.doc.id;
        j["references"] = e.references;
        j["abstract_tokens"] = e.doc.abstract_tokens;
        j["fulltext_tokens"] = e.doc.fulltext_tokens;
        j["fulltext_sentences"] = e.doc.fulltext_sentences;
        out << j.dump() << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

std::vector<ProcessedEntry> load_processed(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string() + " (run the ingest stage first)");
    std::vector<ProcessedEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(path.string() + " line " + std::to_string(line_no) + ": " +
                              e.what());
        }
        ProcessedEntry e;
        try {
            e.doc.id = j.at("id").get<std::string>();
            e.references = j.at("references").get<std::vector<std::string>>();
            e.doc.abstract_tokens = j.at("abstract_tokens").get<std::vector<std::string>>();
            e.doc.fulltext_tokens = j.at("fulltext_tokens").get<std::vector<std::string>>();
            e.doc.fulltext_sentences =
                j.at("fulltext_sentences").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e2) {
            throw parse_error(path.string() + " line " + std::to_string(line_no) + ": " +
                              e2.what());
        }
        e.doc.abstract_vocab.insert(e.doc.abstract_tokens.begin(), e.doc.abstract_tokens.end());
        e.doc.fulltext_vocab.insert(e.doc.fulltext_tokens.begin(), e.doc.fulltext_tokens.end());
        entries.push_back(std::move(e));
    }
    return entries;
}

const std::set<std::string>& detector_names() {
    static const std::set<std::string> names = {"multilevel", "labelprop", "leiden", "fastgreedy",
                                                "infomap"};
    return names;
}

Partition run_detector(const std::string& name, const Graph& g, const DetectorParams& params) {
    if (name == "multilevel") return multilevel(g, params);
    if (name == "labelprop") return label_propagation(g, params);
    if (name == "leiden") return leiden(g, params);
    if (name == "fastgreedy") return fast_greedy(g, params);
    if (name == "infomap") return infomap(g, params);
    throw parameter_error("unknown community method: " + name);
}

StopwordSet stopwords_for(const PipelineConfig& config) {
    if (config.stopword_path.empty()) return default_stopwords();
    return load_stopwords(config.stopword_path);
}

std::vector<std::string> detectors_needed(const PipelineConfig& config) {
    std::vector<std::string> out;
    for (const auto& m : config.short_methods)
        if (detector_names().count(m) && std::find(out.begin(), out.end(), m) == out.end())
            out.push_back(m);
    if (detector_names().count(config.community_method) &&
        std::find(out.begin(), out.end(), config.community_method) == out.end())
        out.push_back(config.community_method);
    return out;
}

Graph citation_graph_of(const std::vector<ProcessedEntry>& entries) {
    Corpus stub;
    stub.reserve(entries.size());
    for (const auto& e : entries) {
        Document d;
        d.id = e.doc.id;
        d.references = e.references;
        stub.push_back(std::move(d));
    }
    return build_citation_network(stub);
}

} // namespace

// ---------------------------------------------------------------------------
// config

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t comma = value.find(',', start);
        std::string item = trim(comma == std::string::npos ? value.substr(start)
                                                           : value.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

long long to_int(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw parameter_error("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
}

double to_double(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw parameter_error("config: key '" + key + "' expects a number, got '" + value + "'");
    }
}

bool to_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw parameter_error("config: key '" + key + "' expects true/false, got '" + value + "'");
}

} // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    PipelineConfig config;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw parameter_error("config line " + std::to_string(line_no) +
                                      ": malformed section header");
            section = t.substr(1, t.size() - 2);
            if (section != "corpus" && section != "community" && section != "short" &&
                section != "long" && section != "eval" && section != "synth" &&
                section != "output")
                throw parameter_error("config: unknown section [" + section + "]");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw parameter_error("config line " + std::to_string(line_no) +
                                  ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        std::string qual = section + "." + key;

        if (qual == "corpus.path") {
            config.corpus_path = value;
        } else if (qual == "corpus.format") {
            if (value == "jsonl")
                config.corpus_format = CorpusFormat::jsonl;
            else if (value == "directory")
                config.corpus_format = CorpusFormat::directory;
            else
                throw parameter_error("config: corpus format must be jsonl or directory");
        } else if (qual == "corpus.stopwords") {
            config.stopword_path = value;
        } else if (qual == "corpus.concat_title") {
            config.concat_title = to_bool(value, qual);
        } else if (qual == "community.method") {
            config.community_method = value;
        } else if (qual == "community.max_passes") {
            config.detector.max_passes = static_cast<int>(to_int(value, qual));
        } else if (qual == "community.tolerance") {
            config.detector.tolerance = to_double(value, qual);
        } else if (qual == "community.min_community_size") {
            config.detector.min_community_size = static_cast<int>(to_int(value, qual));
        } else if (qual == "short.methods") {
            config.short_methods = split_list(value);
        } else if (qual == "short.kmeans_lo") {
            config.kmeans_range.lo = static_cast<int>(to_int(value, qual));
        } else if (qual == "short.kmeans_hi") {
            config.kmeans_range.hi = static_cast<int>(to_int(value, qual));
        } else if (qual == "short.kmeans_step") {
            config.kmeans_range.step = static_cast<int>(to_int(value, qual));
        } else if (qual == "long.methods") {
            config.long_methods = split_list(value);
        } else if (qual == "long.window") {
            config.window = static_cast<int>(to_int(value, qual));
        } else if (qual == "long.entropy_segments") {
            config.entropy_segments = static_cast<int>(to_int(value, qual));
        } else if (qual == "long.embeddings") {
            config.embeddings_path = value;
        } else if (qual == "eval.n") {
            config.n_values.clear();
            for (const auto& item : split_list(value))
                config.n_values.push_back(static_cast<int>(to_int(item, qual)));
        } else if (qual == "eval.top_k") {
            config.top_k = static_cast<std::size_t>(to_int(value, qual));
        } else if (qual == "synth.topics") {
            config.synth.topics = static_cast<int>(to_int(value, qual));
        } else if (qual == "synth.docs_per_topic") {
            config.synth.docs_per_topic = static_cast<int>(to_int(value, qual));
        } else if (qual == "synth.topic_vocab") {
            config.synth.topic_vocab = static_cast<int>(to_int(value, qual));
        } else if (qual == "synth.shared_vocab") {
            config.synth.shared_vocab = static_cast<int>(to_int(value, qual));
        } else if (qual == "synth.abstract_tokens") {
            config.synth.abstract_tokens = static_cast<int>(to_int(value, qual));
        } else if (qual == "synth.fulltext_tokens") {
            config.synth.fulltext_tokens = static_cast<int>(to_int(value, qual));
        } else if (qual == "synth.intra_p") {
            config.synth.intra_citation_p = to_double(value, qual);
        } else if (qual == "synth.inter_p") {
            config.synth.inter_citation_p = to_double(value, qual);
        } else if (qual == "synth.replacement") {
            config.synth.sample_with_replacement = to_bool(value, qual);
        } else if (qual == "synth.seed") {
            config.synth.seed = static_cast<std::uint64_t>(to_int(value, qual));
        } else if (qual == "output.dir") {
            config.out_dir = value;
        } else if (qual == "output.workers") {
            config.workers = static_cast<unsigned>(to_int(value, qual));
        } else if (qual == "output.seed") {
            config.seed = static_cast<std::uint64_t>(to_int(value, qual));
        } else {
            throw parameter_error("config: unknown key '" + key + "' in [" + section + "]");
        }
    }
    return config;
}

void validate_config(const PipelineConfig& config) {
    if (config.corpus_path.empty()) throw parameter_error("config: corpus path not set");
    if (!fs::exists(config.corpus_path))
        throw parameter_error("config: corpus path does not exist: " + config.corpus_path);
    if (!config.stopword_path.empty() && !fs::exists(config.stopword_path))
        throw parameter_error("config: stopword path does not exist: " + config.stopword_path);
    if (!config.embeddings_path.empty() && !fs::exists(config.embeddings_path))
        throw parameter_error("config: embeddings path does not exist: " +
                              config.embeddings_path);
    if (config.out_dir.empty()) throw parameter_error("config: output dir not set");

    static const std::set<std::string> short_ok = {"multilevel", "labelprop", "leiden",
                                                   "fastgreedy", "infomap", "tfidf", "kmeans"};
    static const std::set<std::string> long_ok = {
        "freq",       "tfidf",      "entropy",     "intermittency", "yake",
        "textrank",   "bert",       "vote",        "degree",        "pagerank",
        "betweenness", "closeness", "eigenvector", "accessibility1", "accessibility2"};
    if (config.short_methods.empty()) throw parameter_error("config: no short methods");
    for (const auto& m : config.short_methods)
        if (!short_ok.count(m)) throw parameter_error("config: unknown short method: " + m);
    if (config.long_methods.empty()) throw parameter_error("config: no long methods");
    for (const auto& m : config.long_methods)
        if (!long_ok.count(m)) throw parameter_error("config: unknown long method: " + m);
    if (!detector_names().count(config.community_method))
        throw parameter_error("config: unknown community method: " + config.community_method);

    auto has_long = [&](const char* m) {
        return std::find(config.long_methods.begin(), config.long_methods.end(), m) !=
               config.long_methods.end();
    };
    if (has_long("bert") && config.embeddings_path.empty())
        throw parameter_error("config: method bert requires an embeddings file");
    if (has_long("vote") && config.long_methods.size() < 3)
        throw parameter_error("config: vote needs at least two other long methods");
    if (has_long("textrank") && (config.window < 2 || config.window > 10))
        throw parameter_error("config: textrank requires window in [2,10]");
    if (config.window < 1) throw parameter_error("config: window must be >= 1");

    if (config.n_values.empty()) throw parameter_error("config: no N values");
    int max_n = 0;
    for (int n : config.n_values) {
        if (n < 1 || n > 200) throw parameter_error("config: N values must lie in [1,200]");
        max_n = std::max(max_n, n);
    }
    if (config.top_k < static_cast<std::size_t>(max_n))
        throw parameter_error("config: top_k must be >= the largest N");

    if (config.detector.max_passes < 1) throw parameter_error("config: max_passes must be >= 1");
    if (!(config.detector.tolerance > 0.0))
        throw parameter_error("config: tolerance must be > 0");
    if (config.detector.min_community_size < 1)
        throw parameter_error("config: min_community_size must be >= 1");
    bool wants_kmeans = std::find(config.short_methods.begin(), config.short_methods.end(),
                                  "kmeans") != config.short_methods.end();
    if (wants_kmeans &&
        (config.kmeans_range.lo < 2 || config.kmeans_range.hi < config.kmeans_range.lo ||
         config.kmeans_range.step < 1))
        throw parameter_error("config: invalid kmeans k range");
    if (config.entropy_segments < 0)
        throw parameter_error("config: entropy_segments must be >= 0");
}

// ---------------------------------------------------------------------------
// stages

void stage_ingest(const PipelineConfig& config) {
    try {
        OutPaths paths(config.out_dir);
        fs::create_directories(paths.root);
        StopwordSet stopwords = stopwords_for(config);
        Corpus corpus = load_corpus(config.corpus_path, config.corpus_format);
        auto processed = process_corpus(corpus, stopwords, config.concat_title, config.workers);
        std::vector<ProcessedEntry> entries;
        entries.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i)
            entries.push_back({std::move(processed[i]), corpus[i].references});
        write_processed(paths.processed(), entries);
    } catch (...) {
        rethrow_with_context("stage ingest");
    }
}

void stage_communities(const PipelineConfig& config) {
    OutPaths paths(config.out_dir);
    std::vector<ProcessedEntry> entries;
    Graph g;
    try {
        entries = load_processed(paths.processed());
        g = citation_graph_of(entries);
        save_graph(g, paths.edges().string(), paths.nodes().string());
    } catch (...) {
        rethrow_with_context("stage communities");
    }
    for (const auto& name : detectors_needed(config)) {
        try {
            DetectorParams params = config.detector;
            params.seed = config.seed;
            Partition p = run_detector(name, g, params);
            auto filtered = filter_small_communities(p, params.min_community_size);
            save_partition(g, filtered.first, paths.partition(name).string());
        } catch (...) {
            rethrow_with_context("stage communities, method " + name);
        }
    }
}

void stage_extract_short(const PipelineConfig& config) {
    OutPaths paths(config.out_dir);
    std::vector<ProcessedEntry> entries;
    TfIdfModel abs_model;
    std::unordered_map<std::string, std::unordered_set<std::string>> abstracts;
    try {
        entries = load_processed(paths.processed());
        std::vector<std::vector<std::string>> abstract_docs;
        abstract_docs.reserve(entries.size());
        for (const auto& e : entries) {
            abstract_docs.push_back(e.doc.abstract_tokens);
            abstracts[e.doc.id] = e.doc.abstract_vocab;
        }
        abs_model = fit_tfidf(abstract_docs, TfIdfModel::Scope::abstracts);
    } catch (...) {
        rethrow_with_context("stage extract-short");
    }

    std::vector<KeywordRanking> rankings;
    std::vector<std::pair<std::string, std::string>> fallbacks; // (method, doc_id)
    for (const auto& method : config.short_methods) {
        try {
            if (detector_names().count(method)) {
                Graph g = load_graph(paths.edges().string(), paths.nodes().string());
                Partition p = load_partition(g, paths.partition(method).string());
                DocPartition dp;
                dp.doc_ids.reserve(g.node_count());
                for (std::size_t i = 0; i < g.node_count(); ++i)
                    dp.doc_ids.push_back(g.node_id(i));
                dp.labels = p.labels;
                ImportanceTable table = build_importance_table(dp, abstracts);
                std::unordered_map<std::string, int> label_of;
                for (std::size_t i = 0; i < dp.doc_ids.size(); ++i)
                    label_of[dp.doc_ids[i]] = dp.labels[i];
                for (const auto& e : entries) {
                    auto it = label_of.find(e.doc.id);
                    int label = it == label_of.end() ? -1 : it->second;
                    if (label >= 0) {
                        rankings.push_back(
                            extract_community_keywords(e.doc, table, config.top_k, method));
                    } else {
                        // community filtered out: fall back to tf-idf keywords
                        KeywordRanking r = extract_tfidf_keywords(e.doc, abs_model, config.top_k);
                        r.method = method;
                        rankings.push_back(std::move(r));
                        fallbacks.emplace_back(method, e.doc.id);
                    }
                }
            } else if (method == "tfidf") {
                for (const auto& e : entries)
                    rankings.push_back(extract_tfidf_keywords(e.doc, abs_model, config.top_k));
            } else if (method == "kmeans") {
                std::vector<ProcessedDocument> docs;
                docs.reserve(entries.size());
                for (const auto& e : entries) docs.push_back(e.doc);
                DocVectors vectors = tfidf_doc_vectors(docs, abs_model);
                DocPartition dp = kmeans_partition(vectors, config.kmeans_range, config.seed);
                ImportanceTable table = build_importance_table(dp, abstracts);
                for (const auto& e : entries)
                    rankings.push_back(
                        extract_community_keywords(e.doc, table, config.top_k, "kmeans"));
            } else {
                throw parameter_error("unknown short method: " + method);
            }
        } catch (...) {
            rethrow_with_context("stage extract-short, method " + method);
        }
    }
    try {
        write_rankings_csv(paths.rankings_short().string(), rankings);
        std::ofstream out(paths.fallback(), std::ios::binary);
        if (!out) throw io_error("cannot write " + paths.fallback().string());
        for (const auto& [method, doc_id] : fallbacks) out << method << '\t' << doc_id << '\n';
    } catch (...) {
        rethrow_with_context("stage extract-short");
    }
}

void stage_extract_long(const PipelineConfig& config) {
    OutPaths paths(config.out_dir);
    std::vector<ProcessedEntry> all_entries;
    StopwordSet stopwords;
    EmbeddingTable embeddings;
    try {
        all_entries = load_processed(paths.processed());
        stopwords = stopwords_for(config);
        if (!config.embeddings_path.empty()) embeddings = load_embeddings(config.embeddings_path);
    } catch (...) {
        rethrow_with_context("stage extract-long");
    }

    std::vector<const ProcessedDocument*> docs;
    for (const auto& e : all_entries)
        if (!e.doc.fulltext_tokens.empty()) docs.push_back(&e.doc);

    TfIdfModel model;
    try {
        if (docs.empty()) throw precondition_error("no document has a fulltext");
        std::vector<std::vector<std::string>> token_docs;
        token_docs.reserve(docs.size());
        for (const auto* d : docs) token_docs.push_back(d->fulltext_tokens);
        model = fit_tfidf(token_docs, TfIdfModel::Scope::fulltexts);
    } catch (...) {
        rethrow_with_context("stage extract-long");
    }

    const EmbeddingTable* emb_ptr = config.embeddings_path.empty() ? nullptr : &embeddings;
    bool needs_cooc = false;
    for (const auto& m : config.long_methods)
        if (m == "degree" || m == "pagerank" || m == "betweenness" || m == "closeness" ||
            m == "eigenvector" || m == "accessibility1" || m == "accessibility2")
            needs_cooc = true;

    std::vector<std::vector<KeywordRanking>> per_doc(docs.size());
    parallel_for(docs.size(), config.workers, [&](std::size_t di) {
        const ProcessedDocument& doc = *docs[di];
        std::vector<KeywordRanking> computed;
        computed.reserve(config.long_methods.size());
        Graph cooc;
        bool cooc_built = false;
        auto metric_scores = [&](const std::string& m) {
            if (!cooc_built) {
                CoocParams cp;
                cp.window = config.window;
                cp.embeddings = emb_ptr;
                cooc = build_cooc_network(doc.fulltext_tokens, cp);
                cooc_built = true;
            }
            if (m == "degree") return centrality(cooc, CentralityMetric::degree);
            if (m == "pagerank") return centrality(cooc, CentralityMetric::pagerank);
            if (m == "betweenness") return centrality(cooc, CentralityMetric::betweenness);
            if (m == "closeness") return centrality(cooc, CentralityMetric::closeness);
            if (m == "eigenvector") return centrality(cooc, CentralityMetric::eigenvector);
            if (m == "accessibility1") return accessibility(cooc, 1);
            return accessibility(cooc, 2); // accessibility2
        };
        for (const auto& method : config.long_methods) {
            try {
                KeywordRanking r;
                if (method == "freq") {
                    r = frequency_rank(doc.fulltext_tokens, config.top_k);
                } else if (method == "tfidf") {
                    r = tfidf_rank(doc.fulltext_tokens, model, config.top_k);
                } else if (method == "entropy") {
                    int n_seg = config.entropy_segments > 0
                                    ? config.entropy_segments
                                    : (doc.fulltext_sentences.size() >= 2
                                           ? static_cast<int>(doc.fulltext_sentences.size())
                                           : 20);
                    if (doc.fulltext_tokens.size() < 2) {
                        r.method = "entropy"; // too short to segment: empty ranking
                    } else {
                        n_seg = std::min(n_seg, static_cast<int>(doc.fulltext_tokens.size()));
                        n_seg = std::max(n_seg, 2);
                        r = word_entropy(doc.fulltext_tokens, n_seg, config.top_k);
                    }
                } else if (method == "intermittency") {
                    r = word_intermittency(doc.fulltext_tokens, config.top_k);
                } else if (method == "yake") {
                    r = yake_rank(doc.fulltext_sentences, stopwords, config.top_k);
                } else if (method == "textrank") {
                    r = textrank(doc.fulltext_tokens, config.window, 0.85, config.top_k);
                } else if (method == "bert") {
                    r = embedding_rank(doc.fulltext_tokens, embeddings, config.top_k);
                } else if (method == "vote") {
                    r = vote_merge(computed, config.top_k);
                } else {
                    r = rank_by_centrality(metric_scores(method), config.top_k);
                    r.method = method;
                }
                r.doc_id = doc.id;
                computed.push_back(std::move(r));
            } catch (...) {
                rethrow_with_context("stage extract-long, doc " + doc.id + ", method " + method);
            }
        }
        per_doc[di] = std::move(computed);
    });

    try {
        std::vector<KeywordRanking> rankings;
        rankings.reserve(docs.size() * config.long_methods.size());
        for (std::size_t mi = 0; mi < config.long_methods.size(); ++mi)
            for (std::size_t di = 0; di < docs.size(); ++di)
                rankings.push_back(std::move(per_doc[di][mi]));
        write_rankings_csv(paths.rankings_long().string(), rankings);
    } catch (...) {
        rethrow_with_context("stage extract-long");
    }
}

EvaluationReport stage_eval(const PipelineConfig& config) {
    try {
        OutPaths paths(config.out_dir);
        auto entries = load_processed(paths.processed());
        std::vector<ProcessedDocument> docs;
        docs.reserve(entries.size());
        for (auto& e : entries) docs.push_back(std::move(e.doc));
        auto shorts = load_rankings_csv(paths.rankings_short().string());
        auto longs = load_rankings_csv(paths.rankings_long().string());
        EvaluationReport report = build_report(shorts, longs, docs, config.short_methods,
                                               config.long_methods, config.n_values);
        save_report_json(report, paths.report_json().string());
        save_report_csvs(report, paths.tables().string());
        return report;
    } catch (...) {
        rethrow_with_context("stage eval");
    }
}

void stage_synth(const PipelineConfig& config) {
    try {
        OutPaths paths(config.out_dir);
        fs::create_directories(paths.root);
        SyntheticCorpus synth = generate_synthetic_corpus(config.synth);
        save_corpus_jsonl((paths.root / "corpus.jsonl").string(), synth.corpus);
        save_planted_keywords((paths.root / "planted_keywords.csv").string(),
                              synth.planted_keywords);
        save_doc_partition((paths.root / "planted_partition.tsv").string(),
                           synth.planted_partition);
    } catch (...) {
        rethrow_with_context("stage synth");
    }
}

// ---------------------------------------------------------------------------
// orchestration

namespace {

void write_manifest(const OutPaths& paths, const std::vector<std::string>& completed,
                    const std::string& failed, const std::string& error) {
    nlohmann::ordered_json j;
    j["completed"] = completed;
    if (failed.empty()) {
        j["failed"] = nullptr;
    } else {
        j["failed"] = failed;
        j["error"] = error;
    }
    std::ofstream out(paths.manifest(), std::ios::binary);
    if (out) out << j.dump(2) << '\n';
}

} // namespace

EvaluationReport run_pipeline(const PipelineConfig& config) {
    validate_config(config);
    OutPaths paths(config.out_dir);
    fs::create_directories(paths.root);

    struct Stage {
        const char* name;
        std::function<void()> run;
    };
    EvaluationReport report;
    std::vector<Stage> stages = {
        {"ingest", [&] { stage_ingest(config); }},
        {"communities", [&] { stage_communities(config); }},
        {"extract-short", [&] { stage_extract_short(config); }},
        {"extract-long", [&] { stage_extract_long(config); }},
        {"eval", [&] { report = stage_eval(config); }},
    };
    std::vector<std::string> completed;
    for (const auto& stage : stages) {
        try {
            stage.run();
        } catch (const std::exception& e) {
            write_manifest(paths, completed, stage.name, e.what());
            throw;
        }
        completed.push_back(stage.name);
    }
    write_manifest(paths, completed, "", "");
    return report;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (workers == 0) workers = hw > 0 ? hw : 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    std::size_t first_error_index = n;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < first_error_index) {
                    first_error_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace kwx
