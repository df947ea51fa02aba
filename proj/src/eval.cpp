#include "kwx/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "kwx/errors.hpp"
#include "kwx/rng.hpp"

namespace kwx {

// ---------------------------------------------------------------------------
// ranking utilities

void sort_and_truncate(std::vector<std::pair<std::string, double>>& entries, std::size_t k) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (entries.size() > k) entries.resize(k);
}

std::string format_score(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

void write_rankings_csv(const std::string& path, const std::vector<KeywordRanking>& rankings) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write rankings file: " + path);
    out << "doc_id,rank,word,score,method\n";
    for (const auto& r : rankings)
        for (std::size_t i = 0; i < r.entries.size(); ++i)
            out << r.doc_id << ',' << i + 1 << ',' << r.entries[i].first << ','
                << format_score(r.entries[i].second) << ',' << r.method << '\n';
    if (!out) throw io_error("write failed: " + path);
}

std::vector<KeywordRanking> load_rankings_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open rankings file: " + path);
    std::vector<KeywordRanking> rankings;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line == "doc_id,rank,word,score,method") continue;
        std::array<std::string, 5> field;
        std::size_t start = 0, fi = 0;
        for (; fi < 4; ++fi) {
            auto comma = line.find(',', start);
            if (comma == std::string::npos)
                throw parse_error(path + " line " + std::to_string(line_no) +
                                  ": expected 5 comma-separated fields");
            field[fi] = line.substr(start, comma - start);
            start = comma + 1;
        }
        field[4] = line.substr(start);
        if (field[4].find(',') != std::string::npos)
            throw parse_error(path + " line " + std::to_string(line_no) +
                              ": expected 5 comma-separated fields");
        // the rank column is redundant (file order decides), but refusing
        // garbage there catches column-shifted or hand-mangled files
        if (field[1].empty() ||
            field[1].find_first_not_of("0123456789") != std::string::npos || field[1] == "0")
            throw parse_error(path + " line " + std::to_string(line_no) + ": malformed rank");
        double score;
        try {
            score = std::stod(field[3]);
        } catch (const std::exception&) {
            throw parse_error(path + " line " + std::to_string(line_no) + ": malformed score");
        }
        if (rankings.empty() || rankings.back().doc_id != field[0] ||
            rankings.back().method != field[4]) {
            KeywordRanking r;
            r.doc_id = field[0];
            r.method = field[4];
            rankings.push_back(std::move(r));
        }
        rankings.back().entries.emplace_back(field[2], score);
    }
    return rankings;
}

// ---------------------------------------------------------------------------
// agreement metrics

double accuracy_at_n(const KeywordRanking& extracted, const KeywordRanking& reference,
                     std::size_t n) {
    if (n < 1) throw parameter_error("accuracy_at_n: n must be >= 1");
    if (reference.entries.empty())
        throw degenerate_error("accuracy_at_n: empty reference ranking");
    std::unordered_set<std::string> ref_top;
    std::size_t ref_count = std::min(n, reference.entries.size());
    for (std::size_t i = 0; i < ref_count; ++i) ref_top.insert(reference.entries[i].first);
    std::size_t hits = 0;
    std::size_t ext_count = std::min(n, extracted.entries.size());
    for (std::size_t i = 0; i < ext_count; ++i)
        if (ref_top.count(extracted.entries[i].first)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ref_count);
}

std::vector<std::pair<int, double>> common_words_cdf(const std::vector<ProcessedDocument>& docs) {
    std::vector<std::size_t> common;
    for (const auto& doc : docs) {
        if (doc.fulltext_vocab.empty()) continue;
        std::size_t x = 0;
        for (const auto& w : doc.abstract_vocab)
            if (doc.fulltext_vocab.count(w)) ++x;
        common.push_back(x);
    }
    if (common.empty()) throw precondition_error("common_words_cdf: no document has a fulltext");
    std::size_t max_x = *std::max_element(common.begin(), common.end());
    std::vector<std::pair<int, double>> table;
    table.reserve(max_x + 2);
    for (std::size_t w = 0; w <= max_x + 1; ++w) {
        std::size_t at_least = 0;
        for (std::size_t x : common)
            if (x >= w) ++at_least;
        table.emplace_back(static_cast<int>(w),
                           static_cast<double>(at_least) / static_cast<double>(common.size()));
    }
    return table;
}

std::vector<std::pair<int, double>> overlap_curve(
    const std::vector<KeywordRanking>& reference_rankings,
    const std::vector<ProcessedDocument>& docs, const std::vector<int>& n_values) {
    if (reference_rankings.empty())
        throw precondition_error("overlap_curve: no reference rankings");
    std::unordered_map<std::string, const std::unordered_set<std::string>*> vocab_of;
    for (const auto& doc : docs) vocab_of[doc.id] = &doc.abstract_vocab;

    std::vector<std::pair<int, double>> curve;
    curve.reserve(n_values.size());
    for (int n : n_values) {
        if (n < 1) throw parameter_error("overlap_curve: n must be >= 1");
        double total = 0.0;
        for (const auto& r : reference_rankings) {
            auto it = vocab_of.find(r.doc_id);
            if (it == vocab_of.end())
                throw precondition_error("overlap_curve: ranking for unknown document " +
                                         r.doc_id);
            std::size_t limit = std::min(static_cast<std::size_t>(n), r.entries.size());
            std::size_t hits = 0;
            for (std::size_t i = 0; i < limit; ++i)
                if (it->second->count(r.entries[i].first)) ++hits;
            total += static_cast<double>(hits);
        }
        curve.emplace_back(n, total / static_cast<double>(reference_rankings.size()));
    }
    return curve;
}

namespace {

// positions 1..n over entries sorted by descending score, equal scores
// averaged into the same rank
std::unordered_map<std::string, double> average_ranks(
    std::vector<std::pair<std::string, double>> entries) {
    sort_and_truncate(entries, entries.size());
    std::unordered_map<std::string, double> ranks;
    ranks.reserve(entries.size());
    std::size_t i = 0;
    while (i < entries.size()) {
        std::size_t j = i;
        while (j < entries.size() && entries[j].second == entries[i].second) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) ranks[entries[t].first] = avg;
        i = j;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw degenerate_error("spearman: constant ranks, correlation undefined");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

double spearman(const KeywordRanking& a, const KeywordRanking& b) {
    if (a.entries.size() != b.entries.size())
        throw precondition_error("spearman: rankings cover different word sets");
    if (a.entries.size() < 2) throw degenerate_error("spearman: fewer than 2 words");
    auto ra = average_ranks(a.entries);
    auto rb = average_ranks(b.entries);
    std::vector<double> x, y;
    x.reserve(ra.size());
    y.reserve(ra.size());
    for (const auto& [word, rank] : ra) {
        auto it = rb.find(word);
        if (it == rb.end())
            throw precondition_error("spearman: rankings cover different word sets");
        x.push_back(rank);
        y.push_back(it->second);
    }
    return pearson(x, y);
}

double spearman_union(const KeywordRanking& a, const KeywordRanking& b) {
    std::set<std::string> words;
    for (const auto& e : a.entries) words.insert(e.first);
    for (const auto& e : b.entries) words.insert(e.first);
    if (words.size() < 2) throw degenerate_error("spearman: fewer than 2 words");
    auto ra = average_ranks(a.entries);
    auto rb = average_ranks(b.entries);
    // absent words share the worst tied rank
    double absent_a = (static_cast<double>(ra.size() + 1) + static_cast<double>(words.size())) / 2.0;
    double absent_b = (static_cast<double>(rb.size() + 1) + static_cast<double>(words.size())) / 2.0;
    std::vector<double> x, y;
    x.reserve(words.size());
    y.reserve(words.size());
    for (const auto& w : words) {
        auto ia = ra.find(w);
        auto ib = rb.find(w);
        x.push_back(ia == ra.end() ? absent_a : ia->second);
        y.push_back(ib == rb.end() ? absent_b : ib->second);
    }
    return pearson(x, y);
}

// ---------------------------------------------------------------------------
// synthetic corpus

namespace {

// vowelless code words are Porter fixed points and never stopwords, so the
// planted vocabulary survives preprocessing verbatim
std::string encode_base16(int value, int width) {
    static const char digits[] = "bcdfgjklmnpqrtvz";
    std::string out(static_cast<std::size_t>(width), 'b');
    for (int i = width - 1; i >= 0; --i) {
        out[i] = digits[value % 16];
        value /= 16;
    }
    return out;
}

std::vector<std::string> sample_tokens(Rng& rng, const std::vector<std::string>& vocab,
                                       int count, bool with_replacement) {
    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(count));
    if (with_replacement) {
        for (int i = 0; i < count; ++i)
            tokens.push_back(vocab[rng.below(vocab.size())]);
    } else {
        std::vector<std::size_t> order(vocab.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        for (int i = 0; i < count; ++i) tokens.push_back(vocab[order[i]]);
    }
    return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

} // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
    if (spec.topics < 1 || spec.topics > 256)
        throw parameter_error("synthetic: topics must lie in [1,256]");
    if (spec.docs_per_topic < 1) throw parameter_error("synthetic: docs_per_topic must be >= 1");
    if (spec.topic_vocab < 1 || spec.topic_vocab > 4096)
        throw parameter_error("synthetic: topic_vocab must lie in [1,4096]");
    if (spec.shared_vocab < 0 || spec.shared_vocab > 4096)
        throw parameter_error("synthetic: shared_vocab must lie in [0,4096]");
    if (spec.abstract_tokens < 1) throw parameter_error("synthetic: abstract_tokens must be >= 1");
    if (spec.fulltext_tokens < 0) throw parameter_error("synthetic: fulltext_tokens must be >= 0");
    if (spec.intra_citation_p < 0.0 || spec.intra_citation_p > 1.0 ||
        spec.inter_citation_p < 0.0 || spec.inter_citation_p > 1.0)
        throw parameter_error("synthetic: citation probabilities must lie in [0,1]");
    int pool = spec.topic_vocab + spec.shared_vocab;
    if (!spec.sample_with_replacement &&
        pool < std::max(spec.abstract_tokens, spec.fulltext_tokens))
        throw parameter_error(
            "synthetic: vocabulary smaller than requested tokens with replacement disabled");

    std::vector<std::string> shared;
    shared.reserve(static_cast<std::size_t>(spec.shared_vocab));
    for (int i = 0; i < spec.shared_vocab; ++i) shared.push_back("vv" + encode_base16(i, 3));

    Rng rng(spec.seed);
    SyntheticCorpus out;
    std::vector<std::vector<std::string>> topic_vocab(static_cast<std::size_t>(spec.topics));
    std::vector<std::vector<std::string>> doc_pool(static_cast<std::size_t>(spec.topics));
    for (int t = 0; t < spec.topics; ++t) {
        auto& vocab = topic_vocab[t];
        vocab.reserve(static_cast<std::size_t>(spec.topic_vocab));
        for (int i = 0; i < spec.topic_vocab; ++i)
            vocab.push_back("k" + encode_base16(t, 2) + encode_base16(i, 3));
        doc_pool[t] = vocab;
        doc_pool[t].insert(doc_pool[t].end(), shared.begin(), shared.end());
    }

    std::vector<std::vector<std::string>> abstract_tokens;
    for (int t = 0; t < spec.topics; ++t) {
        for (int d = 0; d < spec.docs_per_topic; ++d) {
            Document doc;
            doc.id = "t" + std::to_string(t) + "_d" + std::to_string(d);
            auto abs_tokens =
                sample_tokens(rng, doc_pool[t], spec.abstract_tokens, spec.sample_with_replacement);
            doc.abstract_raw = join_tokens(abs_tokens);
            if (spec.fulltext_tokens > 0) {
                auto full_tokens = sample_tokens(rng, doc_pool[t], spec.fulltext_tokens,
                                                 spec.sample_with_replacement);
                doc.fulltext_raw = join_tokens(full_tokens);
            }
            out.corpus.push_back(std::move(doc));
            abstract_tokens.push_back(std::move(abs_tokens));
            out.planted_partition.doc_ids.push_back(out.corpus.back().id);
            out.planted_partition.labels.push_back(t);
        }
    }

    // citations: each unordered pair once, the later doc citing the earlier
    std::size_t n_docs = out.corpus.size();
    for (std::size_t i = 0; i < n_docs; ++i) {
        for (std::size_t j = i + 1; j < n_docs; ++j) {
            bool same = out.planted_partition.labels[i] == out.planted_partition.labels[j];
            double p = same ? spec.intra_citation_p : spec.inter_citation_p;
            if (p > 0.0 && rng.bernoulli(p))
                out.corpus[j].references.push_back(out.corpus[i].id);
        }
    }

    // planted keywords: topic vocabulary ranked by per-topic abstract
    // document frequency (descending, ties lexicographic)
    std::vector<std::vector<std::pair<std::string, double>>> planted_entries(
        static_cast<std::size_t>(spec.topics));
    for (int t = 0; t < spec.topics; ++t) {
        std::unordered_map<std::string, std::size_t> df;
        for (int d = 0; d < spec.docs_per_topic; ++d) {
            std::size_t doc_idx = static_cast<std::size_t>(t) *
                                      static_cast<std::size_t>(spec.docs_per_topic) +
                                  static_cast<std::size_t>(d);
            std::unordered_set<std::string> seen(abstract_tokens[doc_idx].begin(),
                                                 abstract_tokens[doc_idx].end());
            for (const auto& w : seen)
                if (w.size() == 6 && w[0] == 'k') ++df[w]; // topic-exclusive words only
        }
        auto& entries = planted_entries[t];
        entries.reserve(topic_vocab[t].size());
        for (const auto& w : topic_vocab[t]) {
            auto it = df.find(w);
            entries.emplace_back(w, it == df.end() ? 0.0 : static_cast<double>(it->second));
        }
        sort_and_truncate(entries, entries.size());
    }
    for (std::size_t i = 0; i < n_docs; ++i) {
        KeywordRanking r;
        r.doc_id = out.corpus[i].id;
        r.method = "planted";
        r.entries = planted_entries[out.planted_partition.labels[i]];
        out.planted_keywords.push_back(std::move(r));
    }
    return out;
}

void save_planted_keywords(const std::string& path, const std::vector<KeywordRanking>& planted) {
    write_rankings_csv(path, planted);
}

void save_doc_partition(const std::string& path, const DocPartition& p) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write partition file: " + path);
    for (std::size_t i = 0; i < p.doc_ids.size(); ++i)
        out << p.doc_ids[i] << '\t' << p.labels[i] << '\n';
    if (!out) throw io_error("write failed: " + path);
}

DocPartition load_doc_partition(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open partition file: " + path);
    DocPartition p;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw parse_error(path + " line " + std::to_string(line_no) +
                              ": expected doc_id<TAB>label");
        int label;
        try {
            label = std::stoi(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw parse_error(path + " line " + std::to_string(line_no) + ": malformed label");
        }
        p.doc_ids.push_back(line.substr(0, tab));
        p.labels.push_back(label);
    }
    return p;
}

// ---------------------------------------------------------------------------
// report assembly

EvaluationReport build_report(const std::vector<KeywordRanking>& short_rankings,
                              const std::vector<KeywordRanking>& long_rankings,
                              const std::vector<ProcessedDocument>& docs,
                              const std::vector<std::string>& short_methods,
                              const std::vector<std::string>& long_methods,
                              const std::vector<int>& n_values) {
    for (int n : n_values)
        if (n < 1 || n > 200) throw parameter_error("build_report: N values must lie in [1,200]");

    auto index = [](const std::vector<KeywordRanking>& rankings) {
        std::map<std::string, std::map<std::string, const KeywordRanking*>> by_method;
        for (const auto& r : rankings) by_method[r.method][r.doc_id] = &r;
        return by_method;
    };
    auto short_index = index(short_rankings);
    auto long_index = index(long_rankings);

    // completeness: every requested method must contribute rankings, and
    // every accuracy cell must cover at least one document
    std::vector<std::string> gaps;
    for (const auto& m : short_methods)
        if (!short_index.count(m)) gaps.push_back("short method " + m + ": no rankings");
    for (const auto& m : long_methods)
        if (!long_index.count(m)) gaps.push_back("reference method " + m + ": no rankings");

    EvaluationReport report;
    if (gaps.empty()) {
        for (const auto& m : short_methods) {
            const auto& ext_docs = short_index[m];
            for (const auto& r : long_methods) {
                const auto& ref_docs = long_index[r];
                for (int n : n_values) {
                    std::vector<std::pair<std::string, double>> per_doc;
                    double total = 0.0;
                    for (const auto& doc : docs) {
                        auto ie = ext_docs.find(doc.id);
                        auto ir = ref_docs.find(doc.id);
                        if (ie == ext_docs.end() || ir == ref_docs.end()) continue;
                        double acc =
                            accuracy_at_n(*ie->second, *ir->second, static_cast<std::size_t>(n));
                        per_doc.emplace_back(doc.id, acc);
                        total += acc;
                    }
                    if (per_doc.empty()) {
                        gaps.push_back(m + " vs " + r + " at N=" + std::to_string(n) +
                                       ": no documents");
                        continue;
                    }
                    report.accuracy[m][r][n] = total / static_cast<double>(per_doc.size());
                    report.accuracy_per_doc[m][r][n] = std::move(per_doc);
                }
            }
        }
    }
    if (!gaps.empty()) {
        std::string msg = "report incomplete:";
        for (const auto& g : gaps) msg += "\n  " + g;
        throw precondition_error(msg);
    }

    // pairwise rank agreement between reference extractors
    for (std::size_t ai = 0; ai < long_methods.size(); ++ai) {
        for (std::size_t bi = ai + 1; bi < long_methods.size(); ++bi) {
            const auto& ma = long_methods[ai];
            const auto& mb = long_methods[bi];
            const auto& da = long_index[ma];
            const auto& db = long_index[mb];
            double sum_full = 0.0, sum_top30 = 0.0;
            std::size_t n_full = 0, n_top30 = 0;
            for (const auto& doc : docs) {
                auto ia = da.find(doc.id);
                auto ib = db.find(doc.id);
                if (ia == da.end() || ib == db.end()) continue;
                try {
                    sum_full += spearman_union(*ia->second, *ib->second);
                    ++n_full;
                } catch (const degenerate_error&) {
                }
                KeywordRanking ta = *ia->second, tb = *ib->second;
                if (ta.entries.size() > 30) ta.entries.resize(30);
                if (tb.entries.size() > 30) tb.entries.resize(30);
                try {
                    sum_top30 += spearman_union(ta, tb);
                    ++n_top30;
                } catch (const degenerate_error&) {
                }
            }
            std::string key = ma + "|" + mb;
            if (n_full > 0) report.spearman_full[key] = sum_full / static_cast<double>(n_full);
            if (n_top30 > 0)
                report.spearman_top30[key] = sum_top30 / static_cast<double>(n_top30);
        }
    }

    report.cdf = common_words_cdf(docs);

    std::vector<int> overlap_n;
    for (int n = 5; n <= 50; n += 5) overlap_n.push_back(n);
    for (const auto& m : long_methods) {
        std::vector<KeywordRanking> refs;
        for (const auto& doc : docs) {
            auto it = long_index[m].find(doc.id);
            if (it != long_index[m].end()) refs.push_back(*it->second);
        }
        report.overlap[m] = overlap_curve(refs, docs, overlap_n);
    }
    return report;
}

void save_report_json(const EvaluationReport& report, const std::string& path) {
    nlohmann::ordered_json j;
    for (const auto& [m, refs] : report.accuracy)
        for (const auto& [r, cells] : refs)
            for (const auto& [n, mean] : cells)
                j["accuracy"][m][r][std::to_string(n)] = mean;
    for (const auto& [m, refs] : report.accuracy_per_doc)
        for (const auto& [r, cells] : refs)
            for (const auto& [n, rows] : cells) {
                auto& arr = j["accuracy_per_doc"][m][r][std::to_string(n)];
                arr = nlohmann::ordered_json::array();
                for (const auto& [doc_id, acc] : rows) arr.push_back({doc_id, acc});
            }
    for (const auto& [pair, rho] : report.spearman_full) j["spearman_full"][pair] = rho;
    for (const auto& [pair, rho] : report.spearman_top30) j["spearman_top30"][pair] = rho;
    j["cdf"] = nlohmann::ordered_json::array();
    for (const auto& [w, p] : report.cdf) j["cdf"].push_back({w, p});
    for (const auto& [m, curve] : report.overlap) {
        auto& arr = j["overlap"][m];
        arr = nlohmann::ordered_json::array();
        for (const auto& [n, mean] : curve) arr.push_back({n, mean});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write report: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw io_error("write failed: " + path);
}

void save_report_csvs(const EvaluationReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create report directory: " + dir);

    for (const auto& [m, refs] : report.accuracy_per_doc) {
        for (const auto& [r, cells] : refs) {
            for (const auto& [n, rows] : cells) {
                fs::path p = fs::path(dir) / (m + "_" + r + "_" + std::to_string(n) + ".csv");
                std::ofstream out(p, std::ios::binary);
                if (!out) throw io_error("cannot write " + p.string());
                out << "doc_id,accuracy\n";
                for (const auto& [doc_id, acc] : rows)
                    out << doc_id << ',' << format_score(acc) << '\n';
            }
        }
    }
    {
        std::ofstream out(fs::path(dir) / "cdf.csv", std::ios::binary);
        if (!out) throw io_error("cannot write cdf.csv");
        out << "w,survival\n";
        for (const auto& [w, p] : report.cdf) out << w << ',' << format_score(p) << '\n';
    }
    for (const auto& [m, curve] : report.overlap) {
        std::ofstream out(fs::path(dir) / ("overlap_" + m + ".csv"), std::ios::binary);
        if (!out) throw io_error("cannot write overlap csv");
        out << "n,mean_common\n";
        for (const auto& [n, mean] : curve) out << n << ',' << format_score(mean) << '\n';
    }
    {
        std::ofstream out(fs::path(dir) / "spearman.csv", std::ios::binary);
        if (!out) throw io_error("cannot write spearman.csv");
        out << "pair,full,top30\n";
        for (const auto& [pair, rho] : report.spearman_full) {
            out << pair << ',' << format_score(rho) << ',';
            auto it = report.spearman_top30.find(pair);
            out << (it == report.spearman_top30.end() ? "" : format_score(it->second)) << '\n';
        }
    }
}

} // namespace kwx
