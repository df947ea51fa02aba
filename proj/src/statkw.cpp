#include "kwx/statkw.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "kwx/errors.hpp"

namespace kwx {

KeywordRanking frequency_rank(const std::vector<std::string>& tokens, std::size_t k) {
    if (tokens.empty()) throw precondition_error("frequency_rank: empty token sequence");
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    KeywordRanking r;
    r.method = "freq";
    r.entries.reserve(counts.size());
    for (const auto& [word, c] : counts) r.entries.emplace_back(word, static_cast<double>(c));
    sort_and_truncate(r.entries, k);
    return r;
}

KeywordRanking tfidf_rank(const std::vector<std::string>& tokens, const TfIdfModel& model,
                          std::size_t k) {
    KeywordRanking r;
    r.method = "tfidf";
    auto weights = tfidf_weights(model, tokens);
    r.entries.assign(weights.begin(), weights.end());
    sort_and_truncate(r.entries, k);
    return r;
}

KeywordRanking word_entropy(const std::vector<std::string>& tokens, int n_segments, std::size_t k,
                            int f_min) {
    if (n_segments < 2) throw parameter_error("word_entropy: n_segments must be >= 2");
    if (f_min < 1) throw parameter_error("word_entropy: f_min must be >= 1");
    std::size_t n = tokens.size();
    if (n < static_cast<std::size_t>(n_segments))
        throw precondition_error("word_entropy: fewer tokens than segments");

    // equal contiguous blocks, last absorbs the remainder
    std::size_t base = n / static_cast<std::size_t>(n_segments);
    std::unordered_map<std::string, std::vector<std::size_t>> seg_counts;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t seg = std::min(i / base, static_cast<std::size_t>(n_segments - 1));
        auto& v = seg_counts[tokens[i]];
        if (v.empty()) v.assign(static_cast<std::size_t>(n_segments), 0);
        ++v[seg];
    }

    KeywordRanking r;
    r.method = "entropy";
    double log_n = std::log(static_cast<double>(n_segments));
    for (const auto& [word, segs] : seg_counts) {
        std::size_t total = 0;
        for (std::size_t c : segs) total += c;
        if (total < static_cast<std::size_t>(f_min)) continue;
        double h = 0.0;
        for (std::size_t c : segs) {
            if (c == 0) continue;
            double p = static_cast<double>(c) / static_cast<double>(total);
            h -= p * std::log(p);
        }
        r.entries.emplace_back(word, h / log_n);
    }
    sort_and_truncate(r.entries, k);
    return r;
}

KeywordRanking word_intermittency(const std::vector<std::string>& tokens, std::size_t k,
                                  int f_min) {
    if (tokens.empty()) throw precondition_error("word_intermittency: empty token sequence");
    if (f_min < 1) throw parameter_error("word_intermittency: f_min must be >= 1");
    std::unordered_map<std::string, std::vector<std::size_t>> positions;
    for (std::size_t i = 0; i < tokens.size(); ++i) positions[tokens[i]].push_back(i);

    KeywordRanking r;
    r.method = "intermittency";
    double t_len = static_cast<double>(tokens.size());
    for (const auto& [word, pos] : positions) {
        if (pos.size() < static_cast<std::size_t>(f_min)) continue;
        std::size_t m = pos.size();
        double mean = t_len / static_cast<double>(m); // circular spacings sum to T
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double d = i + 1 < m
                           ? static_cast<double>(pos[i + 1] - pos[i])
                           : t_len - static_cast<double>(pos[m - 1]) + static_cast<double>(pos[0]);
            var += (d - mean) * (d - mean);
        }
        var /= static_cast<double>(m);
        r.entries.emplace_back(word, std::sqrt(var) / mean);
    }
    sort_and_truncate(r.entries, k);
    return r;
}

namespace {

struct YakeTerm {
    std::size_t tf = 0;
    std::size_t tf_upper = 0;   // uppercase-initial, not sentence-initial
    std::size_t tf_acronym = 0; // all-caps occurrences of length > 1
    std::vector<std::size_t> sentence_indices;
    std::unordered_set<std::string> left_distinct, right_distinct;
    std::size_t left_total = 0, right_total = 0;
    std::unordered_set<std::size_t> sentences_seen;
};

std::vector<std::string> cased_words(const std::string& sentence) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : sentence) {
        if (std::isalpha(static_cast<unsigned char>(ch))) {
            cur.push_back(ch);
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

std::string lower_copy(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

double median_of(std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end());
    std::size_t m = v.size();
    if (m % 2 == 1) return static_cast<double>(v[m / 2]);
    return (static_cast<double>(v[m / 2 - 1]) + static_cast<double>(v[m / 2])) / 2.0;
}

} // namespace

KeywordRanking yake_rank(const std::vector<std::string>& raw_sentences,
                         const StopwordSet& stopwords, std::size_t k) {
    std::unordered_map<std::string, YakeTerm> terms; // keyed by lowercase form
    std::size_t n_sentences = 0;
    for (std::size_t si = 0; si < raw_sentences.size(); ++si) {
        auto words = cased_words(raw_sentences[si]);
        if (words.empty()) continue;
        ++n_sentences;
        std::vector<std::string> lowered(words.size());
        for (std::size_t i = 0; i < words.size(); ++i) lowered[i] = lower_copy(words[i]);
        for (std::size_t i = 0; i < words.size(); ++i) {
            auto& t = terms[lowered[i]];
            ++t.tf;
            t.sentence_indices.push_back(si);
            t.sentences_seen.insert(si);
            bool all_upper = words[i].size() > 1;
            for (char c : words[i])
                if (!std::isupper(static_cast<unsigned char>(c))) all_upper = false;
            if (all_upper)
                ++t.tf_acronym;
            else if (i > 0 && std::isupper(static_cast<unsigned char>(words[i][0])))
                ++t.tf_upper;
            if (i > 0) {
                t.left_distinct.insert(lowered[i - 1]);
                ++t.left_total;
            }
            if (i + 1 < words.size()) {
                t.right_distinct.insert(lowered[i + 1]);
                ++t.right_total;
            }
        }
    }
    if (terms.empty()) throw precondition_error("yake_rank: empty text");

    double max_tf = 0.0;
    for (const auto& kv : terms) max_tf = std::max(max_tf, static_cast<double>(kv.second.tf));
    // frequency statistics over candidate (non-stopword) terms
    double sum_tf = 0.0, sum_sq = 0.0;
    std::size_t n_candidates = 0;
    for (const auto& [word, t] : terms) {
        if (stopwords.count(word)) continue;
        sum_tf += static_cast<double>(t.tf);
        sum_sq += static_cast<double>(t.tf) * static_cast<double>(t.tf);
        ++n_candidates;
    }
    if (n_candidates == 0) throw precondition_error("yake_rank: no candidate term");
    double mean_tf = sum_tf / static_cast<double>(n_candidates);
    double std_tf = std::sqrt(std::max(sum_sq / static_cast<double>(n_candidates) -
                                           mean_tf * mean_tf,
                                       0.0));

    // stem-collapsed: keep the best (lowest) S per stem so the output
    // vocabulary lines up with the other extractors
    std::unordered_map<std::string, double> best_s;
    for (auto& [word, t] : terms) {
        if (stopwords.count(word) || word.size() < 2) continue;
        double tf = static_cast<double>(t.tf);
        double w_case =
            std::max(static_cast<double>(t.tf_upper), static_cast<double>(t.tf_acronym)) /
            (1.0 + std::log(tf));
        double w_pos = std::log(std::log(3.0 + median_of(t.sentence_indices)));
        double w_freq = tf / (mean_tf + std_tf);
        double dl = t.left_total == 0 ? 0.0
                                      : static_cast<double>(t.left_distinct.size()) /
                                            static_cast<double>(t.left_total);
        double dr = t.right_total == 0 ? 0.0
                                       : static_cast<double>(t.right_distinct.size()) /
                                             static_cast<double>(t.right_total);
        double w_rel = 1.0 + (dl + dr) * tf / max_tf;
        double w_dif = static_cast<double>(t.sentences_seen.size()) /
                       static_cast<double>(n_sentences);
        double s = w_rel * w_pos / (w_case + w_freq / w_rel + w_dif / w_rel);
        std::string stem = porter_stem(word);
        auto it = best_s.find(stem);
        if (it == best_s.end() || s < it->second) best_s[stem] = s;
    }

    KeywordRanking r;
    r.method = "yake";
    r.entries.reserve(best_s.size());
    for (const auto& [stem, s] : best_s) r.entries.emplace_back(stem, -s);
    sort_and_truncate(r.entries, k);
    return r;
}

KeywordRanking textrank(const std::vector<std::string>& tokens, int window, double damping,
                        std::size_t k) {
    if (window < 2 || window > 10)
        throw parameter_error("textrank: window must lie in [2,10]");
    CoocParams params;
    params.window = window;
    Graph g = build_cooc_network(tokens, params);
    auto scores = pagerank_centrality(g, damping);
    KeywordRanking r = rank_by_centrality(scores, k);
    r.method = "textrank";
    return r;
}

KeywordRanking embedding_rank(const std::vector<std::string>& tokens,
                              const EmbeddingTable& vectors, std::size_t k) {
    if (tokens.empty()) throw precondition_error("embedding_rank: empty token sequence");
    std::vector<std::string> vocab;
    {
        std::unordered_set<std::string> seen;
        for (const auto& t : tokens)
            if (seen.insert(t).second) vocab.push_back(t);
    }
    std::sort(vocab.begin(), vocab.end());

    std::vector<const std::vector<double>*> covered_vecs;
    std::vector<std::string> covered_words;
    for (const auto& w : vocab) {
        auto it = vectors.find(w);
        if (it == vectors.end()) continue;
        covered_words.push_back(w);
        covered_vecs.push_back(&it->second);
    }
    double coverage = static_cast<double>(covered_words.size()) /
                      static_cast<double>(vocab.size());
    if (coverage < 0.5) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4f", 1.0 - coverage);
        throw precondition_error("embedding_rank: vectors missing for " + std::string(buf) +
                                 " of the vocabulary (need >= 0.5 coverage)");
    }

    std::size_t dim = covered_vecs.front()->size();
    std::vector<double> mean(dim, 0.0);
    for (const auto* v : covered_vecs)
        for (std::size_t i = 0; i < dim; ++i) mean[i] += (*v)[i];
    for (double& x : mean) x /= static_cast<double>(covered_vecs.size());

    double mean_norm = 0.0;
    for (double x : mean) mean_norm += x * x;
    mean_norm = std::sqrt(mean_norm);

    KeywordRanking r;
    r.method = "bert";
    r.entries.reserve(covered_words.size());
    for (std::size_t w = 0; w < covered_words.size(); ++w) {
        const auto& v = *covered_vecs[w];
        double dot = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            dot += v[i] * mean[i];
            norm += v[i] * v[i];
        }
        norm = std::sqrt(norm);
        double score = (norm == 0.0 || mean_norm == 0.0) ? 0.0 : dot / (norm * mean_norm);
        r.entries.emplace_back(covered_words[w], score);
    }
    sort_and_truncate(r.entries, k);
    return r;
}

KeywordRanking vote_merge(const std::vector<KeywordRanking>& rankings, std::size_t k) {
    if (rankings.size() < 2)
        throw precondition_error("vote_merge: needs at least two rankings");
    struct Tally {
        std::size_t lists = 0;
        double rank_sum = 0.0;
    };
    std::unordered_map<std::string, Tally> tallies;
    for (const auto& ranking : rankings) {
        std::size_t limit = std::min(k, ranking.entries.size());
        for (std::size_t i = 0; i < limit; ++i) {
            auto& t = tallies[ranking.entries[i].first];
            ++t.lists;
            t.rank_sum += static_cast<double>(i + 1);
        }
    }
    struct Row {
        std::string word;
        std::size_t lists;
        double mean_rank;
    };
    std::vector<Row> rows;
    rows.reserve(tallies.size());
    for (const auto& [word, t] : tallies)
        rows.push_back({word, t.lists, t.rank_sum / static_cast<double>(t.lists)});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.lists != b.lists) return a.lists > b.lists;
        if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
        return a.word < b.word;
    });
    KeywordRanking r;
    r.method = "vote";
    std::size_t limit = std::min(k, rows.size());
    r.entries.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i)
        r.entries.emplace_back(rows[i].word, static_cast<double>(rows[i].lists));
    return r;
}

} // namespace kwx
