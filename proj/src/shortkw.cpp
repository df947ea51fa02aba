#include "kwx/shortkw.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "kwx/errors.hpp"
#include "kwx/rng.hpp"

namespace kwx {

namespace {

const std::unordered_set<std::string>& vocab_of(
    const std::unordered_map<std::string, std::unordered_set<std::string>>& abstracts,
    const std::string& doc_id) {
    auto it = abstracts.find(doc_id);
    if (it == abstracts.end())
        throw precondition_error("community_frequencies: unknown document id " + doc_id);
    return it->second;
}

} // namespace

std::pair<double, double> community_frequencies(
    const DocPartition& p,
    const std::unordered_map<std::string, std::unordered_set<std::string>>& abstracts, int alpha,
    const std::string& word) {
    if (p.doc_ids.size() != p.labels.size())
        throw precondition_error("community_frequencies: ids and labels differ in length");
    std::size_t n_total = 0, n_alpha = 0, hits_in = 0, hits_out = 0;
    for (std::size_t i = 0; i < p.doc_ids.size(); ++i) {
        if (p.labels[i] < 0) continue;
        ++n_total;
        bool has = vocab_of(abstracts, p.doc_ids[i]).count(word) > 0;
        if (p.labels[i] == alpha) {
            ++n_alpha;
            if (has) ++hits_in;
        } else if (has) {
            ++hits_out;
        }
    }
    if (n_alpha == 0) throw precondition_error("community_frequencies: empty community");
    if (n_alpha == n_total)
        throw precondition_error("community_frequencies: community covers every document");
    double f_in = static_cast<double>(hits_in) / static_cast<double>(n_alpha);
    double f_out = static_cast<double>(hits_out) / static_cast<double>(n_total - n_alpha);
    return {f_in, f_out};
}

ImportanceTable build_importance_table(
    const DocPartition& p,
    const std::unordered_map<std::string, std::unordered_set<std::string>>& abstracts) {
    if (p.doc_ids.size() != p.labels.size())
        throw precondition_error("build_importance_table: ids and labels differ in length");

    // community -> size, and word -> per-community doc counts
    std::map<int, std::size_t> comm_size;
    std::unordered_map<std::string, std::map<int, std::size_t>> counts;
    std::size_t n_total = 0;
    for (std::size_t i = 0; i < p.doc_ids.size(); ++i) {
        if (p.labels[i] < 0) continue;
        ++n_total;
        ++comm_size[p.labels[i]];
        for (const auto& word : vocab_of(abstracts, p.doc_ids[i])) ++counts[word][p.labels[i]];
    }
    if (comm_size.size() < 2)
        throw precondition_error("build_importance_table: needs at least two communities");

    ImportanceTable table;
    table.entries.reserve(counts.size());
    for (const auto& [word, per_comm] : counts) {
        std::size_t total_hits = 0;
        for (const auto& kv : per_comm) total_hits += kv.second;
        ImportanceEntry best;
        bool first = true;
        for (const auto& [c, size_c] : comm_size) {
            auto it = per_comm.find(c);
            std::size_t hits_in = it == per_comm.end() ? 0 : it->second;
            double f_in = static_cast<double>(hits_in) / static_cast<double>(size_c);
            double f_out = static_cast<double>(total_hits - hits_in) /
                           static_cast<double>(n_total - size_c);
            double imp = f_in - f_out;
            if (first || imp > best.importance) {
                best = {c, f_in, f_out, imp};
                first = false;
            }
        }
        table.entries.emplace(word, best);
    }
    return table;
}

KeywordRanking extract_community_keywords(const ProcessedDocument& doc,
                                          const ImportanceTable& table, std::size_t k,
                                          const std::string& method_name) {
    KeywordRanking r;
    r.doc_id = doc.id;
    r.method = method_name;
    r.entries.reserve(doc.abstract_vocab.size());
    for (const auto& word : doc.abstract_vocab) {
        auto it = table.entries.find(word);
        // -2 sits below the importance range [-1, 1], so unknown words sort
        // after every scored one
        r.entries.emplace_back(word, it == table.entries.end() ? -2.0 : it->second.importance);
    }
    sort_and_truncate(r.entries, k);
    return r;
}

KeywordRanking extract_tfidf_keywords(const ProcessedDocument& doc, const TfIdfModel& model,
                                      std::size_t k) {
    KeywordRanking r;
    r.doc_id = doc.id;
    r.method = "tfidf";
    if (doc.abstract_tokens.empty()) return r;
    auto weights = tfidf_weights(model, doc.abstract_tokens);
    r.entries.assign(weights.begin(), weights.end());
    sort_and_truncate(r.entries, k);
    return r;
}

DocVectors tfidf_doc_vectors(const std::vector<ProcessedDocument>& docs, const TfIdfModel& model) {
    std::vector<std::string> vocab;
    vocab.reserve(model.doc_frequency.size());
    for (const auto& kv : model.doc_frequency) vocab.push_back(kv.first);
    std::sort(vocab.begin(), vocab.end());
    std::unordered_map<std::string, std::size_t> dim_of;
    dim_of.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) dim_of[vocab[i]] = i;

    DocVectors out;
    out.dim = vocab.size();
    out.doc_ids.reserve(docs.size());
    out.rows.resize(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        out.doc_ids.push_back(docs[d].id);
        if (docs[d].abstract_tokens.empty()) continue;
        auto weights = tfidf_weights(model, docs[d].abstract_tokens);
        auto& row = out.rows[d];
        row.reserve(weights.size());
        for (const auto& [word, w] : weights) {
            auto it = dim_of.find(word);
            if (it != dim_of.end() && w != 0.0) row.emplace_back(it->second, w);
        }
        std::sort(row.begin(), row.end());
    }
    return out;
}

DocVectors embedding_doc_vectors(const std::vector<ProcessedDocument>& docs,
                                 const EmbeddingTable& table) {
    if (table.empty()) throw precondition_error("embedding_doc_vectors: empty embedding table");
    std::size_t dim = table.begin()->second.size();
    DocVectors out;
    out.dim = dim;
    out.doc_ids.reserve(docs.size());
    out.rows.resize(docs.size());
    std::vector<double> acc(dim);
    std::vector<std::string> words;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        out.doc_ids.push_back(docs[d].id);
        std::fill(acc.begin(), acc.end(), 0.0);
        // mean over distinct covered words, accumulated in sorted order so
        // the float sum is reproducible
        words.assign(docs[d].abstract_vocab.begin(), docs[d].abstract_vocab.end());
        std::sort(words.begin(), words.end());
        std::size_t covered = 0;
        for (const auto& word : words) {
            auto it = table.find(word);
            if (it == table.end()) continue;
            ++covered;
            for (std::size_t i = 0; i < dim; ++i) acc[i] += it->second[i];
        }
        if (covered == 0) continue; // zero vector
        auto& row = out.rows[d];
        row.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            double v = acc[i] / static_cast<double>(covered);
            if (v != 0.0) row.emplace_back(i, v);
        }
    }
    return out;
}

namespace {

std::vector<std::vector<std::pair<std::size_t, double>>> normalized_rows(const DocVectors& v) {
    auto rows = v.rows;
    for (auto& row : rows) {
        double norm = 0.0;
        for (const auto& [i, x] : row) norm += x * x;
        if (norm == 0.0) continue;
        norm = std::sqrt(norm);
        for (auto& [i, x] : row) x /= norm;
    }
    return rows;
}

double sq_norm(const std::vector<std::pair<std::size_t, double>>& row) {
    double s = 0.0;
    for (const auto& [i, x] : row) s += x * x;
    return s;
}

double dot_dense(const std::vector<std::pair<std::size_t, double>>& row,
                 const std::vector<double>& center) {
    double s = 0.0;
    for (const auto& [i, x] : row) s += x * center[i];
    return s;
}

// squared euclidean distance between two sparse rows (both index-sorted)
double sq_dist_rows(const std::vector<std::pair<std::size_t, double>>& a,
                    const std::vector<std::pair<std::size_t, double>>& b) {
    double s = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first == b[j].first) {
            double d = a[i].second - b[j].second;
            s += d * d;
            ++i;
            ++j;
        } else if (a[i].first < b[j].first) {
            s += a[i].second * a[i].second;
            ++i;
        } else {
            s += b[j].second * b[j].second;
            ++j;
        }
    }
    for (; i < a.size(); ++i) s += a[i].second * a[i].second;
    for (; j < b.size(); ++j) s += b[j].second * b[j].second;
    return s;
}

} // namespace

KMeansResult kmeans_run(const DocVectors& vectors, int k, std::uint64_t seed) {
    std::size_t n = vectors.rows.size();
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw parameter_error("kmeans_run: k must be in [1, n]");
    auto rows = normalized_rows(vectors);
    std::vector<double> row_sq(n);
    for (std::size_t i = 0; i < n; ++i) row_sq[i] = sq_norm(rows[i]);

    Rng rng(seed);
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(k),
                                             std::vector<double>(vectors.dim, 0.0));
    auto set_center = [&](std::size_t c, std::size_t point) {
        std::fill(centers[c].begin(), centers[c].end(), 0.0);
        for (const auto& [i, x] : rows[point]) centers[c][i] = x;
    };

    // k-means++ seeding
    std::vector<double> best_d2(n, 0.0);
    std::size_t first = static_cast<std::size_t>(rng.below(n));
    set_center(0, first);
    for (std::size_t i = 0; i < n; ++i)
        best_d2[i] = row_sq[i] - 2.0 * dot_dense(rows[i], centers[0]) + row_sq[first];
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += std::max(best_d2[i], 0.0);
        std::size_t pick;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            double run = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                run += std::max(best_d2[i], 0.0);
                if (run >= r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(rng.below(n));
        }
        set_center(static_cast<std::size_t>(c), pick);
        double pick_sq = row_sq[pick];
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = row_sq[i] - 2.0 * dot_dense(rows[i], centers[c]) + pick_sq;
            best_d2[i] = std::min(best_d2[i], d2);
        }
    }

    // Lloyd iterations
    KMeansResult result;
    result.labels.assign(n, 0);
    std::vector<double> center_sq(static_cast<std::size_t>(k));
    const int max_iter = 300;
    const double tol = 1e-6;
    for (int iter = 0; iter < max_iter; ++iter) {
        for (int c = 0; c < k; ++c) {
            center_sq[c] = 0.0;
            for (double x : centers[c]) center_sq[c] += x * x;
        }
        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_dd = row_sq[i] - 2.0 * dot_dense(rows[i], centers[0]) + center_sq[0];
            for (int c = 1; c < k; ++c) {
                double dd = row_sq[i] - 2.0 * dot_dense(rows[i], centers[c]) + center_sq[c];
                if (dd < best_dd) {
                    best_dd = dd;
                    best = c;
                }
            }
            result.labels[i] = best;
            wcss += std::max(best_dd, 0.0);
        }
        result.wcss = wcss;
        result.wcss_trace.push_back(wcss);

        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                              std::vector<double>(vectors.dim, 0.0));
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            int c = result.labels[i];
            ++sizes[c];
            for (const auto& [d, x] : rows[i]) sums[c][d] += x;
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            if (sizes[c] == 0) continue; // empty cluster keeps its centroid
            double move = 0.0;
            for (std::size_t d = 0; d < vectors.dim; ++d) {
                double v = sums[c][d] / static_cast<double>(sizes[c]);
                double delta = v - centers[c][d];
                move += delta * delta;
                centers[c][d] = v;
            }
            shift = std::max(shift, std::sqrt(move));
        }
        if (shift < tol) break;
    }
    return result;
}

namespace {

double mean_silhouette(const std::vector<std::vector<std::pair<std::size_t, double>>>& rows,
                       const std::vector<int>& labels, const std::vector<std::size_t>& subset,
                       int k) {
    std::vector<std::size_t> cluster_size(static_cast<std::size_t>(k), 0);
    for (std::size_t idx : subset) ++cluster_size[labels[idx]];

    double total = 0.0;
    std::size_t counted = 0;
    std::vector<double> dist_sum(static_cast<std::size_t>(k));
    for (std::size_t ii = 0; ii < subset.size(); ++ii) {
        std::size_t i = subset[ii];
        int own = labels[i];
        if (cluster_size[own] <= 1) {
            ++counted; // singleton: silhouette 0 by convention
            continue;
        }
        std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
        for (std::size_t jj = 0; jj < subset.size(); ++jj) {
            if (jj == ii) continue;
            std::size_t j = subset[jj];
            dist_sum[labels[j]] += std::sqrt(std::max(sq_dist_rows(rows[i], rows[j]), 0.0));
        }
        double a = dist_sum[own] / static_cast<double>(cluster_size[own] - 1);
        double b = 0.0;
        bool have_b = false;
        for (int c = 0; c < k; ++c) {
            if (c == own || cluster_size[c] == 0) continue;
            double mean_c = dist_sum[c] / static_cast<double>(cluster_size[c]);
            if (!have_b || mean_c < b) {
                b = mean_c;
                have_b = true;
            }
        }
        if (!have_b) continue; // only one populated cluster in subset
        double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
        ++counted;
    }
    if (counted == 0) throw degenerate_error("silhouette: no scorable point");
    return total / static_cast<double>(counted);
}

} // namespace

DocPartition kmeans_partition(const DocVectors& vectors, const KRange& k_range,
                              std::uint64_t seed) {
    std::size_t n = vectors.rows.size();
    if (n < 3)
        throw precondition_error("kmeans_partition: needs at least three documents");
    if (k_range.lo < 2 || k_range.hi < k_range.lo || k_range.step < 1)
        throw parameter_error("kmeans_partition: invalid k range");

    std::vector<int> candidates;
    for (int k = k_range.lo; k <= k_range.hi; k += k_range.step)
        if (static_cast<std::size_t>(k) <= n - 1) candidates.push_back(k);
    if (candidates.empty())
        throw parameter_error("kmeans_partition: k range has no value in [2, n-1]");

    auto rows = normalized_rows(vectors);
    bool all_same = true;
    for (std::size_t i = 1; i < n && all_same; ++i)
        if (rows[i] != rows[0]) all_same = false;
    if (all_same) throw degenerate_error("kmeans_partition: all document vectors identical");

    // silhouette subsample for large corpora
    std::vector<std::size_t> subset(n);
    for (std::size_t i = 0; i < n; ++i) subset[i] = i;
    if (n > 5000) {
        Rng rng(seed);
        rng.shuffle(subset);
        subset.resize(2000);
        std::sort(subset.begin(), subset.end());
    }

    double best_sil = 0.0;
    bool have_best = false;
    KMeansResult best_run;
    for (int k : candidates) {
        KMeansResult run = kmeans_run(vectors, k, seed + static_cast<std::uint64_t>(k));
        double sil;
        try {
            sil = mean_silhouette(rows, run.labels, subset, k);
        } catch (const degenerate_error&) {
            continue;
        }
        if (!have_best || sil > best_sil) {
            best_sil = sil;
            best_run = std::move(run);
            have_best = true;
        }
    }
    if (!have_best)
        throw degenerate_error("kmeans_partition: no k produced a scorable clustering");

    DocPartition out;
    out.doc_ids = vectors.doc_ids;
    out.labels = std::move(best_run.labels);
    // canonical community numbering, same convention as the graph detectors
    std::unordered_map<int, int> remap;
    int next = 0;
    for (int& l : out.labels) {
        auto [it, inserted] = remap.emplace(l, next);
        if (inserted) ++next;
        l = it->second;
    }
    return out;
}

} // namespace kwx
