#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kwx/cooc.hpp"
#include "kwx/corpus.hpp"
#include "kwx/ranking.hpp"

namespace kwx {

// Community labels over document ids (citation partitions projected onto
// documents, or K-Means clusterings).  Label -1 marks docs whose community
// was filtered out.
struct DocPartition {
    std::vector<std::string> doc_ids;
    std::vector<int> labels;
};

struct ImportanceEntry {
    int best_community = -1;
    double f_in = 0.0;
    double f_out = 0.0;
    double importance = 0.0; // I(w) = max over communities of F_in - F_out
};

struct ImportanceTable {
    std::unordered_map<std::string, ImportanceEntry> entries;
};

// F_in = n_alpha(w)/|alpha|, F_out = sum_{gamma != alpha} n_gamma(w) / (N - |alpha|),
// counting documents (boolean vocab membership), with N = docs in surviving
// communities.  Errors when the community covers all docs (no outside).
std::pair<double, double> community_frequencies(
    const DocPartition& p,
    const std::unordered_map<std::string, std::unordered_set<std::string>>& abstracts, int alpha,
    const std::string& word);

// I(w) over every word occurring in at least one surviving abstract; needs
// at least two surviving communities.
ImportanceTable build_importance_table(
    const DocPartition& p,
    const std::unordered_map<std::string, std::unordered_set<std::string>>& abstracts);

// Doc's abstract vocab sorted by I descending (ties lexicographic),
// truncated to k.  Words missing from the table sort below every table
// entry and are emitted with score -2 (below the I range [-1, 1]).
KeywordRanking extract_community_keywords(const ProcessedDocument& doc,
                                          const ImportanceTable& table, std::size_t k,
                                          const std::string& method_name = "community");

KeywordRanking extract_tfidf_keywords(const ProcessedDocument& doc, const TfIdfModel& model,
                                      std::size_t k);

// Document feature matrix in sparse row form (dimensions sorted per row).
struct DocVectors {
    std::vector<std::string> doc_ids;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
    std::size_t dim = 0;
};

// Abstract tf-idf vectors over the abstract-scope vocabulary.
DocVectors tfidf_doc_vectors(const std::vector<ProcessedDocument>& docs, const TfIdfModel& model);

// Mean word-embedding vector per document (docs with no covered word get
// the zero vector).
DocVectors embedding_doc_vectors(const std::vector<ProcessedDocument>& docs,
                                 const EmbeddingTable& table);

struct KRange {
    int lo = 5;
    int hi = 50;
    int step = 5;
};

// Exposed for the monotonicity tests: one seeded k-means++ / Lloyd run on
// L2-normalized rows; wcss_trace holds the objective after every iteration.
struct KMeansResult {
    std::vector<int> labels;
    double wcss = 0.0;
    std::vector<double> wcss_trace;
};
KMeansResult kmeans_run(const DocVectors& vectors, int k, std::uint64_t seed);

// Runs k-means for every K in the range, keeps the K with the best mean
// silhouette (Euclidean; 2000-doc seeded subsample above 5000 docs).
DocPartition kmeans_partition(const DocVectors& vectors, const KRange& k_range,
                              std::uint64_t seed);

} // namespace kwx
