#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kwx/corpus.hpp"
#include "kwx/ranking.hpp"
#include "kwx/shortkw.hpp"

namespace kwx {

// |top-N(extracted) intersect top-N(reference)| / min(N, |reference|).
double accuracy_at_n(const KeywordRanking& extracted, const KeywordRanking& reference,
                     std::size_t n);

// Survival table over x(doc) = |abstract_vocab intersect fulltext_vocab|:
// rows (w, P(x >= w)) for w = 0 .. max+1.  Only docs with non-empty
// fulltext participate.
std::vector<std::pair<int, double>> common_words_cdf(const std::vector<ProcessedDocument>& docs);

// For each n, mean over docs of |top-n reference words in abstract vocab|.
std::vector<std::pair<int, double>> overlap_curve(
    const std::vector<KeywordRanking>& reference_rankings,
    const std::vector<ProcessedDocument>& docs, const std::vector<int>& n_values);

// Spearman rho between two score rankings over the same word set
// (average-rank ties).  Errors on mismatched word sets or < 2 words.
double spearman(const KeywordRanking& a, const KeywordRanking& b);

// Union-of-vocabularies convention: words absent from one ranking share the
// worst (tied) rank there.  Used by report assembly for cross-method rho.
double spearman_union(const KeywordRanking& a, const KeywordRanking& b);

struct SyntheticSpec {
    int topics = 4;
    int docs_per_topic = 30;
    int topic_vocab = 30;  // exclusive words per topic = planted keywords
    int shared_vocab = 0;
    int abstract_tokens = 120;
    int fulltext_tokens = 600;
    double intra_citation_p = 0.3;
    double inter_citation_p = 0.005;
    bool sample_with_replacement = true;
    std::uint64_t seed = 42;
};

struct SyntheticCorpus {
    Corpus corpus;
    std::vector<KeywordRanking> planted_keywords; // one per doc, method "planted"
    DocPartition planted_partition;               // topic assignment
};

// Token mixture of topic-exclusive and shared vocabulary; citations drawn
// per unordered pair with the intra/inter probabilities; deterministic
// under seed.  Generated words are stemmer fixed points so planted
// keywords survive preprocessing verbatim.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec);

void save_planted_keywords(const std::string& path, const std::vector<KeywordRanking>& planted);
void save_doc_partition(const std::string& path, const DocPartition& p);
DocPartition load_doc_partition(const std::string& path);

struct EvaluationReport {
    // accuracy[short_method][reference_method][N] = mean over documents
    std::map<std::string, std::map<std::string, std::map<int, double>>> accuracy;
    // per-document detail behind each mean, same key path
    std::map<std::string, std::map<std::string, std::map<int, std::vector<std::pair<std::string, double>>>>>
        accuracy_per_doc;
    // mean Spearman rho between long-method pairs, full-rank and top-30
    std::map<std::string, double> spearman_full;  // key "methodA|methodB"
    std::map<std::string, double> spearman_top30;
    std::vector<std::pair<int, double>> cdf;
    std::map<std::string, std::vector<std::pair<int, double>>> overlap; // per reference method
};

// Assembles means, rank correlations, CDF, and overlap curves; errors when
// a requested (method, N) cell has no rankings, listing every gap.
EvaluationReport build_report(const std::vector<KeywordRanking>& short_rankings,
                              const std::vector<KeywordRanking>& long_rankings,
                              const std::vector<ProcessedDocument>& docs,
                              const std::vector<std::string>& short_methods,
                              const std::vector<std::string>& long_methods,
                              const std::vector<int>& n_values);

void save_report_json(const EvaluationReport& report, const std::string& path);
// One flat CSV per accuracy table cell: "{method}_{reference}_{N}.csv".
void save_report_csvs(const EvaluationReport& report, const std::string& dir);

} // namespace kwx
