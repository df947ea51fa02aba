#pragma once

#include <string>
#include <vector>

#include "kwx/cooc.hpp"
#include "kwx/corpus.hpp"
#include "kwx/ranking.hpp"
#include "kwx/text.hpp"

namespace kwx {

// All long-text extractors return descending rankings with lexicographic
// tie-breaking and no duplicate words (see KeywordRanking).

KeywordRanking frequency_rank(const std::vector<std::string>& tokens, std::size_t k);

// Scores via corpus::tfidf_weight against a fulltext-scope model.
KeywordRanking tfidf_rank(const std::vector<std::string>& tokens, const TfIdfModel& model,
                          std::size_t k);

// Tokens cut into n_segments equal contiguous blocks (last absorbs the
// remainder); score = normalized Shannon entropy of the word's segment
// distribution, in [0,1].  Words with total frequency < f_min excluded.
KeywordRanking word_entropy(const std::vector<std::string>& tokens, int n_segments, std::size_t k,
                            int f_min = 3);

// Burstiness: circular position spacings, score = population stddev / mean.
KeywordRanking word_intermittency(const std::vector<std::string>& tokens, std::size_t k,
                                  int f_min = 3);

// Single-term YAKE over raw (cased) sentences: casing, position, frequency,
// relatedness to context, and sentence dispersion combined into S(w), lower
// better; scores are negated into the descending convention and terms are
// stem-collapsed (best S per stem) so the output vocabulary matches the
// other extractors.
KeywordRanking yake_rank(const std::vector<std::string>& raw_sentences,
                         const StopwordSet& stopwords, std::size_t k);

// PageRank over the co-occurrence network of the token sequence; window
// must lie in [2,10].
KeywordRanking textrank(const std::vector<std::string>& tokens, int window, double damping,
                        std::size_t k);

// Cosine similarity of each covered word's vector to the document mean
// vector; errors when vectors cover less than half of the doc vocabulary.
KeywordRanking embedding_rank(const std::vector<std::string>& tokens,
                              const EmbeddingTable& vectors, std::size_t k);

// score(w) = number of input top-k lists containing w; ties by mean rank
// across the lists containing w, then lexicographic.
KeywordRanking vote_merge(const std::vector<KeywordRanking>& rankings, std::size_t k);

} // namespace kwx
