#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kwx {

// One document's scored keyword list for one method.  Scores are normalized
// so that higher is always better (methods whose native direction is
// ascending negate at this boundary); entries are sorted descending by
// score with lexicographic tie-breaking and contain no duplicate words.
struct KeywordRanking {
    std::string doc_id;
    std::string method;
    std::vector<std::pair<std::string, double>> entries;
};

// Sorts (word, score) pairs descending by score, ties by ascending word,
// truncates to k.  All extractors funnel through this.
void sort_and_truncate(std::vector<std::pair<std::string, double>>& entries, std::size_t k);

// Fixed-precision decimal rendering used for every score written to disk,
// so reruns are byte-identical across platforms.
std::string format_score(double value);

// CSV rows "doc_id,rank,word,score,method" (1-based rank).  Loading
// reassembles rankings grouped per (doc_id, method) in file order.
void write_rankings_csv(const std::string& path, const std::vector<KeywordRanking>& rankings);
std::vector<KeywordRanking> load_rankings_csv(const std::string& path);

} // namespace kwx
