#ifndef KWX_TEXT_HPP
#define KWX_TEXT_HPP

#include <string>
#include <unordered_set>
#include <vector>

namespace kwx {

using StopwordSet = std::unordered_set<std::string>;

// Porter suffix-stripping stemmer for lowercase English words.
// Follows the 1980 algorithm with the two maintainer revisions that every
// mainstream implementation carries (step 2: bli->ble, logi->log).
std::string porter_stem(const std::string& word);

// Removes LaTeX markup: commands, math, comments, environment markers.
// Argument text of sectioning/emphasis/text commands is kept; citation,
// ref and label keys are dropped. Unbalanced input degrades to literal text.
std::string strip_latex(const std::string& raw);

// Lowercase, split on non-alphabetic bytes, drop stopwords and tokens
// shorter than 2 characters, Porter-stem the rest.
std::vector<std::string> preprocess(const std::string& raw, const StopwordSet& stopwords);

// Split on ./!/? sentence terminators, keeping raw text per sentence.
// Empty sentences are dropped.
std::vector<std::string> split_sentences(const std::string& raw);

// Bundled English stopword list.
const StopwordSet& default_stopwords();

// Stopword file: one word per line, '#' lines ignored.
StopwordSet load_stopwords(const std::string& path);

// NFC normalization for the Latin-1 range: recomposes ASCII base letters
// followed by U+0300..U+0327 combining marks into precomposed code points.
// Other input passes through unchanged.
std::string normalize_nfc(const std::string& utf8);

} // namespace kwx

#endif
