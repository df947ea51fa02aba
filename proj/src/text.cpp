#include "kwx/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>

#include "kwx/errors.hpp"

namespace kwx {

// ---------------------------------------------------------------------------
// Porter stemmer
// ---------------------------------------------------------------------------

namespace {

// True when s[i] is a consonant under Porter's definition: y counts as a
// vowel when preceded by a consonant.
bool is_cons(const std::string& s, std::size_t i) {
    char c = s[i];
    switch (c) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !is_cons(s, i - 1);
        default:
            return true;
    }
}

// Measure of s[0..len): the m in [C](VC)^m[V].
int measure(const std::string& s, std::size_t len) {
    int m = 0;
    std::size_t i = 0;
    while (i < len && is_cons(s, i)) ++i;
    while (i < len) {
        while (i < len && !is_cons(s, i)) ++i;
        if (i == len) break;
        ++m;
        while (i < len && is_cons(s, i)) ++i;
    }
    return m;
}

bool has_vowel(const std::string& s, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i)
        if (!is_cons(s, i)) return true;
    return false;
}

bool double_cons(const std::string& s) {
    std::size_t n = s.size();
    return n >= 2 && s[n - 1] == s[n - 2] && is_cons(s, n - 1);
}

// *o condition: stem ends cvc where the final c is not w, x or y.
bool ends_cvc(const std::string& s) {
    std::size_t n = s.size();
    if (n < 3) return false;
    if (!is_cons(s, n - 3) || is_cons(s, n - 2) || !is_cons(s, n - 1)) return false;
    char c = s[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& s, const char* suf) {
    std::size_t m = std::char_traits<char>::length(suf);
    return s.size() >= m && s.compare(s.size() - m, m, suf) == 0;
}

struct Rule {
    const char* suffix;
    const char* replacement;
};

// Longest-match semantics: the first matching suffix decides; the measure
// condition then either rewrites or leaves the word, but no shorter suffix
// is tried.  Tables are ordered so contained suffixes come last.
bool apply_table(std::string& w, const Rule* rules, std::size_t n_rules, int min_m) {
    for (std::size_t r = 0; r < n_rules; ++r) {
        if (!ends_with(w, rules[r].suffix)) continue;
        std::size_t stem_len = w.size() - std::char_traits<char>::length(rules[r].suffix);
        if (measure(w, stem_len) > min_m) {
            w.resize(stem_len);
            w += rules[r].replacement;
        }
        return true;
    }
    return false;
}

} // namespace

std::string porter_stem(const std::string& word) {
    if (word.size() <= 2) return word;
    std::string w = word;

    // Step 1a
    if (ends_with(w, "sses")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ies")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ss")) {
        // keep
    } else if (ends_with(w, "s")) {
        w.pop_back();
    }

    // Step 1b
    if (ends_with(w, "eed")) {
        if (measure(w, w.size() - 3) > 0) w.pop_back();
    } else {
        bool stripped = false;
        if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
            w.resize(w.size() - 2);
            stripped = true;
        } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
            w.resize(w.size() - 3);
            stripped = true;
        }
        if (stripped) {
            if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
                w += 'e';
            } else if (double_cons(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
                       !ends_with(w, "z")) {
                w.pop_back();
            } else if (measure(w, w.size()) == 1 && ends_cvc(w)) {
                w += 'e';
            }
        }
    }

    // Step 1c
    if (ends_with(w, "y") && has_vowel(w, w.size() - 1)) w.back() = 'i';

    // Step 2
    static const Rule step2[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"bli", "ble"},     {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"},
        {"logi", "log"},
    };
    apply_table(w, step2, std::size(step2), 0);

    // Step 3
    static const Rule step3[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    apply_table(w, step3, std::size(step3), 0);

    // Step 4
    {
        static const Rule step4[] = {
            {"al", ""},    {"ance", ""}, {"ence", ""}, {"er", ""},   {"ic", ""},
            {"able", ""},  {"ible", ""}, {"ant", ""},  {"ement", ""}, {"ment", ""},
            {"ent", ""},   {"ou", ""},   {"ism", ""},  {"ate", ""},  {"iti", ""},
            {"ous", ""},   {"ive", ""},  {"ize", ""},
        };
        bool matched = false;
        for (const Rule& r : step4) {
            if (!ends_with(w, r.suffix)) continue;
            std::size_t stem_len = w.size() - std::char_traits<char>::length(r.suffix);
            if (measure(w, stem_len) > 1) w.resize(stem_len);
            matched = true;
            break;
        }
        if (!matched && ends_with(w, "ion")) {
            std::size_t stem_len = w.size() - 3;
            if (stem_len > 0 && (w[stem_len - 1] == 's' || w[stem_len - 1] == 't') &&
                measure(w, stem_len) > 1) {
                w.resize(stem_len);
            }
        }
    }

    // Step 5a
    if (ends_with(w, "e")) {
        int m = measure(w, w.size() - 1);
        if (m > 1) {
            w.pop_back();
        } else if (m == 1) {
            std::string stem = w.substr(0, w.size() - 1);
            if (!ends_cvc(stem)) w.pop_back();
        }
    }

    // Step 5b
    if (double_cons(w) && w.back() == 'l' && measure(w, w.size()) > 1) w.pop_back();

    return w;
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

std::vector<std::string> preprocess(const std::string& raw, const StopwordSet& stopwords) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2 && stopwords.find(cur) == stopwords.end()) {
            std::string stem = porter_stem(cur);
            // a stem may itself land on a stopword ("betweenness" -> "between");
            // the output must stay stopword-free
            if (stem.size() >= 2 && stopwords.find(stem) == stopwords.end())
                tokens.push_back(std::move(stem));
        }
        cur.clear();
    };
    for (unsigned char c : raw) {
        if (std::isalpha(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<std::string> split_sentences(const std::string& raw) {
    std::vector<std::string> sentences;
    std::string cur;
    auto flush = [&] {
        std::size_t b = cur.find_first_not_of(" \t\r\n");
        if (b != std::string::npos) {
            std::size_t e = cur.find_last_not_of(" \t\r\n");
            sentences.push_back(cur.substr(b, e - b + 1));
        }
        cur.clear();
    };
    for (char c : raw) {
        if (c == '.' || c == '!' || c == '?') {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return sentences;
}

// ---------------------------------------------------------------------------
// Stopwords
// ---------------------------------------------------------------------------

const StopwordSet& default_stopwords() {
    static const StopwordSet set = {
        "a", "about", "above", "after", "again", "against", "all", "also", "am", "an",
        "and", "any", "are", "aren", "as", "at", "be", "because", "been", "before",
        "being", "below", "between", "both", "but", "by", "can", "cannot", "could",
        "did", "do", "does", "doing", "don", "down", "during", "each", "either",
        "few", "for", "from", "further", "had", "has", "have", "having", "he", "her",
        "here", "hers", "herself", "him", "himself", "his", "how", "however", "i",
        "if", "in", "into", "is", "it", "its", "itself", "just", "less", "may", "me",
        "might", "more", "most", "must", "my", "myself", "neither", "no", "nor",
        "not", "now", "of", "off", "on", "once", "only", "or", "other", "ought",
        "our", "ours", "ourselves", "out", "over", "own", "same", "shall", "she",
        "should", "since", "so", "some", "such", "than", "that", "the", "their",
        "theirs", "them", "themselves", "then", "there", "these", "they", "this",
        "those", "through", "thus", "to", "too", "under", "until", "up", "upon",
        "us", "very", "was", "we", "were", "what", "when", "where", "which",
        "while", "who", "whom", "why", "will", "with", "within", "without",
        "would", "you", "your", "yours", "yourself", "yourselves",
    };
    return set;
}

StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open stopword file: " + path);
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t");
        std::string word = line.substr(b, e - b + 1);
        if (word.empty() || word[0] == '#') continue;
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        set.insert(word);
    }
    return set;
}

// ---------------------------------------------------------------------------
// LaTeX stripping
// ---------------------------------------------------------------------------

namespace {

const std::unordered_set<std::string>& drop_arg_commands() {
    static const std::unordered_set<std::string> set = {
        "cite", "citep", "citet", "citealp", "citeauthor", "citeyear", "onlinecite",
        "ref", "eqref", "pageref", "autoref", "cref", "label",
        "bibliography", "bibliographystyle", "bibitem",
        "includegraphics", "input", "include", "usepackage", "documentclass",
        "hspace", "vspace", "rule", "setlength", "graphicspath",
        "url", "email", "affiliation", "pacs", "preprint",
        "newcommand", "renewcommand", "def", "vskip", "hskip",
    };
    return set;
}

const std::unordered_set<std::string>& drop_env_names() {
    static const std::unordered_set<std::string> set = {
        "equation", "align", "eqnarray", "gather", "multline", "math",
        "displaymath", "figure", "table", "tabular", "array",
        "thebibliography", "verbatim", "lstlisting", "algorithm", "algorithmic",
    };
    return set;
}

bool is_ascii_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Skips one balanced {...} group starting at i (which must point at '{').
// Returns the index just past the closing brace, or n when unbalanced.
std::size_t skip_group(const std::string& s, std::size_t i) {
    std::size_t n = s.size();
    int depth = 0;
    while (i < n) {
        char c = s[i];
        if (c == '\\' && i + 1 < n) {
            i += 2;
            continue;
        }
        if (c == '{') ++depth;
        if (c == '}') {
            --depth;
            if (depth == 0) return i + 1;
        }
        ++i;
    }
    return n;
}

std::size_t skip_bracket_group(const std::string& s, std::size_t i) {
    std::size_t n = s.size();
    while (i < n && s[i] != ']') {
        if (s[i] == '\\' && i + 1 < n) ++i;
        ++i;
    }
    return i < n ? i + 1 : n;
}

// Reads the environment name out of \begin{...} / \end{...}; strips a
// trailing star so "figure*" matches "figure".
std::string env_base_name(const std::string& s, std::size_t brace_open, std::size_t brace_close) {
    std::string name = s.substr(brace_open + 1, brace_close - brace_open - 1);
    if (!name.empty() && name.back() == '*') name.pop_back();
    return name;
}

} // namespace

std::string strip_latex(const std::string& raw) {
    const std::size_t n = raw.size();
    std::string out;
    out.reserve(n);
    std::size_t i = 0;

    while (i < n) {
        char c = raw[i];

        if (c == '%') { // comment to end of line
            while (i < n && raw[i] != '\n') ++i;
            out.push_back(' ');
            continue;
        }

        if (c == '$') { // inline or display math
            bool display = (i + 1 < n && raw[i + 1] == '$');
            i += display ? 2 : 1;
            while (i < n) {
                if (raw[i] == '\\' && i + 1 < n) {
                    i += 2;
                    continue;
                }
                if (raw[i] == '$') {
                    i += display ? 2 : 1;
                    break;
                }
                ++i;
            }
            out.push_back(' ');
            continue;
        }

        if (c == '{' || c == '}' || c == '~') {
            out.push_back(' ');
            ++i;
            continue;
        }

        if (c != '\\') {
            out.push_back(c);
            ++i;
            continue;
        }

        // backslash sequences
        if (i + 1 >= n) break;
        char next = raw[i + 1];

        if (next == '%' || next == '&' || next == '$' || next == '#' || next == '_') {
            out.push_back(next);
            i += 2;
            continue;
        }
        if (next == '[') { // display math \[ ... \]
            i += 2;
            while (i + 1 < n && !(raw[i] == '\\' && raw[i + 1] == ']')) ++i;
            i = (i + 1 < n) ? i + 2 : n;
            out.push_back(' ');
            continue;
        }
        if (next == '(') { // inline math \( ... \)
            i += 2;
            while (i + 1 < n && !(raw[i] == '\\' && raw[i + 1] == ')')) ++i;
            i = (i + 1 < n) ? i + 2 : n;
            out.push_back(' ');
            continue;
        }
        if (!is_ascii_alpha(next)) { // \\, \,, \; and friends
            out.push_back(' ');
            i += 2;
            continue;
        }

        // named command
        std::size_t name_start = i + 1;
        std::size_t j = name_start;
        while (j < n && is_ascii_alpha(raw[j])) ++j;
        std::string name = raw.substr(name_start, j - name_start);
        if (j < n && raw[j] == '*') ++j;

        if (name == "begin" || name == "end") {
            while (j < n && std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
            if (j < n && raw[j] == '{') {
                std::size_t close = raw.find('}', j);
                if (close == std::string::npos) {
                    i = n;
                    break;
                }
                std::string env = env_base_name(raw, j, close);
                j = close + 1;
                if (name == "begin" && drop_env_names().count(env)) {
                    // skip to the matching \end{env}, tracking nesting
                    int depth = 1;
                    std::string begin_tag = "\\begin{" + env;
                    std::string end_tag = "\\end{" + env;
                    while (j < n && depth > 0) {
                        std::size_t b = raw.find(begin_tag, j);
                        std::size_t e = raw.find(end_tag, j);
                        if (e == std::string::npos) {
                            j = n;
                            break;
                        }
                        if (b != std::string::npos && b < e) {
                            ++depth;
                            j = b + begin_tag.size();
                        } else {
                            --depth;
                            j = e + end_tag.size();
                            std::size_t close2 = raw.find('}', j);
                            if (close2 != std::string::npos) j = close2 + 1;
                        }
                    }
                }
            }
            out.push_back(' ');
            i = j;
            continue;
        }

        bool drop_args = drop_arg_commands().count(name) > 0;
        // consume option groups, and argument groups only for the drop set
        while (j < n) {
            std::size_t k = j;
            while (k < n && (raw[k] == ' ' || raw[k] == '\t')) ++k;
            if (k < n && raw[k] == '[') {
                j = skip_bracket_group(raw, k);
                continue;
            }
            if (drop_args && k < n && raw[k] == '{') {
                j = skip_group(raw, k);
                continue;
            }
            break;
        }
        out.push_back(' ');
        i = j;
    }

    // collapse whitespace
    std::string result;
    result.reserve(out.size());
    bool in_space = true;
    for (char ch : out) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v') {
            if (!in_space) result.push_back(' ');
            in_space = true;
        } else {
            result.push_back(ch);
            in_space = false;
        }
    }
    while (!result.empty() && result.back() == ' ') result.pop_back();
    return result;
}

// ---------------------------------------------------------------------------
// NFC (Latin-1 precomposition)
// ---------------------------------------------------------------------------

namespace {

struct Composition {
    char base;
    std::uint32_t mark;
    std::uint32_t composed;
};

// ASCII base + combining mark -> Latin-1 Supplement / Latin Extended-A
const Composition kCompositions[] = {
    {'A', 0x300, 0xC0}, {'A', 0x301, 0xC1}, {'A', 0x302, 0xC2}, {'A', 0x303, 0xC3},
    {'A', 0x308, 0xC4}, {'A', 0x30A, 0xC5}, {'C', 0x327, 0xC7}, {'E', 0x300, 0xC8},
    {'E', 0x301, 0xC9}, {'E', 0x302, 0xCA}, {'E', 0x308, 0xCB}, {'I', 0x300, 0xCC},
    {'I', 0x301, 0xCD}, {'I', 0x302, 0xCE}, {'I', 0x308, 0xCF}, {'N', 0x303, 0xD1},
    {'O', 0x300, 0xD2}, {'O', 0x301, 0xD3}, {'O', 0x302, 0xD4}, {'O', 0x303, 0xD5},
    {'O', 0x308, 0xD6}, {'U', 0x300, 0xD9}, {'U', 0x301, 0xDA}, {'U', 0x302, 0xDB},
    {'U', 0x308, 0xDC}, {'Y', 0x301, 0xDD}, {'a', 0x300, 0xE0}, {'a', 0x301, 0xE1},
    {'a', 0x302, 0xE2}, {'a', 0x303, 0xE3}, {'a', 0x308, 0xE4}, {'a', 0x30A, 0xE5},
    {'c', 0x327, 0xE7}, {'e', 0x300, 0xE8}, {'e', 0x301, 0xE9}, {'e', 0x302, 0xEA},
    {'e', 0x308, 0xEB}, {'i', 0x300, 0xEC}, {'i', 0x301, 0xED}, {'i', 0x302, 0xEE},
    {'i', 0x308, 0xEF}, {'n', 0x303, 0xF1}, {'o', 0x300, 0xF2}, {'o', 0x301, 0xF3},
    {'o', 0x302, 0xF4}, {'o', 0x303, 0xF5}, {'o', 0x308, 0xF6}, {'u', 0x300, 0xF9},
    {'u', 0x301, 0xFA}, {'u', 0x302, 0xFB}, {'u', 0x308, 0xFC}, {'y', 0x301, 0xFD},
    {'y', 0x308, 0xFF}, {'c', 0x301, 0x107}, {'s', 0x301, 0x15B}, {'z', 0x301, 0x17A},
    {'s', 0x30C, 0x161}, {'c', 0x30C, 0x10D}, {'z', 0x30C, 0x17E},
};

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

} // namespace

std::string normalize_nfc(const std::string& utf8) {
    std::string out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    const std::size_t n = utf8.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(utf8[i]);
        // combining diacritics U+0300..U+036F encode as two bytes 0xCC/0xCD + trail
        if ((c == 0xCC || c == 0xCD) && i + 1 < n) {
            unsigned char c2 = static_cast<unsigned char>(utf8[i + 1]);
            if ((c2 & 0xC0) == 0x80) {
                std::uint32_t mark = (static_cast<std::uint32_t>(c & 0x1F) << 6) | (c2 & 0x3F);
                bool composed = false;
                if (mark >= 0x300 && mark <= 0x36F && !out.empty()) {
                    char base = out.back();
                    for (const Composition& comp : kCompositions) {
                        if (comp.base == base && comp.mark == mark) {
                            out.pop_back();
                            append_utf8(out, comp.composed);
                            composed = true;
                            break;
                        }
                    }
                }
                if (!composed) {
                    out.push_back(utf8[i]);
                    out.push_back(utf8[i + 1]);
                }
                i += 2;
                continue;
            }
        }
        out.push_back(utf8[i]);
        ++i;
    }
    return out;
}

} // namespace kwx
