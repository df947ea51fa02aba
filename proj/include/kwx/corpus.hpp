#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kwx/text.hpp"

namespace kwx {

struct Document {
    std::string id;
    std::string title;
    std::string abstract_raw;
    std::string fulltext_raw; // may be empty
    std::vector<std::string> references; // deduplicated at load, may point outside corpus
};

using Corpus = std::vector<Document>;

struct ProcessedDocument {
    std::string id;
    std::vector<std::string> abstract_tokens;
    std::vector<std::string> fulltext_tokens;
    std::unordered_set<std::string> abstract_vocab;
    std::unordered_set<std::string> fulltext_vocab;
    std::vector<std::string> fulltext_sentences; // raw sentences, for yake/entropy segmentation
};

struct TfIdfModel {
    enum class Scope { abstracts, fulltexts };
    Scope scope = Scope::abstracts;
    std::size_t n_docs = 0;
    std::unordered_map<std::string, std::size_t> doc_frequency; // word -> N_w
};

enum class CorpusFormat { jsonl, directory };

// JSONL mode: one object per line with fields id (required), title,
// abstract, fulltext, references.  Directory mode: every *.txt file is one
// document (id = file stem, content = abstract and fulltext), with an
// optional references.tsv of "id<TAB>ref_id" rows.  NFC normalization is
// applied to all text at load.
Corpus load_corpus(const std::string& path, CorpusFormat format);

void save_corpus_jsonl(const std::string& path, const Corpus& corpus);

// Cleans and tokenizes one document.  concat_title prepends the title to
// the abstract before tokenization (default behavior; disable via flag).
ProcessedDocument process_document(const Document& doc, const StopwordSet& stopwords,
                                   bool concat_title = true);

// Parallel map of process_document over the corpus, order-preserving.
std::vector<ProcessedDocument> process_corpus(const Corpus& corpus, const StopwordSet& stopwords,
                                              bool concat_title = true, unsigned workers = 0);

// N = document count, N_w = number of docs containing the word at least once.
TfIdfModel fit_tfidf(const std::vector<std::vector<std::string>>& docs,
                     TfIdfModel::Scope scope = TfIdfModel::Scope::abstracts);

// (f(w,d)/n_d) * (log N' / log N_w') with N' = max(N,2), N_w' = max(N_w,2);
// the clamps remove the log singularities at 1 while keeping the
// N_w = N -> ratio 1 identity.  0 if the word is absent from the doc.
double tfidf_weight(const TfIdfModel& model, const std::string& word,
                    const std::vector<std::string>& doc);

// All (word, weight) pairs for one document in a single pass.
std::unordered_map<std::string, double> tfidf_weights(const TfIdfModel& model,
                                                      const std::vector<std::string>& doc);

} // namespace kwx
