#include "kwx/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kwx/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kwx {

namespace {

Document parse_record(const json& rec, std::size_t line_no) {
    if (!rec.is_object())
        throw parse_error("line " + std::to_string(line_no) + ": record is not an object");
    Document doc;
    if (!rec.contains("id") || !rec["id"].is_string() || rec["id"].get<std::string>().empty())
        throw parse_error("line " + std::to_string(line_no) + ": missing or empty id");
    doc.id = rec["id"].get<std::string>();
    auto text_field = [&](const char* key) -> std::string {
        if (!rec.contains(key)) return "";
        if (!rec[key].is_string())
            throw parse_error("line " + std::to_string(line_no) + ": field '" + key +
                              "' is not a string");
        return normalize_nfc(rec[key].get<std::string>());
    };
    doc.title = text_field("title");
    doc.abstract_raw = text_field("abstract");
    doc.fulltext_raw = text_field("fulltext");
    if (rec.contains("references")) {
        if (!rec["references"].is_array())
            throw parse_error("line " + std::to_string(line_no) + ": references is not an array");
        std::unordered_set<std::string> seen;
        for (const auto& r : rec["references"]) {
            if (!r.is_string())
                throw parse_error("line " + std::to_string(line_no) +
                                  ": reference entry is not a string");
            std::string ref = r.get<std::string>();
            if (seen.insert(ref).second) doc.references.push_back(ref);
        }
    }
    return doc;
}

Corpus load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open corpus file: " + path);
    Corpus corpus;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw parse_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        Document doc = parse_record(rec, line_no);
        if (!ids.insert(doc.id).second)
            throw integrity_error("duplicate document id: " + doc.id);
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

Corpus load_directory(const std::string& path) {
    if (!fs::is_directory(path)) throw io_error("not a directory: " + path);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Corpus corpus;
    std::unordered_set<std::string> ids;
    std::unordered_map<std::string, std::size_t> by_id;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw io_error("cannot open document file: " + file.string());
        std::stringstream buf;
        buf << in.rdbuf();
        Document doc;
        doc.id = file.stem().string();
        if (!ids.insert(doc.id).second) throw integrity_error("duplicate document id: " + doc.id);
        std::string content = normalize_nfc(buf.str());
        doc.abstract_raw = content;
        doc.fulltext_raw = std::move(content);
        by_id[doc.id] = corpus.size();
        corpus.push_back(std::move(doc));
    }
    fs::path ref_table = fs::path(path) / "references.tsv";
    if (fs::exists(ref_table)) {
        std::ifstream in(ref_table);
        if (!in) throw io_error("cannot open references table: " + ref_table.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            std::size_t tab = line.find('\t');
            if (tab == std::string::npos)
                throw parse_error("references.tsv line " + std::to_string(line_no) +
                                  ": expected 'id<TAB>ref'");
            std::string id = line.substr(0, tab);
            std::string ref = line.substr(tab + 1);
            auto it = by_id.find(id);
            if (it == by_id.end())
                throw integrity_error("references.tsv line " + std::to_string(line_no) +
                                      ": unknown document id '" + id + "'");
            auto& refs = corpus[it->second].references;
            if (std::find(refs.begin(), refs.end(), ref) == refs.end()) refs.push_back(ref);
        }
    }
    return corpus;
}

} // namespace

Corpus load_corpus(const std::string& path, CorpusFormat format) {
    return format == CorpusFormat::jsonl ? load_jsonl(path) : load_directory(path);
}

void save_corpus_jsonl(const std::string& path, const Corpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write corpus file: " + path);
    for (const Document& doc : corpus) {
        json rec;
        rec["id"] = doc.id;
        rec["title"] = doc.title;
        rec["abstract"] = doc.abstract_raw;
        if (!doc.fulltext_raw.empty()) rec["fulltext"] = doc.fulltext_raw;
        rec["references"] = doc.references;
        out << rec.dump() << '\n';
    }
}

ProcessedDocument process_document(const Document& doc, const StopwordSet& stopwords,
                                   bool concat_title) {
    ProcessedDocument out;
    out.id = doc.id;
    std::string abstract_src = concat_title && !doc.title.empty()
                                   ? doc.title + " " + doc.abstract_raw
                                   : doc.abstract_raw;
    out.abstract_tokens = preprocess(strip_latex(abstract_src), stopwords);
    out.abstract_vocab.insert(out.abstract_tokens.begin(), out.abstract_tokens.end());
    if (!doc.fulltext_raw.empty()) {
        std::string stripped = strip_latex(doc.fulltext_raw);
        out.fulltext_tokens = preprocess(stripped, stopwords);
        out.fulltext_vocab.insert(out.fulltext_tokens.begin(), out.fulltext_tokens.end());
        out.fulltext_sentences = split_sentences(stripped);
    }
    return out;
}

std::vector<ProcessedDocument> process_corpus(const Corpus& corpus, const StopwordSet& stopwords,
                                              bool concat_title, unsigned workers) {
    std::vector<ProcessedDocument> out(corpus.size());
    if (workers == 0) workers = std::thread::hardware_concurrency();
    if (workers <= 1 || corpus.size() < 2) {
        for (std::size_t i = 0; i < corpus.size(); ++i)
            out[i] = process_document(corpus[i], stopwords, concat_title);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= corpus.size()) return;
            try {
                out[i] = process_document(corpus[i], stopwords, concat_title);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned n_threads = std::min<std::size_t>(workers, corpus.size());
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

TfIdfModel fit_tfidf(const std::vector<std::vector<std::string>>& docs, TfIdfModel::Scope scope) {
    if (docs.empty()) throw precondition_error("fit_tfidf: empty corpus");
    TfIdfModel model;
    model.scope = scope;
    model.n_docs = docs.size();
    for (const auto& tokens : docs) {
        std::unordered_set<std::string> seen;
        for (const auto& t : tokens)
            if (seen.insert(t).second) ++model.doc_frequency[t];
    }
    return model;
}

namespace {

// idf ratio log N / log N_w with both arguments clamped to >= 2, removing
// the singularities at N_w = 1 and N = 1 while preserving N_w = N -> 1.
double idf_ratio(std::size_t n_docs, std::size_t n_w) {
    double num = std::log(static_cast<double>(std::max<std::size_t>(n_docs, 2)));
    double den = std::log(static_cast<double>(std::max<std::size_t>(n_w, 2)));
    return num / den;
}

} // namespace

double tfidf_weight(const TfIdfModel& model, const std::string& word,
                    const std::vector<std::string>& doc) {
    if (doc.empty()) throw precondition_error("tfidf_weight: empty document");
    std::size_t f = std::count(doc.begin(), doc.end(), word);
    if (f == 0) return 0.0;
    auto it = model.doc_frequency.find(word);
    std::size_t n_w = it == model.doc_frequency.end() ? 1 : it->second;
    return (static_cast<double>(f) / static_cast<double>(doc.size())) *
           idf_ratio(model.n_docs, n_w);
}

std::unordered_map<std::string, double> tfidf_weights(const TfIdfModel& model,
                                                      const std::vector<std::string>& doc) {
    if (doc.empty()) throw precondition_error("tfidf_weights: empty document");
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& t : doc) ++counts[t];
    std::unordered_map<std::string, double> out;
    out.reserve(counts.size());
    double n_d = static_cast<double>(doc.size());
    for (const auto& [word, f] : counts) {
        auto it = model.doc_frequency.find(word);
        std::size_t n_w = it == model.doc_frequency.end() ? 1 : it->second;
        out[word] = (static_cast<double>(f) / n_d) * idf_ratio(model.n_docs, n_w);
    }
    return out;
}

} // namespace kwx
