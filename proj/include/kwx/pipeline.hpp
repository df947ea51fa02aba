#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kwx/community.hpp"
#include "kwx/corpus.hpp"
#include "kwx/eval.hpp"
#include "kwx/shortkw.hpp"

namespace kwx {

struct PipelineConfig {
    // [corpus]
    std::string corpus_path;
    CorpusFormat corpus_format = CorpusFormat::jsonl;
    std::string stopword_path; // empty -> bundled default list
    bool concat_title = true;

    // [community]
    std::string community_method = "multilevel"; // used by the communities subcommand
    DetectorParams detector;

    // [short]  method names: detector names, "tfidf", "kmeans"
    std::vector<std::string> short_methods = {"multilevel", "labelprop", "leiden",
                                              "fastgreedy", "infomap", "tfidf", "kmeans"};
    KRange kmeans_range;

    // [long]  statistical methods and centralities over fulltext cooc graphs
    std::vector<std::string> long_methods = {"freq", "tfidf", "entropy", "intermittency",
                                             "yake", "textrank", "vote"};
    int window = 2;
    int entropy_segments = 0; // 0 -> per-doc sentence count, fallback 20
    std::string embeddings_path;

    // [eval]
    std::vector<int> n_values = {10, 30};
    std::size_t top_k = 50; // extraction depth before truncation to N

    // [synth]
    SyntheticSpec synth;

    // [output]
    std::string out_dir = "out";
    unsigned workers = 0; // 0 -> hardware concurrency
    std::uint64_t seed = 42;
};

// Flat INI-style config: "[section]" headers, "key = value" lines, '#'
// comments.  Unknown keys are validation errors.
PipelineConfig load_config(const std::string& path);
void validate_config(const PipelineConfig& config);

// Stage functions shared by run_pipeline and the subcommands; every stage
// reads its inputs from and writes its outputs to config.out_dir, so the
// staged and single-shot paths produce identical bytes.
void stage_ingest(const PipelineConfig& config);
void stage_communities(const PipelineConfig& config);
void stage_extract_short(const PipelineConfig& config);
void stage_extract_long(const PipelineConfig& config);
EvaluationReport stage_eval(const PipelineConfig& config);
void stage_synth(const PipelineConfig& config);

// ingest -> communities -> extract-short -> extract-long -> eval, with a
// manifest in out_dir marking completed stages; on error the manifest
// records the failed stage and the partial outputs remain.
EvaluationReport run_pipeline(const PipelineConfig& config);

// Bounded parallel map helper: calls fn(i) for i in [0, n) on `workers`
// threads (0 -> hardware concurrency), preserving index addressing so
// callers write to pre-sized slots.  Exceptions are captured and the first
// one (lowest index) is rethrown after the pool drains.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

} // namespace kwx
