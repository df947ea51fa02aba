// Command-line front end for the keyword extraction pipeline.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kwx/errors.hpp"
#include "kwx/pipeline.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::string corpus;
    std::string method;
    std::string out;
    std::string embeddings;
    std::uint64_t seed = 0;
    int min_community_size = 0;
    int window = 0;
    unsigned workers = 0;
    std::vector<int> n_values;
};

void add_common_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "pipeline config file (INI)");
    cmd->add_option("--corpus", ov.corpus, "corpus path (JSONL file or directory)");
    cmd->add_option("--method", ov.method, "community detector for the communities stage");
    cmd->add_option("--seed", ov.seed, "random seed");
    cmd->add_option("--min-community-size", ov.min_community_size,
                    "smallest community kept after detection");
    cmd->add_option("--window", ov.window, "co-occurrence window width");
    cmd->add_option("--n", ov.n_values, "evaluation depth N (repeatable)");
    cmd->add_option("--out", ov.out, "output directory");
    cmd->add_option("--workers", ov.workers, "worker threads (0 = hardware)");
    cmd->add_option("--embeddings", ov.embeddings, "word embedding table (token<TAB>floats)");
}

kwx::PipelineConfig make_config(const CLI::App* cmd, const Overrides& ov) {
    kwx::PipelineConfig config;
    if (!ov.config_path.empty()) config = kwx::load_config(ov.config_path);
    if (cmd->count("--corpus")) config.corpus_path = ov.corpus;
    if (cmd->count("--method")) config.community_method = ov.method;
    if (cmd->count("--seed")) {
        config.seed = ov.seed;
        config.synth.seed = ov.seed;
    }
    if (cmd->count("--min-community-size"))
        config.detector.min_community_size = ov.min_community_size;
    if (cmd->count("--window")) config.window = ov.window;
    if (cmd->count("--n")) config.n_values = ov.n_values;
    if (cmd->count("--out")) config.out_dir = ov.out;
    if (cmd->count("--workers")) config.workers = ov.workers;
    if (cmd->count("--embeddings")) config.embeddings_path = ov.embeddings;
    return config;
}

void print_report_summary(const std::string& out_dir) {
    std::string path = out_dir + "/report.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw kwx::io_error("cannot open " + path + " (run the eval stage first)");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw kwx::parse_error(path + ": " + e.what());
    }
    std::cout << "accuracy (method vs reference at N):\n";
    for (const auto& [method, refs] : j.at("accuracy").items())
        for (const auto& [ref, ns] : refs.items())
            for (const auto& [n, value] : ns.items())
                std::printf("  %-12s vs %-14s N=%-3s %.4f\n", method.c_str(), ref.c_str(),
                            n.c_str(), value.get<double>());
    if (j.contains("spearman_full") && !j.at("spearman_full").empty()) {
        std::cout << "rank correlation (full / top-30):\n";
        for (const auto& [pair, full] : j.at("spearman_full").items()) {
            double top30 = j.at("spearman_top30").value(pair, 0.0);
            std::printf("  %-28s %8.4f / %8.4f\n", pair.c_str(), full.get<double>(), top30);
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"keyword extraction from citation communities and word statistics"};
    app.require_subcommand(1);

    Overrides ov;
    auto* ingest = app.add_subcommand("ingest", "load and preprocess the corpus");
    auto* communities = app.add_subcommand("communities", "build the citation network and detect communities");
    auto* exshort = app.add_subcommand("extract-short", "extract abstract keywords");
    auto* exlong = app.add_subcommand("extract-long", "extract fulltext reference keywords");
    auto* eval = app.add_subcommand("eval", "compare rankings and write the report");
    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark corpus");
    auto* report = app.add_subcommand("report", "print a summary of an existing report");
    auto* run = app.add_subcommand("run", "run every stage in order");
    for (auto* cmd : {ingest, communities, exshort, exlong, eval, synth, report, run})
        add_common_options(cmd, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const CLI::App* cmd = app.get_subcommands().front();
    try {
        if (cmd == synth) {
            kwx::PipelineConfig config;
            if (!ov.config_path.empty()) config = kwx::load_config(ov.config_path);
            if (cmd->count("--seed")) config.synth.seed = ov.seed;
            if (cmd->count("--out")) config.out_dir = ov.out;
            kwx::stage_synth(config);
        } else if (cmd == report) {
            kwx::PipelineConfig config;
            if (!ov.config_path.empty()) config = kwx::load_config(ov.config_path);
            if (cmd->count("--out")) config.out_dir = ov.out;
            print_report_summary(config.out_dir);
        } else {
            kwx::PipelineConfig config = make_config(cmd, ov);
            if (cmd == run) {
                kwx::run_pipeline(config);
            } else {
                kwx::validate_config(config);
                if (cmd == ingest)
                    kwx::stage_ingest(config);
                else if (cmd == communities)
                    kwx::stage_communities(config);
                else if (cmd == exshort)
                    kwx::stage_extract_short(config);
                else if (cmd == exlong)
                    kwx::stage_extract_long(config);
                else if (cmd == eval)
                    kwx::stage_eval(config);
            }
        }
    } catch (const kwx::validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const kwx::data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const kwx::numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
