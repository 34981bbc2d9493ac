// oaembed: fetch PubMed abstracts, preprocess them, train word2vec
// embeddings, and answer cosine-similarity keyword queries.

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <sys/stat.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "oaembed/corpus.hpp"
#include "oaembed/errors.hpp"
#include "oaembed/model.hpp"
#include "oaembed/pubmed.hpp"
#include "oaembed/similarity.hpp"
#include "oaembed/text.hpp"
#include "oaembed/train.hpp"
#include "oaembed/viz.hpp"

namespace {

using nlohmann::json;
using namespace oaembed;

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTransport = 3;

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> load_term_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open term file: " + path);
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        auto e = line.find_last_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::string term = line.substr(b, e - b + 1);
        std::transform(term.begin(), term.end(), term.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        terms.push_back(std::move(term));
    }
    return terms;
}

std::vector<std::string> split_comma(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Every run leaves a manifest next to its primary output so the run can be
// reproduced from the resolved configuration alone.
void write_manifest(const std::string& subcommand, const json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const std::string& started_at) {
    if (outputs.empty()) return;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  (unsigned long long)fnv1a(config.dump()));
    json manifest = {{"subcommand", subcommand}, {"config", config},
                     {"inputs", inputs},         {"outputs", outputs},
                     {"tool_version", kVersion}, {"started_at", started_at},
                     {"finished_at", utc_now()}, {"config_hash", hex}};
    if (config.contains("seed")) manifest["seed"] = config["seed"];
    write_file(outputs.front() + ".manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- fetch ----

struct FetchOpts {
    std::string query_file;
    std::string date_from;
    std::string date_to;
    std::string out;
    int rate_limit = 3;
    std::string base_url = "https://eutils.ncbi.nlm.nih.gov";
    int page_size = 10000;
    int batch_size = 200;
};

void to_json(json& j, const FetchOpts& o) {
    j = {{"query_file", o.query_file}, {"date_from", o.date_from},
         {"date_to", o.date_to},       {"out", o.out},
         {"rate_limit", o.rate_limit}, {"base_url", o.base_url},
         {"page_size", o.page_size},   {"batch_size", o.batch_size}};
}
void from_json(const json& j, FetchOpts& o) {
    o.query_file = j.at("query_file");
    o.date_from = j.at("date_from");
    o.date_to = j.at("date_to");
    o.out = j.at("out");
    o.rate_limit = j.at("rate_limit");
    o.base_url = j.at("base_url");
    o.page_size = j.at("page_size");
    o.batch_size = j.at("batch_size");
}

QuerySpec load_query_spec(const FetchOpts& o) {
    json j = json::parse(read_file(o.query_file), nullptr, false);
    if (j.is_discarded()) throw UsageError("query file is not valid JSON: " + o.query_file);
    QuerySpec spec;
    spec.mesh_terms = j.value("mesh_terms", std::vector<std::string>{});
    spec.mesh_major_topics = j.value("mesh_major_topics", std::vector<std::string>{});
    spec.date_from = j.value("date_from", spec.date_from);
    spec.date_to = j.value("date_to", spec.date_to);
    if (!o.date_from.empty()) spec.date_from = o.date_from;
    if (!o.date_to.empty()) spec.date_to = o.date_to;
    spec.validate();
    return spec;
}

void run_fetch(const FetchOpts& o) {
    auto started = utc_now();
    QuerySpec spec = load_query_spec(o);
    std::string query = build_query(spec);
    std::cerr << "query: " << query << "\n";

    PubMedClientOptions copts;
    copts.rate_limit_per_second = o.rate_limit;
    if (const char* key = std::getenv("NCBI_API_KEY")) copts.api_key = key;
    PubMedClient client(make_http_transport(o.base_url), copts);

    auto ids = client.search_ids(query, o.page_size);
    std::cerr << "matched " << ids.size() << " pmids\n";
    Corpus corpus;
    corpus.query = spec;
    corpus.fetched_at = utc_now();
    if (!ids.empty()) corpus.documents = client.fetch_documents(ids, o.batch_size);
    save_corpus(corpus, o.out);
    std::cerr << "saved " << corpus.documents.size() << " documents to " << o.out
              << "\n";
    write_manifest("fetch", o, {o.query_file}, {o.out}, started);
}

// ----------------------------------------------------------- preprocess ----

struct PreprocessOpts {
    std::string corpus;
    std::string out;
    std::string stoplist;  // empty = bundled list
    std::uint64_t min_count = 5;
    int fuzzy_distance = 1;
    std::size_t min_doc_tokens = 5;
};

void to_json(json& j, const PreprocessOpts& o) {
    j = {{"corpus", o.corpus},       {"out", o.out},
         {"stoplist", o.stoplist},   {"min_count", o.min_count},
         {"fuzzy_distance", o.fuzzy_distance}, {"min_doc_tokens", o.min_doc_tokens}};
}
void from_json(const json& j, PreprocessOpts& o) {
    o.corpus = j.at("corpus");
    o.out = j.at("out");
    o.stoplist = j.at("stoplist");
    o.min_count = j.at("min_count");
    o.fuzzy_distance = j.at("fuzzy_distance");
    o.min_doc_tokens = j.at("min_doc_tokens");
}

void run_preprocess(const PreprocessOpts& o) {
    auto started = utc_now();
    Corpus corpus = load_corpus(o.corpus);
    StopList stoplist =
        o.stoplist.empty() ? default_stoplist() : load_stoplist(o.stoplist);

    std::vector<TokenizedDoc> docs;
    docs.reserve(corpus.documents.size());
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& d : corpus.documents) {
        TokenizedDoc td;
        td.pmid = d.pmid;
        td.tokens = remove_stopwords(
            tokenize(denoise(d.title + " " + d.abstract_text)), stoplist);
        for (const auto& t : td.tokens) ++counts[t];
        docs.push_back(std::move(td));
    }

    std::unordered_map<std::string, std::string> canonical;
    if (o.fuzzy_distance > 0) {
        canonical = fuzzy_merge(counts, std::size_t(o.fuzzy_distance));
        std::unordered_map<std::string, std::uint64_t> merged;
        for (const auto& [word, count] : counts) merged[canonical.at(word)] += count;
        counts = std::move(merged);
    }

    std::vector<TokenizedDoc> kept;
    for (auto& d : docs) {
        std::vector<std::string> tokens;
        tokens.reserve(d.tokens.size());
        for (auto& t : d.tokens) {
            const std::string& w =
                canonical.empty() ? t : canonical.at(t);
            if (counts.at(w) >= o.min_count) tokens.push_back(w);
        }
        d.tokens = std::move(tokens);
        if (d.tokens.size() >= o.min_doc_tokens) kept.push_back(std::move(d));
    }
    save_tokens(kept, o.out);
    std::cerr << "kept " << kept.size() << "/" << docs.size() << " documents\n";
    write_manifest("preprocess", o, {o.corpus}, {o.out}, started);
}

// ---------------------------------------------------------------- train ----

struct TrainOpts {
    std::string tokens;
    std::string out;
    std::string mode = "skipgram";
    std::size_t dim = 100;
    int window = 5;
    int epochs = 5;
    int negatives = 5;
    double lr = 0.025;
    double lr_final = 0.0001;
    double subsample = 1e-3;
    std::uint64_t min_count = 5;
    std::uint64_t seed = 1;
    int threads = 1;
};

void to_json(json& j, const TrainOpts& o) {
    j = {{"tokens", o.tokens},     {"out", o.out},
         {"mode", o.mode},         {"dim", o.dim},
         {"window", o.window},     {"epochs", o.epochs},
         {"negatives", o.negatives}, {"lr", o.lr},
         {"lr_final", o.lr_final}, {"subsample", o.subsample},
         {"min_count", o.min_count}, {"seed", o.seed},
         {"threads", o.threads}};
}
void from_json(const json& j, TrainOpts& o) {
    o.tokens = j.at("tokens");
    o.out = j.at("out");
    o.mode = j.at("mode");
    o.dim = j.at("dim");
    o.window = j.at("window");
    o.epochs = j.at("epochs");
    o.negatives = j.at("negatives");
    o.lr = j.at("lr");
    o.lr_final = j.at("lr_final");
    o.subsample = j.at("subsample");
    o.min_count = j.at("min_count");
    o.seed = j.at("seed");
    o.threads = j.at("threads");
}

void run_train(const TrainOpts& o) {
    auto started = utc_now();
    auto docs = load_tokens(o.tokens);
    std::vector<std::vector<std::string>> sequences;
    sequences.reserve(docs.size());
    for (auto& d : docs) sequences.push_back(std::move(d.tokens));

    auto vocab = Vocabulary::build(sequences, o.min_count);
    std::vector<std::vector<std::uint32_t>> corpus;
    corpus.reserve(sequences.size());
    for (const auto& s : sequences) {
        auto ids = vocab.to_ids(s);
        if (!ids.empty()) corpus.push_back(std::move(ids));
    }

    TrainingConfig config;
    config.dim = o.dim;
    config.window = o.window;
    config.epochs = o.epochs;
    config.negatives = o.negatives;
    config.lr_initial = o.lr;
    config.lr_final = o.lr_final;
    config.subsample_threshold = o.subsample;
    config.min_count = o.min_count;
    config.seed = o.seed;
    config.mode = parse_mode(o.mode);
    config.threads = o.threads;

    auto [model, report] = train(corpus, vocab, config);
    save_model(model, o.out);
    std::cerr << "vocabulary " << vocab.size() << " words, "
              << report.tokens_processed << " tokens in " << report.wall_seconds
              << " s\n";
    for (std::size_t e = 0; e < report.epoch_mean_loss.size(); ++e) {
        std::cerr << "epoch " << (e + 1) << " mean loss "
                  << report.epoch_mean_loss[e] << "\n";
    }
    write_manifest("train", o, {o.tokens}, {o.out}, started);
}

// ---------------------------------------------------------------- query ----

std::vector<EmbeddingModel> load_models(const std::vector<std::string>& paths) {
    std::vector<EmbeddingModel> models;
    models.reserve(paths.size());
    for (const auto& p : paths) models.push_back(load_model(p));
    return models;
}

struct QueryOpts {
    std::vector<std::string> models;
    std::string term;
    std::size_t k = 10;
};

// query writes to stdout, so it leaves no manifest and cannot be replayed.
void run_query(const QueryOpts& o) {
    auto models = load_models(o.models);
    auto result = ensemble_query(models, o.term, o.k);
    for (const auto& [word, score] : result.neighbors) {
        std::printf("%s\t%.6f\n", word.c_str(), score);
    }
}

// --------------------------------------------------------------- matrix ----

struct MatrixOpts {
    std::string model;
    std::string words;
    std::string out;
};

void to_json(json& j, const MatrixOpts& o) {
    j = {{"model", o.model}, {"words", o.words}, {"out", o.out}};
}
void from_json(const json& j, MatrixOpts& o) {
    o.model = j.at("model");
    o.words = j.at("words");
    o.out = j.at("out");
}

void run_matrix(const MatrixOpts& o) {
    auto started = utc_now();
    auto model = load_model(o.model);
    std::vector<std::string> warnings;
    auto matrix = similarity_matrix(model, split_comma(o.words), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    write_file(o.out, heatmap_csv(matrix));
    write_manifest("matrix", o, {o.model}, {o.out}, started);
}

// ----------------------------------------------------------------- eval ----

struct EvalOpts {
    std::vector<std::string> models;
    std::string queries;
    std::string reference;
    double threshold = 0.44;
    std::size_t k = 20;
    std::string report;
};

void to_json(json& j, const EvalOpts& o) {
    j = {{"models", o.models},       {"queries", o.queries},
         {"reference", o.reference}, {"threshold", o.threshold},
         {"k", o.k},                 {"report", o.report}};
}
void from_json(const json& j, EvalOpts& o) {
    o.models = j.at("models").get<std::vector<std::string>>();
    o.queries = j.at("queries");
    o.reference = j.at("reference");
    o.threshold = j.at("threshold");
    o.k = j.at("k");
    o.report = j.at("report");
}

void run_eval(const EvalOpts& o) {
    auto started = utc_now();
    auto models = load_models(o.models);
    auto report = evaluate(models, load_term_lines(o.queries),
                           load_term_lines(o.reference), o.k, o.threshold);
    write_file(o.report, report_to_json(report) + "\n");
    std::cerr << "precision@k " << report.precision_at_k << ", mean best cosine "
              << report.mean_best_cosine << ", pass "
              << (report.pass ? "true" : "false") << "\n";
    std::vector<std::string> inputs = o.models;
    inputs.push_back(o.queries);
    inputs.push_back(o.reference);
    write_manifest("eval", o, inputs, {o.report}, started);
}

// ------------------------------------------------------------------ viz ----

struct VizStarOpts {
    std::string model;
    std::string term;
    std::size_t k = 10;
    std::string out;
};

void to_json(json& j, const VizStarOpts& o) {
    j = {{"model", o.model}, {"term", o.term}, {"k", o.k}, {"out", o.out}};
}
void from_json(const json& j, VizStarOpts& o) {
    o.model = j.at("model");
    o.term = j.at("term");
    o.k = j.at("k");
    o.out = j.at("out");
}

void run_viz_star(const VizStarOpts& o) {
    auto started = utc_now();
    auto model = load_model(o.model);
    auto result = nearest_neighbors(model, o.term, o.k);
    StarGraphSpec spec;
    spec.center = o.term;
    spec.spokes = result.neighbors;
    write_file(o.out, render_star(spec));
    write_manifest("viz-star", o, {o.model}, {o.out}, started);
}

struct VizHeatmapOpts {
    std::string model;
    std::string words;
    std::string out;
    std::string csv;
};

void to_json(json& j, const VizHeatmapOpts& o) {
    j = {{"model", o.model}, {"words", o.words}, {"out", o.out}, {"csv", o.csv}};
}
void from_json(const json& j, VizHeatmapOpts& o) {
    o.model = j.at("model");
    o.words = j.at("words");
    o.out = j.at("out");
    o.csv = j.at("csv");
}

void run_viz_heatmap(const VizHeatmapOpts& o) {
    auto started = utc_now();
    auto model = load_model(o.model);
    std::vector<std::string> warnings;
    HeatmapSpec spec;
    spec.matrix = similarity_matrix(model, split_comma(o.words), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    write_file(o.out, render_heatmap(spec));
    if (!o.csv.empty()) write_file(o.csv, heatmap_csv(spec.matrix));
    std::vector<std::string> outputs = {o.out};
    if (!o.csv.empty()) outputs.push_back(o.csv);
    write_manifest("viz-heatmap", o, {o.model}, outputs, started);
}

// ------------------------------------------------------------- pipeline ----

// Declarative stage config: INI-style sections of key = value lines.
using StageConfig = std::map<std::string, std::map<std::string, std::string>>;

StageConfig parse_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pipeline config: " + path);
    StageConfig config;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            config[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos || section.empty()) {
            throw UsageError(path + ": bad config line " + std::to_string(lineno));
        }
        auto key = line.substr(0, eq);
        auto value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            auto b2 = s.find_first_not_of(" \t");
            auto e2 = s.find_last_not_of(" \t");
            s = b2 == std::string::npos ? "" : s.substr(b2, e2 - b2 + 1);
        };
        trim(key);
        trim(value);
        config[section][key] = value;
    }
    return config;
}

std::int64_t mtime_of(const std::string& path) {
    struct stat st{};
    if (::stat(path.c_str(), &st) != 0) return -1;
    return st.st_mtime;
}

// A stage is up to date when its outputs exist, are no older than its inputs,
// and the manifest recorded the same stage configuration.
bool stage_up_to_date(const json& config, const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs) {
    if (outputs.empty()) return false;
    std::int64_t newest_input = 0;
    for (const auto& in : inputs) {
        auto t = mtime_of(in);
        if (t < 0) return false;
        newest_input = std::max(newest_input, t);
    }
    for (const auto& out : outputs) {
        auto t = mtime_of(out);
        if (t < 0 || t < newest_input) return false;
    }
    std::ifstream m(outputs.front() + ".manifest.json");
    if (!m) return false;
    json manifest = json::parse(m, nullptr, false);
    if (manifest.is_discarded()) return false;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  (unsigned long long)fnv1a(config.dump()));
    return manifest.value("config_hash", std::string{}) == hex;
}

class PipelineLock {
public:
    explicit PipelineLock(std::string path) : path_(std::move(path)) {
        std::ifstream exists(path_);
        if (exists) {
            throw IoError("pipeline lock held: " + path_ +
                          " (remove it if no other run is active)");
        }
        write_file(path_, utc_now() + "\n");
    }
    ~PipelineLock() { std::remove(path_.c_str()); }

private:
    std::string path_;
};

const std::map<std::string, std::string>& require_section(const StageConfig& config,
                                                          const std::string& name) {
    auto it = config.find(name);
    if (it == config.end()) {
        throw UsageError("pipeline config missing required [" + name + "] section");
    }
    return it->second;
}

std::string cfg(const std::map<std::string, std::string>& section,
                const std::string& key, const std::string& fallback = {}) {
    auto it = section.find(key);
    return it == section.end() ? fallback : it->second;
}

void run_pipeline(const std::string& config_path, bool force) {
    auto config = parse_pipeline_config(config_path);
    require_section(config, "train");
    PipelineLock lock(".oaembed.lock");

    std::string corpus_path, tokens_path, model_path;

    if (auto it = config.find("fetch"); it != config.end()) {
        const auto& s = it->second;
        FetchOpts o;
        o.query_file = cfg(s, "query_file");
        o.date_from = cfg(s, "date_from");
        o.date_to = cfg(s, "date_to");
        o.out = cfg(s, "out", "corpus.jsonl");
        if (!cfg(s, "rate_limit").empty()) o.rate_limit = std::stoi(cfg(s, "rate_limit"));
        if (!cfg(s, "base_url").empty()) o.base_url = cfg(s, "base_url");
        if (!cfg(s, "page_size").empty()) o.page_size = std::stoi(cfg(s, "page_size"));
        if (!cfg(s, "batch_size").empty()) o.batch_size = std::stoi(cfg(s, "batch_size"));
        corpus_path = o.out;
        if (force || !stage_up_to_date(json(o), {o.query_file}, {o.out})) {
            std::cerr << "[pipeline] fetch\n";
            run_fetch(o);
        } else {
            std::cerr << "[pipeline] fetch: up to date, skipped\n";
        }
    }

    if (auto it = config.find("preprocess"); it != config.end()) {
        const auto& s = it->second;
        PreprocessOpts o;
        o.corpus = cfg(s, "corpus", corpus_path);
        o.out = cfg(s, "out", "tokens.jsonl");
        o.stoplist = cfg(s, "stoplist");
        if (!cfg(s, "min_count").empty()) o.min_count = std::stoull(cfg(s, "min_count"));
        if (!cfg(s, "fuzzy_distance").empty()) {
            o.fuzzy_distance = std::stoi(cfg(s, "fuzzy_distance"));
        }
        if (o.corpus.empty()) throw UsageError("[preprocess] needs corpus=");
        tokens_path = o.out;
        if (force || !stage_up_to_date(json(o), {o.corpus}, {o.out})) {
            std::cerr << "[pipeline] preprocess\n";
            run_preprocess(o);
        } else {
            std::cerr << "[pipeline] preprocess: up to date, skipped\n";
        }
    }

    {
        const auto& s = config.at("train");
        TrainOpts o;
        o.tokens = cfg(s, "tokens", tokens_path);
        o.out = cfg(s, "out", "model.bin");
        o.mode = cfg(s, "mode", o.mode);
        if (!cfg(s, "dim").empty()) o.dim = std::stoull(cfg(s, "dim"));
        if (!cfg(s, "window").empty()) o.window = std::stoi(cfg(s, "window"));
        if (!cfg(s, "epochs").empty()) o.epochs = std::stoi(cfg(s, "epochs"));
        if (!cfg(s, "negatives").empty()) o.negatives = std::stoi(cfg(s, "negatives"));
        if (!cfg(s, "lr").empty()) o.lr = std::stod(cfg(s, "lr"));
        if (!cfg(s, "lr_final").empty()) o.lr_final = std::stod(cfg(s, "lr_final"));
        if (!cfg(s, "subsample").empty()) o.subsample = std::stod(cfg(s, "subsample"));
        if (!cfg(s, "min_count").empty()) o.min_count = std::stoull(cfg(s, "min_count"));
        if (!cfg(s, "seed").empty()) o.seed = std::stoull(cfg(s, "seed"));
        if (!cfg(s, "threads").empty()) o.threads = std::stoi(cfg(s, "threads"));
        if (o.tokens.empty()) throw UsageError("[train] needs tokens=");
        model_path = o.out;
        if (force || !stage_up_to_date(json(o), {o.tokens}, {o.out})) {
            std::cerr << "[pipeline] train\n";
            run_train(o);
        } else {
            std::cerr << "[pipeline] train: up to date, skipped\n";
        }
    }

    if (auto it = config.find("eval"); it != config.end()) {
        const auto& s = it->second;
        EvalOpts o;
        o.models = {cfg(s, "model", model_path)};
        o.queries = cfg(s, "queries");
        o.reference = cfg(s, "reference");
        if (!cfg(s, "threshold").empty()) o.threshold = std::stod(cfg(s, "threshold"));
        if (!cfg(s, "k").empty()) o.k = std::stoull(cfg(s, "k"));
        o.report = cfg(s, "report", "report.json");
        std::vector<std::string> inputs = o.models;
        inputs.push_back(o.queries);
        inputs.push_back(o.reference);
        if (force || !stage_up_to_date(json(o), inputs, {o.report})) {
            std::cerr << "[pipeline] eval\n";
            run_eval(o);
        } else {
            std::cerr << "[pipeline] eval: up to date, skipped\n";
        }
    }

    if (auto it = config.find("viz"); it != config.end()) {
        const auto& s = it->second;
        if (!cfg(s, "term").empty()) {
            VizStarOpts o;
            o.model = cfg(s, "model", model_path);
            o.term = cfg(s, "term");
            if (!cfg(s, "k").empty()) o.k = std::stoull(cfg(s, "k"));
            o.out = cfg(s, "star_out", "star.svg");
            if (force || !stage_up_to_date(json(o), {o.model}, {o.out})) {
                std::cerr << "[pipeline] viz star\n";
                run_viz_star(o);
            } else {
                std::cerr << "[pipeline] viz star: up to date, skipped\n";
            }
        }
        if (!cfg(s, "words").empty()) {
            VizHeatmapOpts o;
            o.model = cfg(s, "model", model_path);
            o.words = cfg(s, "words");
            o.out = cfg(s, "heatmap_out", "heatmap.svg");
            o.csv = cfg(s, "heatmap_csv", "heatmap.csv");
            std::vector<std::string> outputs = {o.out, o.csv};
            if (force || !stage_up_to_date(json(o), {o.model}, outputs)) {
                std::cerr << "[pipeline] viz heatmap\n";
                run_viz_heatmap(o);
            } else {
                std::cerr << "[pipeline] viz heatmap: up to date, skipped\n";
            }
        }
    }
}

// --------------------------------------------------------------- replay ----

void run_replay(const std::string& manifest_path) {
    json manifest = json::parse(read_file(manifest_path), nullptr, false);
    if (manifest.is_discarded() || !manifest.contains("subcommand")) {
        throw UsageError("not a run manifest: " + manifest_path);
    }
    std::string sub = manifest["subcommand"];
    const json& c = manifest["config"];
    if (sub == "fetch") run_fetch(c.get<FetchOpts>());
    else if (sub == "preprocess") run_preprocess(c.get<PreprocessOpts>());
    else if (sub == "train") run_train(c.get<TrainOpts>());
    else if (sub == "matrix") run_matrix(c.get<MatrixOpts>());
    else if (sub == "eval") run_eval(c.get<EvalOpts>());
    else if (sub == "viz-star") run_viz_star(c.get<VizStarOpts>());
    else if (sub == "viz-heatmap") run_viz_heatmap(c.get<VizHeatmapOpts>());
    else throw UsageError("cannot replay subcommand: " + sub);
}

int dispatch(int argc, char** argv) {
    CLI::App app{"word-embedding keyword extraction over PubMed abstracts"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    FetchOpts fetch;
    auto* cmd_fetch = app.add_subcommand("fetch", "download abstracts from PubMed");
    cmd_fetch->add_option("--query-file", fetch.query_file,
                          "JSON file with mesh_terms / mesh_major_topics")->required();
    cmd_fetch->add_option("--date-from", fetch.date_from, "YYYY/MM/DD");
    cmd_fetch->add_option("--date-to", fetch.date_to, "YYYY/MM/DD or 3000");
    cmd_fetch->add_option("--out", fetch.out, "corpus JSONL output")->required();
    cmd_fetch->add_option("--rate-limit", fetch.rate_limit, "requests per second");
    cmd_fetch->add_option("--base-url", fetch.base_url, "E-utilities base URL");
    cmd_fetch->add_option("--page-size", fetch.page_size, "esearch page size");
    cmd_fetch->add_option("--batch-size", fetch.batch_size, "efetch batch size");

    PreprocessOpts pre;
    auto* cmd_pre = app.add_subcommand("preprocess", "denoise and tokenize a corpus");
    cmd_pre->add_option("--corpus", pre.corpus, "corpus JSONL input")->required();
    cmd_pre->add_option("--out", pre.out, "token JSONL output")->required();
    cmd_pre->add_option("--stoplist", pre.stoplist, "stop-word file (default: bundled)");
    cmd_pre->add_option("--min-count", pre.min_count, "drop words rarer than this");
    cmd_pre->add_option("--fuzzy-distance", pre.fuzzy_distance,
                        "max edit distance for fuzzy merging (0 disables)");

    TrainOpts tr;
    auto* cmd_train = app.add_subcommand("train", "train an embedding model");
    cmd_train->add_option("--tokens", tr.tokens, "token JSONL input")->required();
    cmd_train->add_option("--out", tr.out, "model file output")->required();
    cmd_train->add_option("--mode", tr.mode, "skipgram or cbow");
    cmd_train->add_option("--dim", tr.dim, "embedding dimension");
    cmd_train->add_option("--window", tr.window, "max window size");
    cmd_train->add_option("--epochs", tr.epochs, "training epochs");
    cmd_train->add_option("--negatives", tr.negatives, "negative samples per pair");
    cmd_train->add_option("--lr", tr.lr, "initial learning rate");
    cmd_train->add_option("--lr-final", tr.lr_final, "final learning rate");
    cmd_train->add_option("--subsample", tr.subsample, "frequent-word threshold t");
    cmd_train->add_option("--min-count", tr.min_count, "vocabulary min count");
    cmd_train->add_option("--seed", tr.seed, "RNG seed");
    cmd_train->add_option("--threads", tr.threads, "worker threads");

    QueryOpts q;
    auto* cmd_query = app.add_subcommand("query", "cosine nearest neighbors");
    cmd_query->add_option("--model", q.models, "model file(s)")->required();
    cmd_query->add_option("--term", q.term, "query word")->required();
    cmd_query->add_option("-k,--k", q.k, "neighbors to return");

    MatrixOpts mx;
    auto* cmd_matrix = app.add_subcommand("matrix", "pairwise similarity matrix");
    cmd_matrix->add_option("--model", mx.model, "model file")->required();
    cmd_matrix->add_option("--words", mx.words, "comma-separated words")->required();
    cmd_matrix->add_option("--out", mx.out, "CSV output")->required();

    EvalOpts ev;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate against reference terms");
    cmd_eval->add_option("--model", ev.models, "model file(s)")->required();
    cmd_eval->add_option("--queries", ev.queries, "query-term file")->required();
    cmd_eval->add_option("--reference", ev.reference, "reference-term file")->required();
    cmd_eval->add_option("--threshold", ev.threshold, "pass threshold");
    cmd_eval->add_option("-k,--k", ev.k, "neighbors per query term");
    cmd_eval->add_option("--report", ev.report, "JSON report output")->required();

    auto* cmd_viz = app.add_subcommand("viz", "emit SVG visualizations");
    cmd_viz->require_subcommand(1);
    VizStarOpts star;
    auto* cmd_star = cmd_viz->add_subcommand("star", "neighbor star graph");
    cmd_star->add_option("--model", star.model, "model file")->required();
    cmd_star->add_option("--term", star.term, "center word")->required();
    cmd_star->add_option("-k,--k", star.k, "spokes");
    cmd_star->add_option("--out", star.out, "SVG output")->required();
    VizHeatmapOpts heat;
    auto* cmd_heat = cmd_viz->add_subcommand("heatmap", "pairwise similarity heatmap");
    cmd_heat->add_option("--model", heat.model, "model file")->required();
    cmd_heat->add_option("--words", heat.words, "comma-separated words")->required();
    cmd_heat->add_option("--out", heat.out, "SVG output")->required();
    cmd_heat->add_option("--csv", heat.csv, "CSV output");

    std::string pipeline_config;
    bool pipeline_force = false;
    auto* cmd_pipeline = app.add_subcommand("pipeline", "run fetch through viz");
    cmd_pipeline->add_option("--config", pipeline_config, "stage config file")
        ->required();
    cmd_pipeline->add_flag("--force", pipeline_force, "re-run up-to-date stages");

    std::string manifest_path;
    auto* cmd_replay = app.add_subcommand("replay", "re-run from a run manifest");
    cmd_replay->add_option("--manifest", manifest_path, "manifest file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        std::cout << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    if (cmd_fetch->parsed()) run_fetch(fetch);
    else if (cmd_pre->parsed()) run_preprocess(pre);
    else if (cmd_train->parsed()) run_train(tr);
    else if (cmd_query->parsed()) run_query(q);
    else if (cmd_matrix->parsed()) run_matrix(mx);
    else if (cmd_eval->parsed()) run_eval(ev);
    else if (cmd_viz->parsed() && cmd_star->parsed()) run_viz_star(star);
    else if (cmd_viz->parsed() && cmd_heat->parsed()) run_viz_heatmap(heat);
    else if (cmd_pipeline->parsed()) run_pipeline(pipeline_config, pipeline_force);
    else if (cmd_replay->parsed()) run_replay(manifest_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}
