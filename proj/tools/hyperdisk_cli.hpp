#pragma once

// Batch pipeline behind the `hyperdisk` executable. Every subcommand reads
// files written by earlier stages and writes into one output directory
// together with a manifest.json describing how the outputs were made.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "hyperdisk/hyperdisk.hpp"

#ifndef HYPERDISK_DATA_DIR
#define HYPERDISK_DATA_DIR "data"
#endif

namespace hyperdisk::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw DataError("SHA-256 digest failed");
    }
    std::ostringstream ss;
    for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return ss.str();
}

// Output directory for one stage. Files registered here are deleted again
// (and a freshly created directory removed) unless the stage commits.
class OutputDir {
public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_, ec);
            if (ec) throw DataError("cannot create output directory '" + dir_.string() + "': " + ec.message());
            created_ = true;
        } else if (!fs::is_directory(dir_)) {
            throw DataError("output path '" + dir_.string() + "' is not a directory");
        }
    }
    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;

    ~OutputDir() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : written_) fs::remove(dir_ / f, ec);
        if (created_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    }

    const fs::path& path() const { return dir_; }

    void write(const std::string& name, const std::string& contents) {
        written_.push_back(name);
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        out << contents;
        out.close();
        if (!out) throw DataError("cannot write '" + (dir_ / name).string() + "'");
        digests_[name] = sha256_hex(contents);
    }

    const std::map<std::string, std::string>& digests() const { return digests_; }

    void commit() { committed_ = true; }

private:
    fs::path dir_;
    bool created_ = false;
    bool committed_ = false;
    std::vector<std::string> written_;
    std::map<std::string, std::string> digests_;
};

// Per-stage entry in <out>/manifest.json. Stages sharing a directory keep
// their own entries.
struct StageRecord {
    std::string stage;
    std::vector<std::string> argv;
    ordered_json config = ordered_json::object();
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;
};

inline void write_manifest(OutputDir& out, const StageRecord& rec) {
    const fs::path file = out.path() / "manifest.json";
    ordered_json manifest;
    if (fs::exists(file)) {
        try {
            manifest = ordered_json::parse(read_file(file.string()));
        } catch (const std::exception&) {
            manifest = ordered_json();
        }
    }
    if (!manifest.is_object() || manifest.value("format", "") != "hyperdisk-manifest") {
        manifest = ordered_json::object();
        manifest["format"] = "hyperdisk-manifest";
        manifest["version"] = 1;
        manifest["stages"] = ordered_json::object();
    }
    ordered_json stage;
    stage["argv"] = rec.argv;
    stage["config"] = rec.config;
    stage["seed"] = rec.seed ? ordered_json(*rec.seed) : ordered_json(nullptr);
    ordered_json inputs = ordered_json::array();
    for (const auto& in : rec.inputs) {
        inputs.push_back({{"path", in}, {"sha256", sha256_hex(read_file(in))}});
    }
    stage["inputs"] = std::move(inputs);
    ordered_json outputs = ordered_json::object();
    for (const auto& [name, digest] : out.digests()) outputs[name] = digest;
    stage["outputs"] = std::move(outputs);
    manifest["stages"][rec.stage] = std::move(stage);

    const std::string text = manifest.dump(2) + "\n";
    std::ofstream f(file, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw DataError("cannot write '" + file.string() + "'");
}

inline std::string default_output_dir() {
    if (const char* env = std::getenv("HYPERDISK_OUT"); env && *env) return env;
    return "hyperdisk-out";
}

// Simple header-addressed CSV table.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name, const std::string& source) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(source + ": missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline Table read_table(const std::string& path) {
    auto in = open_input(path);
    Table t;
    std::string line;
    if (!csv::getline(in, line)) throw DataError(path + ": empty file");
    t.header = csv::split(line);
    std::size_t lineno = 1;
    while (csv::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = csv::split(line);
        if (f.size() != t.header.size()) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                            " fields");
        }
        t.rows.push_back(std::move(f));
    }
    return t;
}

inline std::string csv_row(std::initializer_list<std::string> fields) {
    std::string out;
    bool first = true;
    for (const auto& f : fields) {
        if (!first) out += ',';
        out += csv::quote(f);
        first = false;
    }
    return out + "\n";
}

inline std::string num(double v) { return format_double(v); }
inline std::string num(std::size_t v) { return std::to_string(v); }

// "2005:path/to/file" -> (2005, path)
inline std::pair<int, std::string> year_path(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos || colon == 0) {
        throw ConfigError("expected YEAR:PATH, got '" + spec + "'");
    }
    try {
        std::size_t used = 0;
        const int year = std::stoi(spec.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("year");
        return {year, spec.substr(colon + 1)};
    } catch (const std::logic_error&) {
        throw ConfigError("expected YEAR:PATH, got '" + spec + "'");
    }
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string fixed(double v, int digits = 3) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

inline const std::vector<std::string>& palette() {
    static const std::vector<std::string> colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
    std::string kind = "tree";
    int branching = 3;
    int levels = 3;
    int nodes = 30;
    int neighbors = 4;
    std::size_t attempts = 200;
    std::optional<std::uint64_t> seed;
    std::string name = "edges.csv";
};

inline void run_synth(const SynthOptions& o, const std::string& out_dir, const std::vector<std::string>& argv) {
    WeightedGraph g;
    ordered_json config;
    config["kind"] = o.kind;
    if (o.kind == "tree") {
        g = generate_tree(o.branching, o.levels);
        config["branching"] = o.branching;
        config["levels"] = o.levels;
    } else if (o.kind == "ring" || o.kind == "rewired") {
        g = generate_ring_lattice(o.nodes, o.neighbors);
        config["nodes"] = o.nodes;
        config["neighbors"] = o.neighbors;
        if (o.kind == "rewired") {
            if (!o.seed) throw ConfigError("--seed is required for --kind rewired");
            Rng rng = Rng::substream(*o.seed, "synth.rewire");
            auto result = rewire_increase_hierarchy(g, o.attempts, rng);
            g = std::move(result.graph);
            config["attempts"] = o.attempts;
            config["accepted"] = result.accepted;
            config["initial_betweenness_std"] = result.initial_stddev;
            config["final_betweenness_std"] = result.final_stddev;
        }
    } else {
        throw ConfigError("unknown graph kind '" + o.kind + "' (expected tree, ring or rewired)");
    }
    OutputDir out(out_dir);
    std::ostringstream ss;
    write_edge_csv(ss, g);
    out.write(o.name, ss.str());
    write_manifest(out, {"synth:" + o.name, argv, config, o.seed, {}});
    out.commit();
}

// ------------------------------------------------------------- build-net

struct BuildNetOptions {
    std::string records;
    std::vector<int> years;
    std::size_t top_k = 300;
};

inline void run_build_net(const BuildNetOptions& o, const std::string& out_dir,
                          const std::vector<std::string>& argv) {
    auto in = open_input(o.records);
    const auto records = read_records_jsonl(in, o.records);
    std::vector<int> years = o.years;
    if (years.empty()) {
        std::set<int> seen;
        for (const auto& r : records) seen.insert(r.year);
        years.assign(seen.begin(), seen.end());
    }
    if (years.empty()) throw DataError(o.records + ": no records");
    if (o.top_k < 1) throw ConfigError("--top-k must be at least 1");

    std::vector<WeightedGraph> authors, institutions;
    for (int y : years) {
        authors.push_back(build_coauthor_graph(records, y));
        institutions.push_back(aggregate_to_institutions(authors.back(), affiliations_for_year(records, y)));
    }
    const auto kept = top_k_institutions(institutions, o.top_k);
    if (kept.empty()) throw DataError("no institution appears in every requested year");

    OutputDir out(out_dir);
    for (std::size_t i = 0; i < years.size(); ++i) {
        const std::string y = std::to_string(years[i]);
        std::ostringstream a, b;
        write_edge_csv(a, authors[i]);
        write_edge_csv(b, institutions[i].induced(kept));
        out.write("authors_" + y + ".csv", a.str());
        out.write("institutions_" + y + ".csv", b.str());
    }
    std::ostringstream c;
    write_edge_csv(c, build_cooccurrence_graph(records));
    out.write("codes.csv", c.str());

    ordered_json config;
    config["years"] = years;
    config["top_k"] = o.top_k;
    config["institutions_kept"] = kept.size();
    write_manifest(out, {"build-net", argv, config, std::nullopt, {o.records}});
    out.commit();
}

// ----------------------------------------------------------------- embed

struct EmbedOptions {
    std::string edges;
    std::string name = "model.json";
    bool largest_component = false;
    bool log = false;
    TrainConfig config;
};

inline WeightedGraph largest_component(const WeightedGraph& g) {
    const auto comps = g.components();
    if (comps.size() <= 1) return g;
    std::size_t best = 0;
    for (std::size_t c = 1; c < comps.size(); ++c) {
        if (comps[c].size() > comps[best].size()) best = c;
    }
    std::vector<std::string> keep;
    for (NodeId id : comps[best]) keep.push_back(g.label(id));
    return g.induced(keep);
}

inline void run_embed(const EmbedOptions& o, const std::string& out_dir, const std::vector<std::string>& argv) {
    auto in = open_input(o.edges);
    WeightedGraph g = read_edge_csv(in, o.edges);
    if (o.largest_component) g = largest_component(g);
    o.config.validate();

    std::string log = "epoch,burnin,mean_loss,validation_loss\n";
    EpochObserver observer;
    if (o.log) {
        observer = [&](const EpochReport& r) {
            log += std::to_string(r.epoch) + ',' + (r.burnin ? "1" : "0") + ',' + num(r.mean_loss) + ',' +
                   (std::isnan(r.validation_loss) ? "" : num(r.validation_loss)) + '\n';
        };
    }
    const EmbeddingModel model = train(g, o.config, observer);

    OutputDir out(out_dir);
    out.write(o.name, model_to_string(model));
    if (o.log) out.write(fs::path(o.name).stem().string() + "_log.csv", log);
    ordered_json config = config_to_json(o.config);
    config["largest_component"] = o.largest_component;
    config["nodes"] = g.node_count();
    write_manifest(out, {"embed:" + o.name, argv, config, o.config.seed, {o.edges}});
    out.commit();
}

// --------------------------------------------------------------- metrics

struct MetricsOptions {
    std::string records;
    std::string codes_model;
    std::vector<std::string> social;    // YEAR:model.json
    std::vector<std::string> networks;  // YEAR:institutions.csv
    std::string stopwords = std::string(HYPERDISK_DATA_DIR) + "/stopwords.txt";
    std::size_t bins = kDefaultAngleBins;
};

struct Profile {
    int year = 0;
    std::string entity;
    HyperbolicPoint social;
    SemanticPosition semantic;
    std::optional<double> clustering;
};

inline void run_metrics(const MetricsOptions& o, const std::string& out_dir, const std::vector<std::string>& argv) {
    if (o.social.empty()) throw ConfigError("at least one --social YEAR:MODEL is required");
    if (o.bins < 2) throw ConfigError("--bins must be at least 2");
    std::vector<std::string> inputs{o.records, o.codes_model};

    auto rin = open_input(o.records);
    const auto records = read_records_jsonl(rin, o.records);
    const EmbeddingModel codes = model_from_string(read_file(o.codes_model));
    auto sin = open_input(o.stopwords);
    const auto stopwords = read_stopwords(sin);
    inputs.push_back(o.stopwords);

    std::map<int, EmbeddingModel> social;
    for (const auto& spec : o.social) {
        auto [year, path] = year_path(spec);
        if (social.contains(year)) throw ConfigError("duplicate --social entry for " + std::to_string(year));
        social.emplace(year, model_from_string(read_file(path)));
        inputs.push_back(path);
    }
    std::map<int, WeightedGraph> networks;
    for (const auto& spec : o.networks) {
        auto [year, path] = year_path(spec);
        auto in = open_input(path);
        networks.emplace(year, read_edge_csv(in, path));
        inputs.push_back(path);
    }

    OutputDir out(out_dir);
    std::string profiles =
        "year,entity,r_social,theta_social,r_semantic,theta_semantic,representative_code,hierarchy,diversity,"
        "clustering\n";
    std::string summary = "year,papers,entities,mean_collaborators,word_entropy,vocabulary\n";

    for (const auto& [year, model] : social) {
        const auto weights = institution_code_weights(records, year);
        std::vector<Profile> rows;
        for (const auto& entity : model.labels()) {
            auto it = weights.find(entity);
            if (it == weights.end()) continue;
            std::map<std::string, double> embedded;
            for (const auto& [code, w] : it->second) {
                if (codes.contains(code)) embedded.emplace(code, w);
            }
            if (embedded.empty()) continue;
            Profile p;
            p.year = year;
            p.entity = entity;
            p.social = model.position(entity);
            p.semantic = semantic_position(embedded, codes, o.bins);
            if (auto nit = networks.find(year); nit != networks.end() && nit->second.has_node(entity)) {
                p.clustering = weighted_clustering(nit->second, entity);
            }
            rows.push_back(std::move(p));
        }
        std::sort(rows.begin(), rows.end(), [](const Profile& a, const Profile& b) { return a.entity < b.entity; });

        std::vector<std::string> ids;
        std::vector<HyperbolicPoint> social_pts, semantic_pts;
        for (const auto& p : rows) {
            profiles += csv_row({std::to_string(year), p.entity, num(p.social.radius()), num(p.social.angle()),
                                 num(p.semantic.r), num(p.semantic.theta), p.semantic.representative,
                                 num(p.semantic.hierarchy), num(p.semantic.diversity),
                                 p.clustering ? num(*p.clustering) : std::string()});
            ids.push_back(p.entity);
            social_pts.push_back(p.social);
            semantic_pts.push_back(HyperbolicPoint::from_polar(p.semantic.r, p.semantic.theta));
        }
        std::ostringstream s, c;
        write_matrix_csv(s, pairwise_distances(ids, social_pts));
        write_matrix_csv(c, pairwise_distances(ids, semantic_pts));
        out.write("social_" + std::to_string(year) + ".csv", s.str());
        out.write("semantic_" + std::to_string(year) + ".csv", c.str());

        std::vector<std::string> texts;
        for (const auto& r : records) {
            if (r.year == year) texts.push_back(r.abstract);
        }
        const auto te = token_entropy(texts, stopwords);
        summary += csv_row({std::to_string(year), num(texts.size()), num(rows.size()),
                            num(mean_collaborators(records, year)), num(te.normalized), num(te.vocabulary)});
    }
    out.write("profiles.csv", profiles);
    out.write("yearly_summary.csv", summary);

    ordered_json config;
    config["bins"] = o.bins;
    config["kde_grid_points"] = kKdeGridPoints;
    config["semantic_radius"] = "representative_code";
    write_manifest(out, {"metrics", argv, config, std::nullopt, inputs});
    out.commit();
}

// --------------------------------------------------------------- analyze

struct AnalyzeOptions {
    std::string metrics_dir;
    double alpha = 0.05;
    std::size_t bins = 20;
    bool autoregressive = true;
};

struct YearPositions {
    std::map<std::string, Polar> social;
    std::map<std::string, Polar> semantic;
};

using SeriesPair = std::pair<std::vector<double>, std::vector<double>>;

inline void run_analyze(const AnalyzeOptions& o, const std::string& out_dir, const std::vector<std::string>& argv) {
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    if (o.bins < 1) throw ConfigError("--bins must be at least 1");
    const fs::path dir(o.metrics_dir);
    const std::string profiles_path = (dir / "profiles.csv").string();
    const Table profiles = read_table(profiles_path);
    const std::size_t c_year = profiles.column("year", profiles_path);
    const std::size_t c_entity = profiles.column("entity", profiles_path);
    const std::size_t c_rs = profiles.column("r_social", profiles_path);
    const std::size_t c_ts = profiles.column("theta_social", profiles_path);
    const std::size_t c_rc = profiles.column("r_semantic", profiles_path);
    const std::size_t c_tc = profiles.column("theta_semantic", profiles_path);

    std::map<int, YearPositions> by_year;
    for (const auto& row : profiles.rows) {
        const int year = static_cast<int>(parse_double(row[c_year], profiles_path));
        auto& yp = by_year[year];
        yp.social[row[c_entity]] = {parse_double(row[c_rs], profiles_path), parse_double(row[c_ts], profiles_path)};
        yp.semantic[row[c_entity]] = {parse_double(row[c_rc], profiles_path),
                                      parse_double(row[c_tc], profiles_path)};
    }
    if (by_year.size() < 3) throw DataError(profiles_path + ": need at least three years of profiles");

    std::vector<std::string> inputs{profiles_path};
    std::map<int, DistanceMatrix> social, semantic;
    for (const auto& [year, yp] : by_year) {
        for (auto* which : {&social, &semantic}) {
            const std::string path =
                (dir / ((which == &social ? "social_" : "semantic_") + std::to_string(year) + ".csv")).string();
            auto in = open_input(path);
            which->emplace(year, read_matrix_csv(in, path));
            inputs.push_back(path);
        }
    }

    // entities present in every year form a balanced panel
    std::set<std::string> panel;
    for (const auto& [id, pos] : by_year.begin()->second.social) panel.insert(id);
    for (const auto& [year, yp] : by_year) {
        std::set<std::string> keep;
        for (const auto& id : panel) {
            if (yp.social.contains(id)) keep.insert(id);
        }
        panel = std::move(keep);
    }
    const std::vector<std::string> entities(panel.begin(), panel.end());
    if (entities.size() < 3) throw DataError("fewer than three entities are present in every year");

    std::vector<double> years;
    for (const auto& [year, yp] : by_year) years.push_back(year);
    auto matrix_value = [](const DistanceMatrix& m, const std::string& a, const std::string& b) {
        const auto ia = std::find(m.ids.begin(), m.ids.end(), a) - m.ids.begin();
        const auto ib = std::find(m.ids.begin(), m.ids.end(), b) - m.ids.begin();
        if (ia == static_cast<std::ptrdiff_t>(m.ids.size()) || ib == static_cast<std::ptrdiff_t>(m.ids.size())) {
            throw DataError("distance matrix lacks entity '" + a + "' or '" + b + "'");
        }
        return m.at(static_cast<std::size_t>(ia), static_cast<std::size_t>(ib));
    };

    // component series per pair: distance, angular separation, radius gap
    std::map<std::string, std::vector<SeriesPair>> pair_series;
    std::string slopes = "first,second,beta_social,beta_semantic,p_social,p_semantic\n";
    std::vector<double> beta_s, beta_c;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        for (std::size_t j = i + 1; j < entities.size(); ++j) {
            const auto& a = entities[i];
            const auto& b = entities[j];
            DistanceSeries ds{a, b, years, {}, {}};
            SeriesPair angle, radius;
            for (const auto& [year, yp] : by_year) {
                ds.social.push_back(matrix_value(social.at(year), a, b));
                ds.semantic.push_back(matrix_value(semantic.at(year), a, b));
                angle.first.push_back(angular_separation(yp.social.at(a).theta, yp.social.at(b).theta));
                angle.second.push_back(angular_separation(yp.semantic.at(a).theta, yp.semantic.at(b).theta));
                radius.first.push_back(std::fabs(yp.social.at(a).r - yp.social.at(b).r));
                radius.second.push_back(std::fabs(yp.semantic.at(a).r - yp.semantic.at(b).r));
            }
            const auto fs_ = ols_slope(years, ds.social);
            const auto fc = ols_slope(years, ds.semantic);
            slopes += csv_row({a, b, num(fs_.slope), num(fc.slope), num(fs_.p_value), num(fc.p_value)});
            beta_s.push_back(fs_.slope);
            beta_c.push_back(fc.slope);
            pair_series["distance"].emplace_back(ds.social, ds.semantic);
            pair_series["angle"].push_back(std::move(angle));
            pair_series["radius"].push_back(std::move(radius));
        }
    }

    // entity level: mean distance to all others, mean angular separation,
    // and the entity's own radius
    std::map<std::string, std::vector<SeriesPair>> entity_series;
    std::string entity_means = "year,entity,mean_social_distance,mean_semantic_distance\n";
    std::string radius_slopes = "entity,beta_social_radius,beta_semantic_radius\n";
    std::vector<double> radius_s, radius_c;
    for (const auto& e : entities) {
        SeriesPair dist, angle, radius;
        for (const auto& [year, yp] : by_year) {
            double ds = 0.0, dc = 0.0, as = 0.0, ac = 0.0;
            for (const auto& other : entities) {
                if (other == e) continue;
                ds += matrix_value(social.at(year), e, other);
                dc += matrix_value(semantic.at(year), e, other);
                as += angular_separation(yp.social.at(e).theta, yp.social.at(other).theta);
                ac += angular_separation(yp.semantic.at(e).theta, yp.semantic.at(other).theta);
            }
            const double k = static_cast<double>(entities.size() - 1);
            dist.first.push_back(ds / k);
            dist.second.push_back(dc / k);
            angle.first.push_back(as / k);
            angle.second.push_back(ac / k);
            radius.first.push_back(yp.social.at(e).r);
            radius.second.push_back(yp.semantic.at(e).r);
            entity_means += csv_row({std::to_string(year), e, num(ds / k), num(dc / k)});
        }
        const double rs = ols_slope(years, radius.first).slope;
        const double rc = ols_slope(years, radius.second).slope;
        radius_slopes += csv_row({e, num(rs), num(rc)});
        radius_s.push_back(rs);
        radius_c.push_back(rc);
        entity_series["distance"].push_back(std::move(dist));
        entity_series["angle"].push_back(std::move(angle));
        entity_series["radius"].push_back(std::move(radius));
    }

    std::string correlation = "measure,n,r,p_value\n";
    auto correlate = [&](const std::string& name, const std::vector<double>& x, const std::vector<double>& y) {
        try {
            const auto c = pearson(x, y);
            correlation += csv_row({name, num(x.size()), num(c.r), num(c.p_value)});
        } catch (const DomainError&) {
            correlation += csv_row({name, num(x.size()), "", ""});
        }
    };
    correlate("distance_slopes", beta_s, beta_c);
    correlate("radius_slopes", radius_s, radius_c);

    std::string scatter = "x_mid,y_mean,count\n";
    for (const auto& b : bin_means(beta_s, beta_c, o.bins)) {
        scatter += csv_row({num(b.x_mid), num(b.y_mean), num(b.count)});
    }

    std::string granger =
        "level,component,direction,n,pct_positive_significant,alpha,excluded,pct_positive_among_significant\n";
    auto tally_rows = [&](const std::string& level, std::map<std::string, std::vector<SeriesPair>>& series) {
        for (const std::string component : {"distance", "angle", "radius"}) {
            auto& forward = series[component];
            std::vector<SeriesPair> backward;
            for (const auto& [x, y] : forward) backward.emplace_back(y, x);
            for (const auto& [direction, data] :
                 {std::pair{std::string("social->semantic"), &forward}, {"semantic->social", &backward}}) {
                const auto t = granger_tally(*data, o.alpha, o.autoregressive, direction);
                granger += csv_row({level, component, t.direction, num(t.n_regressions),
                                    num(t.pct_positive_significant), num(t.alpha), num(t.excluded),
                                    num(t.pct_positive_among_significant)});
            }
        }
    };
    tally_rows("pair", pair_series);
    tally_rows("entity", entity_series);

    OutputDir out(out_dir);
    out.write("slopes.csv", slopes);
    out.write("radius_slopes.csv", radius_slopes);
    out.write("slope_correlation.csv", correlation);
    out.write("binned_scatter.csv", scatter);
    out.write("entity_means.csv", entity_means);
    out.write("granger.csv", granger);
    ordered_json config;
    config["alpha"] = o.alpha;
    config["bins"] = o.bins;
    config["autoregressive"] = o.autoregressive;
    config["years"] = years;
    config["entities"] = entities.size();
    write_manifest(out, {"analyze", argv, config, std::nullopt, inputs});
    out.commit();
}

// ---------------------------------------------------------------- report

struct ReportOptions {
    std::optional<std::string> model;
    std::optional<std::string> slopes;
    std::optional<std::string> scatter;
    std::optional<std::string> label_map;
    bool labels = false;
};

inline std::string disk_svg(const EmbeddingModel& m, const std::map<std::string, std::string>& groups,
                            bool show_labels) {
    constexpr double size = 600.0, c = size / 2.0, rad = 280.0;
    std::map<std::string, std::string> colors;
    for (const auto& [id, g] : groups) {
        if (!colors.contains(g)) colors[g] = palette()[colors.size() % palette().size()];
    }
    auto group_of = [&](const std::string& id) {
        auto it = groups.find(id);
        return it != groups.end() ? it->second : id.substr(0, 1);
    };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
    s << "<circle cx=\"300\" cy=\"300\" r=\"280\" fill=\"none\" stroke=\"#333\" stroke-width=\"1.5\"/>\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& id = m.labels()[i];
        const auto g = group_of(id);
        if (!colors.contains(g)) colors[g] = palette()[colors.size() % palette().size()];
        const double x = c + rad * m.positions()[i].x();
        const double y = c - rad * m.positions()[i].y();
        s << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(y) << "\" r=\"3\" fill=\"" << colors[g]
          << "\"><title>" << xml_escape(id) << "</title></circle>\n";
        if (show_labels) {
            s << "<text x=\"" << fixed(x + 4) << "\" y=\"" << fixed(y - 4) << "\" font-size=\"9\">" << xml_escape(id)
              << "</text>\n";
        }
    }
    double ly = 20.0;
    for (const auto& [g, color] : colors) {
        s << "<rect x=\"10\" y=\"" << fixed(ly - 8) << "\" width=\"8\" height=\"8\" fill=\"" << color << "\"/>"
          << "<text x=\"22\" y=\"" << fixed(ly) << "\" font-size=\"10\">" << xml_escape(g) << "</text>\n";
        ly += 14.0;
    }
    s << "</svg>\n";
    return s.str();
}

inline std::string scatter_svg(const std::vector<std::pair<double, double>>& points,
                               const std::vector<std::pair<double, double>>& binned) {
    constexpr double w = 600.0, h = 600.0, pad = 60.0;
    double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
    bool first = true;
    for (const auto* set : {&points, &binned}) {
        for (const auto& [x, y] : *set) {
            if (first) {
                lo_x = hi_x = x;
                lo_y = hi_y = y;
                first = false;
            }
            lo_x = std::min(lo_x, x);
            hi_x = std::max(hi_x, x);
            lo_y = std::min(lo_y, y);
            hi_y = std::max(hi_y, y);
        }
    }
    if (hi_x == lo_x) hi_x = lo_x + 1.0;
    if (hi_y == lo_y) hi_y = lo_y + 1.0;
    auto px = [&](double x) { return pad + (x - lo_x) / (hi_x - lo_x) * (w - 2 * pad); };
    auto py = [&](double y) { return h - pad - (y - lo_y) / (hi_y - lo_y) * (h - 2 * pad); };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
    s << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad << "\" height=\"" << h - 2 * pad
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
    s << "<text x=\"300\" y=\"590\" font-size=\"12\" text-anchor=\"middle\">social slope</text>\n";
    s << "<text x=\"15\" y=\"300\" font-size=\"12\" transform=\"rotate(-90 15 300)\" text-anchor=\"middle\">"
         "semantic slope</text>\n";
    s << "<text x=\"" << pad << "\" y=\"" << h - pad + 15 << "\" font-size=\"9\">" << fixed(lo_x, 4) << "</text>\n";
    s << "<text x=\"" << w - pad << "\" y=\"" << h - pad + 15 << "\" font-size=\"9\" text-anchor=\"end\">"
      << fixed(hi_x, 4) << "</text>\n";
    for (const auto& [x, y] : points) {
        s << "<circle cx=\"" << fixed(px(x)) << "\" cy=\"" << fixed(py(y)) << "\" r=\"1.5\" fill=\"#999\"/>\n";
    }
    for (const auto& [x, y] : binned) {
        s << "<circle cx=\"" << fixed(px(x)) << "\" cy=\"" << fixed(py(y)) << "\" r=\"4\" fill=\"#d62728\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

inline void run_report(const ReportOptions& o, const std::string& out_dir, const std::vector<std::string>& argv) {
    if (!o.model && !o.slopes && !o.scatter) {
        throw ConfigError("report needs --model and/or --slopes/--scatter");
    }
    std::vector<std::string> inputs;
    std::map<std::string, std::string> groups;
    if (o.label_map) {
        const Table t = read_table(*o.label_map);
        const auto ci = t.column("id", *o.label_map);
        const auto cg = t.column("group", *o.label_map);
        for (const auto& row : t.rows) groups[row[ci]] = row[cg];
        inputs.push_back(*o.label_map);
    }
    std::optional<std::string> disk, scatter;
    if (o.model) {
        disk = disk_svg(model_from_string(read_file(*o.model)), groups, o.labels);
        inputs.push_back(*o.model);
    }
    if (o.slopes || o.scatter) {
        std::vector<std::pair<double, double>> pts, bins;
        if (o.slopes) {
            const Table t = read_table(*o.slopes);
            const auto cs = t.column("beta_social", *o.slopes);
            const auto cc = t.column("beta_semantic", *o.slopes);
            for (const auto& row : t.rows) {
                pts.emplace_back(parse_double(row[cs], *o.slopes), parse_double(row[cc], *o.slopes));
            }
            inputs.push_back(*o.slopes);
        }
        if (o.scatter) {
            const Table t = read_table(*o.scatter);
            const auto cx = t.column("x_mid", *o.scatter);
            const auto cy = t.column("y_mean", *o.scatter);
            for (const auto& row : t.rows) {
                bins.emplace_back(parse_double(row[cx], *o.scatter), parse_double(row[cy], *o.scatter));
            }
            inputs.push_back(*o.scatter);
        }
        scatter = scatter_svg(pts, bins);
    }
    OutputDir out(out_dir);
    if (disk) out.write("disk.svg", *disk);
    if (scatter) out.write("scatter.svg", *scatter);
    ordered_json config;
    config["labels"] = o.labels;
    write_manifest(out, {"report", argv, config, std::nullopt, inputs});
    out.commit();
}

// ------------------------------------------------------------- info-demo

struct InfoOptions {
    std::string table;
    std::string base = "2";
};

// Long-format table: one column per variable plus a probability column `p`.
inline JointDistribution read_joint_table(const std::string& path) {
    const Table t = read_table(path);
    const auto cp = t.column("p", path);
    std::vector<std::size_t> vars;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i != cp) vars.push_back(i);
    }
    if (vars.size() < 2 || vars.size() > 3) throw DataError(path + ": expected two or three variable columns");
    std::vector<std::map<std::string, std::size_t>> levels(vars.size());
    for (const auto& row : t.rows) {
        for (std::size_t k = 0; k < vars.size(); ++k) levels[k].emplace(row[vars[k]], 0);
    }
    std::vector<std::size_t> sizes;
    for (auto& lv : levels) {
        std::size_t i = 0;
        for (auto& [name, idx] : lv) idx = i++;
        sizes.push_back(lv.size());
    }
    std::size_t cells = 1;
    for (auto s : sizes) cells *= s;
    std::vector<double> probs(cells, 0.0);
    std::vector<bool> seen(cells, false);
    for (const auto& row : t.rows) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < vars.size(); ++k) idx = idx * sizes[k] + levels[k].at(row[vars[k]]);
        if (seen[idx]) throw DataError(path + ": duplicate cell in joint table");
        seen[idx] = true;
        probs[idx] = parse_double(row[cp], path);
    }
    std::vector<std::string> names;
    for (auto v : vars) names.push_back(t.header[v]);
    return JointDistribution(std::move(names), std::move(sizes), std::move(probs));
}

inline void run_info(const InfoOptions& o, std::ostream& out) {
    LogBase base;
    if (o.base == "2") {
        base = LogBase::bits;
    } else if (o.base == "e") {
        base = LogBase::nats;
    } else {
        throw ConfigError("--base must be 2 or e");
    }
    const auto j = read_joint_table(o.table);
    const auto& n = j.names();
    const std::string unit = base == LogBase::bits ? "bits" : "nats";
    auto line = [&](const std::string& label, double v) {
        out << std::left << std::setw(14) << label << format_double(v) << ' ' << unit << '\n';
    };
    for (const auto& v : n) line("H(" + v + ")", j.joint_entropy({v}, base));
    if (n.size() == 2) {
        line("H(" + n[0] + "," + n[1] + ")", j.joint_entropy(n, base));
        line("H(" + n[0] + "|" + n[1] + ")", conditional_entropy(j, n[0], n[1], base));
        line("H(" + n[1] + "|" + n[0] + ")", conditional_entropy(j, n[1], n[0], base));
        line("I(" + n[0] + ";" + n[1] + ")", mutual_information(j, base));
    } else {
        line("H(" + n[0] + "," + n[1] + "," + n[2] + ")", j.joint_entropy(n, base));
        line("I(" + n[0] + ";" + n[1] + ")", j.joint_entropy({n[0]}, base) + j.joint_entropy({n[1]}, base) -
                                                 j.joint_entropy({n[0], n[1]}, base));
        line("I(" + n[0] + ";" + n[1] + "|" + n[2] + ")", conditional_mutual_information(j, n[0], n[1], n[2], base));
        line("I(" + n[0] + ";" + n[1] + ";" + n[2] + ")", interaction_information(j, base));
    }
}

// ------------------------------------------------------------ dispatcher

inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    CLI::App app{"Hyperbolic embedding pipeline for social and semantic networks", "hyperdisk"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    std::string out_dir = default_output_dir();

    SynthOptions synth;
    auto* s = app.add_subcommand("synth", "Write a reference graph as an edge list");
    s->add_option("--kind", synth.kind, "tree, ring or rewired")->capture_default_str();
    s->add_option("--branching", synth.branching)->capture_default_str();
    s->add_option("--levels", synth.levels, "tree levels including the root")->capture_default_str();
    s->add_option("--nodes", synth.nodes)->capture_default_str();
    s->add_option("--neighbors", synth.neighbors)->capture_default_str();
    s->add_option("--attempts", synth.attempts, "rewiring attempts")->capture_default_str();
    s->add_option("--seed", synth.seed);
    s->add_option("--name", synth.name)->capture_default_str();
    s->add_option("--out", out_dir, "output directory (default $HYPERDISK_OUT)");

    BuildNetOptions build;
    auto* b = app.add_subcommand("build-net", "Build yearly author/institution networks and the code network");
    b->add_option("--records", build.records, "JSON Lines publication records")->required();
    b->add_option("--year", build.years, "year to build (repeatable; default all)");
    b->add_option("--top-k", build.top_k, "institutions kept in every year")->capture_default_str();
    b->add_option("--out", out_dir);

    EmbedOptions embed;
    auto& tc = embed.config;
    auto* e = app.add_subcommand("embed", "Train a Poincare disk embedding of an edge list");
    e->add_option("--edges", embed.edges)->required();
    e->add_option("--seed", tc.seed)->required();
    e->add_option("--name", embed.name)->capture_default_str();
    e->add_option("--lr", tc.learning_rate)->capture_default_str();
    e->add_option("--negatives", tc.negatives)->capture_default_str();
    e->add_option("--batch-size", tc.batch_size)->capture_default_str();
    e->add_option("--epochs", tc.epochs)->capture_default_str();
    e->add_option("--burnin", tc.burnin_epochs)->capture_default_str();
    e->add_option("--burnin-lr-factor", tc.burnin_lr_factor)->capture_default_str();
    e->add_option("--burnin-negatives", tc.burnin_negatives, "0 = same as --negatives")->capture_default_str();
    e->add_option("--eval-every", tc.eval_every)->capture_default_str();
    e->add_option("--epsilon", tc.epsilon)->capture_default_str();
    e->add_option("--validation-fraction", tc.validation_fraction)->capture_default_str();
    bool no_symmetrize = false;
    e->add_flag("--no-symmetrize", no_symmetrize);
    e->add_flag("--largest-component", embed.largest_component, "embed only the largest connected component");
    e->add_flag("--log", embed.log, "also write a per-epoch loss log");
    e->add_option("--out", out_dir);

    MetricsOptions metrics;
    auto* m = app.add_subcommand("metrics", "Entity profiles and distance matrices per year");
    m->add_option("--records", metrics.records)->required();
    m->add_option("--codes-model", metrics.codes_model, "embedding of the code network")->required();
    m->add_option("--social", metrics.social, "YEAR:MODEL embedding of that year's institution network")
        ->required();
    m->add_option("--network", metrics.networks, "YEAR:EDGES institution network for clustering");
    m->add_option("--stopwords", metrics.stopwords)->capture_default_str();
    m->add_option("--bins", metrics.bins, "angular entropy bins")->capture_default_str();
    m->add_option("--out", out_dir);

    AnalyzeOptions analyze;
    auto* a = app.add_subcommand("analyze", "Slopes, correlations, binned scatter and Granger tallies");
    a->add_option("--metrics-dir", analyze.metrics_dir)->required();
    a->add_option("--alpha", analyze.alpha)->capture_default_str();
    a->add_option("--bins", analyze.bins, "scatter bins")->capture_default_str();
    bool no_ar = false;
    a->add_flag("--no-autoregressive", no_ar, "drop the lagged response term");
    a->add_option("--out", out_dir);

    ReportOptions report;
    auto* r = app.add_subcommand("report", "Render SVG plots");
    r->add_option("--model", report.model, "checkpoint to draw on the disk");
    r->add_option("--slopes", report.slopes, "slopes.csv from analyze");
    r->add_option("--scatter", report.scatter, "binned_scatter.csv from analyze");
    r->add_option("--label-map", report.label_map, "CSV with columns id,group");
    r->add_flag("--labels", report.labels, "print node ids next to points");
    r->add_option("--out", out_dir);

    InfoOptions info;
    auto* i = app.add_subcommand("info-demo", "Entropy and mutual information of a joint table");
    i->add_option("--table", info.table, "CSV with variable columns and a probability column p")->required();
    i->add_option("--base", info.base, "2 or e")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& ex) {
        err << "hyperdisk: " << ex.what() << "\n";
        return kExitUsage;
    }

    std::vector<std::string> argv{"hyperdisk"};
    argv.insert(argv.end(), args.begin(), args.end());
    try {
        if (s->parsed()) {
            run_synth(synth, out_dir, argv);
        } else if (b->parsed()) {
            run_build_net(build, out_dir, argv);
        } else if (e->parsed()) {
            tc.symmetrize = !no_symmetrize;
            run_embed(embed, out_dir, argv);
        } else if (m->parsed()) {
            run_metrics(metrics, out_dir, argv);
        } else if (a->parsed()) {
            analyze.autoregressive = !no_ar;
            run_analyze(analyze, out_dir, argv);
        } else if (r->parsed()) {
            run_report(report, out_dir, argv);
        } else if (i->parsed()) {
            run_info(info, out);
        }
    } catch (const ConfigError& ex) {
        err << "hyperdisk: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& ex) {
        err << "hyperdisk: numeric failure: " << ex.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& ex) {
        err << "hyperdisk: " << ex.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace hyperdisk::cli
