#pragma once

// File formats: edge-list CSV, JSON Lines publication records, embedding
// checkpoints, distance-matrix CSV and stopword lists.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "hyperdisk/embedding.hpp"
#include "hyperdisk/error.hpp"
#include "hyperdisk/graph.hpp"
#include "hyperdisk/metrics.hpp"
#include "hyperdisk/networks.hpp"

namespace hyperdisk {

using ordered_json = nlohmann::ordered_json;

// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view context) {
    double v = 0.0;
    // from_chars rejects a leading '+'
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DataError(std::string(context) + ": cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

namespace csv {

inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw DataError("unterminated quote in CSV line");
    fields.push_back(std::move(cur));
    return fields;
}

inline bool getline(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace csv

/// Edge list: header `src,dst,weight`, one row per edge; self-loops have
/// src == dst.
inline void write_edge_csv(std::ostream& out, const WeightedGraph& g) {
    out << "src,dst,weight\n";
    for (const auto& e : g.all_edges()) {
        out << csv::quote(g.label(e.u)) << ',' << csv::quote(g.label(e.v)) << ',' << format_double(e.weight)
            << '\n';
    }
}

inline WeightedGraph read_edge_csv(std::istream& in, std::string_view source = "edge list") {
    std::string line;
    if (!csv::getline(in, line)) throw DataError(std::string(source) + ": empty file");
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (csv::split(line) != std::vector<std::string>{"src", "dst", "weight"}) {
        throw DataError(std::string(source) + ": expected header 'src,dst,weight'");
    }
    WeightedGraph g;
    std::size_t lineno = 1;
    while (csv::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = csv::split(line);
        const std::string where = std::string(source) + ":" + std::to_string(lineno);
        if (f.size() != 3) throw DataError(where + ": expected 3 fields");
        const double w = parse_double(f[2], where);
        if (!(w > 0.0) || !std::isfinite(w)) throw DataError(where + ": weight must be positive");
        g.add_weight(f[0], f[1], w);
    }
    return g;
}

inline PublicationRecord record_from_json(const nlohmann::json& j) {
    PublicationRecord r;
    try {
        r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        r.year = j.at("year").get<int>();
        for (const auto& a : j.at("authors")) {
            r.authors.push_back({a.at("author").get<std::string>(), a.at("institution").get<std::string>()});
        }
        if (j.contains("codes")) r.codes = j.at("codes").get<std::vector<std::string>>();
        if (j.contains("abstract") && !j.at("abstract").is_null()) r.abstract = j.at("abstract").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed record: ") + e.what());
    }
    r.normalize();
    return r;
}

/// One JSON object per line with fields id, year, authors
/// ([{author, institution}]), codes and abstract. Blank lines are skipped.
inline std::vector<PublicationRecord> read_records_jsonl(std::istream& in, std::string_view source = "records") {
    std::vector<PublicationRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline ordered_json config_to_json(const TrainConfig& c) {
    ordered_json j;
    j["learning_rate"] = c.learning_rate;
    j["negatives"] = c.negatives;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["burnin_epochs"] = c.burnin_epochs;
    j["eval_every"] = c.eval_every;
    j["epsilon"] = c.epsilon;
    j["symmetrize"] = c.symmetrize;
    j["seed"] = c.seed;
    j["burnin_lr_factor"] = c.burnin_lr_factor;
    j["burnin_negatives"] = c.burnin_negatives;
    j["validation_fraction"] = c.validation_fraction;
    return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.negatives = j.at("negatives").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.burnin_epochs = j.at("burnin_epochs").get<int>();
    c.eval_every = j.at("eval_every").get<int>();
    c.epsilon = j.at("epsilon").get<double>();
    c.symmetrize = j.at("symmetrize").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.burnin_lr_factor = j.at("burnin_lr_factor").get<double>();
    c.burnin_negatives = j.value("burnin_negatives", 0);
    c.validation_fraction = j.at("validation_fraction").get<double>();
    return c;
}

inline ordered_json model_to_json(const EmbeddingModel& m) {
    ordered_json j;
    j["format"] = "hyperdisk-embedding";
    j["version"] = 1;
    j["loss"] = kLossName;
    j["dimension"] = 2;
    j["config"] = config_to_json(m.config());
    j["seed"] = m.config().seed;
    j["best_validation_loss"] = m.best_validation_loss();
    j["epoch_of_best"] = m.epoch_of_best();
    ordered_json positions = ordered_json::object();
    for (std::size_t i = 0; i < m.size(); ++i) {
        positions[m.labels()[i]] = ordered_json::array({m.positions()[i].x(), m.positions()[i].y()});
    }
    j["positions"] = std::move(positions);
    return j;
}

inline EmbeddingModel model_from_json(const ordered_json& j) {
    try {
        if (j.at("format").get<std::string>() != "hyperdisk-embedding") {
            throw DataError("not an embedding checkpoint");
        }
        std::vector<std::string> labels;
        std::vector<HyperbolicPoint> points;
        for (const auto& [label, xy] : j.at("positions").items()) {
            if (!xy.is_array() || xy.size() != 2) throw DataError("position of '" + label + "' is not [x, y]");
            labels.push_back(label);
            points.emplace_back(xy[0].get<double>(), xy[1].get<double>());
        }
        return EmbeddingModel(std::move(labels), std::move(points), config_from_json(j.at("config")),
                              j.at("best_validation_loss").get<double>(), j.at("epoch_of_best").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

inline std::string model_to_string(const EmbeddingModel& m) { return model_to_json(m).dump(2) + "\n"; }

inline EmbeddingModel model_from_string(std::string_view text) {
    try {
        return model_from_json(ordered_json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

/// Matrix CSV: header row `id,<id_1>,...,<id_n>`, then one row per id.
inline void write_matrix_csv(std::ostream& out, const DistanceMatrix& m) {
    out << "id";
    for (const auto& id : m.ids) out << ',' << csv::quote(id);
    out << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << csv::quote(m.ids[i]);
        for (std::size_t j = 0; j < m.size(); ++j) out << ',' << format_double(m.at(i, j));
        out << '\n';
    }
}

inline DistanceMatrix read_matrix_csv(std::istream& in, std::string_view source = "matrix") {
    std::string line;
    if (!csv::getline(in, line)) throw DataError(std::string(source) + ": empty file");
    auto header = csv::split(line);
    if (header.empty() || header[0] != "id") throw DataError(std::string(source) + ": expected 'id' header");
    DistanceMatrix m;
    m.ids.assign(header.begin() + 1, header.end());
    const std::size_t n = m.ids.size();
    m.values.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!csv::getline(in, line)) throw DataError(std::string(source) + ": missing rows");
        const auto f = csv::split(line);
        if (f.size() != n + 1 || f[0] != m.ids[i]) throw DataError(std::string(source) + ": malformed row");
        for (std::size_t j = 0; j < n; ++j) m.values[i * n + j] = parse_double(f[j + 1], source);
    }
    return m;
}

/// One token per line; blank lines and lines starting with '#' are ignored.
inline std::set<std::string> read_stopwords(std::istream& in) {
    std::set<std::string> out;
    std::string line;
    while (csv::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t");
        for (auto& tok : tokenize(line.substr(b, e - b + 1))) out.insert(tok);
    }
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file '" + path + "'");
    return in;
}

inline std::string read_file(const std::string& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hyperdisk
