#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "affinity_graph.hpp"
#include "clustering.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "nasty.hpp"
#include "types.hpp"

namespace nastylink {

namespace io_detail {

using nlohmann::json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline double parse_score(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw IngestError(where + ": bad number '" + text + "'");
    }
}

inline json gold_to_json(const GoldLabel& gold) {
    return json{{"kind", gold.is_known() ? "known" : "nil"}, {"id", gold.id}};
}

inline GoldLabel gold_from_json(const json& j, const std::string& where) {
    const std::string kind = j.at("kind").get<std::string>();
    std::string id = j.at("id").get<std::string>();
    if (kind == "known") return GoldLabel::known(std::move(id));
    if (kind == "nil") return GoldLabel::nil(std::move(id));
    throw IngestError(where + ": unknown gold kind '" + kind + "'");
}

// Per-file embedding dimension tracking; drift is reported with the line.
struct DimCheck {
    std::size_t dim = 0;
    void check(const Vec& v, const std::string& where) {
        if (dim == 0) dim = v.size();
        if (v.size() != dim) {
            throw IngestError(where + ": embedding dimension " + std::to_string(v.size()) +
                              " differs from " + std::to_string(dim));
        }
    }
};

}  // namespace io_detail

// ---- corpus records (JSON lines) -------------------------------------------

inline void write_mentions(std::span<const Mention> mentions, const std::string& path) {
    auto out = io_detail::open_out(path);
    for (const auto& m : mentions) {
        io_detail::json j{{"id", m.id.value}, {"surface", m.surface}};
        if (m.context) j["context"] = *m.context;
        if (m.embedding) j["embedding"] = *m.embedding;
        if (m.gold) j["gold"] = io_detail::gold_to_json(*m.gold);
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline void write_entities(std::span<const Entity> entities, const std::string& path) {
    auto out = io_detail::open_out(path);
    for (const auto& e : entities) {
        io_detail::json j{{"id", e.id.value}, {"label", e.label}, {"popularity", e.popularity}};
        if (e.description) j["description"] = *e.description;
        if (e.embedding) j["embedding"] = *e.embedding;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<Mention> read_mentions(const std::string& path) {
    auto in = io_detail::open_in(path);
    std::vector<Mention> mentions;
    io_detail::DimCheck dims;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        try {
            const auto j = io_detail::json::parse(line);
            Mention m;
            m.id = MentionId{j.at("id").get<std::string>()};
            m.surface = j.at("surface").get<std::string>();
            if (m.surface.empty()) throw IngestError(where + ": empty surface");
            if (j.contains("context")) m.context = j.at("context").get<std::string>();
            if (j.contains("embedding")) {
                m.embedding = j.at("embedding").get<Vec>();
                dims.check(*m.embedding, where);
            }
            if (j.contains("gold")) m.gold = io_detail::gold_from_json(j.at("gold"), where);
            mentions.push_back(std::move(m));
        } catch (const IngestError&) {
            throw;
        } catch (const std::exception& e) {
            throw IngestError(where + ": " + e.what());
        }
    }
    return mentions;
}

inline std::vector<Entity> read_entities(const std::string& path) {
    auto in = io_detail::open_in(path);
    std::vector<Entity> entities;
    io_detail::DimCheck dims;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        try {
            const auto j = io_detail::json::parse(line);
            Entity e;
            e.id = EntityId{j.at("id").get<std::string>()};
            e.label = j.at("label").get<std::string>();
            if (e.label.empty()) throw IngestError(where + ": empty label");
            if (j.contains("description")) e.description = j.at("description").get<std::string>();
            if (j.contains("embedding")) {
                e.embedding = j.at("embedding").get<Vec>();
                dims.check(*e.embedding, where);
            }
            if (j.contains("popularity")) e.popularity = j.at("popularity").get<std::uint64_t>();
            entities.push_back(std::move(e));
        } catch (const IngestError&) {
            throw;
        } catch (const std::exception& e) {
            throw IngestError(where + ": " + e.what());
        }
    }
    return entities;
}

// Reads and cross-validates a corpus: unique ids, disjoint namespaces,
// consistent embedding dimensions, and referentially intact gold labels.
inline std::pair<std::vector<Mention>, std::vector<Entity>> read_corpus(
    const std::string& mentions_path, const std::string& entities_path) {
    std::vector<Entity> entities = read_entities(entities_path);
    std::vector<Mention> mentions = read_mentions(mentions_path);

    std::unordered_set<std::string> entity_ids;
    std::size_t entity_dim = 0;
    for (const auto& e : entities) {
        if (!entity_ids.insert(e.id.value).second) {
            throw IngestError("duplicate entity id '" + e.id.value + "'");
        }
        if (e.embedding && entity_dim == 0) entity_dim = e.embedding->size();
    }
    std::unordered_set<std::string> mention_ids;
    std::size_t mention_dim = 0;
    for (const auto& m : mentions) {
        if (!mention_ids.insert(m.id.value).second) {
            throw IngestError("duplicate mention id '" + m.id.value + "'");
        }
        if (entity_ids.count(m.id.value)) {
            throw IngestError("id '" + m.id.value + "' used as both mention and entity");
        }
        if (m.embedding && mention_dim == 0) mention_dim = m.embedding->size();
        if (m.gold) {
            if (m.gold->is_known()) {
                if (!entity_ids.count(m.gold->id)) {
                    throw IngestError("mention '" + m.id.value + "' gold entity '" + m.gold->id +
                                      "' is not in the entity catalog");
                }
            } else if (entity_ids.count(m.gold->id)) {
                throw IngestError("mention '" + m.id.value + "' NIL gold id '" + m.gold->id +
                                  "' collides with a known entity");
            }
        }
    }
    if (mention_dim != 0 && entity_dim != 0 && mention_dim != entity_dim) {
        throw ConfigError("mention embedding dimension " + std::to_string(mention_dim) +
                          " != entity embedding dimension " + std::to_string(entity_dim));
    }
    return {std::move(mentions), std::move(entities)};
}

// ---- affinity edges (TSV) ---------------------------------------------------

inline void write_edges(const AffinityGraph& graph, const std::string& path) {
    auto out = io_detail::open_out(path);
    out << "source_kind\tsource_id\ttarget_kind\ttarget_id\tscore\n";
    for (const auto& edge : graph.to_edges()) {
        out << "mention\t" << edge.source.value << '\t'
            << (is_entity(edge.target) ? "entity" : "mention") << '\t' << raw(edge.target) << '\t'
            << io_detail::format_double(edge.score) << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<AffinityEdge> read_edges(const std::string& path) {
    auto in = io_detail::open_in(path);
    std::vector<AffinityEdge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;  // header
        const std::string where = path + " line " + std::to_string(line_no);
        const auto fields = io_detail::split_tabs(line);
        if (fields.size() != 5) {
            throw IngestError(where + ": expected 5 tab-separated fields, got " +
                              std::to_string(fields.size()));
        }
        if (fields[0] != "mention") {
            throw IngestError(where + ": edge source must be a mention");
        }
        AffinityEdge edge;
        edge.source = MentionId{fields[1]};
        if (fields[2] == "mention") {
            edge.target = MentionId{fields[3]};
        } else if (fields[2] == "entity") {
            edge.target = EntityId{fields[3]};
        } else {
            throw IngestError(where + ": unknown target kind '" + fields[2] + "'");
        }
        edge.score = io_detail::parse_score(fields[4], where);
        edges.push_back(std::move(edge));
    }
    return edges;
}

// ---- clustering, trace, report ----------------------------------------------

// One line per mention: id, prediction kind, predicted entity or NIL-cluster
// label, and the transitive affinity when one was computed for an assignment.
inline void write_clustering(const Clustering& clustering, const ResolutionTrace* trace,
                             const std::string& path) {
    std::unordered_map<std::string, const TraceEntry*> by_mention;
    if (trace != nullptr) {
        for (const auto& t : trace->entries) by_mention.emplace(t.mention.value, &t);
    }
    const auto labels = cluster_labels(clustering);
    auto out = io_detail::open_out(path);
    out << "mention\tkind\tprediction\taffinity\n";
    for (std::size_t ci = 0; ci < clustering.clusters.size(); ++ci) {
        const Cluster& cluster = clustering.clusters[ci];
        for (const auto& m : cluster.mentions) {
            out << m.value << '\t' << (cluster.entity ? "entity" : "nil") << '\t' << labels[ci]
                << '\t';
            if (cluster.entity) {
                auto it = by_mention.find(m.value);
                if (it != by_mention.end() && it->second->assigned.has_value()) {
                    out << io_detail::format_double(it->second->affinity);
                }
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline Clustering read_clustering(const std::string& path) {
    auto in = io_detail::open_in(path);
    Clustering clustering;
    std::unordered_map<std::string, std::size_t> cluster_of_label;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        const auto fields = io_detail::split_tabs(line);
        if (fields.size() != 4) {
            throw IngestError(where + ": expected 4 tab-separated fields, got " +
                              std::to_string(fields.size()));
        }
        const std::string& kind = fields[1];
        if (kind != "entity" && kind != "nil") {
            throw IngestError(where + ": unknown prediction kind '" + kind + "'");
        }
        const std::string key = kind + ":" + fields[2];
        auto [it, inserted] = cluster_of_label.emplace(key, clustering.clusters.size());
        if (inserted) {
            Cluster c;
            if (kind == "entity") c.entity = EntityId{fields[2]};
            clustering.clusters.push_back(std::move(c));
        }
        clustering.clusters[it->second].mentions.push_back(MentionId{fields[0]});
    }
    clustering.canonicalize();
    return clustering;
}

inline void write_trace(const ResolutionTrace& trace, const std::string& path) {
    auto out = io_detail::open_out(path);
    out << "mention\tassigned\tbest_entity\taffinity\tpath\n";
    for (const auto& t : trace.entries) {
        out << t.mention.value << '\t' << (t.assigned ? t.assigned->value : "NIL") << '\t'
            << (t.best_entity ? t.best_entity->value : "-") << '\t'
            << io_detail::format_double(t.affinity) << '\t';
        for (std::size_t i = 0; i < t.path.size(); ++i) {
            if (i > 0) out << ' ';
            out << t.path[i];
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<std::pair<std::string, std::string>> report_lines(const EvalReport& report) {
    std::vector<std::pair<std::string, std::string>> lines;
    auto add_segment = [&lines](const std::string& name, const SegmentScores& s) {
        lines.emplace_back(name + ".precision", io_detail::format_double(s.precision));
        lines.emplace_back(name + ".recall", io_detail::format_double(s.recall));
        lines.emplace_back(name + ".f1", io_detail::format_double(s.f1));
        lines.emplace_back(name + ".nmi", io_detail::format_double(s.nmi));
        lines.emplace_back(name + ".ari", io_detail::format_double(s.ari));
        lines.emplace_back(name + ".empty", s.empty ? "1" : "0");
        lines.emplace_back(name + ".clustering_defined", s.clustering_defined ? "1" : "0");
    };
    add_segment("known", report.known);
    add_segment("nil", report.nil);
    add_segment("micro", report.micro);
    for (const auto& [label, gold_id] : report.nil_mapping) {
        lines.emplace_back("mapping." + label, gold_id);
    }
    return lines;
}

inline void write_report(const EvalReport& report, const std::string& path) {
    auto out = io_detail::open_out(path);
    for (const auto& [key, value] : report_lines(report)) {
        out << key << '\t' << value << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace nastylink
