#include "vmass/io_json.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "vmass/version.hpp"

namespace vmass {

namespace {

void dump_string(const std::string& s, std::string& out) {
    out += '"';
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

void dump_value(const json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string pad_close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) { out += "{}"; return; }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                out += pad;
                dump_string(it.key(), out);
                out += ": ";
                dump_value(it.value(), out, indent, depth + 1);
                if (i + 1 < j.size()) out += ',';
                out += '\n';
            }
            out += pad_close + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) { out += "[]"; return; }
            bool flat = true;
            for (const auto& v : j)
                if (v.is_structured()) flat = false;
            if (flat) {
                out += '[';
                for (std::size_t i = 0; i < j.size(); ++i) {
                    dump_value(j[i], out, indent, depth);
                    if (i + 1 < j.size()) out += ", ";
                }
                out += ']';
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad;
                dump_value(j[i], out, indent, depth + 1);
                if (i + 1 < j.size()) out += ',';
                out += '\n';
            }
            out += pad_close + "]";
            return;
        }
        case json::value_t::string:
            dump_string(j.get<std::string>(), out);
            return;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case json::value_t::number_integer: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%" PRId64, j.get<std::int64_t>());
            out += buf;
            return;
        }
        case json::value_t::number_unsigned: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%" PRIu64, j.get<std::uint64_t>());
            out += buf;
            return;
        }
        case json::value_t::number_float: {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
            out += buf;
            return;
        }
        default:
            out += "null";
            return;
    }
}

double require_number(const json& j, const std::string& what) {
    if (!j.is_number()) throw SchemaError("expected a number for " + what);
    return j.get<double>();
}

int require_int(const json& j, const std::string& what) {
    if (!j.is_number_integer()) throw SchemaError("expected an integer for " + what);
    return j.get<int>();
}

Vec3 parse_vec(const json& j, int dim, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw SchemaError(what + " must be an array of length " + std::to_string(dim));
    Vec3 v{};
    for (int c = 0; c < dim; ++c) v[static_cast<std::size_t>(c)] = require_number(j[static_cast<std::size_t>(c)], what);
    return v;
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    dump_value(j, out, indent, 0);
    out += '\n';
    return out;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // recover line/column from the byte offset for a usable message
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
            if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
        }
        throw SchemaError("JSON parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }
}

MichellProblem parse_michell_problem(const json& j) {
    if (!j.is_object()) throw SchemaError("problem must be a JSON object");
    if (!j.contains("dim")) throw SchemaError("missing \"dim\"");
    const int dim = require_int(j["dim"], "dim");
    if (dim != 2 && dim != 3) throw SchemaError("\"dim\" must be 2 or 3");

    MichellProblem prob;
    if (j.contains("nodes")) {
        if (j.contains("grid")) throw SchemaError("give either \"nodes\" or \"grid\", not both");
        if (!j["nodes"].is_array() || j["nodes"].empty())
            throw SchemaError("\"nodes\" must be a non-empty array");
        std::vector<Vec3> pos(j["nodes"].size());
        std::vector<bool> seen(j["nodes"].size(), false);
        for (const auto& n : j["nodes"]) {
            if (!n.is_object() || !n.contains("id") || !n.contains("pos"))
                throw SchemaError("node entries need \"id\" and \"pos\"");
            int id = require_int(n["id"], "node id");
            if (id < 0 || id >= static_cast<int>(pos.size()) || seen[static_cast<std::size_t>(id)])
                throw SchemaError("node ids must be dense 0..N-1 and unique");
            seen[static_cast<std::size_t>(id)] = true;
            pos[static_cast<std::size_t>(id)] = parse_vec(n["pos"], dim, "node pos");
        }
        if (!j.contains("bars") || !j["bars"].is_array() || j["bars"].empty())
            throw SchemaError("explicit nodes require a non-empty \"bars\" array");
        std::vector<std::array<int, 2>> bars;
        for (const auto& b : j["bars"]) {
            if (!b.is_array() || b.size() != 2) throw SchemaError("bar entries must be [a, b]");
            bars.push_back({require_int(b[0], "bar endpoint"), require_int(b[1], "bar endpoint")});
        }
        try {
            prob.gs = make_ground_structure(dim, pos, bars);
        } catch (const std::invalid_argument& e) {
            throw SchemaError(e.what());
        }
    } else if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (!g.is_array() || static_cast<int>(g.size()) != dim)
            throw SchemaError("\"grid\" must list one extent per dimension");
        if (!j.contains("spacing") || !j.contains("radius"))
            throw SchemaError("grid problems need \"spacing\" and \"radius\"");
        int nx = require_int(g[0], "grid extent");
        int ny = require_int(g[1], "grid extent");
        int nz = dim == 3 ? require_int(g[2], "grid extent") : 0;
        try {
            prob.gs = build_grid_ground_structure(nx, ny, nz, require_number(j["spacing"], "spacing"),
                                                  require_number(j["radius"], "radius"));
        } catch (const std::invalid_argument& e) {
            throw SchemaError(e.what());
        }
    } else {
        throw SchemaError("problem needs \"nodes\"+\"bars\" or \"grid\" generator parameters");
    }

    if (!j.contains("loads") || !j["loads"].is_array() || j["loads"].empty())
        throw SchemaError("missing non-empty \"loads\" array");
    for (const auto& l : j["loads"]) {
        if (!l.is_object() || !l.contains("node") || !l.contains("f"))
            throw SchemaError("load entries need \"node\" and \"f\"");
        int id = require_int(l["node"], "load node");
        if (id < 0 || id >= static_cast<int>(prob.gs.nodes.size()))
            throw SchemaError("load references unknown node " + std::to_string(id));
        prob.lc.loads[id] = parse_vec(l["f"], dim, "load force");
    }
    return prob;
}

json michell_result_payload(const GroundStructure& gs, const TrussSolution& sol,
                            const LimitShape& shape) {
    json bars = json::array();
    for (std::size_t i = 0; i < gs.bars.size(); ++i) {
        bars.push_back({{"a", gs.bars[i].a},
                        {"b", gs.bars[i].b},
                        {"q", sol.q[i]},
                        {"w", shape.weights[i]}});
    }
    return {{"kappa", shape.kappa},
            {"compliance", shape.compliance},
            {"bars", bars},
            {"dual_gap", sol.dual_gap},
            {"entropy_residual", verify_entropy_condition(shape)}};
}

std::string michell_result_csv(const GroundStructure& gs, const TrussSolution& sol,
                               const LimitShape& shape) {
    std::string out = "a,b,length,q,w\n";
    char buf[160];
    for (std::size_t i = 0; i < gs.bars.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", gs.bars[i].a, gs.bars[i].b,
                      gs.bars[i].length, sol.q[i], shape.weights[i]);
        out += buf;
    }
    return out;
}

SymMat parse_sym_mat(const json& j) {
    if (!j.is_array() || (j.size() != 2 && j.size() != 3))
        throw SchemaError("matrix must be a 2x2 or 3x3 row-major array");
    const int dim = static_cast<int>(j.size());
    std::array<double, 9> rows{};
    for (int r = 0; r < dim; ++r) {
        if (!j[static_cast<std::size_t>(r)].is_array() ||
            static_cast<int>(j[static_cast<std::size_t>(r)].size()) != dim)
            throw SchemaError("matrix rows must all have length " + std::to_string(dim));
        for (int c = 0; c < dim; ++c)
            rows[static_cast<std::size_t>(r * dim + c)] =
                require_number(j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)], "matrix entry");
    }
    try {
        return SymMat::from_rows(dim, rows);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(e.what());
    }
}

json sym_mat_to_json(const SymMat& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int c = 0; c < m.dim(); ++c) row.push_back(m(i, c));
        rows.push_back(row);
    }
    return rows;
}

namespace {

Vec2 parse_vec2(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) throw SchemaError(what + " must be [x, y]");
    return {require_number(j[0], what), require_number(j[1], what)};
}

SymMat parse_weight(const json& j) {
    SymMat w = parse_sym_mat(j);
    if (w.dim() != 2) throw SchemaError("measure weights must be 2x2");
    return w;
}

}  // namespace

DiscreteMeasure parse_matrix_measure(const json& j) {
    if (!j.is_object()) throw SchemaError("measure must be a JSON object");
    DiscreteMeasure m;
    if (j.contains("atoms")) {
        for (const auto& a : j["atoms"]) {
            if (!a.contains("pos") || !a.contains("w"))
                throw SchemaError("atom entries need \"pos\" and \"w\"");
            m.atoms.push_back({parse_vec2(a["pos"], "atom pos"), parse_weight(a["w"])});
        }
    }
    if (j.contains("boxes")) {
        for (const auto& b : j["boxes"]) {
            if (!b.contains("lo") || !b.contains("hi") || !b.contains("density"))
                throw SchemaError("box entries need \"lo\", \"hi\" and \"density\"");
            m.boxes.push_back({parse_vec2(b["lo"], "box lo"), parse_vec2(b["hi"], "box hi"),
                               parse_weight(b["density"])});
        }
    }
    if (j.contains("segments")) {
        for (const auto& s : j["segments"]) {
            if (!s.contains("p0") || !s.contains("p1") || !s.contains("density"))
                throw SchemaError("segment entries need \"p0\", \"p1\" and \"density\"");
            m.segments.push_back({parse_vec2(s["p0"], "segment p0"), parse_vec2(s["p1"], "segment p1"),
                                  parse_weight(s["density"])});
        }
    }
    if (m.atoms.empty() && m.boxes.empty() && m.segments.empty())
        throw SchemaError("measure has no atoms, boxes or segments");
    return m;
}

ScalarMeasure parse_scalar_measure(const json& j) {
    if (!j.is_object()) throw SchemaError("measure must be a JSON object");
    ScalarMeasure m;
    if (j.contains("atoms")) {
        for (const auto& a : j["atoms"]) {
            if (!a.contains("pos") || !a.contains("w"))
                throw SchemaError("atom entries need \"pos\" and \"w\"");
            m.atoms.push_back({parse_vec2(a["pos"], "atom pos"), require_number(a["w"], "atom w")});
        }
    }
    if (j.contains("boxes")) {
        for (const auto& b : j["boxes"]) {
            if (!b.contains("lo") || !b.contains("hi") || !b.contains("density"))
                throw SchemaError("box entries need \"lo\", \"hi\" and \"density\"");
            m.boxes.push_back({parse_vec2(b["lo"], "box lo"), parse_vec2(b["hi"], "box hi"),
                               require_number(b["density"], "box density")});
        }
    }
    if (m.atoms.empty() && m.boxes.empty()) throw SchemaError("measure has no atoms or boxes");
    return m;
}

json make_envelope(const json& config_echo, const json& payload, const json& checks) {
    json stamp = nullptr;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        long long secs = std::strtoll(epoch, &end, 10);
        if (end != epoch) {
            std::time_t t = static_cast<std::time_t>(secs);
            std::tm tm{};
            gmtime_r(&t, &tm);
            char buf[32];
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
            stamp = std::string(buf);
        }
    }
    return {{"tool_version", kVersion},
            {"config", config_echo},
            {"timestamp", stamp},
            {"payload", payload},
            {"checks", checks}};
}

}  // namespace vmass
