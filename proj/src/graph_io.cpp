#include "cchm/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cchm {

namespace {

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    for (std::string& line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(std::move(line));
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

double parse_double(const std::string& field, const std::string& where) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        // from_chars rejects "nan"/"inf" spellings on some libraries; strtod does not.
        char* end = nullptr;
        value = std::strtod(field.c_str(), &end);
        if (field.empty() || end != field.c_str() + field.size()) {
            throw FormatError(where + ": not a number: '" + field + "'");
        }
    }
    return value;
}

}  // namespace

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(text.substr(start));
            return out;
        }
        out.emplace_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view mark_name(Mark m) {
    switch (m) {
        case Mark::Tail: return "tail";
        case Mark::Arrow: return "arrow";
        case Mark::Circle: return "circle";
        case Mark::None: break;
    }
    throw FormatError("mark_name: no edge");
}

Mark parse_mark(std::string_view text) {
    if (text == "tail") return Mark::Tail;
    if (text == "arrow") return Mark::Arrow;
    if (text == "circle") return Mark::Circle;
    throw FormatError("unknown mark '" + std::string(text) + "'");
}

std::string format_graph(const MixedGraph& g) {
    std::string out = "nodes:";
    for (int i = 0; i < g.size(); ++i) {
        if (i > 0) out += ',';
        out += g.name(i);
    }
    out += '\n';
    std::vector<std::string> lines;
    for (auto [i, j] : g.edges()) {
        std::string line = g.name(i);
        line += ',';
        line += g.name(j);
        line += ',';
        line += mark_name(g.mark(j, i));
        line += ',';
        line += mark_name(g.mark(i, j));
        lines.push_back(std::move(line));
    }
    std::sort(lines.begin(), lines.end());
    for (const std::string& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

MixedGraph parse_graph(std::string_view text, GraphKind kind) {
    const std::vector<std::string> lines = lines_of(text);
    if (lines.empty() || lines[0].rfind("nodes:", 0) != 0) throw FormatError("graph: missing 'nodes:' header");
    const std::string header = lines[0].substr(6);
    std::vector<std::string> names;
    if (!header.empty()) names = split(header, ',');
    MixedGraph g;
    try {
        g = MixedGraph(names, kind);
    } catch (const GraphError& e) {
        throw FormatError(std::string("graph: ") + e.what());
    }
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const std::string where = "graph line " + std::to_string(k + 1);
        if (lines[k].empty()) continue;
        const std::vector<std::string> f = split(lines[k], ',');
        if (f.size() != 4) throw FormatError(where + ": expected 4 fields");
        NodeId from = 0;
        NodeId to = 0;
        try {
            from = g.index_of(f[0]);
            to = g.index_of(f[1]);
        } catch (const GraphError& e) {
            throw FormatError(where + ": " + e.what());
        }
        if (from == to) throw FormatError(where + ": self loop");
        if (g.adjacent(from, to)) throw FormatError(where + ": duplicate edge");
        g.set_edge(from, to, parse_mark(f[2]), parse_mark(f[3]));
    }
    return g;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_graph(const std::filesystem::path& path, const MixedGraph& g) { write_text(path, format_graph(g)); }

MixedGraph read_graph(const std::filesystem::path& path, GraphKind kind) {
    return parse_graph(read_text(path), kind);
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_dataset(const Dataset& data) {
    std::string out;
    for (int j = 0; j < data.variables(); ++j) {
        if (j > 0) out += ',';
        out += data.names[j];
    }
    out += '\n';
    for (long i = 0; i < data.samples(); ++i) {
        for (int j = 0; j < data.variables(); ++j) {
            if (j > 0) out += ',';
            out += format_double(data.values(i, j));
        }
        out += '\n';
    }
    return out;
}

Dataset parse_dataset(std::string_view text) {
    const std::vector<std::string> lines = lines_of(text);
    if (lines.empty()) throw FormatError("dataset: empty file");
    Dataset data;
    data.names = split(lines[0], ',');
    std::set<std::string> seen;
    for (const std::string& name : data.names) {
        if (name.empty()) throw FormatError("dataset: empty column name");
        if (!seen.insert(name).second) throw FormatError("dataset: duplicate column '" + name + "'");
    }
    const auto v = static_cast<Eigen::Index>(data.names.size());
    data.values.resize(static_cast<Eigen::Index>(lines.size()) - 1, v);
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const std::string where = "dataset line " + std::to_string(k + 1);
        const std::vector<std::string> f = split(lines[k], ',');
        if (static_cast<Eigen::Index>(f.size()) != v) throw FormatError(where + ": wrong number of fields");
        for (Eigen::Index j = 0; j < v; ++j) {
            const double x = parse_double(f[j], where);
            if (!std::isfinite(x)) throw FormatError(where + ": non-finite value");
            data.values(static_cast<Eigen::Index>(k) - 1, j) = x;
        }
    }
    return data;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
    write_text(path, format_dataset(data));
}

Dataset read_dataset(const std::filesystem::path& path) { return parse_dataset(read_text(path)); }

std::string format_metadata(const Metadata& meta) {
    std::string out;
    for (const auto& [key, value] : meta) {
        if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos ||
            value.find('\n') != std::string::npos) {
            throw FormatError("metadata: invalid entry '" + key + "'");
        }
        out += key + "=" + value + "\n";
    }
    return out;
}

Metadata parse_metadata(std::string_view text) {
    Metadata meta;
    for (const std::string& line : lines_of(text)) {
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("metadata: missing '=' in '" + line + "'");
        meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return meta;
}

void write_metadata(const std::filesystem::path& path, const Metadata& meta) {
    write_text(path, format_metadata(meta));
}

Metadata read_metadata(const std::filesystem::path& path) { return parse_metadata(read_text(path)); }

SemParams parse_coefficients(std::string_view text, const MixedGraph& dag) {
    const int v = dag.size();
    SemParams params{Eigen::MatrixXd::Zero(v, v), Eigen::VectorXd::Ones(v), Eigen::VectorXd::Zero(v)};
    std::vector<std::string> lines = lines_of(text);
    std::size_t first = 0;
    if (!lines.empty() && lines[0] == "from,to,beta") first = 1;
    Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(v, v);
    for (std::size_t k = first; k < lines.size(); ++k) {
        const std::string where = "coefficients line " + std::to_string(k + 1);
        if (lines[k].empty()) continue;
        const std::vector<std::string> f = split(lines[k], ',');
        if (f.size() != 3) throw FormatError(where + ": expected from,to,beta");
        NodeId from = 0;
        NodeId to = 0;
        try {
            from = dag.index_of(f[0]);
            to = dag.index_of(f[1]);
        } catch (const GraphError& e) {
            throw FormatError(where + ": " + e.what());
        }
        if (!dag.is_directed(from, to)) throw FormatError(where + ": " + f[0] + "->" + f[1] + " is not a DAG edge");
        if (seen(to, from)++) throw FormatError(where + ": duplicate coefficient");
        params.coefficients(to, from) = parse_double(f[2], where);
    }
    for (auto [i, j] : dag.edges()) {
        const NodeId from = dag.is_directed(i, j) ? i : j;
        const NodeId to = from == i ? j : i;
        if (!seen(to, from)) throw FormatError("coefficients: missing " + dag.name(from) + "," + dag.name(to));
    }
    return params;
}

std::string format_coefficients(const MixedGraph& dag, const SemParams& params) {
    std::string out = "from,to,beta\n";
    for (auto [i, j] : dag.edges()) {
        const NodeId from = dag.is_directed(i, j) ? i : j;
        const NodeId to = from == i ? j : i;
        out += dag.name(from) + "," + dag.name(to) + "," + format_double(params.coefficients(to, from)) + "\n";
    }
    return out;
}

SemParams read_coefficients(const std::filesystem::path& path, const MixedGraph& dag) {
    return parse_coefficients(read_text(path), dag);
}

}  // namespace cchm
