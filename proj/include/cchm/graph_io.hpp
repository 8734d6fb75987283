#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cchm/graph.hpp"
#include "cchm/simulate.hpp"

namespace cchm {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string_view mark_name(Mark m);
Mark parse_mark(std::string_view text);

/// `nodes:` header, then one `from,to,mark_at_from,mark_at_to` line per edge,
/// from < to, lines sorted. LF endings, trailing newline.
std::string format_graph(const MixedGraph& g);
MixedGraph parse_graph(std::string_view text, GraphKind kind = GraphKind::Unclassified);

void write_graph(const std::filesystem::path& path, const MixedGraph& g);
MixedGraph read_graph(const std::filesystem::path& path, GraphKind kind = GraphKind::Unclassified);

/// Header of identifiers, then rows printed with 17 significant digits.
std::string format_dataset(const Dataset& data);
Dataset parse_dataset(std::string_view text);

void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

/// key=value sidecar, keys written in sorted order.
using Metadata = std::map<std::string, std::string>;
std::string format_metadata(const Metadata& meta);
Metadata parse_metadata(std::string_view text);
void write_metadata(const std::filesystem::path& path, const Metadata& meta);
Metadata read_metadata(const std::filesystem::path& path);

/// `from,to,beta` lines (optional `from,to,beta` header); every DAG edge needs
/// exactly one row. Error variances are 1 and means 0.
SemParams parse_coefficients(std::string_view text, const MixedGraph& dag);
std::string format_coefficients(const MixedGraph& dag, const SemParams& params);
SemParams read_coefficients(const std::filesystem::path& path, const MixedGraph& dag);

/// %.17g, so doubles round-trip exactly.
std::string format_double(double x);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);

}  // namespace cchm
