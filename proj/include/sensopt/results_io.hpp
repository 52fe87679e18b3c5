#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace sensopt {

// Doubles rendered with 17 significant digits so every value round-trips and
// reruns produce byte-identical files.
std::string format_double(double v);

// Deterministic serialization of an ordered JSON document: insertion order,
// two-space indent, %.17g floats, trailing newline.
std::string dump_json(const nlohmann::ordered_json& j);

void write_text_file(const std::string& path, const std::string& content);

// Small CSV helper; cells are written verbatim, numeric cells should come
// through format_double.
std::string dump_csv(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

}  // namespace sensopt
