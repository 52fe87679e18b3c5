#include "sensopt/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sensopt/errors.hpp"

namespace sensopt {

std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void dump_value(const nlohmann::ordered_json& j, std::string& out, int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
  const std::string inner(2 * static_cast<std::size_t>(depth + 1), ' ');
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + nlohmann::ordered_json(it.key()).dump() + ": ";
        dump_value(it.value(), out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        dump_value(v, out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::ordered_json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& j) {
  std::string out;
  dump_value(j, out, 0);
  out += "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  out << content;
  if (!out) throw Error("failed writing output file: " + path);
}

std::string dump_csv(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace sensopt
