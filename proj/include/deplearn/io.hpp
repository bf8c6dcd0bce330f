#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deplearn/errors.hpp"
#include "deplearn/label.hpp"
#include "deplearn/model.hpp"

namespace deplearn {

using json = nlohmann::json;

namespace io_detail {

inline int parse_int(std::string_view field, const std::string& path, int line_no) {
  // trim ASCII whitespace
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t' ||
                            field.front() == '\r'))
    field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                            field.back() == '\r'))
    field.remove_suffix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw IoError(path + ":" + std::to_string(line_no) + ": expected integer, got '" +
                  std::string(field) + "'");
  return value;
}

}  // namespace io_detail

// Dense format: one row per data point, comma-separated integers in
// {-1,0,1}, no header.
inline void write_matrix_dense(const LabelMatrix& m, std::ostream& out) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m.at(i, j).value();
    }
    out << '\n';
  }
}

// Sparse format: "# m n" header, then "i<TAB>j<TAB>v" lines (0-based,
// v in {-1,+1}); unlisted entries are 0.
inline void write_matrix_sparse(const LabelMatrix& m, std::ostream& out) {
  out << "# " << m.rows() << ' ' << m.cols() << '\n';
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (!m.at(i, j).abstains())
        out << i << '\t' << j << '\t' << m.at(i, j).value() << '\n';
}

inline LabelMatrix read_matrix_dense(std::istream& in, const std::string& path) {
  std::vector<Label> cells;
  int cols = -1, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    int row_cols = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      const int v = io_detail::parse_int(field, path, line_no);
      if (v < -1 || v > 1)
        throw IoError(path + ":" + std::to_string(line_no) +
                      ": label must be -1, 0, or 1, got " + std::to_string(v));
      cells.push_back(Label(v));
      ++row_cols;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols == -1) cols = row_cols;
    else if (row_cols != cols)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(cols) + " columns, got " + std::to_string(row_cols));
    ++rows;
  }
  if (rows == 0) throw IoError(path + ": empty matrix file");
  return LabelMatrix(rows, cols, std::move(cells));
}

inline LabelMatrix read_matrix_sparse(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw IoError(path + ":1: missing '# m n' header");
  if (line.size() < 2 || line[0] != '#')
    throw IoError(path + ":1: sparse header must start with '#'");
  std::istringstream hdr(line.substr(1));
  int m = 0, n = 0;
  if (!(hdr >> m >> n) || m < 1 || n < 1)
    throw IoError(path + ":1: malformed sparse header '" + line + "'");
  std::vector<Label> cells(static_cast<std::size_t>(m) * n);  // all abstain
  std::vector<bool> seen(cells.size(), false);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::string_view rest(line);
    const auto t1 = rest.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : rest.find('\t', t1 + 1);
    if (t1 == std::string_view::npos || t2 == std::string_view::npos)
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected 'i<TAB>j<TAB>v'");
    const int i = io_detail::parse_int(rest.substr(0, t1), path, line_no);
    const int j = io_detail::parse_int(rest.substr(t1 + 1, t2 - t1 - 1), path, line_no);
    const int v = io_detail::parse_int(rest.substr(t2 + 1), path, line_no);
    if (i < 0 || i >= m || j < 0 || j >= n)
      throw IoError(path + ":" + std::to_string(line_no) + ": index (" +
                    std::to_string(i) + "," + std::to_string(j) + ") out of range");
    if (v != -1 && v != 1)
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": sparse value must be -1 or +1, got " + std::to_string(v));
    const std::size_t cell = static_cast<std::size_t>(i) * n + j;
    if (seen[cell])
      throw IoError(path + ":" + std::to_string(line_no) + ": duplicate entry (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
    seen[cell] = true;
    cells[cell] = Label(v);
  }
  return LabelMatrix(m, n, std::move(cells));
}

// Auto-detects the format: a leading '#' marks the sparse header.
inline LabelMatrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file '" + path + "'");
  if (in.peek() == '#') return read_matrix_sparse(in, path);
  return read_matrix_dense(in, path);
}

inline void write_matrix(const LabelMatrix& m, const std::string& path,
                         const std::string& format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write matrix file '" + path + "'");
  if (format == "dense") write_matrix_dense(m, out);
  else if (format == "sparse") write_matrix_sparse(m, out);
  else throw ValidationError("unknown matrix format '" + format + "'");
}

// Model / structure JSON:
// {"n": int, "deps": [{"kind": "acc"|"cor"|"and", "members": [..], "weight": w}]}
inline json model_to_json(const GenerativeModel& model) {
  json deps = json::array();
  for (const auto& [dep, w] : model.params()) {
    json members = json::array();
    for (int i = 0; i < dep.arity(); ++i) members.push_back(dep.member(i));
    deps.push_back({{"kind", kind_name(dep.kind())},
                    {"members", members},
                    {"weight", w}});
  }
  return json{{"n", model.n()}, {"deps", deps}};
}

inline Dependency dependency_from_json(const json& jd) {
  const std::string kind = jd.at("kind").get<std::string>();
  const auto& members = jd.at("members");
  if (kind == "acc") {
    if (members.size() != 1)
      throw ValidationError("acc dependency needs exactly 1 member");
    return Dependency::accuracy(members[0].get<int>());
  }
  if (members.size() != 2)
    throw ValidationError("'" + kind + "' dependency needs exactly 2 members");
  const int a = members[0].get<int>(), b = members[1].get<int>();
  if (kind == "cor") return Dependency::correlation(a, b);
  if (kind == "and") return Dependency::conjunction(a, b);
  throw ValidationError("unknown dependency kind '" + kind + "'");
}

inline GenerativeModel model_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  ParameterSet params;
  for (const auto& jd : j.at("deps")) {
    const Dependency dep = dependency_from_json(jd);
    if (params.contains(dep))
      throw ValidationError("duplicate dependency " + dep.to_string());
    params.set(dep, jd.at("weight").get<double>());
  }
  return GenerativeModel(n, std::move(params));
}

inline GenerativeModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
    return model_from_json(j);
  } catch (const json::exception& e) {
    throw IoError("malformed model JSON '" + path + "': " + e.what());
  }
}

inline void write_model(const GenerativeModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out << model_to_json(model).dump(2) << '\n';
}

}  // namespace deplearn
