#pragma once

// File formats: header-free row-major CSV for matrices and vectors, JSON for penalty specs
// (1-based indices on disk), JSON-lines for solver traces.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "spg/error.hpp"
#include "spg/fista.hpp"
#include "spg/penalty.hpp"

namespace spg::io {

using json = nlohmann::json;

/// Shortest representation that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// CSV

inline Matrix parse_csv(std::istream& in, const std::string& name = "<stream>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      std::string_view field(line.data() + pos, (comma == std::string::npos ? line.size() : comma) - pos);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      if (!field.empty() && field.front() == '+') field.remove_prefix(1);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
        throw IoError(name + ":" + std::to_string(lineno) + ": cannot parse '" + std::string(field) + "' as a number");
      row.push_back(value);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(name + ":" + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                    " columns, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(name + ": no data");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

inline Matrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_csv(in, path);
}

/// A single column, or a single row, read as a vector.
inline Vector read_csv_vector(const std::string& path) {
  Matrix m = read_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw IoError(path + ": expected a single column, found " + std::to_string(m.cols()) + " columns");
}

template <class Derived>
void write_csv(std::ostream& out, const Eigen::DenseBase<Derived>& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

template <class Derived>
void write_csv(const std::string& path, const Eigen::DenseBase<Derived>& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_csv(out, m);
  if (!out) throw IoError("write failed for " + path);
}

// ---------------------------------------------------------------------------
// penalty JSON

namespace detail {

inline Index one_based(const json& v, const char* what) {
  if (!v.is_number_integer()) throw IoError(std::string("penalty JSON: ") + what + " must be an integer");
  const auto i = v.get<long long>();
  if (i < 1) throw IoError(std::string("penalty JSON: ") + what + " must be >= 1 (indices are 1-based)");
  return static_cast<Index>(i - 1);
}

inline Index count(const json& v, const char* what) {
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw IoError(std::string("penalty JSON: ") + what + " must be a positive integer");
  return static_cast<Index>(v.get<long long>());
}

inline double number(const json& v, const char* what) {
  if (!v.is_number()) throw IoError(std::string("penalty JSON: ") + what + " must be a number");
  return v.get<double>();
}

}  // namespace detail

inline PenaltySpec penalty_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw IoError("penalty JSON: missing \"type\"");
  const auto type = j.at("type").get<std::string>();
  const double gamma = j.contains("gamma") ? detail::number(j.at("gamma"), "gamma") : 1.0;
  if (type == "group") {
    GroupPenaltySpec spec;
    spec.gamma = gamma;
    if (!j.contains("groups") || !j.at("groups").is_array()) throw IoError("penalty JSON: \"groups\" must be an array");
    for (const auto& g : j.at("groups")) {
      if (!g.is_array()) throw IoError("penalty JSON: each group must be an array of indices");
      std::vector<Index> members;
      for (const auto& i : g) members.push_back(detail::one_based(i, "group index"));
      spec.groups.push_back(std::move(members));
    }
    if (j.contains("weights"))
      for (const auto& w : j.at("weights")) spec.weights.push_back(detail::number(w, "weight"));
    return spec;
  }
  if (type == "graph") {
    GraphPenaltySpec spec;
    spec.gamma = gamma;
    if (!j.contains("num_nodes")) throw IoError("penalty JSON: graph needs \"num_nodes\"");
    spec.num_nodes = detail::count(j.at("num_nodes"), "num_nodes");
    if (j.contains("edges"))
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3) throw IoError("penalty JSON: each edge must be [m, l, r]");
        spec.edges.push_back({detail::one_based(e[0], "edge node"), detail::one_based(e[1], "edge node"),
                              detail::number(e[2], "edge correlation")});
      }
    return spec;
  }
  if (type == "linear") {
    LinearPenaltySpec spec;
    spec.gamma = gamma;
    const Index rows = detail::count(j.at("rows"), "rows");
    const Index cols = detail::count(j.at("cols"), "cols");
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& e : j.at("entries")) {
      if (!e.is_array() || e.size() != 3) throw IoError("penalty JSON: each entry must be [row, col, value]");
      const Index r = detail::one_based(e[0], "row"), c = detail::one_based(e[1], "col");
      if (r >= rows || c >= cols) throw IoError("penalty JSON: entry outside the declared shape");
      triplets.emplace_back(r, c, detail::number(e[2], "value"));
    }
    spec.matrix.resize(rows, cols);
    spec.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return spec;
  }
  throw IoError("penalty JSON: unknown type \"" + type + "\"");
}

inline json penalty_to_json(const PenaltySpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        json j;
        if constexpr (std::is_same_v<T, GroupPenaltySpec>) {
          j["type"] = "group";
          j["gamma"] = s.gamma;
          json groups = json::array();
          for (const auto& g : s.groups) {
            json members = json::array();
            for (Index i : g) members.push_back(i + 1);
            groups.push_back(members);
          }
          j["groups"] = groups;
          j["weights"] = s.weights.empty() ? std::vector<double>(s.groups.size(), 1.0) : s.weights;
        } else if constexpr (std::is_same_v<T, GraphPenaltySpec>) {
          j["type"] = "graph";
          j["gamma"] = s.gamma;
          j["num_nodes"] = s.num_nodes;
          json edges = json::array();
          for (const auto& e : s.edges) edges.push_back(json::array({e.m + 1, e.l + 1, e.r}));
          j["edges"] = edges;
        } else {
          j["type"] = "linear";
          j["gamma"] = s.gamma;
          j["rows"] = s.matrix.rows();
          j["cols"] = s.matrix.cols();
          json entries = json::array();
          for (Index r = 0; r < s.matrix.outerSize(); ++r)
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(s.matrix, r); it; ++it)
              entries.push_back(json::array({it.row() + 1, it.col() + 1, it.value()}));
          j["entries"] = entries;
        }
        return j;
      },
      spec);
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline PenaltySpec read_penalty(const std::string& path) {
  try {
    return penalty_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// traces

inline json trace_header_json(const Trace& t) {
  return {{"type", "header"}, {"method", t.method}, {"mu", t.mu},      {"mu_source", t.mu_source},
          {"L", t.lipschitz}, {"lambda", t.lambda}, {"gamma", t.gamma}};
}

inline json trace_terminal_json(const Trace& t) {
  return {{"type", "end"},          {"status", to_string(t.status)}, {"iterations", t.iterations},
          {"objective", t.objective}, {"best_objective", t.best_objective}, {"nnz", t.nnz},
          {"elapsed_s", t.elapsed_s}};
}

/// One JSON object per line: header, one record per iteration, terminal record.
inline void write_trace_jsonl(std::ostream& out, const Trace& t) {
  out << trace_header_json(t).dump() << '\n';
  for (const auto& r : t.records) {
    out << "{\"t\":" << r.t << ",\"f\":" << format_double(r.f) << ",\"f_smooth\":" << format_double(r.f_smooth)
        << ",\"elapsed_s\":" << format_double(r.elapsed_s) << "}\n";
  }
  out << trace_terminal_json(t).dump() << '\n';
}

inline void write_trace_jsonl(const std::string& path, const Trace& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_trace_jsonl(out, t);
}

}  // namespace spg::io
