// Problem-instance file format (JSON) and the seeded random generator.
//
// Schema:
//   {
//     "M": [[...], ...],          row-major matrix, equal-length rows
//     "p": [...],                 length = number of rows of M
//     "s": <int>,                 sparsity bound, 1 <= s <= n
//     "planted_solution": [...],  optional known solution with M c = p
//     "seed": <int>               optional generator seed, for provenance
//   }
#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sparsemap/core.hpp"

namespace sparsemap {

struct Instance {
  Matrix m;
  Vector p;
  int s = 1;
  std::optional<Vector> planted_solution;
  std::optional<std::int64_t> seed;

  int n() const { return static_cast<int>(m.cols()); }
  int rows() const { return static_cast<int>(m.rows()); }
};

namespace detail {

inline Vector vector_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw std::runtime_error("field \"" + field + "\": expected an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw std::runtime_error("field \"" + field + "\": entry " + std::to_string(i + 1) +
                               " is not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

}  // namespace detail

inline Instance parse_instance(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("instance file: expected a JSON object");
  for (const char* field : {"M", "p", "s"})
    if (!j.contains(field))
      throw std::runtime_error("instance file: missing field \"" + std::string(field) + "\"");

  const nlohmann::json& jm = j.at("M");
  if (!jm.is_array() || jm.empty())
    throw std::runtime_error("field \"M\": expected a non-empty array of rows");
  const std::size_t rows = jm.size();
  const std::size_t cols = jm.at(0).is_array() ? jm.at(0).size() : 0;
  if (cols == 0) throw std::runtime_error("field \"M\": rows must be non-empty arrays");

  Instance inst;
  inst.m = Matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!jm[r].is_array() || jm[r].size() != cols)
      throw std::runtime_error("field \"M\": row " + std::to_string(r + 1) +
                               " has inconsistent length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!jm[r][c].is_number())
        throw std::runtime_error("field \"M\": row " + std::to_string(r + 1) + ", column " +
                                 std::to_string(c + 1) + " is not a number");
      inst.m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = jm[r][c].get<double>();
    }
  }

  inst.p = detail::vector_from_json(j.at("p"), "p");
  if (inst.p.size() != inst.m.rows())
    throw std::runtime_error("field \"p\": length must equal the row count of M");

  if (!j.at("s").is_number_integer())
    throw std::runtime_error("field \"s\": expected an integer");
  inst.s = j.at("s").get<int>();
  if (inst.s < 1 || inst.s > inst.n())
    throw std::runtime_error("field \"s\": need 1 <= s <= n");

  if (j.contains("planted_solution")) {
    Vector c = detail::vector_from_json(j.at("planted_solution"), "planted_solution");
    if (c.size() != inst.m.cols())
      throw std::runtime_error("field \"planted_solution\": length must equal the column count of M");
    inst.planted_solution = std::move(c);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer())
      throw std::runtime_error("field \"seed\": expected an integer");
    inst.seed = j.at("seed").get<std::int64_t>();
  }

  require_finite(inst.m, "instance M");
  require_finite(inst.p, "instance p");
  return inst;
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < inst.m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < inst.m.cols(); ++c) row.push_back(inst.m(r, c));
    rows.push_back(std::move(row));
  }
  j["M"] = std::move(rows);
  j["p"] = detail::vector_to_json(inst.p);
  j["s"] = inst.s;
  if (inst.planted_solution) j["planted_solution"] = detail::vector_to_json(*inst.planted_solution);
  if (inst.seed) j["seed"] = *inst.seed;
  return j;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("instance file " + path + ": " + e.what());
  }
  try {
    return parse_instance(j);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("instance file " + path + ": " + e.what());
  }
}

/// Seeded random instance: M has independent standard normal entries, the
/// planted solution has `solution_sparsity` nonzero entries drawn uniformly
/// from [0.5, 1.5] with random signs (bounded away from zero so the
/// certificate radius delta_bar is at least 1/6), and p = M c.
inline Instance generate_instance(int n, int m_rows, int s, int solution_sparsity,
                                  std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_instance: need n >= 2");
  if (m_rows < 1 || m_rows >= n)
    throw std::invalid_argument("generate_instance: need 1 <= m < n");
  if (solution_sparsity < 1 || solution_sparsity > s || s > n)
    throw std::invalid_argument("generate_instance: need 1 <= solution_sparsity <= s <= n");

  Rng rng(seed);
  Instance inst;
  inst.s = s;
  inst.seed = static_cast<std::int64_t>(seed);

  std::normal_distribution<double> normal(0.0, 1.0);
  inst.m = Matrix(m_rows, n);
  for (int r = 0; r < m_rows; ++r)
    for (int c = 0; c < n; ++c) inst.m(r, c) = normal(rng);

  // Partial Fisher-Yates for the solution support.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < solution_sparsity; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }

  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  std::uniform_int_distribution<int> coin(0, 1);
  Vector c = Vector::Zero(n);
  for (int i = 0; i < solution_sparsity; ++i)
    c[idx[i]] = magnitude(rng) * (coin(rng) == 0 ? 1.0 : -1.0);

  inst.p = inst.m * c;
  inst.planted_solution = std::move(c);
  return inst;
}

}  // namespace sparsemap
