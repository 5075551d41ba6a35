#pragma once

// JSON and CSV serialization for the command-line tool. Complex numbers are
// [re, im] arrays and matrices are arrays of rows. Requires nlohmann/json.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "divark/ando.hpp"
#include "divark/innerpair.hpp"
#include "divark/pick.hpp"
#include "divark/variety.hpp"

namespace divark::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "divark/1";

/// File-system failures, kept apart from the numerical error codes.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidInput, what);
}

// Scalars and matrices

inline Json to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

inline double read_real(const Json& j, const std::string& what) {
  if (!j.is_number()) invalid(what + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(what + ": non-finite number");
  return v;
}

/// Accepts [re, im] or a bare real number.
inline Complex read_complex(const Json& j, const std::string& what) {
  if (j.is_number()) return {read_real(j, what), 0.0};
  if (!j.is_array() || j.size() != 2) invalid(what + ": expected [re, im]");
  return {read_real(j[0], what), read_real(j[1], what)};
}

inline std::vector<Complex> read_complex_list(const Json& j, const std::string& what) {
  if (!j.is_array()) invalid(what + ": expected an array");
  std::vector<Complex> out;
  for (const auto& e : j) out.push_back(read_complex(e, what));
  return out;
}

inline Json to_json(const std::vector<Complex>& v) {
  Json out = Json::array();
  for (Complex c : v) out.push_back(to_json(c));
  return out;
}

inline Json to_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

inline Json to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

inline CMatrix read_matrix(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) invalid(what + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) invalid(what + ": rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      invalid(what + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = read_complex(row[static_cast<std::size_t>(c)], what);
    }
  }
  return m;
}

inline const Json& field(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) invalid("missing field '" + key + "'");
  return j.at(key);
}

inline int read_int(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) invalid(what + ": expected an integer");
  return j.get<int>();
}

/// Rejects a document whose "schema" field names another version.
inline void check_version(const Json& j) {
  if (!j.is_object()) invalid("top level must be an object");
  if (j.contains("schema") && j.at("schema") != kSchemaVersion) {
    invalid("unsupported schema version");
  }
}

// Domain objects

inline Json to_json(const Colligation& col) {
  Json out;
  out["m"] = col.m();
  out["n"] = col.n();
  out["U"] = to_json(col.unitary());
  return out;
}

inline Colligation read_colligation(const Json& j, const Tolerances& tol) {
  check_version(j);
  const int m = read_int(field(j, "m"), "m");
  const CMatrix u = read_matrix(field(j, "U"), "U");
  if (j.contains("n") && read_int(j.at("n"), "n") != u.rows() - m) {
    invalid("n does not match the size of U");
  }
  return Colligation(u, m, tol);
}

inline Json to_json(const BiPoly& p) {
  Json out = Json::array();
  for (const auto& [e, c] : p.coeffs()) {
    out.push_back({{"i", e.first}, {"j", e.second}, {"c", to_json(c)}});
  }
  return out;
}

inline BiPoly read_bipoly(const Json& j) {
  if (!j.is_array() || j.empty()) invalid("polynomial: expected a non-empty array of terms");
  BiPoly::Terms terms;
  for (const auto& t : j) {
    const int i = read_int(field(t, "i"), "i");
    const int k = read_int(field(t, "j"), "j");
    terms[{i, k}] += read_complex(field(t, "c"), "c");
  }
  return BiPoly(std::move(terms));
}

/// {"p": [...terms]} or a bare array of terms.
inline BiPoly read_polynomial(const Json& j) {
  if (j.is_array()) return read_bipoly(j);
  check_version(j);
  return read_bipoly(field(j, "p"));
}

inline Json to_json(const RationalInner& phi) {
  Json out;
  out["d"] = {phi.degree().first, phi.degree().second};
  out["p"] = to_json(phi.p());
  return out;
}

inline RationalInner read_rational_inner(const Json& j) {
  check_version(j);
  const auto& d = field(j, "d");
  if (!d.is_array() || d.size() != 2) invalid("d: expected [d1, d2]");
  return RationalInner(read_bipoly(field(j, "p")), read_int(d[0], "d"), read_int(d[1], "d"));
}

inline Json to_json(const BlaschkeProduct& b) {
  Json out;
  out["zeros"] = to_json(b.zeros());
  out["c"] = to_json(b.unimodular_constant());
  return out;
}

inline BlaschkeProduct read_blaschke(const Json& j) {
  check_version(j);
  const auto zeros = read_complex_list(field(j, "zeros"), "zeros");
  const Complex c = j.contains("c") ? read_complex(j.at("c"), "c") : Complex(1.0);
  return BlaschkeProduct(zeros, c);
}

inline Json to_json(const CommutingPair& pair) {
  Json out;
  out["N"] = pair.size();
  out["T1"] = to_json(pair.t1());
  out["T2"] = to_json(pair.t2());
  return out;
}

inline CommutingPair read_pair(const Json& j) {
  check_version(j);
  CommutingPair pair(read_matrix(field(j, "T1"), "T1"), read_matrix(field(j, "T2"), "T2"));
  if (j.contains("N") && read_int(j.at("N"), "N") != pair.size()) invalid("N does not match T1");
  return pair;
}

inline Json to_json(const PickProblem& prob) {
  Json nodes = Json::array();
  for (const auto& n : prob.nodes()) nodes.push_back({to_json(n[0]), to_json(n[1])});
  Json out;
  out["nodes"] = std::move(nodes);
  out["values"] = to_json(prob.values());
  return out;
}

inline PickProblem read_problem(const Json& j) {
  check_version(j);
  const auto& nodes = field(j, "nodes");
  if (!nodes.is_array()) invalid("nodes: expected an array");
  std::vector<Node> parsed;
  for (const auto& n : nodes) {
    if (!n.is_array() || n.size() != 2) invalid("node: expected [z, w]");
    parsed.push_back({read_complex(n[0], "node"), read_complex(n[1], "node")});
  }
  return PickProblem(std::move(parsed), read_complex_list(field(j, "values"), "values"));
}

// Boundary traces

inline constexpr const char* kTraceCsvHeader = "theta,branch,re_w,im_w,abs_w";

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string trace_csv(const BoundaryTrace& t) {
  std::ostringstream os;
  os << kTraceCsvHeader << '\n';
  for (std::size_t k = 0; k < t.grid(); ++k) {
    const auto& row = t.branches[k];
    for (std::size_t b = 0; b < row.size(); ++b) {
      os << format_double(t.thetas[k]) << ',' << b << ',' << format_double(row[b].real()) << ','
         << format_double(row[b].imag()) << ',' << format_double(std::abs(row[b])) << '\n';
    }
  }
  return os.str();
}

inline Json to_json(const BoundaryTrace& t) {
  Json out;
  out["grid"] = t.grid();
  out["branch_count"] = t.branch_count();
  out["continuity_defect"] = t.continuity_defect;
  out["thetas"] = t.thetas;
  Json rows = Json::array();
  for (const auto& row : t.branches) rows.push_back(to_json(row));
  out["branches"] = std::move(rows);
  return out;
}

/// Parses trace_csv output; abs_w is recomputed and not stored.
inline BoundaryTrace read_trace_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kTraceCsvHeader) invalid("trace CSV: bad header");
  BoundaryTrace out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell[5];
    for (auto& c : cell) {
      if (!std::getline(ls, c, ',')) invalid("trace CSV: short row");
    }
    const double theta = std::stod(cell[0]);
    const auto branch = static_cast<std::size_t>(std::stoul(cell[1]));
    if (branch == 0) {
      out.thetas.push_back(theta);
      out.branches.emplace_back();
    } else if (out.thetas.empty() || out.thetas.back() != theta ||
               out.branches.back().size() != branch) {
      invalid("trace CSV: rows out of order");
    }
    out.branches.back().emplace_back(std::stod(cell[2]), std::stod(cell[3]));
  }
  return out;
}

// Files

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    invalid(path + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Writes through a temporary file in the same directory and renames it
/// into place; an empty path or "-" means standard output.
inline void write_atomically(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    std::fflush(stdout);
    return;
  }
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto " + path);
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace divark::io
