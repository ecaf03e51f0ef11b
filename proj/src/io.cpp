#include "plqks/io.hpp"

#include "plqks/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace plqks::io {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw InvalidArgument("config: field '" + field + "' must be a number");
  return j.get<double>();
}

VectorXd parse_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw InvalidArgument("config: field '" + field + "' must be an array of numbers");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

// Rows of numbers. An empty array gives a 0 x 0 matrix.
MatrixXd parse_rows(const json& j, const std::string& field) {
  if (!j.is_array()) throw InvalidArgument("config: field '" + field + "' must be an array of rows");
  if (j.empty()) return MatrixXd(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  MatrixXd M(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw InvalidArgument("config: field '" + field + "' row " + std::to_string(r) +
                            " must be an array of " + std::to_string(cols) + " numbers");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      M(static_cast<Index>(r), static_cast<Index>(c)) =
          number(j[r][c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return M;
}

MatrixXd parse_matrix(const json& j, Index rows, Index cols, const std::string& field) {
  if (j.is_number()) {
    if (rows != cols) {
      throw InvalidArgument("config: field '" + field + "' is not square, a scalar is not allowed");
    }
    return j.get<double>() * MatrixXd::Identity(rows, cols);
  }
  MatrixXd M = parse_rows(j, field);
  if (M.rows() != rows || M.cols() != cols) {
    throw InvalidArgument("config: field '" + field + "' must be " + std::to_string(rows) + " x " +
                          std::to_string(cols) + ", got " + std::to_string(M.rows()) + " x " +
                          std::to_string(M.cols()));
  }
  return M;
}

bool is_matrix_list(const json& j) {
  if (!j.is_array() || j.empty()) return false;
  if (j[0].is_number()) return true;  // list of scalars
  return j[0].is_array() && !j[0].empty() && j[0][0].is_array();
}

std::vector<MatrixXd> parse_matrix_seq(const json& j, Index rows, Index cols, const std::string& field) {
  std::vector<MatrixXd> out;
  if (is_matrix_list(j)) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(parse_matrix(j[i], rows, cols, field + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(parse_matrix(j, rows, cols, field));
  }
  return out;
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("config: missing field '") + key + "'");
  return j.at(key);
}

Index positive_int(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw InvalidArgument(std::string("config: field '") + key + "' must be a positive integer");
  }
  return static_cast<Index>(v.get<long long>());
}

std::vector<MatrixXd> broadcast(const std::vector<MatrixXd>& seq, Index N, const char* field) {
  if (seq.size() == 1) return std::vector<MatrixXd>(static_cast<std::size_t>(N), seq.front());
  if (static_cast<Index>(seq.size()) != N) {
    throw InvalidArgument(std::string("config: field '") + field + "' lists " + std::to_string(seq.size()) +
                          " matrices but N = " + std::to_string(N));
  }
  return seq;
}

}  // namespace

ModelConfig parse_config(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be a JSON object");
  ModelConfig c;
  c.n = positive_int(j, "n");
  c.m = positive_int(j, "m");
  if (j.contains("N")) c.N = positive_int(j, "N");
  c.G = j.contains("G") ? parse_matrix_seq(j.at("G"), c.n, c.n, "G")
                        : std::vector<MatrixXd>{MatrixXd::Identity(c.n, c.n)};
  c.H = parse_matrix_seq(require(j, "H"), c.m, c.n, "H");
  c.Q = parse_matrix_seq(require(j, "Q"), c.n, c.n, "Q");
  c.R = parse_matrix_seq(require(j, "R"), c.m, c.m, "R");
  c.x0 = j.contains("x0") ? parse_vector(j.at("x0"), "x0") : VectorXd::Zero(c.n);
  if (c.x0.size() != c.n) throw InvalidArgument("config: field 'x0' must have length n");
  c.process_penalty = j.contains("process_penalty") ? j.at("process_penalty") : json{{"kind", "l2"}};
  c.measurement_penalty =
      j.contains("measurement_penalty") ? j.at("measurement_penalty") : json{{"kind", "l2"}};
  return c;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config: " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

StateSpaceModel ModelConfig::model(Index N) const {
  if (this->N && *this->N != N) {
    throw InvalidArgument("config: N = " + std::to_string(*this->N) + " but the data has " +
                          std::to_string(N) + " steps");
  }
  StateSpaceModel mdl;
  // A single G is the transition for k >= 2; a list of N - 1 entries omits G_1.
  if (G.size() == 1) {
    mdl.G.assign(static_cast<std::size_t>(N), G.front());
  } else if (static_cast<Index>(G.size()) == N - 1) {
    mdl.G.push_back(MatrixXd::Identity(n, n));
    mdl.G.insert(mdl.G.end(), G.begin(), G.end());
  } else {
    mdl.G = broadcast(G, N, "G");
    if (!mdl.G.front().isIdentity(0.0)) throw InvalidArgument("config: field 'G[0]' must be the identity");
  }
  mdl.G.front() = MatrixXd::Identity(n, n);
  mdl.H = broadcast(H, N, "H");
  mdl.Q = broadcast(Q, N, "Q");
  mdl.R = broadcast(R, N, "R");
  mdl.x0 = x0;
  return mdl;
}

PlqPenalty penalty_from_json(const json& spec, Index dim) {
  if (!spec.is_object() || !spec.contains("kind") || !spec.at("kind").is_string()) {
    throw InvalidArgument("penalty: spec must be an object with a string 'kind'");
  }
  const std::string kind = spec.at("kind").get<std::string>();
  const auto param = [&](const char* key, double fallback) {
    return spec.contains(key) ? number(spec.at(key), std::string("penalty.") + key) : fallback;
  };
  if (kind == "l2") return componentwise(AtomKind::l2(), dim);
  if (kind == "l1") return componentwise(AtomKind::l1(param("scale", 1.0)), dim);
  if (kind == "huber") return componentwise(AtomKind::huber(param("kappa", 1.0)), dim);
  if (kind == "vapnik") return componentwise(AtomKind::vapnik(param("epsilon", 1.0)), dim);
  if (kind != "plq") throw InvalidArgument("penalty: unknown kind '" + kind + "'");

  PlqData d;
  d.M = parse_rows(require(spec, "M"), "penalty.M");
  const Index du = d.M.rows();
  d.b = spec.contains("b") ? parse_vector(spec.at("b"), "penalty.b") : VectorXd::Zero(du);
  d.B = spec.contains("B") ? parse_rows(spec.at("B"), "penalty.B") : MatrixXd::Identity(du, du);
  MatrixXd A = spec.contains("A") ? parse_rows(spec.at("A"), "penalty.A") : MatrixXd(0, 0);
  if (A.size() == 0) A = MatrixXd(du, 0);
  d.A = A;
  d.a = spec.contains("a") ? parse_vector(spec.at("a"), "penalty.a") : VectorXd(0);
  PlqPenalty p = PlqPenalty::from_data(std::move(d));
  if (p.dim_y() == dim) return p;
  if (p.dim_y() == 1) {
    const std::vector<PlqPenalty> parts(static_cast<std::size_t>(dim), p);
    return block_compose(parts);
  }
  throw InvalidArgument("penalty: plq dim_y = " + std::to_string(p.dim_y()) + " does not match dimension " +
                        std::to_string(dim));
}

std::vector<PlqPenalty> penalties_from_json(const json& spec, Index dim) {
  std::vector<PlqPenalty> out;
  if (spec.is_array()) {
    if (spec.empty()) throw InvalidArgument("penalty: empty penalty list");
    for (const json& s : spec) out.push_back(penalty_from_json(s, dim));
  } else {
    out.push_back(penalty_from_json(spec, dim));
  }
  return out;
}

json penalty_spec_from_string(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  json spec{{"kind", kind}};
  if (colon == std::string::npos) return spec;
  const std::string value = text.substr(colon + 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("penalty: cannot parse parameter in '" + text + "'");
  }
  if (kind == "l1") {
    spec["scale"] = v;
  } else if (kind == "huber") {
    spec["kappa"] = v;
  } else if (kind == "vapnik") {
    spec["epsilon"] = v;
  } else {
    throw InvalidArgument("penalty: '" + kind + "' takes no parameter");
  }
  return spec;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::vector<VectorXd> read_csv(const std::filesystem::path& path, Index cols) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("csv: cannot open " + path.string());
  std::vector<VectorXd> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line);
    VectorXd row(static_cast<Index>(fields.size()));
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v = 0.0;
      if (!parse_number(fields[i], v)) {
        numeric = false;
        break;
      }
      row(static_cast<Index>(i)) = v;
    }
    if (first && !numeric) {
      first = false;
      continue;  // header
    }
    first = false;
    const std::string where = path.string() + ": row " + std::to_string(lineno);
    if (!numeric) throw InvalidArgument("csv: " + where + ": non-numeric field");
    if (row.size() != cols) {
      throw InvalidArgument("csv: " + where + ": expected " + std::to_string(cols) + " columns, got " +
                            std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("csv: " + path.string() + ": no data rows");
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<VectorXd>& rows,
               const std::string& column_prefix) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("csv: cannot write " + path.string());
  const Index cols = rows.empty() ? 0 : rows.front().size();
  for (Index c = 0; c < cols; ++c) out << (c ? "," : "") << column_prefix << (c + 1);
  out << '\n';
  for (const VectorXd& r : rows) {
    for (Index c = 0; c < r.size(); ++c) out << (c ? "," : "") << format_double(r(c));
    out << '\n';
  }
}

}  // namespace plqks::io
