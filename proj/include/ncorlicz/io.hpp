#pragma once

// External data formats: the block-operator JSON schema, the phi spec
// mini-language, the flat key=value run configuration, and CSV emission with
// fixed 17-significant-digit formatting so identical runs produce identical
// bytes.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "harness.hpp"

namespace ncorlicz {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// %.17g: enough digits to reproduce any double exactly, stable across runs.
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Operator JSON schema:
// {"blocks": [{"weight": c_k, "matrix": [[[re, im], ...], ...]}, ...]}
// ---------------------------------------------------------------------------

inline nlohmann::json operator_to_json(const BlockOperator& x) {
  nlohmann::json j;
  j["blocks"] = nlohmann::json::array();
  for (std::size_t k = 0; k < x.block_count(); ++k) {
    nlohmann::json jb;
    jb["weight"] = x.shape().block(k).weight;
    nlohmann::json rows = nlohmann::json::array();
    const Matrix& m = x.block(k);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        row.push_back({m(i, c).real(), m(i, c).imag()});
      rows.push_back(std::move(row));
    }
    jb["matrix"] = std::move(rows);
    j["blocks"].push_back(std::move(jb));
  }
  return j;
}

inline BlockOperator operator_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& path, const std::string& what) -> void {
    throw SchemaError(path + ": " + what);
  };
  if (!j.is_object() || !j.contains("blocks"))
    fail("$", "expected an object with a 'blocks' array");
  const auto& jb = j["blocks"];
  if (!jb.is_array() || jb.empty())
    fail("$.blocks", "expected a non-empty array");
  std::vector<BlockSpec> specs;
  std::vector<Matrix> mats;
  for (std::size_t k = 0; k < jb.size(); ++k) {
    const std::string base = "$.blocks[" + std::to_string(k) + "]";
    const auto& b = jb[k];
    if (!b.is_object() || !b.contains("weight") || !b.contains("matrix"))
      fail(base, "expected an object with 'weight' and 'matrix'");
    if (!b["weight"].is_number())
      fail(base + ".weight", "expected a number");
    const double w = b["weight"].get<double>();
    const auto& rows = b["matrix"];
    if (!rows.is_array() || rows.empty())
      fail(base + ".matrix", "expected a non-empty array of rows");
    const std::size_t n = rows.size();
    Matrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::string rbase = base + ".matrix[" + std::to_string(r) + "]";
      if (!rows[r].is_array() || rows[r].size() != n)
        fail(rbase, "expected a row of length " + std::to_string(n));
      for (std::size_t c = 0; c < n; ++c) {
        const auto& e = rows[r][c];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
          fail(rbase + "[" + std::to_string(c) + "]", "expected [re, im]");
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      }
    }
    if (!(w > 0.0)) fail(base + ".weight", "expected a positive weight");
    specs.push_back({static_cast<int>(n), w});
    mats.push_back(std::move(m));
  }
  try {
    return BlockOperator(AlgebraShape(std::move(specs)), std::move(mats));
  } catch (const std::exception& e) {
    throw SchemaError(std::string("$.blocks: ") + e.what());
  }
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return j;
}

inline BlockOperator load_operator(const std::string& path) {
  return operator_from_json(load_json_file(path));
}

inline void save_operator(const BlockOperator& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << operator_to_json(x).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// phi spec mini-language:
//   power:<p>[:<scale>] | expm1 | powerlog:<p> | tab:<path.json>
// tab files carry {"knots": [[u, phi], ...]}.
// ---------------------------------------------------------------------------

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw SchemaError(what + ": not a number: '" + s + "'");
  }
}

inline OrliczFunction parse_phi_spec(const std::string& spec) {
  const std::vector<std::string> parts = split(spec, ':');
  const std::string& head = parts[0];
  try {
    if (head == "power") {
      if (parts.size() < 2 || parts.size() > 3)
        throw SchemaError("phi spec: power:<p>[:<scale>]");
      const double p = parse_double(parts[1], "phi spec power exponent");
      const double scale =
          parts.size() == 3 ? parse_double(parts[2], "phi spec power scale") : 1.0;
      return OrliczFunction::power(p, scale);
    }
    if (head == "expm1") {
      if (parts.size() != 1) throw SchemaError("phi spec: expm1 takes no arguments");
      return OrliczFunction::exp_minus_one();
    }
    if (head == "powerlog") {
      if (parts.size() != 2) throw SchemaError("phi spec: powerlog:<p>");
      return OrliczFunction::power_log(
          parse_double(parts[1], "phi spec powerlog exponent"));
    }
    if (head == "tab") {
      if (parts.size() < 2) throw SchemaError("phi spec: tab:<path>");
      // Paths may contain ':'; rejoin the remainder.
      std::string path = parts[1];
      for (std::size_t i = 2; i < parts.size(); ++i) path += ":" + parts[i];
      const nlohmann::json j = load_json_file(path);
      if (!j.is_object() || !j.contains("knots") || !j["knots"].is_array())
        throw SchemaError(path + ": expected {\"knots\": [[u, phi], ...]}");
      std::vector<std::pair<double, double>> knots;
      for (const auto& kn : j["knots"]) {
        if (!kn.is_array() || kn.size() != 2 || !kn[0].is_number() || !kn[1].is_number())
          throw SchemaError(path + ": knot entries must be [u, phi]");
        knots.emplace_back(kn[0].get<double>(), kn[1].get<double>());
      }
      return OrliczFunction::tabulated(std::move(knots));
    }
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("phi spec: ") + e.what());
  }
  throw SchemaError("phi spec: unknown kind '" + head + "'");
}

// ---------------------------------------------------------------------------
// Shape mini-language: "dim:weight,dim:weight,..."
// ---------------------------------------------------------------------------

inline AlgebraShape parse_shape_spec(const std::string& spec) {
  std::vector<BlockSpec> blocks;
  for (const std::string& part : split(spec, ',')) {
    const std::vector<std::string> dw = split(part, ':');
    if (dw.size() != 2)
      throw SchemaError("shape spec: expected dim:weight, got '" + part + "'");
    const double dim = parse_double(dw[0], "shape spec dim");
    const double w = parse_double(dw[1], "shape spec weight");
    if (dim < 1.0 || dim != static_cast<int>(dim))
      throw SchemaError("shape spec: dim must be a positive integer");
    blocks.push_back({static_cast<int>(dim), w});
  }
  try {
    return AlgebraShape(std::move(blocks));
  } catch (const std::exception& e) {
    throw SchemaError(std::string("shape spec: ") + e.what());
  }
}

inline std::string shape_to_spec(const AlgebraShape& shape) {
  std::string out;
  for (std::size_t k = 0; k < shape.block_count(); ++k) {
    if (k) out += ",";
    out += std::to_string(shape.block(k).dim) + ":" + fmt17(shape.block(k).weight);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration: flat key=value lines, '#' comments.  parse/serialize is
// an exact round trip on the canonical form.
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string phi = "power:2";
  std::string family = "spike";  // spike | spike-negative | noise |
                                 // monotone-up | monotone-down | vanishing |
                                 // counterexample
  std::string shape = "2:1";
  int length = 60;
  std::uint64_t seed = 1;
  std::vector<double> eps_list = {0.5, 0.1, 0.01};
  double tol = 1e-3;
  double luxemburg_tol = 1e-10;
  double amp_coeff = 1.0, amp_exp = 0.25;
  double weight_coeff = 1.0, weight_exp = 8.0;
  double modular_constant = 0.5;
  double eps_coeff = 1.0, eps_exp = 3.0;
  double rate_coeff = 0.5, rate_exp = 3.0;
  std::string mode = "scale";  // scale | truncate | add-identity | cap
  int counterexample_k = 12;

  bool operator==(const RunConfig& o) const {
    return phi == o.phi && family == o.family && shape == o.shape &&
           length == o.length && seed == o.seed && eps_list == o.eps_list &&
           tol == o.tol && luxemburg_tol == o.luxemburg_tol &&
           amp_coeff == o.amp_coeff && amp_exp == o.amp_exp &&
           weight_coeff == o.weight_coeff && weight_exp == o.weight_exp &&
           modular_constant == o.modular_constant && eps_coeff == o.eps_coeff &&
           eps_exp == o.eps_exp && rate_coeff == o.rate_coeff &&
           rate_exp == o.rate_exp && mode == o.mode &&
           counterexample_k == o.counterexample_k;
  }
  bool operator!=(const RunConfig& o) const { return !(*this == o); }
};

inline std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "amp_coeff=" << fmt17(c.amp_coeff) << "\n";
  os << "amp_exp=" << fmt17(c.amp_exp) << "\n";
  os << "counterexample_k=" << c.counterexample_k << "\n";
  os << "eps_coeff=" << fmt17(c.eps_coeff) << "\n";
  os << "eps_exp=" << fmt17(c.eps_exp) << "\n";
  os << "eps_list=";
  for (std::size_t i = 0; i < c.eps_list.size(); ++i)
    os << (i ? "," : "") << fmt17(c.eps_list[i]);
  os << "\n";
  os << "family=" << c.family << "\n";
  os << "length=" << c.length << "\n";
  os << "luxemburg_tol=" << fmt17(c.luxemburg_tol) << "\n";
  os << "mode=" << c.mode << "\n";
  os << "modular_constant=" << fmt17(c.modular_constant) << "\n";
  os << "phi=" << c.phi << "\n";
  os << "rate_coeff=" << fmt17(c.rate_coeff) << "\n";
  os << "rate_exp=" << fmt17(c.rate_exp) << "\n";
  os << "seed=" << c.seed << "\n";
  os << "shape=" << c.shape << "\n";
  os << "tol=" << fmt17(c.tol) << "\n";
  os << "weight_coeff=" << fmt17(c.weight_coeff) << "\n";
  os << "weight_exp=" << fmt17(c.weight_exp) << "\n";
  return os.str();
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // Trim.
    const std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    const std::string where = "config '" + key + "'";
    if (key == "phi") c.phi = val;
    else if (key == "family") c.family = val;
    else if (key == "shape") c.shape = val;
    else if (key == "length") c.length = static_cast<int>(parse_double(val, where));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(val));
    else if (key == "eps_list") {
      c.eps_list.clear();
      for (const std::string& p : split(val, ','))
        c.eps_list.push_back(parse_double(p, where));
    } else if (key == "tol") c.tol = parse_double(val, where);
    else if (key == "luxemburg_tol") c.luxemburg_tol = parse_double(val, where);
    else if (key == "amp_coeff") c.amp_coeff = parse_double(val, where);
    else if (key == "amp_exp") c.amp_exp = parse_double(val, where);
    else if (key == "weight_coeff") c.weight_coeff = parse_double(val, where);
    else if (key == "weight_exp") c.weight_exp = parse_double(val, where);
    else if (key == "modular_constant") c.modular_constant = parse_double(val, where);
    else if (key == "eps_coeff") c.eps_coeff = parse_double(val, where);
    else if (key == "eps_exp") c.eps_exp = parse_double(val, where);
    else if (key == "rate_coeff") c.rate_coeff = parse_double(val, where);
    else if (key == "rate_exp") c.rate_exp = parse_double(val, where);
    else if (key == "mode") c.mode = val;
    else if (key == "counterexample_k")
      c.counterexample_k = static_cast<int>(parse_double(val, where));
    else
      throw SchemaError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (c.length < 1) throw SchemaError("config: length must be >= 1");
  if (c.counterexample_k < 1) throw SchemaError("config: counterexample_k must be >= 1");
  for (double e : c.eps_list)
    if (!(e > 0.0)) throw SchemaError("config: eps_list entries must be positive");
  if (!(c.tol > 0.0) || !(c.luxemburg_tol > 0.0))
    throw SchemaError("config: tolerances must be positive");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

// Fixed record layout: n,luxemburg,modular,diff_norm,gauge_eps1,...,verdict.
inline void write_records_csv(std::ostream& out,
                              const std::vector<ExperimentRecord>& records,
                              std::size_t eps_count, Verdict verdict) {
  out << "n,luxemburg,modular,diff_norm";
  for (std::size_t j = 0; j < eps_count; ++j) out << ",gauge_eps" << (j + 1);
  out << ",verdict\n";
  for (const ExperimentRecord& r : records) {
    out << r.n << "," << fmt17(r.luxemburg) << "," << fmt17(r.modular) << ","
        << fmt17(r.diff_norm);
    for (std::size_t j = 0; j < eps_count; ++j)
      out << "," << fmt17(j < r.gauges.size() ? r.gauges[j] : 0.0);
    out << "," << to_string(verdict) << "\n";
  }
}

inline void write_records_csv_file(const std::string& path,
                                   const std::vector<ExperimentRecord>& records,
                                   std::size_t eps_count, Verdict verdict) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  write_records_csv(out, records, eps_count, verdict);
}

}  // namespace ncorlicz
