#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncorlicz/cli.hpp"

using namespace ncorlicz;
namespace fs = std::filesystem;

namespace {

fs::path tmp_path(const std::string& name) {
  return fs::temp_directory_path() / ("ncorlicz_unit_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

// Value of a "key,value" line in CLI output.
double csv_value(const std::string& text, const std::string& key) {
  const std::string needle = key + ",";
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (line.rfind(needle, 0) == 0) return std::stod(line.substr(needle.size()));
  throw std::runtime_error("missing key: " + key);
}

std::string expect_schema_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.what();
  }
  FAIL("expected a SchemaError");
  return {};
}

}  // namespace

TEST_CASE("operator json round trip is exact") {
  Matrix m0(2, 2);
  m0 << Complex(1.0, -0.5), Complex(0.25, 2.0), Complex(0.0, 1.0 / 3.0),
      Complex(-2.0, 0.0);
  Matrix m1 = Matrix::Identity(1, 1) * Complex(0.1, 0.7);
  const AlgebraShape shape({{2, 1.0}, {1, 0.25}});
  const BlockOperator x(shape, {m0, m1});

  const BlockOperator y = operator_from_json(operator_to_json(x));
  CHECK(y.shape() == x.shape());
  CHECK((y - x).frobenius() == 0.0);

  const fs::path p = tmp_path("op_roundtrip.json");
  save_operator(x, p.string());
  const BlockOperator z = load_operator(p.string());
  CHECK((z - x).frobenius() == 0.0);
  fs::remove(p);

  CHECK_THROWS_AS(load_operator(tmp_path("no_such_file.json").string()), IoError);
}

TEST_CASE("operator json errors carry the offending path") {
  nlohmann::json j;
  CHECK(expect_schema_error([&] { operator_from_json(j); }).rfind("$:", 0) == 0);

  j["blocks"] = 7;
  CHECK(expect_schema_error([&] { operator_from_json(j); }).rfind("$.blocks:", 0) == 0);

  j["blocks"] = nlohmann::json::array({nlohmann::json::object()});
  CHECK(expect_schema_error([&] { operator_from_json(j); }).rfind("$.blocks[0]:", 0) == 0);

  j["blocks"][0]["weight"] = 1.0;
  j["blocks"][0]["matrix"] = {{{1.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}}};
  CHECK(expect_schema_error([&] { operator_from_json(j); })
            .rfind("$.blocks[0].matrix[1]:", 0) == 0);

  j["blocks"][0]["matrix"] = {{{1.0, 0.0}, 5.0}, {{0.0, 0.0}, {1.0, 0.0}}};
  const std::string msg = expect_schema_error([&] { operator_from_json(j); });
  CHECK(msg.rfind("$.blocks[0].matrix[0][1]:", 0) == 0);
  CHECK(contains(msg, "expected [re, im]"));

  j["blocks"][0]["matrix"] = {{{1.0, 0.0}}};
  j["blocks"][0]["weight"] = -1.0;
  CHECK(expect_schema_error([&] { operator_from_json(j); })
            .rfind("$.blocks[0].weight:", 0) == 0);

  // A NaN entry passes the schema but fails operator validation.
  j["blocks"][0]["weight"] = 1.0;
  j["blocks"][0]["matrix"] = {{{std::nan(""), 0.0}}};
  CHECK(expect_schema_error([&] { operator_from_json(j); }).rfind("$.blocks:", 0) == 0);

  const fs::path p = tmp_path("bad.json");
  spit(p, "this is not json");
  CHECK_THROWS_AS(load_json_file(p.string()), SchemaError);
  fs::remove(p);
}

TEST_CASE("phi spec mini-language") {
  CHECK(parse_phi_spec("power:2") == OrliczFunction::power(2.0));
  CHECK(parse_phi_spec("power:1.5:0.25") == OrliczFunction::power(1.5, 0.25));
  CHECK(parse_phi_spec("expm1") == OrliczFunction::exp_minus_one());
  CHECK(parse_phi_spec("powerlog:2") == OrliczFunction::power_log(2.0));

  const fs::path p = tmp_path("knots.json");
  spit(p, R"({"knots": [[0, 0], [1, 1], [2, 3]]})");
  const OrliczFunction tab = parse_phi_spec("tab:" + p.string());
  CHECK(tab.kind() == PhiKind::Tabulated);
  CHECK(tab.value(2.0) == 3.0);
  fs::remove(p);

  CHECK_THROWS_AS(parse_phi_spec("gauss"), SchemaError);
  CHECK_THROWS_AS(parse_phi_spec("power"), SchemaError);
  CHECK_THROWS_AS(parse_phi_spec("power:x"), SchemaError);
  CHECK_THROWS_AS(parse_phi_spec("powerlog:1:2"), SchemaError);
  CHECK_THROWS_AS(parse_phi_spec("expm1:3"), SchemaError);
  CHECK_THROWS_AS(parse_phi_spec("tab:" + tmp_path("gone.json").string()), IoError);
}

TEST_CASE("shape spec mini-language") {
  const AlgebraShape shape = parse_shape_spec("2:1,3:0.5");
  REQUIRE(shape.block_count() == 2);
  CHECK(shape.block(0).dim == 2);
  CHECK(shape.block(0).weight == 1.0);
  CHECK(shape.block(1).dim == 3);
  CHECK(shape.block(1).weight == 0.5);
  CHECK(shape_to_spec(shape) == "2:1,3:0.5");

  CHECK_THROWS_AS(parse_shape_spec("2"), SchemaError);
  CHECK_THROWS_AS(parse_shape_spec("2.5:1"), SchemaError);
  CHECK_THROWS_AS(parse_shape_spec("0:1"), SchemaError);
  CHECK_THROWS_AS(parse_shape_spec("2:0"), SchemaError);
  CHECK_THROWS_AS(parse_shape_spec("2:1,"), SchemaError);
}

TEST_CASE("run config serializes canonically and round trips") {
  const RunConfig def;
  CHECK(parse_config(serialize_config(def)) == def);

  RunConfig c;
  c.phi = "expm1";
  c.family = "counterexample";
  c.shape = "3:0.25,1:2";
  c.length = 17;
  c.seed = 1234567890123456789ULL;
  c.eps_list = {0.25, 0.5};
  c.tol = 5e-4;
  c.luxemburg_tol = 1e-12;
  c.amp_coeff = 2.0;
  c.amp_exp = 0.3;
  c.weight_coeff = 0.7;
  c.weight_exp = 6.0;
  c.modular_constant = 0.1;
  c.eps_coeff = 1.5;
  c.eps_exp = 4.0;
  c.rate_coeff = 0.25;
  c.rate_exp = 2.0;
  c.mode = "cap";
  c.counterexample_k = 9;
  const std::string text = serialize_config(c);
  CHECK(parse_config(text) == c);
  CHECK(serialize_config(parse_config(text)) == text);

  // Comments and blank lines are ignored; values may carry inline comments.
  const RunConfig sparse = parse_config(
      "# run setup\n"
      "\n"
      "length=30 # short run\n"
      "phi=power:3\n");
  CHECK(sparse.length == 30);
  CHECK(sparse.phi == "power:3");
  CHECK(sparse.family == "spike");

  CHECK(contains(expect_schema_error([] { parse_config("bogus=1\n"); }),
                 "unknown key 'bogus'"));
  CHECK(contains(expect_schema_error([] { parse_config("phi=expm1\nnot a pair\n"); }),
                 "line 2"));
  CHECK_THROWS_AS(parse_config("length=0\n"), SchemaError);
  CHECK_THROWS_AS(parse_config("tol=-1\n"), SchemaError);
  CHECK_THROWS_AS(parse_config("eps_list=0.5,-1\n"), SchemaError);

  const fs::path p = tmp_path("run.cfg");
  spit(p, text);
  CHECK(load_config(p.string()) == c);
  fs::remove(p);
  CHECK_THROWS_AS(load_config(tmp_path("gone.cfg").string()), IoError);
}

TEST_CASE("seventeen digit formatting survives a parse round trip") {
  CHECK(fmt17(0.5) == "0.5");
  CHECK(fmt17(2.0) == "2");
  CHECK(fmt17(0.1) == "0.10000000000000001");
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 20; ++i) {
    const double v = std::exp(d(rng));
    CHECK(std::stod(fmt17(v)) == v);
  }
}

TEST_CASE("experiment records emit a fixed csv layout") {
  ExperimentRecord a;
  a.n = 1;
  a.luxemburg = 0.5;
  a.modular = 0.25;
  a.diff_norm = 0.125;
  a.gauges = {1.0, 2.0};
  ExperimentRecord b;
  b.n = 2;
  b.luxemburg = 1.0;
  b.modular = 1.0;
  b.diff_norm = 0.0625;
  b.gauges = {0.0, 0.5};
  std::ostringstream os;
  write_records_csv(os, {a, b}, 2, Verdict::Pass);
  CHECK(os.str() ==
        "n,luxemburg,modular,diff_norm,gauge_eps1,gauge_eps2,verdict\n"
        "1,0.5,0.25,0.125,1,2,PASS\n"
        "2,1,1,0.0625,0,0.5,PASS\n");
}

TEST_CASE("cli svf prints the profile and its probes") {
  const fs::path p = tmp_path("svf_op.json");
  save_operator(BlockOperator::single_diagonal({2.0, 1.0}), p.string());
  std::ostringstream out, err;
  const int rc = run_cli({"svf", "--op", p.string(), "--t", "0.5,1.5", "--s", "1"},
                         out, err);
  CHECK(rc == 0);
  CHECK(out.str() ==
        "level,width\n2,1\n1,1\n"
        "t,mu\n0.5,2\n1.5,1\n"
        "s,distribution\n1,1\n");
  fs::remove(p);
}

TEST_CASE("cli norm reports value and method") {
  const fs::path p = tmp_path("norm_op.json");
  save_operator(BlockOperator::single_diagonal({2.0, 1.0}), p.string());

  std::ostringstream out1, err1;
  CHECK(run_cli({"norm", "--op", p.string(), "--phi", "power:2"}, out1, err1) == 0);
  CHECK(contains(out1.str(), "method,luxemburg"));
  CHECK(csv_value(out1.str(), "value") == Catch::Approx(std::sqrt(5.0)).epsilon(1e-9));

  std::ostringstream out2, err2;
  CHECK(run_cli({"norm", "--op", p.string(), "--method", "pnorm", "--p", "3"},
                out2, err2) == 0);
  CHECK(contains(out2.str(), "method,p-norm"));
  CHECK(csv_value(out2.str(), "value") == Catch::Approx(std::cbrt(9.0)).epsilon(1e-12));

  std::ostringstream out3, err3;
  CHECK(run_cli({"norm", "--op", p.string(), "--phi", "power:2", "--method",
                 "amemiya"},
                out3, err3) == 0);
  CHECK(csv_value(out3.str(), "value") ==
        Catch::Approx(2.0 * std::sqrt(5.0)).epsilon(1e-8));

  std::ostringstream out4, err4;
  CHECK(run_cli({"norm", "--op", p.string(), "--method", "bogus"}, out4, err4) == 1);
  CHECK(contains(err4.str(), "unknown method"));
  fs::remove(p);
}

TEST_CASE("cli delta2 and conjugate report their tables") {
  std::ostringstream out1, err1;
  CHECK(run_cli({"delta2"}, out1, err1) == 0);
  CHECK(contains(out1.str(), "verdict,Holds"));
  CHECK(csv_value(out1.str(), "k_estimate") == Catch::Approx(4.0).epsilon(1e-12));

  std::ostringstream out2, err2;
  CHECK(run_cli({"delta2", "--phi", "expm1"}, out2, err2) == 0);
  CHECK(contains(out2.str(), "verdict,FailsEmpirically"));

  std::ostringstream out3, err3;
  CHECK(run_cli({"conjugate", "--phi", "power:2:0.5", "--probe", "3"}, out3,
                err3) == 0);
  CHECK(contains(out3.str(), "eps_tab,"));
  CHECK(csv_value(out3.str(), "3") == Catch::Approx(4.5).margin(0.01));
}

TEST_CASE("cli kk-run exits by verdict") {
  std::ostringstream out1, err1;
  const int rc1 = run_cli(
      {"kk-run", "--length", "20", "--shape", "2:1", "--tol", "1e-3"}, out1, err1);
  CHECK(rc1 == 0);
  CHECK(contains(out1.str(),
                 "n,luxemburg,modular,diff_norm,gauge_eps1,gauge_eps2,gauge_eps3,verdict"));
  CHECK(contains(out1.str(), "verdict,PASS"));

  // Slow spikes (t_n = n^-3) keep both hypotheses inside the tolerance but
  // leave the conclusion tail at n^-1.25 >> tol: exit 2.
  RunConfig slow;
  slow.weight_exp = 3.0;
  slow.shape = "2:1";
  const fs::path cfg = tmp_path("slow.cfg");
  spit(cfg, serialize_config(slow));
  std::ostringstream out2, err2;
  const int rc2 = run_cli({"kk-run", "--config", cfg.string()}, out2, err2);
  CHECK(rc2 == 2);
  CHECK(contains(out2.str(), "verdict,FAIL"));
  fs::remove(cfg);

  // CSV goes to the file when --out is given.
  const fs::path csv = tmp_path("kk.csv");
  std::ostringstream out3, err3;
  const int rc3 = run_cli({"kk-run", "--length", "12", "--shape", "2:1", "--out",
                           csv.string()},
                          out3, err3);
  CHECK(rc3 == 0);
  CHECK(slurp(csv).rfind("n,luxemburg", 0) == 0);
  CHECK_FALSE(contains(out3.str(), "gauge_eps1"));  // table went to the file
  fs::remove(csv);

  // The negative-control family maps to exit 0.
  std::ostringstream out4, err4;
  const int rc4 = run_cli({"kk-run", "--family", "spike-negative", "--length",
                           "20", "--shape", "2:1"},
                          out4, err4);
  CHECK(rc4 == 0);
  CHECK(contains(out4.str(), "verdict,NEGATIVE-CONTROL"));
}

TEST_CASE("cli counterexample certifies its bounds") {
  std::ostringstream out, err;
  const int rc = run_cli({"counterexample", "--k", "6"}, out, err);
  CHECK(rc == 0);
  CHECK(contains(out.str(), "orthogonal,1"));
  CHECK(contains(out.str(), "bounds_hold,1"));
  CHECK(contains(out.str(), "verdict,PASS"));
  CHECK(contains(out.str(),
                 "n,diff_norm,lower_bound,doubled_diff_norm,doubled_lower_bound,"
                 "norm_gap,gauge_eps1"));
}

TEST_CASE("cli usage errors exit with one") {
  std::ostringstream out1, err1;
  CHECK(run_cli({}, out1, err1) == 1);

  std::ostringstream out2, err2;
  CHECK(run_cli({"frobnicate"}, out2, err2) == 1);

  std::ostringstream out3, err3;
  CHECK(run_cli({"norm"}, out3, err3) == 1);  // --op is required

  std::ostringstream out4, err4;
  CHECK(run_cli({"--help"}, out4, err4) == 0);
  CHECK(contains(out4.str(), "svf"));
}

TEST_CASE("cli suite is deterministic in its seed") {
  const fs::path d1 = tmp_path("suite_a");
  const fs::path d2 = tmp_path("suite_b");
  fs::remove_all(d1);
  fs::remove_all(d2);

  std::ostringstream out1, err1, out2, err2;
  CHECK(run_cli({"suite", "--seed", "7", "--out-dir", d1.string()}, out1, err1) == 0);
  CHECK(run_cli({"suite", "--seed", "7", "--out-dir", d2.string()}, out2, err2) == 0);
  CHECK(out1.str() == out2.str());

  const std::vector<std::string> files = {
      "delta2.csv",          "kk_spike_p15.csv", "kk_spike_p20.csv",
      "kk_spike_p30.csv",    "kk_noise_p20.csv", "kk_negative_p20.csv",
      "counterexample.csv",  "duality.csv",      "battery.csv",
      "summary.txt"};
  for (const std::string& f : files) {
    INFO(f);
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }

  const std::string summary = slurp(d1 / "summary.txt");
  CHECK(summary.rfind("delta2,DONE", 0) == 0);
  CHECK(contains(summary, "kk_spike_p20,PASS"));
  CHECK(contains(summary, "kk_negative_p20,NEGATIVE-CONTROL"));
  CHECK(contains(summary, "counterexample,PASS"));
  CHECK(contains(summary, "duality,PASS"));
  CHECK(contains(summary, "battery,PASS"));

  fs::remove_all(d1);
  fs::remove_all(d2);
}
