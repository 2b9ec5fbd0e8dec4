#pragma once

// Command line surface.  Subcommands: svf, norm, conjugate, delta2, kk-run,
// counterexample, suite.  Exit contract: 0 when every verdict is PASS or
// NEGATIVE-CONTROL (an expected control outcome), 2 when any verdict is
// FAIL, 1 for usage or input errors.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"

namespace ncorlicz {

namespace cli_detail {

inline std::vector<double> parse_double_list(const std::string& s,
                                             const std::string& what) {
  std::vector<double> out;
  for (const std::string& p : split(s, ',')) out.push_back(parse_double(p, what));
  return out;
}

// Deterministic PSD base operator for family construction: a Wishart draw
// normalized to unit top singular value.
inline BlockOperator family_base(const AlgebraShape& shape, std::uint64_t seed) {
  BlockOperator base = random_operator(shape, PSDWishart{1.0}, derive_seed(seed, 9000));
  const double top = singular_value_profile(base).top_level();
  if (top > 0.0) base = (1.0 / top) * base;
  return base;
}

inline GeneratedSequence build_family(const RunConfig& c, const OrliczFunction& phi) {
  const AlgebraShape shape = parse_shape_spec(c.shape);
  const BlockOperator base = family_base(shape, c.seed);
  if (c.family == "spike") {
    return make_spike_family(
        base, SpikeRule{c.amp_coeff, c.amp_exp, c.weight_coeff, c.weight_exp},
        c.length);
  }
  if (c.family == "spike-negative") {
    return make_spike_family_modular_constant(base, phi, c.modular_constant,
                                              c.amp_coeff, c.amp_exp, c.length);
  }
  if (c.family == "noise") {
    return make_noise_family(base, NoiseRule{c.eps_coeff, c.eps_exp}, c.length,
                             derive_seed(c.seed, 1));
  }
  if (c.family == "monotone-up") {
    MonotoneRule rule{c.mode == "truncate" ? MonotoneMode::TruncateBelow
                                           : MonotoneMode::Scale,
                      c.rate_coeff, c.rate_exp};
    return make_monotone_up_family(base, rule, c.length);
  }
  if (c.family == "monotone-down") {
    MonotoneRule rule{c.mode == "add-identity" ? MonotoneMode::AddIdentity
                                               : MonotoneMode::Scale,
                      c.rate_coeff, c.rate_exp};
    return make_monotone_down_family(base, rule, c.length);
  }
  if (c.family == "vanishing") {
    MonotoneRule rule{c.mode == "cap" ? MonotoneMode::CapLevel : MonotoneMode::Scale,
                      c.rate_coeff, c.rate_exp};
    return make_vanishing_family(base, rule, c.length);
  }
  if (c.family == "counterexample") {
    return make_counterexample_family(phi, c.counterexample_k).seq;
  }
  throw SchemaError("unknown family '" + c.family + "'");
}

inline int run_svf(const std::string& op_path, const std::string& t_list,
                   const std::string& s_list, std::ostream& out) {
  const BlockOperator x = load_operator(op_path);
  const SingularValueProfile p = singular_value_profile(x);
  out << "level,width\n";
  for (const auto& st : p.steps())
    out << fmt17(st.level) << "," << fmt17(st.width) << "\n";
  if (!t_list.empty()) {
    out << "t,mu\n";
    for (double t : parse_double_list(t_list, "svf --t"))
      out << fmt17(t) << "," << fmt17(p.value_at(t)) << "\n";
  }
  if (!s_list.empty()) {
    out << "s,distribution\n";
    for (double s : parse_double_list(s_list, "svf --s"))
      out << fmt17(s) << "," << fmt17(p.distribution(s)) << "\n";
  }
  return 0;
}

inline void print_norm_report(const NormReport& r, std::ostream& out) {
  const char* method = "luxemburg";
  switch (r.method) {
    case NormMethod::Luxemburg: method = "luxemburg"; break;
    case NormMethod::Amemiya: method = "amemiya"; break;
    case NormMethod::OrliczSup: method = "orlicz-sup"; break;
    case NormMethod::PNorm: method = "p-norm"; break;
  }
  out << "value," << fmt17(r.value) << "\n";
  out << "method," << method << "\n";
  out << "bracket_lo," << fmt17(r.bracket_lo) << "\n";
  out << "bracket_hi," << fmt17(r.bracket_hi) << "\n";
  out << "iterations," << r.iterations << "\n";
  out << "residual," << fmt17(r.residual) << "\n";
  out << "k_star," << fmt17(r.k_star) << "\n";
}

inline int run_norm(const std::string& op_path, const std::string& phi_spec,
                    const std::string& method, double pexp, double tol,
                    std::ostream& out) {
  const BlockOperator x = load_operator(op_path);
  if (method == "pnorm") {
    NormReport r;
    r.method = NormMethod::PNorm;
    r.value = p_norm(x, pexp);
    print_norm_report(r, out);
    return 0;
  }
  const OrliczFunction phi = parse_phi_spec(phi_spec);
  NormReport r;
  if (method == "luxemburg")
    r = luxemburg_norm(phi, x, tol);
  else if (method == "amemiya")
    r = amemiya_norm(phi, x);
  else if (method == "sup")
    r = orlicz_norm_sup(phi, x);
  else
    throw SchemaError("norm: unknown method '" + method + "'");
  print_norm_report(r, out);
  return 0;
}

inline int run_conjugate(const std::string& phi_spec, double u_min, double u_max,
                         int count, const std::string& probe_list,
                         std::ostream& out) {
  const OrliczFunction phi = parse_phi_spec(phi_spec);
  ConjugateGrid grid{u_min, u_max, count};
  const ConjugateResult res = conjugate_detailed(phi, grid);
  out << "eps_tab," << fmt17(res.eps_tab) << "\n";
  out << "u,psi\n";
  if (!probe_list.empty()) {
    for (double u : parse_double_list(probe_list, "conjugate --probe"))
      out << fmt17(u) << "," << fmt17(res.psi.value(u)) << "\n";
  } else {
    for (const auto& kn : res.psi.knots())
      out << fmt17(kn.first) << "," << fmt17(kn.second) << "\n";
  }
  return 0;
}

inline int run_delta2(const std::string& phi_spec, double u_min, double u_max,
                      int count, double threshold, std::ostream& out) {
  const OrliczFunction phi = parse_phi_spec(phi_spec);
  const Delta2Report rep = delta2_probe(phi, Delta2Grid{u_min, u_max, count}, threshold);
  out << "verdict,"
      << (rep.verdict == Delta2Verdict::Holds ? "Holds" : "FailsEmpirically") << "\n";
  out << "k_estimate," << fmt17(rep.k_estimate) << "\n";
  out << "witness_u," << fmt17(rep.witness_u) << "\n";
  return 0;
}

inline int run_kk(const RunConfig& c, const std::string& out_path,
                  std::ostream& out) {
  const OrliczFunction phi = parse_phi_spec(c.phi);
  const GeneratedSequence seq = build_family(c, phi);
  KadecKleeParams params;
  params.eps_list = c.eps_list;
  params.tol_conclusion = c.tol;
  params.tol_hypothesis = c.tol;
  params.luxemburg_tol = c.luxemburg_tol;
  params.monotone_tail = c.family != "noise" && c.family != "spike-negative";
  const KadecKleeReport rep = run_kadec_klee(phi, seq, params);
  if (!out_path.empty())
    write_records_csv_file(out_path, rep.records, params.eps_list.size(), rep.verdict);
  else
    write_records_csv(out, rep.records, params.eps_list.size(), rep.verdict);
  out << "verdict," << to_string(rep.verdict) << "\n";
  out << "detail," << rep.detail << "\n";
  return rep.verdict == Verdict::Fail ? 2 : 0;
}

inline void write_certificates_csv(std::ostream& out,
                                   const CounterexampleInstance& inst) {
  out << "n,diff_norm,lower_bound,doubled_diff_norm,doubled_lower_bound,"
         "norm_gap,gauge_eps1\n";
  for (const auto& c : inst.certificates) {
    out << c.n << "," << fmt17(c.diff_norm) << "," << fmt17(c.lower_bound) << ","
        << fmt17(c.doubled_diff_norm) << "," << fmt17(c.doubled_lower_bound) << ","
        << fmt17(c.norm_gap) << "," << fmt17(c.gauge_eps1) << "\n";
  }
}

inline int run_counterexample(const std::string& phi_spec, int K,
                              const std::string& out_path, std::ostream& out) {
  const OrliczFunction phi = parse_phi_spec(phi_spec);
  const CounterexampleInstance inst = build_counterexample(phi, K);
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw IoError("cannot open file for writing: " + out_path);
    write_certificates_csv(f, inst);
  } else {
    write_certificates_csv(out, inst);
  }
  const bool ok = inst.bounds_hold && inst.orthogonal;
  out << "x_norm," << fmt17(inst.x_norm) << "\n";
  out << "x_modular," << fmt17(inst.x_modular) << "\n";
  out << "orthogonal," << (inst.orthogonal ? 1 : 0) << "\n";
  out << "bounds_hold," << (inst.bounds_hold ? 1 : 0) << "\n";
  out << "verdict," << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

// Fixed deterministic suite.  Every output file depends only on --seed.
inline int run_suite(std::uint64_t seed, const std::string& out_dir,
                     std::ostream& out) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
  std::vector<std::pair<std::string, Verdict>> summary;
  bool any_fail = false;

  {
    std::ofstream f(path("delta2.csv"), std::ios::binary);
    if (!f) throw IoError("cannot open delta2.csv for writing");
    f << "phi,verdict,k_estimate,witness_u\n";
    const std::vector<std::string> specs = {"power:1.5", "power:2", "power:3",
                                            "powerlog:1.5", "expm1"};
    for (const std::string& s : specs) {
      const Delta2Report rep = delta2_probe(parse_phi_spec(s));
      f << s << ","
        << (rep.verdict == Delta2Verdict::Holds ? "Holds" : "FailsEmpirically")
        << "," << fmt17(rep.k_estimate) << "," << fmt17(rep.witness_u) << "\n";
    }
  }

  auto kk_case = [&](const char* name, const char* file, RunConfig c) {
    const OrliczFunction phi = parse_phi_spec(c.phi);
    const GeneratedSequence seq = build_family(c, phi);
    KadecKleeParams params;
    params.eps_list = c.eps_list;
    params.tol_conclusion = c.tol;
    params.tol_hypothesis = c.tol;
    params.monotone_tail = c.family != "noise" && c.family != "spike-negative";
    const KadecKleeReport rep = run_kadec_klee(phi, seq, params);
    write_records_csv_file(path(file), rep.records, params.eps_list.size(),
                           rep.verdict);
    summary.emplace_back(name, rep.verdict);
    any_fail = any_fail || rep.verdict == Verdict::Fail;
  };

  {
    RunConfig c;
    c.shape = "2:1,3:0.5";
    c.length = 60;
    c.seed = derive_seed(seed, 101);
    c.phi = "power:1.5";
    kk_case("kk_spike_p15", "kk_spike_p15.csv", c);
    c.phi = "power:2";
    kk_case("kk_spike_p20", "kk_spike_p20.csv", c);
    c.phi = "power:3";
    kk_case("kk_spike_p30", "kk_spike_p30.csv", c);
  }
  {
    RunConfig c;
    c.family = "noise";
    c.shape = "2:1,3:0.5";
    c.length = 40;
    c.seed = derive_seed(seed, 102);
    c.phi = "power:2";
    kk_case("kk_noise_p20", "kk_noise_p20.csv", c);
  }
  {
    RunConfig c;
    c.family = "spike-negative";
    c.shape = "2:1";
    c.length = 60;
    c.seed = derive_seed(seed, 103);
    c.phi = "power:2";
    c.amp_exp = 0.5;
    kk_case("kk_negative_p20", "kk_negative_p20.csv", c);
  }

  {
    const CounterexampleInstance inst =
        build_counterexample(OrliczFunction::exp_minus_one(), 8);
    std::ofstream f(path("counterexample.csv"), std::ios::binary);
    if (!f) throw IoError("cannot open counterexample.csv for writing");
    write_certificates_csv(f, inst);
    const Verdict v = inst.bounds_hold && inst.orthogonal ? Verdict::Pass
                                                          : Verdict::Fail;
    summary.emplace_back("counterexample", v);
    any_fail = any_fail || v == Verdict::Fail;
  }

  {
    const OrliczFunction phi = OrliczFunction::power(2.0, 0.5);
    const OrliczFunction psi = OrliczFunction::power(2.0, 0.5);
    const AlgebraShape shape(std::vector<BlockSpec>{{2, 1.0}, {3, 0.5}});
    const DualityReport rep =
        check_duality(phi, psi, shape, 8, 20, derive_seed(seed, 104));
    std::ofstream f(path("duality.csv"), std::ios::binary);
    if (!f) throw IoError("cannot open duality.csv for writing");
    f << "metric,value\n";
    f << "max_diagonal_rel_gap," << fmt17(rep.max_diagonal_rel_gap) << "\n";
    f << "max_holder_excess," << fmt17(rep.max_holder_excess) << "\n";
    summary.emplace_back("duality", rep.verdict);
    any_fail = any_fail || rep.verdict == Verdict::Fail;
  }

  {
    const SingularValueBatteryReport rep = run_singular_value_battery(
        OrliczFunction::power(2.0), 100, derive_seed(seed, 105));
    std::ofstream f(path("battery.csv"), std::ios::binary);
    if (!f) throw IoError("cannot open battery.csv for writing");
    f << "metric,value\n";
    f << "max_subadditivity," << fmt17(rep.max_subadditivity) << "\n";
    f << "max_unitary_dev," << fmt17(rep.max_unitary_dev) << "\n";
    f << "max_scaling_dev," << fmt17(rep.max_scaling_dev) << "\n";
    f << "max_order_violation," << fmt17(rep.max_order_violation) << "\n";
    f << "max_submajorization," << fmt17(rep.max_submajorization) << "\n";
    f << "max_modular_convexity," << fmt17(rep.max_modular_convexity) << "\n";
    f << "max_galois_excess," << fmt17(rep.max_galois_excess) << "\n";
    summary.emplace_back("battery", rep.verdict);
    any_fail = any_fail || rep.verdict == Verdict::Fail;
  }

  {
    std::ofstream f(path("summary.txt"), std::ios::binary);
    if (!f) throw IoError("cannot open summary.txt for writing");
    f << "delta2,DONE\n";
    for (const auto& [name, v] : summary) f << name << "," << to_string(v) << "\n";
  }
  for (const auto& [name, v] : summary)
    out << name << "," << to_string(v) << "\n";
  return any_fail ? 2 : 0;
}

}  // namespace cli_detail

// Entry point used by the binary and by tests.  args excludes the program
// name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"finite-model Orlicz space toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  auto* svf = app.add_subcommand("svf", "singular value profile of an operator");
  std::string svf_op, svf_t, svf_s;
  svf->add_option("--op", svf_op, "operator JSON file")->required();
  svf->add_option("--t", svf_t, "comma list of times to evaluate mu_t");
  svf->add_option("--s", svf_s, "comma list of levels for the distribution");
  svf->callback([&] { rc = cli_detail::run_svf(svf_op, svf_t, svf_s, out); });

  auto* norm = app.add_subcommand("norm", "norm of an operator");
  std::string norm_op, norm_phi = "power:2", norm_method = "luxemburg";
  double norm_p = 2.0, norm_tol = 1e-10;
  norm->add_option("--op", norm_op, "operator JSON file")->required();
  norm->add_option("--phi", norm_phi, "phi spec");
  norm->add_option("--method", norm_method, "luxemburg | amemiya | sup | pnorm");
  norm->add_option("--p", norm_p, "exponent for --method pnorm");
  norm->add_option("--tol", norm_tol, "bisection tolerance on |rho - 1|");
  norm->callback([&] {
    rc = cli_detail::run_norm(norm_op, norm_phi, norm_method, norm_p, norm_tol, out);
  });

  auto* conj = app.add_subcommand("conjugate", "tabulated Legendre conjugate");
  std::string conj_phi = "power:2", conj_probe;
  double conj_umin = 1e-6, conj_umax = 1e6;
  int conj_count = 512;
  conj->add_option("--phi", conj_phi, "phi spec");
  conj->add_option("--u-min", conj_umin, "grid lower end");
  conj->add_option("--u-max", conj_umax, "grid upper end");
  conj->add_option("--count", conj_count, "grid size");
  conj->add_option("--probe", conj_probe, "comma list of evaluation points");
  conj->callback([&] {
    rc = cli_detail::run_conjugate(conj_phi, conj_umin, conj_umax, conj_count,
                                   conj_probe, out);
  });

  auto* d2 = app.add_subcommand("delta2", "empirical Delta_2 probe");
  std::string d2_phi = "power:2";
  double d2_umin = 1e-3, d2_umax = 1e3, d2_threshold = 1e6;
  int d2_count = 200;
  d2->add_option("--phi", d2_phi, "phi spec");
  d2->add_option("--u-min", d2_umin, "grid lower end");
  d2->add_option("--u-max", d2_umax, "grid upper end");
  d2->add_option("--count", d2_count, "grid size");
  d2->add_option("--threshold", d2_threshold, "largest ratio accepted as Holds");
  d2->callback([&] {
    rc = cli_detail::run_delta2(d2_phi, d2_umin, d2_umax, d2_count, d2_threshold, out);
  });

  auto* kk = app.add_subcommand("kk-run", "Kadec-Klee co-convergence experiment");
  std::string kk_config, kk_out;
  std::string kk_phi, kk_family, kk_shape, kk_eps, kk_mode;
  int kk_length = -1, kk_K = -1;
  double kk_tol = -1.0;
  std::uint64_t kk_seed = 0;
  bool kk_seed_set = false;
  kk->add_option("--config", kk_config, "key=value config file");
  kk->add_option("--out", kk_out, "CSV output path (default stdout)");
  kk->add_option("--phi", kk_phi, "phi spec override");
  kk->add_option("--family", kk_family, "family override");
  kk->add_option("--shape", kk_shape, "shape override, dim:weight,...");
  kk->add_option("--eps", kk_eps, "gauge eps list override");
  kk->add_option("--mode", kk_mode, "monotone family mode override");
  kk->add_option("--length", kk_length, "family length override");
  kk->add_option("--k", kk_K, "counterexample K override");
  kk->add_option("--tol", kk_tol, "tail tolerance override");
  kk->add_option("--seed", kk_seed, "seed override")->each([&](const std::string&) {
    kk_seed_set = true;
  });
  kk->callback([&] {
    RunConfig c = kk_config.empty() ? RunConfig{} : load_config(kk_config);
    if (!kk_phi.empty()) c.phi = kk_phi;
    if (!kk_family.empty()) c.family = kk_family;
    if (!kk_shape.empty()) c.shape = kk_shape;
    if (!kk_eps.empty())
      c.eps_list = cli_detail::parse_double_list(kk_eps, "kk-run --eps");
    if (!kk_mode.empty()) c.mode = kk_mode;
    if (kk_length > 0) c.length = kk_length;
    if (kk_K > 0) c.counterexample_k = kk_K;
    if (kk_tol > 0.0) c.tol = kk_tol;
    if (kk_seed_set) c.seed = kk_seed;
    rc = cli_detail::run_kk(c, kk_out, out);
  });

  auto* ce = app.add_subcommand("counterexample",
                                "non-Delta_2 norm-divergence certificates");
  std::string ce_phi = "expm1", ce_out;
  int ce_k = 12;
  ce->add_option("--phi", ce_phi, "phi spec (must fail Delta_2 along k^2)");
  ce->add_option("--k", ce_k, "number of blocks K");
  ce->add_option("--out", ce_out, "CSV output path (default stdout)");
  ce->callback([&] { rc = cli_detail::run_counterexample(ce_phi, ce_k, ce_out, out); });

  auto* suite = app.add_subcommand("suite", "deterministic verification suite");
  std::uint64_t suite_seed = 42;
  std::string suite_dir = "suite-out";
  suite->add_option("--seed", suite_seed, "master seed");
  suite->add_option("--out-dir", suite_dir, "output directory");
  suite->callback([&] { rc = cli_detail::run_suite(suite_seed, suite_dir, out); });

  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("ncorlicz");
  for (const std::string& a : args) full.push_back(a);
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const std::string& a : full) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace ncorlicz
