// Command implementations behind the sparsemap executable, plus the report
// and trace serialization formats. Kept in the library so tests can drive the
// commands directly.
//
// Exit codes: 0 success / converged, 1 input error, 2 non-convergence or a
// failed self-check. Indices in all serialized output are 1-based.
#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsemap/instance.hpp"
#include "sparsemap/theory.hpp"

namespace sparsemap::cli {

// ---------------------------------------------------------------------------
// Formatting helpers
// ---------------------------------------------------------------------------

/// Doubles in certificate JSON and CSV files carry 17 significant digits,
/// enough to round-trip IEEE-754 binary64 exactly.
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<int> one_based(const IndexSet& j) {
  std::vector<int> out;
  out.reserve(j.members.size());
  for (int i : j.members) out.push_back(i + 1);
  return out;
}

inline Vector parse_vector_spec(const std::string& spec, int expected_dim) {
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::runtime_error("cannot parse vector entry \"" + item + "\"");
    }
  }
  if (static_cast<int>(values.size()) != expected_dim)
    throw std::runtime_error("vector has " + std::to_string(values.size()) +
                             " entries, expected " + std::to_string(expected_dim));
  Vector v(expected_dim);
  for (int i = 0; i < expected_dim; ++i) v[i] = values[static_cast<std::size_t>(i)];
  return v;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// Certificate JSON
// ---------------------------------------------------------------------------

inline nlohmann::json certificate_to_json(const Certificate& cert) {
  nlohmann::json j;
  j["theta_bar"] = cert.theta_bar;
  j["delta_bar"] = cert.delta_bar;
  j["delta"] = cert.delta;
  j["basin_radius"] = cert.basin_radius;
  j["rate_bound"] = cert.rate_bound;
  nlohmann::json per = nlohmann::json::array();
  for (const SupportAngle& sa : cert.per_support)
    per.push_back({{"J", one_based(sa.j)}, {"cosine", sa.cosine}});
  j["per_support"] = std::move(per);
  j["transversal"] = cert.transversal;
  j["classical_cq_holds"] = cert.classical_cq_holds;
  return j;
}

/// Hand-formatted certificate JSON with every number at 17 significant digits.
inline std::string certificate_json_text(const Certificate& cert) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"theta_bar\": " << fmt17(cert.theta_bar) << ",\n";
  out << "  \"delta_bar\": " << fmt17(cert.delta_bar) << ",\n";
  out << "  \"delta\": " << fmt17(cert.delta) << ",\n";
  out << "  \"basin_radius\": " << fmt17(cert.basin_radius) << ",\n";
  out << "  \"rate_bound\": " << fmt17(cert.rate_bound) << ",\n";
  out << "  \"per_support\": [";
  for (std::size_t i = 0; i < cert.per_support.size(); ++i) {
    out << (i == 0 ? "\n" : ",\n") << "    {\"J\": [";
    const std::vector<int> j1 = one_based(cert.per_support[i].j);
    for (std::size_t k = 0; k < j1.size(); ++k) out << (k ? ", " : "") << j1[k];
    out << "], \"cosine\": " << fmt17(cert.per_support[i].cosine) << "}";
  }
  out << "\n  ],\n";
  out << "  \"transversal\": " << (cert.transversal ? "true" : "false") << ",\n";
  out << "  \"classical_cq_holds\": " << (cert.classical_cq_holds ? "true" : "false") << "\n";
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Run reports
// ---------------------------------------------------------------------------

struct RunReport {
  // instance summary
  std::string instance_path;
  int n = 0;
  int m_rows = 0;
  int s = 0;
  int rank = 0;
  // trace summary
  int iterations = 0;
  double final_residual = 0.0;
  std::string termination;
  double final_affine_residual = 0.0;
  double final_sparsity_distance = 0.0;
  std::vector<double> limit_point;
  // optional sections
  std::optional<nlohmann::json> certificate;
  std::optional<double> geometric_fit;
  std::optional<int> usable_steps;
  std::optional<bool> guarantee_holds;
  std::optional<int> envelope_violations;
};

inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["instance"] = {{"path", r.instance_path}, {"n", r.n}, {"m", r.m_rows},
                   {"s", r.s}, {"rank", r.rank}};
  j["trace"] = {{"iterations", r.iterations},
                {"final_residual", r.final_residual},
                {"termination", r.termination},
                {"final_affine_residual", r.final_affine_residual},
                {"final_sparsity_distance", r.final_sparsity_distance},
                {"limit_point", r.limit_point}};
  j["certificate"] = r.certificate ? *r.certificate : nlohmann::json(nullptr);
  if (r.geometric_fit)
    j["observed_rate"] = {{"geometric_fit", *r.geometric_fit},
                          {"usable_steps", r.usable_steps.value_or(0)}};
  else
    j["observed_rate"] = nullptr;
  if (r.guarantee_holds)
    j["guarantee"] = {{"holds", *r.guarantee_holds},
                      {"envelope_violations", r.envelope_violations.value_or(0)}};
  else
    j["guarantee"] = nullptr;
  return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.instance_path = j.at("instance").at("path").get<std::string>();
  r.n = j.at("instance").at("n").get<int>();
  r.m_rows = j.at("instance").at("m").get<int>();
  r.s = j.at("instance").at("s").get<int>();
  r.rank = j.at("instance").at("rank").get<int>();
  r.iterations = j.at("trace").at("iterations").get<int>();
  r.final_residual = j.at("trace").at("final_residual").get<double>();
  r.termination = j.at("trace").at("termination").get<std::string>();
  r.final_affine_residual = j.at("trace").at("final_affine_residual").get<double>();
  r.final_sparsity_distance = j.at("trace").at("final_sparsity_distance").get<double>();
  r.limit_point = j.at("trace").at("limit_point").get<std::vector<double>>();
  if (!j.at("certificate").is_null()) r.certificate = j.at("certificate");
  if (!j.at("observed_rate").is_null()) {
    r.geometric_fit = j.at("observed_rate").at("geometric_fit").get<double>();
    r.usable_steps = j.at("observed_rate").at("usable_steps").get<int>();
  }
  if (!j.at("guarantee").is_null()) {
    r.guarantee_holds = j.at("guarantee").at("holds").get<bool>();
    r.envelope_violations = j.at("guarantee").at("envelope_violations").get<int>();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

/// Header is exactly `k,residual,dA_of_b,err_a,err_b`; the error columns are
/// left empty when the run had no reference point.
inline std::string trace_csv(const MapTrace& trace) {
  std::ostringstream out;
  out << "k,residual,dA_of_b,err_a,err_b\n";
  const bool with_errors = !trace.errors_a.empty();
  for (std::size_t k = 0; k < trace.residuals.size(); ++k) {
    out << k << ',' << fmt17(trace.residuals[k]) << ',' << fmt17(trace.sparsity_dist_b[k]) << ',';
    if (with_errors) out << fmt17(trace.errors_a[k]) << ',' << fmt17(trace.errors_b[k]);
    else out << ',';
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CommonOptions {
  double tol = 1e-12;
  int max_iters = 10000;
  std::uint64_t seed = 0;
  std::optional<std::string> trace_path;
  std::optional<std::string> json_path;
  std::optional<double> delta;
  int max_enum = 10000;
};

inline void emit_json(const nlohmann::json& j, const std::optional<std::string>& path,
                      std::ostream& out) {
  std::string text = j.dump(2) + "\n";
  if (path) write_text_file(*path, text);
  else out << text;
}

/// solve: run alternating projections on an instance file.
inline int run_solve(const std::string& instance_path, const std::string& start_spec,
                     const CommonOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    Instance inst = load_instance(instance_path);
    SparsityConfig cfg(inst.n(), inst.s, 0.0, opt.max_enum);
    AffineSet b = build_affine(inst.m, inst.p);

    Vector start;
    if (start_spec == "random") {
      Rng rng(opt.seed);
      start = gaussian_vector(rng, cfg.n);
    } else {
      start = parse_vector_spec(start_spec, cfg.n);
    }

    SolveOptions sopt;
    sopt.max_iters = opt.max_iters;
    sopt.residual_tol = opt.tol;
    sopt.record_trace = false;
    sopt.reference_point = inst.planted_solution;
    MapTrace trace = run_map(cfg, b, start, sopt);

    if (opt.trace_path) write_text_file(*opt.trace_path, trace_csv(trace));

    RunReport report;
    report.instance_path = instance_path;
    report.n = cfg.n;
    report.m_rows = inst.rows();
    report.s = cfg.s;
    report.rank = b.rank;
    report.iterations = trace.iterations;
    report.final_residual = trace.residuals.back();
    report.termination = to_string(trace.termination);
    report.final_affine_residual = trace.final_affine_residual;
    report.final_sparsity_distance = trace.final_sparsity_distance;
    report.limit_point.assign(trace.limit_point.data(),
                              trace.limit_point.data() + trace.limit_point.size());
    if (inst.planted_solution) {
      try {
        ObservedRate rate = observed_rate(trace);
        report.geometric_fit = rate.geometric_fit;
        report.usable_steps = rate.usable_steps;
      } catch (const std::runtime_error&) {
        // too few steps above the noise floor to fit a rate
      }
    }
    emit_json(report_to_json(report), opt.json_path, out);
    return trace.termination == Termination::kResidualMet ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

/// certify: compute the convergence certificate at a feasible point.
inline int run_certify(const std::string& instance_path, std::optional<std::string> at_spec,
                       const CommonOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    Instance inst = load_instance(instance_path);
    SparsityConfig cfg(inst.n(), inst.s, 0.0, opt.max_enum);
    AffineSet b = build_affine(inst.m, inst.p);

    Vector c;
    if (at_spec) c = parse_vector_spec(*at_spec, cfg.n);
    else if (inst.planted_solution) c = *inst.planted_solution;
    else throw std::runtime_error("no point to certify: pass --at or embed planted_solution");

    Certificate cert = certify(c, cfg, b, opt.delta);
    std::string text = certificate_json_text(cert);
    if (opt.json_path) write_text_file(*opt.json_path, text);
    else out << text;
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

/// gen: emit a seeded random instance.
inline int run_gen(int n, int m_rows, int s, int solution_sparsity, std::uint64_t seed,
                   const std::optional<std::string>& out_path, std::ostream& out,
                   std::ostream& err) {
  try {
    Instance inst = generate_instance(n, m_rows, s, solution_sparsity, seed);
    std::string text = instance_to_json(inst).dump(2) + "\n";
    if (out_path) write_text_file(*out_path, text);
    else out << text;
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// The worked 3-dimensional example: M = [[1,1,1],[1,1,0]], p = (1,1), s = 1.
// Its two solutions are (1,0,0) and (0,1,0); the certified rate is exactly
// 1/2 and observed error ratios match it to near machine precision.
// ---------------------------------------------------------------------------

inline Instance worked_example_instance() {
  Instance inst;
  inst.m = Matrix(2, 3);
  inst.m << 1, 1, 1,
            1, 1, 0;
  inst.p = Vector(2);
  inst.p << 1, 1;
  inst.s = 1;
  return inst;
}

struct ExampleOutcome {
  Certificate cert_x;
  Certificate cert_y;
  std::vector<double> fits;
  int envelope_violations = 0;
  int max_iterations = 0;
  bool pass = false;
};

/// Certifies the worked example at both solutions and runs the iteration from
/// `starts` seeded random points inside the certified basin, checking every
/// observed rate against the certified 1/2.
inline ExampleOutcome run_example_checks(int starts, char solution, const CommonOptions& opt) {
  Instance inst = worked_example_instance();
  SparsityConfig cfg(3, 1, 0.0, opt.max_enum);
  AffineSet b = build_affine(inst.m, inst.p);

  Vector x_star(3), y_star(3);
  x_star << 1, 0, 0;
  y_star << 0, 1, 0;

  ExampleOutcome outcome;
  // delta = delta_bar reproduces the quoted basin radius exactly.
  outcome.cert_x = certify(x_star, cfg, b, delta_bar(x_star, cfg));
  outcome.cert_y = certify(y_star, cfg, b, delta_bar(y_star, cfg));

  const Certificate& cert = (solution == 'y') ? outcome.cert_y : outcome.cert_x;
  const Vector& center = (solution == 'y') ? y_star : x_star;

  bool pass = std::abs(outcome.cert_x.theta_bar - outcome.cert_y.theta_bar) <= 1e-14 &&
              std::abs(outcome.cert_x.delta_bar - outcome.cert_y.delta_bar) <= 1e-14;

  for (int i = 0; i < starts; ++i) {
    Rng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(i)));
    Vector b_init = center + random_in_ball(rng, 3, cert.basin_radius);

    SolveOptions sopt;
    sopt.max_iters = opt.max_iters;
    sopt.residual_tol = opt.tol;
    sopt.record_trace = true;
    sopt.reference_point = center;
    MapTrace trace = run_map(cfg, b, b_init, sopt);

    double fit = observed_rate(trace).geometric_fit;
    outcome.fits.push_back(fit);
    outcome.max_iterations = std::max(outcome.max_iterations, trace.iterations);
    EnvelopeCheck env = check_rate_envelope(trace, cert.theta_bar, cert.delta);
    outcome.envelope_violations += env.violations;
    if (std::abs(fit - 0.5) > 1e-3) pass = false;
    if (trace.termination != Termination::kResidualMet) pass = false;
  }
  outcome.pass = pass && outcome.envelope_violations == 0;
  return outcome;
}

/// example: reproduce the worked numbers end to end; exits 2 on any miss.
inline int run_example(int starts, char solution, const CommonOptions& opt, std::ostream& out,
                       std::ostream& err) {
  try {
    ExampleOutcome o = run_example_checks(starts, solution, opt);
    double fit_min = 1e300, fit_max = -1e300, fit_sum = 0;
    for (double f : o.fits) {
      fit_min = std::min(fit_min, f);
      fit_max = std::max(fit_max, f);
      fit_sum += f;
    }
    out << "worked example: M = [[1,1,1],[1,1,0]], p = (1,1), s = 1\n";
    out << "certificate at (1,0,0): theta_bar=" << fmt17(o.cert_x.theta_bar)
        << " delta_bar=" << fmt17(o.cert_x.delta_bar)
        << " rate_bound=" << fmt17(o.cert_x.rate_bound)
        << " basin_radius=" << fmt17(o.cert_x.basin_radius) << "\n";
    out << "certificate at (0,1,0): theta_bar=" << fmt17(o.cert_y.theta_bar)
        << " delta_bar=" << fmt17(o.cert_y.delta_bar)
        << " rate_bound=" << fmt17(o.cert_y.rate_bound)
        << " basin_radius=" << fmt17(o.cert_y.basin_radius) << "\n";
    out << "transversal=" << (o.cert_x.transversal ? "true" : "false")
        << " classical_cq_holds=" << (o.cert_x.classical_cq_holds ? "true" : "false") << "\n";
    if (!o.fits.empty()) {
      out << "runs=" << o.fits.size() << " observed_fit min=" << fmt17(fit_min)
          << " max=" << fmt17(fit_max)
          << " mean=" << fmt17(fit_sum / static_cast<double>(o.fits.size()))
          << " max_iterations=" << o.max_iterations
          << " envelope_violations=" << o.envelope_violations << "\n";
    }
    if (opt.json_path) {
      nlohmann::json j;
      j["certificate_x"] = certificate_to_json(o.cert_x);
      j["certificate_y"] = certificate_to_json(o.cert_y);
      j["fits"] = o.fits;
      j["envelope_violations"] = o.envelope_violations;
      j["pass"] = o.pass;
      write_text_file(*opt.json_path, j.dump(2) + "\n");
    }
    out << (o.pass ? "PASS" : "FAIL") << ": observed rates within 1e-3 of 0.5\n";
    return o.pass ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchRow {
  int index = 0;
  std::uint64_t instance_seed = 0;
  double theta_bar = 0.0;
  double rate_bound = 0.0;
  double observed_fit = 0.0;
  bool fit_measured = false;
  int envelope_violations = 0;
  int iters_to_1e10 = -1;
  int iterations = 0;
  double final_residual = 0.0;
};

/// One bench run: generate instance index `i`, certify at the planted
/// solution, start the iteration at 0.99 of the basin boundary, and compare
/// the observed behavior against the certificate.
inline BenchRow bench_one(int n, int m_rows, int s, std::uint64_t base_seed, int index,
                          int max_enum = 10000) {
  BenchRow row;
  row.index = index;
  row.instance_seed = mix_seed(base_seed, 2 * static_cast<std::uint64_t>(index));

  Instance inst = generate_instance(n, m_rows, s, s, row.instance_seed);
  SparsityConfig cfg(n, s, 0.0, max_enum);
  AffineSet b = build_affine(inst.m, inst.p);
  const Vector& c = *inst.planted_solution;

  Certificate cert = certify(c, cfg, b);
  row.theta_bar = cert.theta_bar;
  row.rate_bound = cert.rate_bound;

  Rng rng(mix_seed(base_seed, 2 * static_cast<std::uint64_t>(index) + 1));
  Vector b_init = c + 0.99 * cert.basin_radius * random_unit(rng, n);

  SolveOptions sopt;
  sopt.record_trace = true;
  sopt.reference_point = c;
  MapTrace trace = run_map(cfg, b, b_init, sopt);

  row.iterations = trace.iterations;
  row.final_residual = trace.residuals.back();
  for (std::size_t k = 0; k < trace.residuals.size(); ++k)
    if (trace.residuals[k] <= 1e-10) {
      row.iters_to_1e10 = static_cast<int>(k) + 1;
      break;
    }
  try {
    row.observed_fit = observed_rate(trace).geometric_fit;
    row.fit_measured = true;
  } catch (const std::runtime_error&) {
    row.observed_fit = 0.0;  // converged below the noise floor before a fit was possible
  }
  row.envelope_violations = check_rate_envelope(trace, cert.theta_bar, cert.delta).violations;
  return row;
}

/// bench: seeded batch of generated instances, one CSV row each plus an
/// aggregate. Exits 2 when any run violates its certificate.
inline int run_bench(int count, int n, int m_rows, int s, std::uint64_t seed,
                     const std::optional<std::string>& out_path, const CommonOptions& opt,
                     std::ostream& out, std::ostream& err) {
  try {
    if (count < 1) throw std::invalid_argument("bench: count must be >= 1");
    std::ostringstream csv;
    csv << "instance,seed,n,m,s,theta_bar,rate_bound,observed_fit,fit_measured,"
           "envelope_violations,iters_to_1e10,iterations,final_residual\n";
    bool ok = true;
    double fit_max = 0, theta_max = 0, residual_max = 0;
    long violations_total = 0, iters_sum = 0, reach_sum = 0;
    int measured = 0;
    for (int i = 0; i < count; ++i) {
      BenchRow row = bench_one(n, m_rows, s, seed, i, opt.max_enum);
      csv << row.index << ',' << row.instance_seed << ',' << n << ',' << m_rows << ',' << s
          << ',' << fmt17(row.theta_bar) << ',' << fmt17(row.rate_bound) << ','
          << fmt17(row.observed_fit) << ',' << (row.fit_measured ? 1 : 0) << ','
          << row.envelope_violations << ',' << row.iters_to_1e10 << ',' << row.iterations
          << ',' << fmt17(row.final_residual) << '\n';
      violations_total += row.envelope_violations;
      iters_sum += row.iterations;
      reach_sum += row.iters_to_1e10;
      theta_max = std::max(theta_max, row.theta_bar);
      fit_max = std::max(fit_max, row.observed_fit);
      residual_max = std::max(residual_max, row.final_residual);
      if (row.fit_measured) ++measured;
      if (row.envelope_violations > 0) ok = false;
      if (row.fit_measured && row.observed_fit > row.rate_bound + 1e-6) ok = false;
    }
    csv << "aggregate," << ',' << n << ',' << m_rows << ',' << s << ',' << fmt17(theta_max)
        << ',' << ',' << fmt17(fit_max) << ',' << measured << ',' << violations_total << ','
        << fmt17(static_cast<double>(reach_sum) / count) << ','
        << fmt17(static_cast<double>(iters_sum) / count) << ',' << fmt17(residual_max) << '\n';
    if (out_path) write_text_file(*out_path, csv.str());
    else out << csv.str();
    if (!ok) {
      err << "bench: certificate violated (envelope or rate bound); see CSV\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sparsemap::cli
