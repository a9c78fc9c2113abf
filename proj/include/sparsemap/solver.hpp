// Alternating projections between the sparsity set A and the affine set B:
//   a_k = P_A b_{k-1},   b_k = P_B a_k,   k = 0, 1, ...
// from a starting point b_{-1}, with full trace capture, stopping rules, and
// empirical rate extraction from the recorded errors.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparsemap/affine.hpp"
#include "sparsemap/sparsity.hpp"

namespace sparsemap {

struct SolveOptions {
  int max_iters = 10000;
  double residual_tol = 1e-12;  // on ||a_k - b_k||
  bool record_trace = false;    // store full iterates, not just scalars
  std::optional<Vector> reference_point;  // known solution for error tracking
};

enum class Termination { kResidualMet, kMaxIters, kStalled };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::kResidualMet: return "residual_met";
    case Termination::kMaxIters: return "max_iters";
    case Termination::kStalled: return "stalled";
  }
  return "unknown";
}

struct MapTrace {
  std::vector<Vector> a_iterates;  // filled only when record_trace
  std::vector<Vector> b_iterates;
  std::vector<double> residuals;        // ||a_k - b_k||
  std::vector<double> sparsity_dist_b;  // d_A(b_k)
  std::vector<double> errors_a;         // ||a_k - c||, when a reference c is set
  std::vector<double> errors_b;         // ||b_k - c||
  std::vector<double> a_error_ratios;   // errors_a[k+1] / errors_a[k]
  std::vector<double> b_error_ratios;
  Termination termination = Termination::kMaxIters;
  int iterations = 0;  // number of recorded (a_k, b_k) pairs
  Vector limit_point;  // last b_k
  double final_affine_residual = 0.0;    // ||M * limit - p||
  double final_sparsity_distance = 0.0;  // d_A(limit)
};

/// Runs the alternating-projections iteration until the residual drops below
/// opts.residual_tol, max_iters pairs have been computed, or the residual has
/// failed to decrease by a relative 1e-16 for 50 consecutive steps (stall).
/// Fully deterministic: identical inputs give bitwise-identical traces.
inline MapTrace run_map(const SparsityConfig& cfg, const AffineSet& b_set,
                        const Vector& b_init, const SolveOptions& opts) {
  if (opts.max_iters < 1) throw std::invalid_argument("run_map: max_iters must be >= 1");
  if (!(opts.residual_tol > 0.0)) throw std::invalid_argument("run_map: residual_tol must be > 0");
  if (b_set.ambient_dim() != cfg.n)
    throw DimensionError("run_map: affine set and sparsity config disagree on n");
  require_dim(b_init, cfg.n, "run_map");
  require_finite(b_init, "run_map: b_init");
  if (opts.reference_point) require_dim(*opts.reference_point, cfg.n, "run_map: reference");

  constexpr int kStallWindow = 50;
  constexpr double kStallRelative = 1e-16;

  MapTrace trace;
  Vector b_prev = b_init;
  int stall = 0;
  for (int k = 0; k < opts.max_iters; ++k) {
    Vector a = project_sparse(b_prev, cfg);
    Vector b = project_affine(b_set, a);
    double residual = (a - b).norm();

    trace.residuals.push_back(residual);
    trace.sparsity_dist_b.push_back(dist_to_A(b, cfg));
    if (opts.record_trace) {
      trace.a_iterates.push_back(a);
      trace.b_iterates.push_back(b);
    }
    if (opts.reference_point) {
      trace.errors_a.push_back((a - *opts.reference_point).norm());
      trace.errors_b.push_back((b - *opts.reference_point).norm());
    }
    ++trace.iterations;
    b_prev = b;

    if (residual <= opts.residual_tol) {
      trace.termination = Termination::kResidualMet;
      break;
    }
    if (k > 0) {
      double prev = trace.residuals[static_cast<std::size_t>(k) - 1];
      stall = (residual > prev * (1.0 - kStallRelative)) ? stall + 1 : 0;
      if (stall >= kStallWindow) {
        trace.termination = Termination::kStalled;
        break;
      }
    }
  }

  for (std::size_t k = 0; k + 1 < trace.errors_a.size(); ++k) {
    trace.a_error_ratios.push_back(trace.errors_a[k] > 0.0
                                       ? trace.errors_a[k + 1] / trace.errors_a[k]
                                       : 0.0);
    trace.b_error_ratios.push_back(trace.errors_b[k] > 0.0
                                       ? trace.errors_b[k + 1] / trace.errors_b[k]
                                       : 0.0);
  }
  trace.limit_point = b_prev;
  trace.final_affine_residual = (b_set.m * b_prev - b_set.p).norm();
  trace.final_sparsity_distance = dist_to_A(b_prev, cfg);
  return trace;
}

/// Magnitudes below this are indistinguishable from double-precision noise
/// around the limit and are excluded from rate fitting.
inline constexpr double kErrorNoiseFloor = 1e-13;

struct ObservedRate {
  std::vector<double> per_step_ratios;  // ||b_{k+1} - c|| / ||b_k - c||
  double geometric_fit = 0.0;  // least-squares slope of log error vs k, exponentiated
  int usable_steps = 0;
};

/// Extracts the empirical linear rate from the recorded reference errors
/// ||b_k - c||. Requires at least five steps above the noise floor.
inline ObservedRate observed_rate(const MapTrace& trace) {
  std::vector<int> usable;
  for (std::size_t k = 0; k < trace.errors_b.size(); ++k)
    if (trace.errors_b[k] > kErrorNoiseFloor) usable.push_back(static_cast<int>(k));
  if (usable.size() < 5)
    throw std::runtime_error("observed_rate: fewer than 5 error samples above the noise floor");

  ObservedRate out;
  out.usable_steps = static_cast<int>(usable.size());
  for (std::size_t i = 0; i + 1 < usable.size(); ++i) {
    if (usable[i + 1] != usable[i] + 1) continue;
    out.per_step_ratios.push_back(trace.errors_b[static_cast<std::size_t>(usable[i + 1])] /
                                  trace.errors_b[static_cast<std::size_t>(usable[i])]);
  }

  // Least squares for log e_k = alpha + beta k over the usable steps.
  double sk = 0, sy = 0, skk = 0, sky = 0;
  for (int k : usable) {
    double y = std::log(trace.errors_b[static_cast<std::size_t>(k)]);
    sk += k;
    sy += y;
    skk += static_cast<double>(k) * k;
    sky += k * y;
  }
  double m = static_cast<double>(usable.size());
  double beta = (m * sky - sk * sy) / (m * skk - sk * sk);
  out.geometric_fit = std::exp(beta);
  return out;
}

struct EnvelopeCheck {
  bool holds = true;
  int violations = 0;
  int checked_steps = 0;
  double max_violation = 0.0;  // worst excess over the bound (0 when none)
};

/// Verifies the certified decay envelope against a recorded trace:
///   max(||a_k - cbar||, ||b_k - cbar||) <= (delta / (2 - theta)) * theta^{2(k-1)}
/// for every k >= 1, with cbar the trace's limit point and a 1e-9 additive
/// slack for round-off. The trace must have been recorded with iterates.
inline EnvelopeCheck check_rate_envelope(const MapTrace& trace, double theta, double delta,
                                         double slack = 1e-9) {
  if (trace.a_iterates.empty())
    throw std::invalid_argument("check_rate_envelope: trace has no recorded iterates");
  EnvelopeCheck out;
  const Vector& cbar = trace.limit_point;
  for (std::size_t k = 1; k < trace.a_iterates.size(); ++k) {
    double err = std::max((trace.a_iterates[k] - cbar).norm(),
                          (trace.b_iterates[k] - cbar).norm());
    double bound = delta / (2.0 - theta) *
                   std::pow(theta, 2.0 * (static_cast<double>(k) - 1.0));
    double excess = err - bound - slack;
    ++out.checked_steps;
    if (excess > 0.0) {
      out.holds = false;
      ++out.violations;
      out.max_violation = std::max(out.max_violation, excess);
    }
  }
  return out;
}

}  // namespace sparsemap
