#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cpa {

// Degree distribution from the node perspective. pmf[d] = probability of
// degree d; entries are nonnegative and sum to 1 (enforced at build).
struct DegreeSpec {
  std::vector<double> pmf;

  DegreeSpec() = default;
  explicit DegreeSpec(std::vector<double> p) : pmf(std::move(p)) {
    double s = 0.0;
    for (double v : pmf) {
      if (v < 0.0) throw std::invalid_argument("DegreeSpec: negative mass");
      s += v;
    }
    if (pmf.empty() || std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("DegreeSpec: pmf must sum to 1");
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t d = 1; d < pmf.size(); ++d) m += static_cast<double>(d) * pmf[d];
    return m;
  }

  std::size_t max_degree() const { return pmf.empty() ? 0 : pmf.size() - 1; }

  // Truncated, renormalized Poisson. The cutoff sits 12 standard deviations
  // above the mean (at least 40), so the discarded tail is below 1e-12 and
  // the renormalization is numerically invisible.
  static DegreeSpec poisson(double mean_target, std::size_t min_cutoff = 40) {
    if (mean_target < 0.0) throw std::invalid_argument("poisson mean must be >= 0");
    const auto cutoff = static_cast<std::size_t>(
        std::max<double>(static_cast<double>(min_cutoff),
                         std::ceil(mean_target + 12.0 * std::sqrt(std::max(mean_target, 1.0)))));
    std::vector<double> p(cutoff + 1);
    // log-space recurrence avoids overflow for large means
    double logp = -mean_target;
    double s = 0.0;
    for (std::size_t d = 0; d <= cutoff; ++d) {
      p[d] = std::exp(logp);
      s += p[d];
      logp += std::log(mean_target) - std::log(static_cast<double>(d + 1));
      if (mean_target == 0.0) logp = -std::numeric_limits<double>::infinity();
    }
    for (auto& v : p) v /= s;
    return DegreeSpec(std::move(p));
  }
};

// Edge-perspective companion: lambda_d = d * pmf[d] / mean.
inline DegreeSpec edge_perspective(const DegreeSpec& node) {
  const double m = node.mean();
  if (m <= 0.0) throw std::invalid_argument("edge_perspective: zero-mean degree spec");
  std::vector<double> p(node.pmf.size(), 0.0);
  for (std::size_t d = 1; d < node.pmf.size(); ++d)
    p[d] = static_cast<double>(d) * node.pmf[d] / m;
  return DegreeSpec(std::move(p));
}

// Per-degree resource decode probability: entry j is the probability that a
// resource hosting j colliders decodes its last one once the other j-1 are
// cancelled. Degrees past the table reuse the last entry (the flat tail).
struct PiTable {
  std::vector<double> values;  // values[0] unused, semantics start at degree 1

  static PiTable ideal(std::size_t jmax = 1) { return PiTable{std::vector<double>(jmax + 1, 1.0)}; }

  double at(std::size_t j) const {
    if (values.size() <= 1) return 0.0;
    if (j < 1) throw std::invalid_argument("PiTable: degree must be >= 1");
    return j < values.size() ? values[j] : values.back();
  }
};

struct AotResult {
  double p_d = 0.0;        // 1 - q at the fixpoint (edge-level erasure reading)
  double q_inf = 1.0;
  double removal_inf = 0.0;  // per-edge removal probability at the fixpoint
  std::vector<double> q_trace;  // q_0 = 1 first, then one entry per iteration
  bool converged = false;
  int iterations = 0;
};

// Fixed-point recursion over the collision graph ensemble, edge perspective.
// psi, lambda: edge-perspective resource / user degree specs. Per round,
// an edge is removed if its resource decodes it: removal = sum_j psi_j
// pi_j (1-q)^(j-1); a user edge stays undecoded if none of its k-1 sibling
// edges were removed: q = sum_k lambda_k (1-removal)^(k-1). q_0 = 1 and the
// trace is non-increasing; both are asserted because any violation means
// the inputs were not valid degree specs.
inline AotResult aot_iterate(const DegreeSpec& psi, const DegreeSpec& lambda, const PiTable& pi,
                             double tol = 1e-10, int max_iter = 10000) {
  AotResult res;
  double q = 1.0;
  res.q_trace.push_back(q);
  double removal = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    removal = 0.0;
    double pow1mq = 1.0;  // (1-q)^(j-1)
    for (std::size_t j = 1; j < psi.pmf.size(); ++j) {
      removal += psi.pmf[j] * pi.at(j) * pow1mq;
      pow1mq *= (1.0 - q);
    }
    double qn = 0.0;
    double pow1mr = 1.0;  // (1-removal)^(k-1)
    for (std::size_t k = 1; k < lambda.pmf.size(); ++k) {
      qn += lambda.pmf[k] * pow1mr;
      pow1mr *= (1.0 - removal);
    }
    if (qn > q + 1e-12) throw std::logic_error("aot_iterate: q increased");
    res.q_trace.push_back(qn);
    res.iterations = it;
    if (std::abs(qn - q) < tol) {
      q = qn;
      res.converged = true;
      break;
    }
    q = qn;
  }
  res.q_inf = q;
  res.removal_inf = removal;
  res.p_d = 1.0 - q;
  return res;
}

// Which users count in the reported decode probability.
//  ActiveOnly: decoded / P(active at least once) -- matches how simulation
//              counts (users that never transmit are not failures).
//  IncludeAll: decoded / K, counting never-active users as undecoded.
enum class PdCounting { ActiveOnly, IncludeAll };

struct AotEvaluation {
  AotResult fixpoint;
  double p_d_include_all = 0.0;
  double p_d_active = 0.0;

  double p_d(PdCounting c = PdCounting::ActiveOnly) const {
    return c == PdCounting::ActiveOnly ? p_d_active : p_d_include_all;
  }
};

// Node-perspective finalization on top of the edge fixpoint: a user fails
// only if none of its k activations was removed, fail = sum_k Lambda_k
// (1-removal)^k. This captures degree-1 users, which the raw edge-level q
// treats as never-removed (the known single-edge degeneracy).
inline AotEvaluation aot_evaluate(const DegreeSpec& Psi, const DegreeSpec& Lambda,
                                  const PiTable& pi, double tol = 1e-10, int max_iter = 10000) {
  AotEvaluation ev;
  ev.fixpoint = aot_iterate(edge_perspective(Psi), edge_perspective(Lambda), pi, tol, max_iter);
  double fail = 0.0;
  double pow1mr = 1.0;
  for (std::size_t k = 0; k < Lambda.pmf.size(); ++k) {
    fail += Lambda.pmf[k] * pow1mr;
    pow1mr *= (1.0 - ev.fixpoint.removal_inf);
  }
  ev.p_d_include_all = 1.0 - fail;
  const double active_mass = 1.0 - Lambda.pmf[0];
  ev.p_d_active = active_mass > 0.0 ? ev.p_d_include_all / active_mass : 0.0;
  return ev;
}

// Ensemble degree specs induced by (alpha, beta): each resource collects
// Binomial(K, p_a/tau) ~ Poisson(beta) colliders with beta = p_a K / tau,
// and each user lands in Binomial(Delta, p_a) ~ Poisson(alpha * beta)
// resources since Delta * p_a = (alpha K / tau)(beta tau / K) = alpha beta.
inline std::pair<DegreeSpec, DegreeSpec> make_poisson_specs(double alpha, double beta) {
  return {DegreeSpec::poisson(beta), DegreeSpec::poisson(alpha * beta)};
}

enum class Normalization { PerChannelUse, PerSlotSection };

inline Normalization normalization_from_string(const std::string& s) {
  if (s == "eq5") return Normalization::PerChannelUse;
  if (s == "sec4") return Normalization::PerSlotSection;
  throw std::invalid_argument("unknown normalization: " + s);
}

inline std::string to_string(Normalization n) {
  return n == Normalization::PerChannelUse ? "eq5" : "sec4";
}

// Expected sum rate from an include-all decode probability.
//  PerChannelUse (default): p_d tau R (L - tau) / (alpha L), information per
//    channel use, the unit simulation gammas are measured in.
//  PerSlotSection: p_d R (L - tau) / alpha, per-slot payload bits; exactly
//    L / tau times the former.
inline double expected_throughput(double p_d_include_all, double alpha, double R, int L, int tau,
                                  Normalization norm = Normalization::PerChannelUse) {
  if (alpha <= 0.0) throw std::invalid_argument("expected_throughput: alpha must be > 0");
  const double per_slot = p_d_include_all / alpha * R * static_cast<double>(L - tau);
  if (norm == Normalization::PerSlotSection) return per_slot;
  return per_slot * static_cast<double>(tau) / static_cast<double>(L);
}

}  // namespace cpa
