#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "exoticflow/fields.hpp"
#include "exoticflow/manifold.hpp"
#include "exoticflow/tensor.hpp"

namespace exoticflow {

enum class Verdict { Bounded, BlowsUp, Inconclusive };
std::string verdict_name(Verdict v);

// Exponent thresholds for the verdict on the ‖ȳ‖·g map.
inline constexpr double kBoundedExponent = -0.1;
inline constexpr double kBlowupExponent = -0.5;

struct RegularityReport {
  std::string twist_label;
  std::vector<double> shells;     // r_k, strictly decreasing
  std::vector<double> d2_sup_g;   // g(ȳ) = h2⁻¹(ȳ/‖ȳ‖)
  std::vector<double> d2_sup_rg;  // ‖ȳ‖ g(ȳ)
  double growth_exponent_g = 0.0;
  double growth_exponent_rg = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  int samples_per_shell = 0;
  double fd_step_frac = 0.0;
  double floor = 0.0;  // roundoff level below which sups are fitted at the floor

  nlohmann::json to_json() const;
  // r, sup_g, sup_rg rows with a header line.
  std::string shell_csv() const;
};

// r_k = 2^{-k}, k = first..last.
std::vector<double> dyadic_shells(int first = 1, int last = 8);

// Second central differences of g and ‖ȳ‖g with step fd_step_frac · r on each shell.
RegularityReport probe_c2(const SphereDiffeo& h2, const std::vector<double>& shells, int samples_per_shell,
                          double fd_step_frac, std::uint64_t seed = 0);

// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

// Coefficient arrays of the second ȳ-derivatives of V∘h at a chart-B point.
// Shapes (with m1 = m+1, n1 = n+1):
//   1: (i, j, c, d)  m1·m1·n1·n1   ∂γ^i/∂ȳ^c · ∂γ^j/∂ȳ^d
//   2: (i, c, d)     m1·n1·n1      ∂²γ^i/∂ȳ^c∂ȳ^d
//   3: (j, r, c, d)  m1·n1·n1·n1   ∂γ^j/∂ȳ^d · ∂κ^r/∂ȳ^c
//   4: (j, r, c, d)  m1·n1·n1·n1   ∂γ^j/∂ȳ^c · ∂κ^r/∂ȳ^d
//   5: (r, s, c, d)  n1·n1·n1·n1   ∂κ^r/∂ȳ^c · ∂κ^s/∂ȳ^d
//   6: (r, c, d)     n1·n1·n1      ∂²κ^r/∂ȳ^c∂ȳ^d
Tensor koe_terms(const ChartPoint& p, const TwistedSphere& sphere, int which);

enum class Pair { XX, XY, YY };

// ∂²(V^ν ∘ h) over the chart-B coordinates (x̄, ȳ); indexed (ν, first, second).
Tensor d2_pullback_components(const AmbientVectorField& V, const ChartPoint& p, const TwistedSphere& sphere, Pair pair);

}  // namespace exoticflow
