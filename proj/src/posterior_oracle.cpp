#include "ebshrink/posterior_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebshrink/error.hpp"

namespace ebshrink {

std::vector<PosteriorMoments> posterior_oracle(std::span<const ArmSummary> arms,
                                               const OracleGrid& grid) {
  const std::size_t k = arms.size();
  if (k < 2) throw InvalidInput("posterior oracle needs at least 2 arms");
  const double sigma = arms.front().std_err;
  if (!(sigma > 0.0)) throw InvalidInput("posterior oracle needs a positive standard error");
  for (const auto& a : arms) {
    if (std::abs(a.std_err - sigma) > 1e-12 * sigma) {
      throw InvalidInput("posterior oracle requires equal standard errors across arms");
    }
  }
  if (grid.precision_cells < 10 || grid.location_cells < 10) {
    throw InvalidInput("posterior oracle grid is too small");
  }

  const double sigma_sq = sigma * sigma;
  const double kk = static_cast<double>(k);
  std::vector<double> means;
  for (const auto& a : arms) means.push_back(a.mean);
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= kk;
  double s2 = 0.0;
  for (double m : means) s2 += (m - grand) * (m - grand);

  // Posterior density of the precision u = 1/tau^2 (both Jacobians applied):
  //   u^((K - 5)/2) exp(-s^2 u / 2) for the flat prior, one power higher for 1/tau^2.
  const double power = grid.prior == DofStyle::KMinus3 ? (kk - 5.0) / 2.0 : (kk - 3.0) / 2.0;
  if (power <= -1.0) throw NumericalDegeneracy("posterior oracle: posterior is improper for this K");
  // Untruncated, u is Gamma(power + 1, rate s^2 / 2); beyond 40 sd past its
  // mean there is nothing left to integrate.
  double u_max = 1.0 / sigma_sq;
  if (s2 > 0.0 && power > -1.0) {
    const double rate = 0.5 * s2;
    const double shape = power + 1.0;
    u_max = std::min(u_max, (shape + 40.0 * std::sqrt(shape) + 40.0) / rate);
  }
  const double du = u_max / static_cast<double>(grid.precision_cells);

  std::vector<double> log_w(grid.precision_cells);
  double log_w_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.precision_cells; ++i) {
    const double u = (static_cast<double>(i) + 0.5) * du;
    log_w[i] = power * std::log(u) - 0.5 * s2 * u;
    log_w_max = std::max(log_w_max, log_w[i]);
  }

  const double dz = 2.0 * grid.location_half_width / static_cast<double>(grid.location_cells);
  std::vector<double> z_weight(grid.location_cells), z_value(grid.location_cells);
  double z_total = 0.0;
  for (std::size_t j = 0; j < grid.location_cells; ++j) {
    z_value[j] = -grid.location_half_width + (static_cast<double>(j) + 0.5) * dz;
    z_weight[j] = std::exp(-0.5 * z_value[j] * z_value[j]);
    z_total += z_weight[j];
  }
  const double z_edge = (z_weight.front() + z_weight.back()) / z_total;
  if (z_edge > grid.boundary_mass_tolerance) {
    throw NumericalDegeneracy("posterior oracle: location grid leaves mass at its boundary");
  }

  double total = 0.0, first_cell = 0.0, largest_cell = 0.0, cond_var = 0.0;
  std::vector<double> sum_c(k, 0.0), sum_c2(k, 0.0);
  for (std::size_t i = 0; i < grid.precision_cells; ++i) {
    const double wu = std::exp(log_w[i] - log_w_max);
    if (wu == 0.0) continue;
    const double u = (static_cast<double>(i) + 0.5) * du;
    const double keep = 1.0 - sigma_sq * u;
    const double loc_scale = std::sqrt(1.0 / (kk * u));
    if (i == 0) first_cell = wu;
    largest_cell = std::max(largest_cell, wu);
    total += wu;
    cond_var += wu * keep * sigma_sq;
    for (std::size_t j = 0; j < grid.location_cells; ++j) {
      const double w = wu * z_weight[j] / z_total;
      const double mu_offset = z_value[j] * loc_scale;
      for (std::size_t a = 0; a < k; ++a) {
        // conditional posterior mean of mu_k, relative to m-bar
        const double c = mu_offset + keep * (means[a] - grand - mu_offset);
        sum_c[a] += w * c;
        sum_c2[a] += w * c * c;
      }
    }
  }
  if (!(total > 0.0)) throw NumericalDegeneracy("posterior oracle: no posterior mass on grid");
  if (first_cell / total > grid.boundary_mass_tolerance) {
    throw NumericalDegeneracy(
        "posterior oracle: precision grid leaves mass near tau^2 = infinity");
  }
  if (largest_cell / total > 0.05) {
    throw NumericalDegeneracy("posterior oracle: precision grid too coarse for this posterior");
  }

  std::vector<PosteriorMoments> out(k);
  const double expected_var = cond_var / total;
  for (std::size_t a = 0; a < k; ++a) {
    const double m = sum_c[a] / total;
    out[a].mean = grand + m;
    out[a].variance = expected_var + sum_c2[a] / total - m * m;
  }
  return out;
}

}  // namespace ebshrink
