#pragma once

// Reference posterior moments for the homoskedastic normal-normal model
//
//   mu_k | mu, tau^2 ~ N(mu, tau^2 - sigma^2),   m_k | mu_k ~ N(mu_k, sigma^2)
//
// with a flat prior on mu and either p(tau^2) ~ 1 or p(tau^2) ~ 1/tau^2 on
// tau^2 in [sigma^2, inf). The joint posterior of (mu, tau^2) is integrated
// on a 2-D grid, keeping the truncation at sigma^2 that the closed-form
// approximations ignore. Slow; meant for validating the estimator.

#include <cstddef>
#include <span>
#include <vector>

#include "ebshrink/estimator.hpp"

namespace ebshrink {

struct OracleGrid {
  // Midpoint cells over the precision 1/tau^2 in (0, 1/sigma^2].
  std::size_t precision_cells = 20000;
  // Midpoint cells over the standardized location (mu - m-bar) / sqrt(tau^2 / K).
  std::size_t location_cells = 241;
  double location_half_width = 9.0;
  // Largest admissible posterior mass in an outermost cell.
  double boundary_mass_tolerance = 1e-6;
  // KMinus3 selects p(tau^2) ~ 1, KMinus1 selects p(tau^2) ~ 1/tau^2.
  DofStyle prior = DofStyle::KMinus3;
};

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Throws InvalidInput unless every arm has the same positive std_err, and
// NumericalDegeneracy when the grid leaves more than the tolerated mass at an
// open boundary or concentrates the posterior in too few cells.
std::vector<PosteriorMoments> posterior_oracle(std::span<const ArmSummary> arms,
                                               const OracleGrid& grid = {});

}  // namespace ebshrink
