#pragma once

#include <span>

namespace soda {

/// Inverse standard normal CDF (Acklam's rational approximation, relative
/// error below 1.2e-9). Throws DomainError outside (0,1).
double normal_quantile(double p);

/// Shapiro-Wilk W statistic via the Royston (AS R94) coefficient
/// approximation, valid for 3 <= n <= 5000. A zero-range sample returns
/// W = 0 (the degenerate distribution is maximally non-normal for our
/// purposes). Throws DomainError for n < 3 or n > 5000.
double shapiro_wilk(std::span<const double> sample);

}  // namespace soda
