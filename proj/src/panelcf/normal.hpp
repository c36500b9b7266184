#pragma once

namespace panelcf {

double normal_cdf(double x);

// Inverse standard normal CDF; p in (0, 1).
double normal_quantile(double p);

// Upper theta/2 quantile, the usual two-sided critical value.
double z_two_sided(double theta);

}  // namespace panelcf
