#pragma once

namespace tmg {

// Regularized lower/upper incomplete gamma P(a,x), Q(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-squared distribution with df degrees of freedom.
double chisq_sf(double x, int df);

}  // namespace tmg
