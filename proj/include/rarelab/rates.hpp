#pragma once

#include <string>
#include <vector>

namespace rarelab {

enum class RateModel { power, exponential, power_log };

struct FitResult {
    double slope = 0.0;  // exponent (power, power_log) or rate (exponential)
    double intercept = 0.0;
    double r2 = 0.0;
    int n = 0;
};

// Least squares on transformed data:
//   power:       log y = s log x + c
//   exponential: log y = s x + c
//   power_log:   log(y / |log x|) = s log x + c   (the |log x| factor is fixed, only s is fitted)
FitResult fit_rate(const std::vector<double>& x, const std::vector<double>& y, RateModel model);

std::string to_string(RateModel m);

// Exponents of the vanishing-viscosity coupling: a = (alpha+1)/(9 gamma (alpha+2) - 3),
// Z = 1/(4 (alpha+1) gamma); nu = eps^(Z a) |log eps|, delta = eps^a.
struct ScalingExponents {
    double a = 0.0;
    double Z = 0.0;
};
ScalingExponents scaling_exponents(double gamma, double alpha);

}  // namespace rarelab
