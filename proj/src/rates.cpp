#include "rarelab/rates.hpp"

#include <cmath>

#include "rarelab/errors.hpp"

namespace rarelab {

FitResult fit_rate(const std::vector<double>& x, const std::vector<double>& y, RateModel model) {
    if (x.size() != y.size()) throw DomainError("fit_rate: x and y differ in length");
    if (x.size() < 3) throw DomainError("fit_rate: need at least 3 samples");
    std::vector<double> X(x.size()), Y(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.0) || !std::isfinite(y[i])) throw DomainError("fit_rate: values must be positive");
        switch (model) {
            case RateModel::power:
                if (!(x[i] > 0.0)) throw DomainError("fit_rate: power model needs x > 0");
                X[i] = std::log(x[i]);
                Y[i] = std::log(y[i]);
                break;
            case RateModel::exponential:
                X[i] = x[i];
                Y[i] = std::log(y[i]);
                break;
            case RateModel::power_log: {
                if (!(x[i] > 0.0) || x[i] == 1.0) throw DomainError("fit_rate: power_log needs x > 0, x != 1");
                X[i] = std::log(x[i]);
                Y[i] = std::log(y[i] / std::fabs(std::log(x[i])));
                break;
            }
        }
    }
    const double n = static_cast<double>(X.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        mx += X[i];
        my += Y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxy += (X[i] - mx) * (Y[i] - my);
        syy += (Y[i] - my) * (Y[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("fit_rate: abscissae are all equal");
    FitResult r;
    r.n = static_cast<int>(X.size());
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double e = Y[i] - (r.intercept + r.slope * X[i]);
        ss_res += e * e;
    }
    r.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return r;
}

std::string to_string(RateModel m) {
    switch (m) {
        case RateModel::power: return "power";
        case RateModel::exponential: return "exponential";
        case RateModel::power_log: return "power_log";
    }
    return "?";
}

ScalingExponents scaling_exponents(double gamma, double alpha) {
    ScalingExponents s;
    s.a = (alpha + 1.0) / (9.0 * gamma * (alpha + 2.0) - 3.0);
    s.Z = 1.0 / (4.0 * (alpha + 1.0) * gamma);
    return s;
}

}  // namespace rarelab
