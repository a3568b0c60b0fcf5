#include "rarelab/gas_model.hpp"

#include <cmath>
#include <string>

#include "rarelab/errors.hpp"

namespace rarelab {

GasParams GasParams::normalized(double gamma, double alpha, double mu1, double lambda1, double kappa1) {
    GasParams g;
    g.gamma = gamma;
    g.R = gamma - 1.0;
    g.A = gamma - 1.0;
    g.alpha = alpha;
    g.mu1 = mu1;
    g.lambda1 = lambda1;
    g.kappa1 = kappa1;
    return g;
}

bool GasParams::is_normalized() const { return R == gamma - 1.0 && A == gamma - 1.0; }

void GasParams::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("gas: ") + what);
    };
    need(std::isfinite(gamma) && gamma > 1.0, "gamma must be > 1");
    need(std::isfinite(R) && R > 0.0, "R must be > 0");
    need(std::isfinite(A) && A > 0.0, "A must be > 0");
    need(std::isfinite(alpha) && alpha > 0.0, "alpha must be > 0");
    need(std::isfinite(mu1) && mu1 > 0.0, "mu1 must be > 0");
    need(std::isfinite(lambda1) && lambda1 > 0.0, "lambda1 must be > 0");
    need(std::isfinite(kappa1) && kappa1 > 0.0, "kappa1 must be > 0");
    need(mu1 + lambda1 >= 0.0, "mu1 + lambda1 must be >= 0");
}

PrimState PrimState::make(double rho, double u1, double theta) {
    if (rho < kVacuumDensity) return {0.0, u1, 0.0};
    return {rho, u1, theta};
}

double pressure(const GasParams& g, double rho, double theta) {
    if (!(rho >= 0.0) || !(theta >= 0.0))
        throw DomainError("pressure: negative density or temperature");
    return g.R * rho * theta;
}

double pressure_from_entropy(const GasParams& g, double rho, double entropy) {
    if (!(rho >= 0.0)) throw DomainError("pressure_from_entropy: negative density");
    return g.A * std::pow(rho, g.gamma) * std::exp((g.gamma - 1.0) * entropy / g.R);
}

double entropy(const GasParams& g, const PrimState& s) {
    if (!(s.rho > 0.0) || !(s.theta > 0.0))
        throw DomainError("entropy: undefined at vacuum or zero temperature");
    return g.R / (g.gamma - 1.0) * std::log(g.R * s.theta / (g.A * std::pow(s.rho, g.gamma - 1.0)));
}

double temperature_on_isentrope(const GasParams& g, double rho, double entropy) {
    if (!(rho >= 0.0)) throw DomainError("temperature_on_isentrope: negative density");
    return g.A / g.R * std::pow(rho, g.gamma - 1.0) * std::exp((g.gamma - 1.0) * entropy / g.R);
}

double sound_speed(const GasParams& g, double theta) {
    if (!(theta >= 0.0)) throw DomainError("sound_speed: negative temperature");
    return std::sqrt(g.gamma * g.R * theta);
}

double sound_speed(const GasParams& g, const PrimState& s) { return sound_speed(g, s.theta); }

Transport transport(const GasParams& g, double theta) {
    if (!(theta >= 0.0)) throw DomainError("transport: negative temperature");
    const double f = std::pow(theta, g.alpha);
    return {g.mu1 * f, g.lambda1 * f, g.kappa1 * f};
}

}  // namespace rarelab
