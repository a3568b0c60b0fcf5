#pragma once

namespace rarelab {

inline constexpr double kVacuumDensity = 1e-14;

struct GasParams {
    double gamma = 5.0 / 3.0;
    double R = 2.0 / 3.0;
    double A = 2.0 / 3.0;
    double alpha = 0.5;
    double mu1 = 1.0;
    double lambda1 = 1.0;
    double kappa1 = 1.0;

    // A = R = gamma - 1, the normalization under which e = theta.
    static GasParams normalized(double gamma, double alpha = 0.5, double mu1 = 1.0,
                                double lambda1 = 1.0, double kappa1 = 1.0);

    // Heat capacity at constant volume, R/(gamma-1).
    double cv() const { return R / (gamma - 1.0); }
    bool is_normalized() const;
    // Throws ConfigError naming the violated constraint.
    void validate() const;

    bool operator==(const GasParams&) const = default;
};

struct PrimState {
    double rho = 0.0;
    double u1 = 0.0;
    double theta = 0.0;

    // Applies the vacuum threshold: rho below kVacuumDensity becomes exactly (0, u1, 0).
    static PrimState make(double rho, double u1, double theta);
    bool is_vacuum() const { return rho < kVacuumDensity; }

    bool operator==(const PrimState&) const = default;
};

struct Transport {
    double mu = 0.0;
    double lambda = 0.0;
    double kappa = 0.0;
};

double pressure(const GasParams& g, double rho, double theta);
// A rho^gamma exp((gamma-1) S / R); the second closed form of the equation of state.
double pressure_from_entropy(const GasParams& g, double rho, double entropy);
double entropy(const GasParams& g, const PrimState& s);
// Temperature on the isentrope of the given entropy at density rho.
double temperature_on_isentrope(const GasParams& g, double rho, double entropy);
double sound_speed(const GasParams& g, const PrimState& s);
double sound_speed(const GasParams& g, double theta);
Transport transport(const GasParams& g, double theta);

inline double lambda1_speed(const GasParams& g, const PrimState& s) { return s.u1 - sound_speed(g, s); }
inline double lambda2_speed(const PrimState& s) { return s.u1; }
inline double lambda3_speed(const GasParams& g, const PrimState& s) { return s.u1 + sound_speed(g, s); }

}  // namespace rarelab
