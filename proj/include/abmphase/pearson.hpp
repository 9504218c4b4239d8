#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abmphase/rng.hpp"

namespace abmphase {

// Target moments for an initial-condition draw: mean, standard deviation,
// standardized skewness and kurtosis (a normal has kurtosis 3).
struct PearsonTarget {
    double mean = 0.0;
    double std = 1.0;
    double skewness = 0.0;
    double kurtosis = 3.0;
};

// Pearson-family member implied by a (skewness, kurtosis) pair.
enum class PearsonType {
    normal,        // 0
    beta,          // I (and symmetric II)
    gamma,         // III
    bounded_tail,  // IV
    inverse_gamma, // V
    beta_prime,    // VI
    student_t      // VII
};

// Feasibility boundary of the Pearson plane: kurtosis > skewness^2 + 1.
bool pearson_feasible(const PearsonTarget& t);

// Clamp an infeasible kurtosis up to skewness^2 + 1 + 1e-3.
PearsonTarget clamp_to_feasible(PearsonTarget t);

PearsonType classify_pearson(const PearsonTarget& t);

// Draw n i.i.d. samples from the Pearson-family member matching the four
// target moments. Throws std::invalid_argument on infeasible targets or
// std <= 0.
std::vector<double> sample_pearson(const PearsonTarget& t, std::size_t n, RngStream& rng);

// Low-level samplers, exposed for testing. All are exact (rejection-based
// where needed) and consume only the given stream.
namespace dist {

// log of a Gamma(shape, 1) variate; stable for very small shapes.
double gamma_log(double shape, RngStream& rng);
double gamma(double shape, double scale, RngStream& rng);
double beta(double a, double b, RngStream& rng);
double beta_prime(double a, double b, RngStream& rng);
double inverse_gamma(double shape, double scale, RngStream& rng);
double student_t(double dof, RngStream& rng);

}  // namespace dist

}  // namespace abmphase
