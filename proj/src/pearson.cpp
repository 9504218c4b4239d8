#include "abmphase/pearson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abmphase {

namespace dist {

// Marsaglia-Tsang for shape >= 1; the shape < 1 case is boosted through
// Gamma(shape+1) * U^(1/shape), carried out in log space so near-zero
// shapes do not underflow.
double gamma_log(double shape, RngStream& rng) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma_log: shape must be positive");
    double boost = 0.0;
    if (shape < 1.0) {
        boost = std::log(rng.uniform()) / shape;
        shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v) + boost;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
            return std::log(d * v) + boost;
    }
}

double gamma(double shape, double scale, RngStream& rng) {
    return scale * std::exp(gamma_log(shape, rng));
}

double beta(double a, double b, RngStream& rng) {
    const double lg1 = gamma_log(a, rng);
    const double lg2 = gamma_log(b, rng);
    // G1 / (G1 + G2) without forming the (possibly underflowing) gammas.
    return 1.0 / (1.0 + std::exp(lg2 - lg1));
}

double beta_prime(double a, double b, RngStream& rng) {
    const double lg1 = gamma_log(a, rng);
    const double lg2 = gamma_log(b, rng);
    return std::exp(lg1 - lg2);
}

double inverse_gamma(double shape, double scale, RngStream& rng) {
    return scale * std::exp(-gamma_log(shape, rng));
}

double student_t(double dof, RngStream& rng) {
    const double z = rng.normal();
    const double w = 2.0 * std::exp(gamma_log(0.5 * dof, rng));  // chi^2_dof
    return z * std::sqrt(dof / w);
}

}  // namespace dist

bool pearson_feasible(const PearsonTarget& t) {
    return t.kurtosis > t.skewness * t.skewness + 1.0;
}

PearsonTarget clamp_to_feasible(PearsonTarget t) {
    const double floor = t.skewness * t.skewness + 1.0 + 1e-3;
    if (t.kurtosis < floor) t.kurtosis = floor;
    return t;
}

namespace {

// Coefficients of the Pearson ODE for a standardized variable,
//   f'/f = -(d*x + c1) / (c0 + c1*x + c2*x^2),
// kept undivided by the common factor d so the d = 0 line needs no
// special casing.
struct PearsonCoeffs {
    double c0, c1, c2, d;
};

PearsonCoeffs pearson_coeffs(double skew, double kurt) {
    const double b1 = skew * skew;
    const double b2 = kurt;
    return {4.0 * b2 - 3.0 * b1, skew * (b2 + 3.0), 2.0 * b2 - 3.0 * b1 - 6.0,
            10.0 * b2 - 12.0 * b1 - 18.0};
}

constexpr double kTol = 1e-10;

// Real roots of c0 + c1 x + c2 x^2 via the numerically stable formula.
// Caller guarantees c2 != 0 and a non-negative discriminant.
void quadratic_roots(const PearsonCoeffs& c, double& lo, double& hi) {
    const double disc = c.c1 * c.c1 - 4.0 * c.c0 * c.c2;
    const double s = std::sqrt(std::max(disc, 0.0));
    const double q = -0.5 * (c.c1 + (c.c1 >= 0.0 ? s : -s));
    double r1 = q / c.c2;
    double r2 = (q != 0.0) ? c.c0 / q : 0.0;
    lo = std::min(r1, r2);
    hi = std::max(r1, r2);
}

// Partial-fraction exponents of the density
//   f ~ |x - lo|^(-A) |x - hi|^(-B),
// from (d*x + c1) / (c2 (x - lo)(x - hi)) = A/(x - lo) + B/(x - hi).
struct RegionExponents {
    double lo, hi, A, B;
};

RegionExponents region_exponents(const PearsonCoeffs& c) {
    RegionExponents e{};
    quadratic_roots(c, e.lo, e.hi);
    e.A = (c.d * e.lo + c.c1) / (c.c2 * (e.lo - e.hi));
    e.B = (c.d * e.hi + c.c1) / (c.c2 * (e.hi - e.lo));
    return e;
}

// Types I/II: roots straddle the mean; a shifted Beta(1-A, 1-B) on (lo, hi).
double sample_beta_region(const PearsonCoeffs& c, RngStream& rng) {
    const auto e = region_exponents(c);
    const double alpha = 1.0 - e.A;
    const double beta = 1.0 - e.B;
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::runtime_error("pearson: beta exponents out of range");
    return e.lo + (e.hi - e.lo) * dist::beta(alpha, beta, rng);
}

// Type VI: roots on one side of the mean; a beta-prime variate on the
// root-free side.
double sample_beta_prime_region(const PearsonCoeffs& c, RngStream& rng) {
    const auto e = region_exponents(c);
    const double span = e.hi - e.lo;
    if (e.hi < 0.0) {
        // support (hi, inf): with y = (x-hi)/span, f ~ y^(-B) (1+y)^(-A)
        const double alpha = 1.0 - e.B;
        const double beta = e.A + e.B - 1.0;
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw std::runtime_error("pearson: beta-prime exponents out of range");
        return e.hi + span * dist::beta_prime(alpha, beta, rng);
    }
    // support (-inf, lo): with y = (lo-x)/span, f ~ y^(-A) (1+y)^(-B)
    const double alpha = 1.0 - e.A;
    const double beta = e.A + e.B - 1.0;
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::runtime_error("pearson: beta-prime exponents out of range");
    return e.lo - span * dist::beta_prime(alpha, beta, rng);
}

// Type III: linear denominator, a shifted/scaled gamma.
double sample_gamma_region(const PearsonCoeffs& c, RngStream& rng) {
    // w = c0 + c1 x is Gamma(shape = c0*d/c1^2, rate = d/c1^2) on the side
    // where w > 0.
    const double shape = c.c0 * c.d / (c.c1 * c.c1);
    const double rate = c.d / (c.c1 * c.c1);
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::runtime_error("pearson: gamma parameters out of range");
    const double w = dist::gamma(shape, 1.0 / rate, rng);
    return (w - c.c0) / c.c1;
}

// Type V: double root, a shifted inverse gamma.
double sample_inverse_gamma_region(const PearsonCoeffs& c, RngStream& rng) {
    const double root = -0.5 * c.c1 / c.c2;
    const double shape = c.d / c.c2 - 1.0;
    const double C = (c.d * root + c.c1) / c.c2;
    if (!(shape > 0.0)) throw std::runtime_error("pearson: inverse-gamma shape out of range");
    if (C < 0.0) return root + dist::inverse_gamma(shape, -C, rng);
    return root - dist::inverse_gamma(shape, C, rng);
}

// Type VII: symmetric heavy tail, a rescaled Student t.
double sample_student_region(const PearsonCoeffs& c, RngStream& rng) {
    const double dof = c.d / c.c2 - 1.0;
    const double scale = std::sqrt(c.c0 / (c.c2 * dof));
    return scale * dist::student_t(dof, rng);
}

// Type IV sampler. In the angle variable phi = atan((x - lam)/a) the
// density is g(phi) ~ cos(phi)^(2m-2) * exp(-v*phi) on (-pi/2, pi/2),
// which is unimodal; we reject from a piecewise-constant envelope.
class PearsonIVSampler {
public:
    explicit PearsonIVSampler(const PearsonCoeffs& c) {
        lam_ = -0.5 * c.c1 / c.c2;
        const double a2 = c.c0 / c.c2 - lam_ * lam_;
        if (!(a2 > 0.0)) throw std::runtime_error("pearson: type IV needs complex roots");
        a_ = std::sqrt(a2);
        const double two_m = c.d / c.c2;
        expo_ = two_m - 2.0;
        v_ = (c.d * lam_ + c.c1) / (c.c2 * a_);
        if (!(expo_ > -1.0)) throw std::runtime_error("pearson: type IV exponent out of range");

        const double half_pi = std::acos(-1.0) / 2.0;
        const double peak = std::atan(-v_ / std::max(expo_, 1e-300));
        cell_lo_.resize(kCells);
        cell_hi_.resize(kCells);
        log_env_.resize(kCells);
        cum_.resize(kCells);
        double total = 0.0;
        for (int i = 0; i < kCells; ++i) {
            const double lo = -half_pi + 2.0 * half_pi * i / kCells;
            const double hi = -half_pi + 2.0 * half_pi * (i + 1) / kCells;
            cell_lo_[i] = lo;
            cell_hi_[i] = hi;
            double m = std::max(log_g(lo), log_g(hi));
            if (peak > lo && peak < hi) m = std::max(m, log_g(peak));
            log_env_[i] = m;
        }
        const double gmax = *std::max_element(log_env_.begin(), log_env_.end());
        for (int i = 0; i < kCells; ++i) {
            total += std::exp(log_env_[i] - gmax);
            cum_[i] = total;
        }
        for (auto& w : cum_) w /= total;
    }

    double draw(RngStream& rng) const {
        for (;;) {
            const double u = rng.uniform();
            const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
            const int i = static_cast<int>(it - cum_.begin());
            const double phi = rng.uniform(cell_lo_[i], cell_hi_[i]);
            if (std::log(rng.uniform()) <= log_g(phi) - log_env_[i])
                return lam_ + a_ * std::tan(phi);
        }
    }

private:
    static constexpr int kCells = 128;

    double log_g(double phi) const {
        const double c = std::cos(phi);
        if (c <= 0.0) return -1e300;
        return expo_ * std::log(c) - v_ * phi;
    }

    double lam_, a_, expo_, v_;
    std::vector<double> cell_lo_, cell_hi_, log_env_, cum_;
};

}  // namespace

PearsonType classify_pearson(const PearsonTarget& t) {
    const double b2 = t.kurtosis;
    if (std::abs(t.skewness) < kTol && std::abs(b2 - 3.0) < kTol) return PearsonType::normal;
    const auto c = pearson_coeffs(t.skewness, b2);
    const double scale = std::abs(c.c0) + std::abs(c.c1) + std::abs(c.c2);
    if (std::abs(c.c2) < 1e-9 * scale) {
        if (std::abs(c.c1) < 1e-9 * scale) return PearsonType::normal;
        return PearsonType::gamma;
    }
    if (std::abs(c.c1) < 1e-9 * scale)
        return c.c2 < 0.0 ? PearsonType::beta : PearsonType::student_t;
    const double kappa = c.c1 * c.c1 / (4.0 * c.c0 * c.c2);
    if (kappa < 0.0) return PearsonType::beta;
    if (std::abs(kappa - 1.0) < 1e-9) return PearsonType::inverse_gamma;
    if (kappa < 1.0) return PearsonType::bounded_tail;
    return PearsonType::beta_prime;
}

std::vector<double> sample_pearson(const PearsonTarget& t, std::size_t n, RngStream& rng) {
    if (!(t.std > 0.0)) throw std::invalid_argument("sample_pearson: std must be positive");
    if (!pearson_feasible(t))
        throw std::invalid_argument(
            "sample_pearson: infeasible target, kurtosis must exceed skewness^2 + 1 "
            "(skewness=" + std::to_string(t.skewness) +
            ", kurtosis=" + std::to_string(t.kurtosis) + ")");

    const PearsonType type = classify_pearson(t);
    const auto c = pearson_coeffs(t.skewness, t.kurtosis);
    std::vector<double> out(n);

    auto fill = [&](auto&& draw_one) {
        for (auto& x : out) x = t.mean + t.std * draw_one();
    };

    switch (type) {
        case PearsonType::normal:
            fill([&] { return rng.normal(); });
            break;
        case PearsonType::beta:
            fill([&] { return sample_beta_region(c, rng); });
            break;
        case PearsonType::gamma:
            fill([&] { return sample_gamma_region(c, rng); });
            break;
        case PearsonType::bounded_tail: {
            PearsonIVSampler s(c);
            fill([&] { return s.draw(rng); });
            break;
        }
        case PearsonType::inverse_gamma:
            fill([&] { return sample_inverse_gamma_region(c, rng); });
            break;
        case PearsonType::beta_prime:
            fill([&] { return sample_beta_prime_region(c, rng); });
            break;
        case PearsonType::student_t:
            fill([&] { return sample_student_region(c, rng); });
            break;
    }
    return out;
}

}  // namespace abmphase
