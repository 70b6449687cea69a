#include "sdsearch/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sdsearch/quadrature.hpp"

namespace sdsearch {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double normal_quantile(double p) {
    // Wichura (1988), algorithm AS 241, routine PPND16.
    if (!(p > 0.0 && p < 1.0)) {
        throw config_error("normal_quantile: p must lie in (0,1)");
    }
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

Distribution Distribution::normal(double mean, double var) {
    if (!(var > 0.0) || !std::isfinite(mean) || !std::isfinite(var)) {
        throw config_error("normal: variance must be positive and finite");
    }
    Distribution d;
    d.family_ = Family::normal;
    d.a_ = mean;
    d.b_ = var;
    return d;
}

Distribution Distribution::uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw config_error("uniform: need finite lo < hi");
    }
    Distribution d;
    d.family_ = Family::uniform;
    d.a_ = lo;
    d.b_ = hi;
    return d;
}

Distribution Distribution::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw config_error("exponential: rate must be positive and finite");
    }
    Distribution d;
    d.family_ = Family::exponential;
    d.a_ = rate;
    return d;
}

Distribution Distribution::discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size()) {
        throw config_error("discrete: values and probs must be non-empty, same size");
    }
    // Sort atoms ascending, merge duplicates, validate probabilities.
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    Distribution d;
    d.family_ = Family::discrete;
    double total = 0.0;
    for (const std::size_t i : idx) {
        if (!std::isfinite(values[i])) throw config_error("discrete: non-finite value");
        if (!(probs[i] >= 0.0)) throw config_error("discrete: negative probability");
        total += probs[i];
        if (!d.values_.empty() && values[i] == d.values_.back()) {
            d.probs_.back() += probs[i];
        } else {
            d.values_.push_back(values[i]);
            d.probs_.push_back(probs[i]);
        }
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw config_error("discrete: probabilities must sum to 1 (got " +
                           std::to_string(total) + ")");
    }
    for (double& p : d.probs_) p /= total;
    return d;
}

Distribution Distribution::point_mass(double value) {
    if (!std::isfinite(value)) throw config_error("point_mass: non-finite value");
    Distribution d;
    d.family_ = Family::point_mass;
    d.a_ = value;
    return d;
}

double Distribution::mean() const {
    switch (family_) {
        case Family::normal: return a_;
        case Family::uniform: return 0.5 * (a_ + b_);
        case Family::exponential: return 1.0 / a_;
        case Family::point_mass: return a_;
        case Family::discrete: {
            double m = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * probs_[i];
            return m;
        }
    }
    return 0.0;
}

double Distribution::variance() const {
    switch (family_) {
        case Family::normal: return b_;
        case Family::uniform: return (b_ - a_) * (b_ - a_) / 12.0;
        case Family::exponential: return 1.0 / (a_ * a_);
        case Family::point_mass: return 0.0;
        case Family::discrete: {
            const double m = mean();
            double v = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                v += (values_[i] - m) * (values_[i] - m) * probs_[i];
            }
            return v;
        }
    }
    return 0.0;
}

double Distribution::stddev() const { return std::sqrt(variance()); }

double Distribution::cdf(double x) const {
    switch (family_) {
        case Family::normal: return normal_cdf((x - a_) / std::sqrt(b_));
        case Family::uniform:
            if (x <= a_) return 0.0;
            if (x >= b_) return 1.0;
            return (x - a_) / (b_ - a_);
        case Family::exponential: return x <= 0.0 ? 0.0 : -std::expm1(-a_ * x);
        case Family::point_mass: return x >= a_ ? 1.0 : 0.0;
        case Family::discrete: {
            double p = 0.0;
            for (std::size_t i = 0; i < values_.size() && values_[i] <= x; ++i) {
                p += probs_[i];
            }
            return std::min(p, 1.0);
        }
    }
    return 0.0;
}

double Distribution::pdf(double x) const {
    switch (family_) {
        case Family::normal: {
            const double s = std::sqrt(b_);
            return normal_pdf((x - a_) / s) / s;
        }
        case Family::uniform: return (x < a_ || x > b_) ? 0.0 : 1.0 / (b_ - a_);
        case Family::exponential: return x < 0.0 ? 0.0 : a_ * std::exp(-a_ * x);
        default:
            throw model_error("pdf: not defined for discrete families");
    }
}

double Distribution::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
        // Discrete families have exact endpoints; allow the closed ends.
        if (is_discrete() && (p == 0.0 || p == 1.0)) {
            return p == 0.0 ? values().front() : values().back();
        }
        throw config_error("quantile: p must lie in (0,1)");
    }
    switch (family_) {
        case Family::normal: return a_ + std::sqrt(b_) * normal_quantile(p);
        case Family::uniform: return a_ + p * (b_ - a_);
        case Family::exponential: return -std::log1p(-p) / a_;
        case Family::point_mass: return a_;
        case Family::discrete: {
            double acc = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                acc += probs_[i];
                if (p <= acc) return values_[i];
            }
            return values_.back();
        }
    }
    return 0.0;
}

double Distribution::partial_expectation(double t) const {
    switch (family_) {
        case Family::normal: {
            const double s = std::sqrt(b_);
            const double a = (t - a_) / s;
            return s * (normal_pdf(a) - a * (1.0 - normal_cdf(a)));
        }
        case Family::uniform:
            if (t <= a_) return 0.5 * (a_ + b_) - t;
            if (t >= b_) return 0.0;
            return (b_ - t) * (b_ - t) / (2.0 * (b_ - a_));
        case Family::exponential:
            return t <= 0.0 ? 1.0 / a_ - t : std::exp(-a_ * t) / a_;
        case Family::point_mass: return std::max(0.0, a_ - t);
        case Family::discrete: {
            double v = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                if (values_[i] > t) v += (values_[i] - t) * probs_[i];
            }
            return v;
        }
    }
    return 0.0;
}

double Distribution::support_lo(double tail_mass) const {
    switch (family_) {
        case Family::normal: return quantile(tail_mass);
        case Family::uniform: return a_;
        case Family::exponential: return 0.0;
        case Family::point_mass: return a_;
        case Family::discrete: return values_.front();
    }
    return 0.0;
}

double Distribution::support_hi(double tail_mass) const {
    switch (family_) {
        case Family::normal: return quantile(1.0 - tail_mass);
        case Family::uniform: return b_;
        case Family::exponential: return quantile(1.0 - tail_mass);
        case Family::point_mass: return a_;
        case Family::discrete: return values_.back();
    }
    return 0.0;
}

const std::vector<double>& Distribution::values() const {
    if (family_ == Family::point_mass) {
        static thread_local std::vector<double> single;
        single.assign(1, a_);
        return single;
    }
    if (family_ != Family::discrete) {
        throw model_error("values: not a discrete family");
    }
    return values_;
}

const std::vector<double>& Distribution::probs() const {
    if (family_ == Family::point_mass) {
        static thread_local std::vector<double> single;
        single.assign(1, 1.0);
        return single;
    }
    if (family_ != Family::discrete) {
        throw model_error("probs: not a discrete family");
    }
    return probs_;
}

std::string Distribution::describe() const {
    std::ostringstream os;
    switch (family_) {
        case Family::normal: os << "normal(mean=" << a_ << ", var=" << b_ << ")"; break;
        case Family::uniform: os << "uniform(" << a_ << ", " << b_ << ")"; break;
        case Family::exponential: os << "exponential(rate=" << a_ << ")"; break;
        case Family::point_mass: os << "point_mass(" << a_ << ")"; break;
        case Family::discrete: {
            os << "discrete{";
            for (std::size_t i = 0; i < values_.size(); ++i) {
                if (i) os << ", ";
                os << values_[i] << ":" << probs_[i];
            }
            os << "}";
            break;
        }
    }
    return os.str();
}

bool Distribution::operator==(const Distribution& other) const {
    return family_ == other.family_ && a_ == other.a_ && b_ == other.b_ &&
           values_ == other.values_ && probs_ == other.probs_;
}

namespace {

// P(min(Y, xi) <= t)
double capped_cdf(const Distribution& y, double xi, double t) {
    return t < xi ? y.cdf(t) : 1.0;
}

}  // namespace

double tilde_w_cdf(const ValuationModel& m, double xi, double w, double quad_tol) {
    m.require_independent("tilde_w_cdf");
    if (!std::isfinite(xi)) throw config_error("tilde_w_cdf: xi must be finite");
    if (m.y.is_discrete()) {
        // Sum over Y atoms of P(X <= w - min(y, xi)).
        const auto& yv = m.y.values();
        const auto& yp = m.y.probs();
        double p = 0.0;
        for (std::size_t i = 0; i < yv.size(); ++i) {
            p += yp[i] * m.x.cdf(w - std::min(yv[i], xi));
        }
        return p;
    }
    if (m.x.is_discrete()) {
        const auto& xv = m.x.values();
        const auto& xp = m.x.probs();
        double p = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i) {
            p += xp[i] * capped_cdf(m.y, xi, w - xv[i]);
        }
        return p;
    }
    // Continuous Y: integrate over the uncapped region and add the atom that
    // min(Y, xi) places at xi.
    const double ylo = m.y.support_lo();
    const double yhi = m.y.support_hi();
    const double cut = std::min(xi, yhi);
    double p = 0.0;
    if (cut > ylo) {
        p = integrate([&](double y) { return m.x.cdf(w - y) * m.y.pdf(y); }, ylo, cut,
                      quad_tol);
    }
    p += (1.0 - m.y.cdf(cut)) * m.x.cdf(w - cut);
    // Mass below the lower truncation point: min(Y,xi)=Y there, bound the
    // contribution by the truncated tail mass itself.
    p += m.y.cdf(ylo) * m.x.cdf(w - ylo);
    return std::min(p, 1.0);
}

double sum_cdf(const ValuationModel& m, double t, double quad_tol) {
    m.require_independent("sum_cdf");
    if (m.y.is_discrete()) {
        const auto& yv = m.y.values();
        const auto& yp = m.y.probs();
        double p = 0.0;
        for (std::size_t i = 0; i < yv.size(); ++i) p += yp[i] * m.x.cdf(t - yv[i]);
        return p;
    }
    if (m.x.is_discrete()) {
        const auto& xv = m.x.values();
        const auto& xp = m.x.probs();
        double p = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i) p += xp[i] * m.y.cdf(t - xv[i]);
        return p;
    }
    if (m.x.family() == Family::normal && m.y.family() == Family::normal) {
        const double mu = m.x.mean() + m.y.mean();
        const double sd = std::sqrt(m.x.variance() + m.y.variance());
        return normal_cdf((t - mu) / sd);
    }
    const double ylo = m.y.support_lo();
    const double yhi = m.y.support_hi();
    double p = integrate([&](double y) { return m.x.cdf(t - y) * m.y.pdf(y); }, ylo, yhi,
                         quad_tol);
    p += m.y.cdf(ylo) * m.x.cdf(t - ylo);
    return std::min(p, 1.0);
}

double sum_partial_expectation(const ValuationModel& m, double t, double quad_tol) {
    m.require_independent("sum_partial_expectation");
    if (m.x.is_discrete()) {
        const auto& xv = m.x.values();
        const auto& xp = m.x.probs();
        double v = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i) {
            v += xp[i] * m.y.partial_expectation(t - xv[i]);
        }
        return v;
    }
    if (m.y.is_discrete()) {
        const auto& yv = m.y.values();
        const auto& yp = m.y.probs();
        double v = 0.0;
        for (std::size_t i = 0; i < yv.size(); ++i) {
            v += yp[i] * m.x.partial_expectation(t - yv[i]);
        }
        return v;
    }
    if (m.x.family() == Family::normal && m.y.family() == Family::normal) {
        ValuationModel s{Distribution::normal(m.x.mean() + m.y.mean(),
                                              m.x.variance() + m.y.variance()),
                         Distribution::point_mass(0.0), true};
        return s.x.partial_expectation(t);
    }
    const double xlo = m.x.support_lo();
    const double xhi = m.x.support_hi();
    return integrate([&](double x) { return m.y.partial_expectation(t - x) * m.x.pdf(x); },
                     xlo, xhi, quad_tol);
}

}  // namespace sdsearch
