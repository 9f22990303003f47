#include "rapport/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "rapport/error.hpp"

namespace rapport {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw InsufficientData("mean of an empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw InsufficientData("variance needs at least 2 values");
    double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double student_t_two_sided(double t, double df) {
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(df);
    double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    return std::clamp(p, 0.0, 1.0);
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw InsufficientData("welch_t_test needs at least 2 values per sample");
    double ma = mean(a), mb = mean(b);
    double va = sample_variance(a), vb = sample_variance(b);
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double sa = va / na, sb = vb / nb;
    double se2 = sa + sb;
    WelchResult r;
    if (se2 == 0.0) {
        r.degenerate = true;
        r.df = na + nb - 2.0;
        if (ma == mb) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = ma > mb ? INFINITY : -INFINITY;
            r.p = 0.0;
        }
        return r;
    }
    r.t = (ma - mb) / std::sqrt(se2);
    double denom = 0.0;
    if (sa > 0.0) denom += sa * sa / (na - 1.0);
    if (sb > 0.0) denom += sb * sb / (nb - 1.0);
    r.df = se2 * se2 / denom;
    r.p = student_t_two_sided(r.t, r.df);
    return r;
}

CorrelationResult pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InsufficientData("pearson_r needs samples of equal length");
    if (x.size() < 3) throw InsufficientData("pearson_r needs at least 3 pairs");
    double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ConstantInput("pearson_r input is constant");
    CorrelationResult c;
    c.n = x.size();
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    double df = static_cast<double>(c.n) - 2.0;
    if (std::fabs(c.r) >= 1.0) {
        c.p = 0.0;
    } else {
        double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
        c.p = student_t_two_sided(t, df);
    }
    return c;
}

}  // namespace rapport
