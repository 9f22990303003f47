#pragma once

#include <cstddef>
#include <vector>

namespace rapport {

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  // two-sided
    // Both samples constant: p is 1 when their values agree and 0 otherwise.
    bool degenerate = false;
};

// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
// freedom. Throws InsufficientData when either sample has fewer than 2 values.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct CorrelationResult {
    double r = 0.0;
    double p = 1.0;  // two-sided, via t = r sqrt((n-2)/(1-r^2))
    std::size_t n = 0;
};

// Throws InsufficientData (n < 3 or unequal lengths) or ConstantInput.
CorrelationResult pearson_r(const std::vector<double>& x, const std::vector<double>& y);

// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

double mean(const std::vector<double>& xs);
// Unbiased (n - 1) sample variance.
double sample_variance(const std::vector<double>& xs);

}  // namespace rapport
