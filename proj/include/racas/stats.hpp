#pragma once

#include <span>
#include <string>
#include <vector>

namespace racas {

enum class TTestKind { pooled, welch };

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;           // two-sided
    bool degenerate = false;  // zero variance: p is exactly 0 or 1 by mean difference
};

// Two-sample t-test; each sample needs n >= 2.
TTestResult t_test(std::span<const double> a, std::span<const double> b, TTestKind kind = TTestKind::pooled);

// Holm step-down adjustment; output is in input order.
std::vector<double> holm_adjust(std::span<const double> raw_p);

struct SampleGroup {
    std::string name;
    std::vector<double> values;
};

struct PairwiseTest {
    std::string a;
    std::string b;
    TTestResult test;
    double adjusted_p = 1.0;
};

// All pairs (i < j) tested, then Holm-adjusted as one family.
std::vector<PairwiseTest> t_test_holm(std::span<const SampleGroup> groups, TTestKind kind = TTestKind::pooled);

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n - 1)
    double std_error = 0.0;
};

SampleSummary summarize(std::span<const double> values);

// "m.mm $\pm$ s.ss", the table cell format.
std::string format_mean_se(double mean, double std_error);

}  // namespace racas
