#include "racas/stats.hpp"

#include "racas/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace racas {

SampleSummary summarize(std::span<const double> values) {
    SampleSummary s;
    s.n = values.size();
    if (s.n == 0) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.std_error = s.stddev / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

TTestResult t_test(std::span<const double> a, std::span<const double> b, TTestKind kind) {
    if (a.size() < 2 || b.size() < 2) throw Error("t-test needs at least two samples per group");
    const auto sa = summarize(a);
    const auto sb = summarize(b);
    const double na = static_cast<double>(sa.n), nb = static_cast<double>(sb.n);
    const double va = sa.stddev * sa.stddev, vb = sb.stddev * sb.stddev;

    TTestResult r;
    double se2 = 0.0;
    if (kind == TTestKind::pooled) {
        r.df = na + nb - 2.0;
        const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / r.df;
        se2 = pooled * (1.0 / na + 1.0 / nb);
    } else {
        const double qa = va / na, qb = vb / nb;
        se2 = qa + qb;
        r.df = se2 > 0.0 ? se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0)) : na + nb - 2.0;
    }

    const double diff = sa.mean - sb.mean;
    if (se2 <= 0.0) {
        r.degenerate = true;
        r.t = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
        r.p = diff == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = diff / std::sqrt(se2);
    const boost::math::students_t dist(r.df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
    return r;
}

std::vector<double> holm_adjust(std::span<const double> raw_p) {
    const std::size_t m = raw_p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return raw_p[i] < raw_p[j]; });

    std::vector<double> adjusted(m);
    double running = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double scaled = std::min(1.0, static_cast<double>(m - k) * raw_p[order[k]]);
        running = std::max(running, scaled);
        adjusted[order[k]] = running;
    }
    return adjusted;
}

std::vector<PairwiseTest> t_test_holm(std::span<const SampleGroup> groups, TTestKind kind) {
    std::vector<PairwiseTest> tests;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            tests.push_back({groups[i].name, groups[j].name, t_test(groups[i].values, groups[j].values, kind), 1.0});
        }
    }
    std::vector<double> raw;
    for (const auto& t : tests) raw.push_back(t.test.p);
    const auto adjusted = holm_adjust(raw);
    for (std::size_t k = 0; k < tests.size(); ++k) tests[k].adjusted_p = adjusted[k];
    return tests;
}

std::string format_mean_se(double mean, double std_error) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f $\\pm$ %.2f", mean, std_error);
    return buf;
}

}  // namespace racas
