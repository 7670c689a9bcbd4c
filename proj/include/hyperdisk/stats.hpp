#pragma once

// Regression and correlation tools for distance time series: OLS slopes,
// Pearson correlation, binned scatter summaries and lag-one Granger tallies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperdisk/error.hpp"

namespace hyperdisk {

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double incomplete_beta_cf(double a, double b, double x) {
    constexpr int kMaxIterations = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw DomainError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta requires a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta requires x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::incomplete_beta_cf(a, b, x) / a;
    return 1.0 - front * detail::incomplete_beta_cf(b, a, 1.0 - x) / b;
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw DomainError("t distribution needs positive degrees of freedom");
    if (std::isnan(t)) throw DomainError("t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

inline double student_t_cdf(double t, double df) {
    const double tail = 0.5 * student_t_two_sided_p(t, df);
    return t >= 0.0 ? 1.0 - tail : tail;
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double p_value = 1.0;
    double std_error = 0.0;
};

/// Simple regression of y on t with a two-sided t-test for the slope
/// (n - 2 degrees of freedom). Constant y yields slope 0 with p = 1.
inline OlsFit ols_slope(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw DataError("regression inputs differ in length");
    const std::size_t n = t.size();
    if (n < 3) throw DataError("regression needs at least three points");
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += t[i];
        my += y[i];
    }
    mt /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - mt) * (t[i] - mt);
        sty += (t[i] - mt) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (stt == 0.0) throw DomainError("regression predictor is constant");
    OlsFit fit;
    if (syy == 0.0) {
        fit.intercept = my;
        return fit;
    }
    fit.slope = sty / stt;
    fit.intercept = my - fit.slope * mt;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * t[i];
        rss += r * r;
    }
    const double dof = static_cast<double>(n - 2);
    fit.std_error = std::sqrt(rss / dof / stt);
    fit.p_value = fit.std_error == 0.0 ? 0.0 : student_t_two_sided_p(fit.slope / fit.std_error, dof);
    return fit;
}

struct LinearFit {
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> p_values;
    double rss = 0.0;
    std::size_t dof = 0;
    bool rank_deficient = false;
};

/// Least squares of y on the given design columns via Householder QR, with
/// per-coefficient two-sided t-tests. Rank-deficient designs report NaN
/// coefficients and p = 1.
inline LinearFit least_squares(const std::vector<std::vector<double>>& columns, std::span<const double> y) {
    const std::size_t p = columns.size();
    const std::size_t n = y.size();
    if (p == 0) throw DataError("least squares needs at least one column");
    for (const auto& c : columns) {
        if (c.size() != n) throw DataError("design column length differs from response");
    }
    if (n <= p) throw DataError("least squares needs more observations than coefficients");

    std::vector<std::vector<double>> a = columns;  // column-major working copy
    std::vector<double> qty(y.begin(), y.end());
    std::vector<double> column_norms(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        for (double v : a[k]) column_norms[k] = std::hypot(column_norms[k], v);
    }

    LinearFit fit;
    fit.dof = n - p;
    std::vector<double> diag(p);
    for (std::size_t k = 0; k < p; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm = std::hypot(norm, a[k][i]);
        // residual column (after earlier reflections) vanishing relative to
        // its original size means it is a combination of earlier columns
        if (!(norm > 1e-10 * column_norms[k])) {
            fit.rank_deficient = true;
            break;
        }
        if (a[k][k] < 0.0) norm = -norm;
        for (std::size_t i = k; i < n; ++i) a[k][i] /= norm;
        a[k][k] += 1.0;
        for (std::size_t j = k + 1; j < p; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += a[k][i] * a[j][i];
            s = -s / a[k][k];
            for (std::size_t i = k; i < n; ++i) a[j][i] += s * a[k][i];
        }
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += a[k][i] * qty[i];
        s = -s / a[k][k];
        for (std::size_t i = k; i < n; ++i) qty[i] += s * a[k][i];
        diag[k] = -norm;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (fit.rank_deficient) {
        fit.coefficients.assign(p, nan);
        fit.std_errors.assign(p, nan);
        fit.p_values.assign(p, 1.0);
        return fit;
    }

    // R has diag[] on the diagonal and a[j][i] (i < j) above it.
    auto r_at = [&](std::size_t i, std::size_t j) { return i == j ? diag[i] : a[j][i]; };
    fit.coefficients.assign(p, 0.0);
    for (std::size_t k = p; k-- > 0;) {
        double s = qty[k];
        for (std::size_t j = k + 1; j < p; ++j) s -= r_at(k, j) * fit.coefficients[j];
        fit.coefficients[k] = s / diag[k];
    }
    for (std::size_t i = p; i < n; ++i) fit.rss += qty[i] * qty[i];

    // diag((X'X)^-1) = row norms of R^-1
    std::vector<std::vector<double>> rinv(p, std::vector<double>(p, 0.0));
    for (std::size_t j = 0; j < p; ++j) {
        rinv[j][j] = 1.0 / diag[j];
        for (std::size_t i = j; i-- > 0;) {
            double s = 0.0;
            for (std::size_t k = i + 1; k <= j; ++k) s += r_at(i, k) * rinv[k][j];
            rinv[i][j] = -s / diag[i];
        }
    }
    const double sigma2 = fit.rss / static_cast<double>(fit.dof);
    fit.std_errors.resize(p);
    fit.p_values.resize(p);
    for (std::size_t i = 0; i < p; ++i) {
        double v = 0.0;
        for (std::size_t j = i; j < p; ++j) v += rinv[i][j] * rinv[i][j];
        fit.std_errors[i] = std::sqrt(sigma2 * v);
        if (fit.std_errors[i] == 0.0) {
            fit.p_values[i] = fit.coefficients[i] == 0.0 ? 1.0 : 0.0;
        } else {
            fit.p_values[i] = student_t_two_sided_p(fit.coefficients[i] / fit.std_errors[i],
                                                    static_cast<double>(fit.dof));
        }
    }
    return fit;
}

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
};

/// Sample Pearson correlation with a two-sided p-value from
/// t = r sqrt((n - 2) / (1 - r^2)).
inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("correlation inputs differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw DataError("correlation needs at least three points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw DomainError("correlation with a constant series");
    Correlation c;
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    if (std::fabs(c.r) >= 1.0) {
        c.p_value = 0.0;
        return c;
    }
    const double dof = static_cast<double>(n - 2);
    c.p_value = student_t_two_sided_p(c.r * std::sqrt(dof / (1.0 - c.r * c.r)), dof);
    return c;
}

struct Bin {
    double x_mid = 0.0;
    double y_mean = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins over [min x, max x] with the mean of y per bin. Empty
/// bins are omitted; identical x values form a single bin.
inline std::vector<Bin> bin_means(std::span<const double> x, std::span<const double> y, std::size_t nbins) {
    if (nbins < 1) throw ConfigError("bin count must be at least 1");
    if (x.empty()) throw DataError("cannot bin an empty sample");
    if (x.size() != y.size()) throw DataError("binning inputs differ in length");
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo) nbins = 1;
    const double width = (hi - lo) / static_cast<double>(nbins);
    std::vector<double> sums(nbins, 0.0);
    std::vector<std::size_t> counts(nbins, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t b = 0;
        if (width > 0.0) b = std::min(nbins - 1, static_cast<std::size_t>((x[i] - lo) / width));
        sums[b] += y[i];
        ++counts[b];
    }
    std::vector<Bin> out;
    for (std::size_t b = 0; b < nbins; ++b) {
        if (counts[b] == 0) continue;
        const double mid = width > 0.0 ? lo + (static_cast<double>(b) + 0.5) * width : lo;
        out.push_back({mid, sums[b] / static_cast<double>(counts[b]), counts[b]});
    }
    return out;
}

/// Social and semantic distances of one entity pair over time.
struct DistanceSeries {
    std::string first;
    std::string second;
    std::vector<double> years;
    std::vector<double> social;
    std::vector<double> semantic;
};

struct SlopePair {
    std::string first;
    std::string second;
    double beta_social = 0.0;
    double beta_semantic = 0.0;
};

inline SlopePair convergence_slopes(const DistanceSeries& s) {
    if (s.social.size() != s.years.size() || s.semantic.size() != s.years.size()) {
        throw DataError("distance series for " + s.first + "/" + s.second + " are not aligned with years");
    }
    return {s.first, s.second, ols_slope(s.years, s.social).slope, ols_slope(s.years, s.semantic).slope};
}

struct GrangerFit {
    double beta = 0.0;  // coefficient on the lagged predictor
    double p_value = 1.0;
};

/// Regresses y_t on [1, y_{t-1}, x_{t-1}] (or [1, x_{t-1}] without the
/// autoregressive term) and reports the lagged-x coefficient.
inline GrangerFit granger_fit(std::span<const double> x, std::span<const double> y, bool autoregressive = true) {
    if (x.size() != y.size()) throw DataError("Granger series differ in length");
    const std::size_t params = autoregressive ? 3 : 2;
    if (x.size() < params + 2) throw DataError("Granger series too short");
    const std::size_t m = x.size() - 1;
    std::vector<std::vector<double>> cols;
    cols.emplace_back(m, 1.0);
    if (autoregressive) cols.emplace_back(y.begin(), y.end() - 1);
    cols.emplace_back(x.begin(), x.end() - 1);
    const LinearFit fit = least_squares(cols, y.subspan(1));
    if (fit.rank_deficient) return {0.0, 1.0};
    return {fit.coefficients.back(), fit.p_values.back()};
}

inline std::size_t granger_min_length(bool autoregressive) { return autoregressive ? 5 : 4; }

struct GrangerTally {
    std::string direction;
    std::size_t n_regressions = 0;
    std::size_t positive_significant = 0;
    std::size_t significant = 0;
    double pct_positive_significant = 0.0;        // among all fitted regressions
    double pct_positive_among_significant = 0.0;  // among significant ones
    double alpha = 0.05;
    std::size_t excluded = 0;
};

/// Share of pairs whose lagged predictor coefficient is positive with
/// two-sided p < alpha. Pairs too short to leave a residual degree of
/// freedom are excluded and counted.
inline GrangerTally granger_tally(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                                  double alpha = 0.05, bool autoregressive = true,
                                  std::string direction = "x->y") {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    GrangerTally tally;
    tally.direction = std::move(direction);
    tally.alpha = alpha;
    for (const auto& [x, y] : pairs) {
        if (x.size() != y.size()) throw DataError("Granger series differ in length");
        if (x.size() < granger_min_length(autoregressive)) {
            ++tally.excluded;
            continue;
        }
        const GrangerFit fit = granger_fit(x, y, autoregressive);
        ++tally.n_regressions;
        if (fit.p_value < alpha) {
            ++tally.significant;
            if (fit.beta > 0.0) ++tally.positive_significant;
        }
    }
    if (tally.n_regressions > 0) {
        tally.pct_positive_significant =
            100.0 * static_cast<double>(tally.positive_significant) / static_cast<double>(tally.n_regressions);
    }
    if (tally.significant > 0) {
        tally.pct_positive_among_significant =
            100.0 * static_cast<double>(tally.positive_significant) / static_cast<double>(tally.significant);
    }
    return tally;
}

}  // namespace hyperdisk
