#pragma once

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace shelab {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

/// One estimator with its uncertainty, oracle (when one exists) and verdict.
struct ReportEntry {
    std::string test;   // dotted name, e.g. "clt.variance"
    std::string params; // "t=0.5;N=16"
    double estimate = std::nan("");
    double se = std::nan("");
    std::optional<double> oracle;
    double tolerance = std::nan(""); // absolute, on |estimate - oracle| (or the one-sided margin)
    Verdict verdict = Verdict::inconclusive;
    std::size_t paths = 0;
    std::string resolution; // "dx=...,dt=..."
};

/// Two-sided verdict: pass iff |estimate - oracle| <= tolerance; inconclusive
/// when the Monte Carlo error alone exceeds the tolerance.
inline Verdict judge_two_sided(double estimate, double oracle, double tolerance, double se) {
    if (std::isnan(estimate)) return Verdict::inconclusive;
    if (se > tolerance) return Verdict::inconclusive;
    return std::abs(estimate - oracle) <= tolerance ? Verdict::pass : Verdict::fail;
}

/// One-sided verdict: pass iff estimate <= bound + tolerance.
inline Verdict judge_upper_bound(double estimate, double bound, double tolerance, double se) {
    if (std::isnan(estimate)) return Verdict::inconclusive;
    if (estimate <= bound + tolerance) return Verdict::pass;
    return se > tolerance ? Verdict::inconclusive : Verdict::fail;
}

struct EnsembleReport {
    std::vector<ReportEntry> entries;

    bool any_fail() const {
        for (const auto& e : entries)
            if (e.verdict == Verdict::fail) return true;
        return false;
    }
    bool any_inconclusive() const {
        for (const auto& e : entries)
            if (e.verdict == Verdict::inconclusive) return true;
        return false;
    }

    void append(EnsembleReport other) {
        for (auto& e : other.entries) entries.push_back(std::move(e));
    }

    /// CSV schema: test,params,estimate,se,oracle,verdict
    void write_csv(std::ostream& os) const {
        os << "test,params,estimate,se,oracle,verdict\n";
        for (const auto& e : entries) {
            os << e.test << ',' << e.params << ',';
            os << std::setprecision(12) << e.estimate << ',' << e.se << ',';
            if (e.oracle)
                os << std::setprecision(12) << *e.oracle;
            os << ',' << to_string(e.verdict) << '\n';
        }
    }

    void write_summary(std::ostream& os) const {
        std::size_t pass = 0, fail = 0, inconclusive = 0;
        for (const auto& e : entries) {
            switch (e.verdict) {
                case Verdict::pass: ++pass; break;
                case Verdict::fail: ++fail; break;
                case Verdict::inconclusive: ++inconclusive; break;
            }
        }
        os << "entries: " << entries.size() << "  pass: " << pass << "  fail: " << fail
           << "  inconclusive: " << inconclusive << "\n\n";
        for (const auto& e : entries) {
            std::ostringstream line;
            line << std::left << std::setw(34) << e.test << ' ' << std::setw(38) << e.params;
            line << std::setw(13) << to_string(e.verdict);
            line << "est=" << std::setprecision(6) << e.estimate << " se=" << e.se;
            if (e.oracle) line << " oracle=" << *e.oracle;
            line << " tol=" << e.tolerance << " paths=" << e.paths;
            if (!e.resolution.empty()) line << " [" << e.resolution << "]";
            os << line.str() << '\n';
        }
    }
};

} // namespace shelab
