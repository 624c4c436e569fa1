#pragma once

#include <limits>
#include <string>
#include <vector>

namespace kuramoto {

// Margin convention: margin = RHS - LHS of the checked inequality, so that
// pass <=> min margin >= -tol. A skipped check (hypotheses not met) passes
// vacuously but is flagged.
struct InequalityReport {
    std::string name;
    std::vector<double> times;
    std::vector<double> margins;
    double tol = 0.0;
    std::string tol_note;  // formula the tolerance was derived from
    bool skipped = false;
    std::string skip_reason;
    std::vector<std::string> notes;
    double floor = 0.0;  // discretization floor reported next to "zero" claims

    double min_margin() const {
        double m = std::numeric_limits<double>::infinity();
        for (double x : margins) m = std::min(m, x);
        return m;
    }
    bool pass() const {
        if (skipped) return true;
        if (margins.empty()) return true;
        return min_margin() >= -tol;
    }
    void add(double t, double margin) {
        times.push_back(t);
        margins.push_back(margin);
    }
};

}  // namespace kuramoto
