#pragma once

#include <vector>

namespace fraudkit {

/// Exact running sum of doubles kept as non-overlapping partials (Shewchuk's
/// expansion arithmetic). add() and subtract() are exact; value() returns the
/// correctly rounded total, so the result never depends on the order in
/// which terms were added or removed.
class ExactSum {
public:
    void add(double x);
    void subtract(double x) { add(-x); }
    double value() const;
    void clear() noexcept { partials_.clear(); }

private:
    std::vector<double> partials_;
};

} // namespace fraudkit
