#include "fraudkit/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "fraudkit/exact_sum.hpp"

namespace fraudkit {

const char* to_string(AggregateFn fn) noexcept {
    switch (fn) {
    case AggregateFn::average: return "avg";
    case AggregateFn::sum: return "sum";
    case AggregateFn::count: return "count";
    }
    return "?";
}

AggregateFn parse_aggregate_fn(const std::string& name) {
    if (name == "avg" || name == "average" || name == "mean") return AggregateFn::average;
    if (name == "sum") return AggregateFn::sum;
    if (name == "count") return AggregateFn::count;
    fail(ErrorKind::invalid_argument, "unknown aggregate function '" + name + "'");
}

void AggregationSpec::validate() const {
    require(!group_by.empty(), ErrorKind::invalid_argument, "group-by column not set");
    require(!windows_hours.empty(), ErrorKind::invalid_argument, "no aggregation windows");
    require(!functions.empty(), ErrorKind::invalid_argument, "no aggregate functions");
    for (std::size_t i = 0; i < windows_hours.size(); ++i) {
        require(std::isfinite(windows_hours[i]) && windows_hours[i] > 0.0,
                ErrorKind::invalid_argument, "aggregation windows must be positive");
        require(i == 0 || windows_hours[i] > windows_hours[i - 1], ErrorKind::invalid_argument,
                "aggregation windows must be strictly ascending");
    }
}

std::string aggregate_column_name(const std::string& amount_column, double window_hours,
                                  AggregateFn fn) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, window_hours);
    return amount_column + "_" + to_string(fn) + "_" + std::string(buf, ptr) + "h";
}

LabeledDataset aggregate(const LabeledDataset& ds, const std::string& amount_column,
                         const AggregationSpec& spec) {
    spec.validate();
    require(ds.timestamps.has_value(), ErrorKind::missing_timestamps,
            "aggregation requires timestamps");
    const auto group_col = ds.feature_index(spec.group_by);
    require(group_col.has_value(), ErrorKind::missing_column,
            "missing group-by column '" + spec.group_by + "'");
    const auto amount_col = ds.feature_index(amount_column);
    require(amount_col.has_value(), ErrorKind::missing_column,
            "missing amount column '" + amount_column + "'");

    const auto& time = *ds.timestamps;
    const std::size_t n = ds.size();
    const std::size_t n_windows = spec.windows_hours.size();

    // per-window exact sums and counts for every row
    std::vector<double> sums(n * n_windows, 0.0);
    std::vector<std::size_t> counts(n * n_windows, 0);

    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[ds.features(i, *group_col)].push_back(i);

    for (auto& [key, rows] : groups) {
        std::stable_sort(rows.begin(), rows.end(),
                         [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
        for (std::size_t w = 0; w < n_windows; ++w) {
            const double horizon = spec.windows_hours[w];
            ExactSum running;
            std::size_t left = 0;  // first row still inside the window
            std::size_t right = 0; // first row not strictly earlier than the current one
            for (std::size_t q = 0; q < rows.size(); ++q) {
                const double now = time[rows[q]];
                while (right < rows.size() && time[rows[right]] < now) {
                    running.add(ds.features(rows[right], *amount_col));
                    ++right;
                }
                while (left < right && !((now - time[rows[left]]) / 3600.0 < horizon)) {
                    running.subtract(ds.features(rows[left], *amount_col));
                    ++left;
                }
                const std::size_t slot = rows[q] * n_windows + w;
                counts[slot] = right - left;
                sums[slot] = counts[slot] == 0 ? 0.0 : running.value();
            }
        }
    }

    LabeledDataset out;
    out.labels = ds.labels;
    out.timestamps = ds.timestamps;
    out.feature_names = ds.feature_names;
    const std::size_t extra = n_windows * spec.functions.size();
    for (double wh : spec.windows_hours)
        for (AggregateFn fn : spec.functions)
            out.feature_names.push_back(aggregate_column_name(amount_column, wh, fn));

    std::vector<double> data;
    data.reserve(n * (ds.n_features() + extra));
    for (std::size_t i = 0; i < n; ++i) {
        auto r = ds.features.row(i);
        data.insert(data.end(), r.begin(), r.end());
        for (std::size_t w = 0; w < n_windows; ++w) {
            const double s = sums[i * n_windows + w];
            const auto c = counts[i * n_windows + w];
            for (AggregateFn fn : spec.functions) {
                switch (fn) {
                case AggregateFn::average: data.push_back(c == 0 ? 0.0 : s / static_cast<double>(c)); break;
                case AggregateFn::sum: data.push_back(s); break;
                case AggregateFn::count: data.push_back(static_cast<double>(c)); break;
                }
            }
        }
    }
    out.features = Matrix(n, ds.n_features() + extra, std::move(data));
    return out;
}

} // namespace fraudkit
