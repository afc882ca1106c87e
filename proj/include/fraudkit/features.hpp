#pragma once

#include <string>
#include <vector>

#include "fraudkit/dataset.hpp"

namespace fraudkit {

enum class AggregateFn { average, sum, count };

const char* to_string(AggregateFn fn) noexcept;
/// Accepts "avg"/"average", "sum", "count".
AggregateFn parse_aggregate_fn(const std::string& name);

struct AggregationSpec {
    std::string group_by;
    std::vector<double> windows_hours{1, 3, 6, 12, 18, 24, 72, 168};
    std::vector<AggregateFn> functions{AggregateFn::average, AggregateFn::sum, AggregateFn::count};

    void validate() const;
};

/// Name of the appended column for one (window, function) pair, e.g.
/// "Amount_avg_24h".
std::string aggregate_column_name(const std::string& amount_column, double window_hours,
                                  AggregateFn fn);

/// For every transaction i and every window t_p, aggregates the amounts of
/// transactions j in the same group with time_j < time_i and
/// (time_i - time_j) / 3600 < t_p. The current transaction and anything at the
/// same instant or later never contribute. Empty windows give 0 for every
/// function. Appends one feature per (window, function), windows outermost;
/// row order is unchanged.
LabeledDataset aggregate(const LabeledDataset& ds, const std::string& amount_column,
                         const AggregationSpec& spec);

} // namespace fraudkit
