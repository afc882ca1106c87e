#include "fraudkit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "fraudkit/rng.hpp"

namespace fraudkit {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::missing_file: return "missing file";
    case ErrorKind::missing_column: return "missing column";
    case ErrorKind::duplicate_column: return "duplicate column";
    case ErrorKind::non_numeric_cell: return "non-numeric cell";
    case ErrorKind::non_binary_label: return "non-binary label";
    case ErrorKind::missing_timestamps: return "missing timestamps";
    case ErrorKind::degenerate_range: return "degenerate time range";
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::io_failure: return "i/o failure";
    }
    return "unknown error";
}

std::size_t LabeledDataset::count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void LabeledDataset::validate() const {
    require(features.rows() == labels.size(), ErrorKind::dimension_mismatch,
            "feature rows (" + std::to_string(features.rows()) + ") != labels (" +
                std::to_string(labels.size()) + ")");
    if (timestamps) {
        require(timestamps->size() == labels.size(), ErrorKind::dimension_mismatch,
                "timestamps length does not match labels");
        for (double t : *timestamps)
            require(std::isfinite(t), ErrorKind::non_numeric_cell, "non-finite timestamp");
    }
    require(features.cols() >= 1, ErrorKind::invalid_argument, "dataset has no features");
    require(feature_names.empty() || feature_names.size() == features.cols(),
            ErrorKind::dimension_mismatch, "feature_names length does not match columns");
    for (int y : labels)
        require(y == 0 || y == 1, ErrorKind::non_binary_label,
                "non-binary label " + std::to_string(y));
    for (double v : features.data())
        require(std::isfinite(v), ErrorKind::non_numeric_cell, "non-finite feature value");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.feature_names = feature_names;
    std::vector<double> data;
    data.reserve(indices.size() * n_features());
    out.labels.reserve(indices.size());
    if (timestamps) out.timestamps.emplace().reserve(indices.size());
    for (std::size_t i : indices) {
        require(i < size(), ErrorKind::invalid_argument, "subset index out of range");
        auto r = features.row(i);
        data.insert(data.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
        if (timestamps) out.timestamps->push_back((*timestamps)[i]);
    }
    out.features = Matrix(indices.size(), n_features(), std::move(data));
    return out;
}

std::optional<std::size_t> LabeledDataset::feature_index(const std::string& name) const {
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - feature_names.begin());
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        else if (line[i] == ',' && !quoted) {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(line.substr(start)));
    return out;
}

std::optional<double> parse_real(std::string_view cell) {
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value))
        return std::nullopt;
    return value;
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

LabeledDataset parse_csv(const std::string& text, const CsvOptions& options,
                         const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    // header
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        for (auto f : split_fields(line)) header.emplace_back(f);
        break;
    }
    require(!header.empty(), ErrorKind::missing_column, source + ": empty file, no header row");

    auto locate = [&](const std::string& name) -> std::optional<std::size_t> {
        std::optional<std::size_t> found;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] != name) continue;
            require(!found, ErrorKind::duplicate_column,
                    source + ": duplicate column '" + name + "'");
            found = c;
        }
        return found;
    };
    const auto label_col = locate(options.label_column);
    require(label_col.has_value(), ErrorKind::missing_column,
            source + ": missing label column '" + options.label_column + "'");
    std::optional<std::size_t> time_col;
    if (options.time_column) {
        time_col = locate(*options.time_column);
        require(time_col.has_value(), ErrorKind::missing_column,
                source + ": missing time column '" + *options.time_column + "'");
        require(*time_col != *label_col, ErrorKind::invalid_argument,
                source + ": time column equals label column");
    }

    LabeledDataset ds;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == *label_col || (time_col && c == *time_col)) continue;
        feature_cols.push_back(c);
        ds.feature_names.push_back(header[c]);
    }
    require(!feature_cols.empty(), ErrorKind::invalid_argument,
            source + ": no feature columns besides label/time");

    std::vector<double> data;
    std::vector<double> times;
    std::vector<double> row(feature_cols.size());
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        require(fields.size() == header.size(), ErrorKind::dimension_mismatch,
                where(source, line_no) + ": expected " + std::to_string(header.size()) +
                    " fields, got " + std::to_string(fields.size()));

        const auto label_cell = fields[*label_col];
        int label = 0;
        auto [lp, lec] =
            std::from_chars(label_cell.data(), label_cell.data() + label_cell.size(), label);
        require(lec == std::errc{} && lp == label_cell.data() + label_cell.size(),
                ErrorKind::non_binary_label,
                where(source, line_no) + ": non-binary label '" + std::string(label_cell) + "'");
        require(label == 0 || label == 1, ErrorKind::non_binary_label,
                where(source, line_no) + ": non-binary label " + std::to_string(label));
        ds.labels.push_back(label);

        if (time_col) {
            auto t = parse_real(fields[*time_col]);
            require(t.has_value() && *t >= 0.0, ErrorKind::non_numeric_cell,
                    where(source, line_no) + ": time cell '" + std::string(fields[*time_col]) +
                        "' is not a non-negative number");
            times.push_back(*t);
        }
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            auto v = parse_real(fields[feature_cols[k]]);
            require(v.has_value(), ErrorKind::non_numeric_cell,
                    where(source, line_no) + ": non-numeric cell '" +
                        std::string(fields[feature_cols[k]]) + "' in column '" +
                        header[feature_cols[k]] + "'");
            row[k] = *v;
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    ds.features = Matrix(ds.labels.size(), feature_cols.size(), std::move(data));
    if (time_col) ds.timestamps = std::move(times);
    ds.validate();
    return ds;
}

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::missing_file, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), options, path.string());
}

std::string format_csv(const LabeledDataset& ds, const CsvOptions& options) {
    std::string out;
    for (std::size_t c = 0; c < ds.n_features(); ++c) {
        out += c < ds.feature_names.size() ? ds.feature_names[c] : "f" + std::to_string(c);
        out += ',';
    }
    out += options.label_column;
    if (ds.timestamps) out += ',' + options.time_column.value_or("Time");
    out += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.features.row(i)) {
            out += format_double(v);
            out += ',';
        }
        out += std::to_string(ds.labels[i]);
        if (ds.timestamps) out += ',' + format_double((*ds.timestamps)[i]);
        out += '\n';
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& ds,
               const CsvOptions& options) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::io_failure, "cannot write '" + path.string() + "'");
    out << format_csv(ds, options);
    require(out.good(), ErrorKind::io_failure, "write to '" + path.string() + "' failed");
}

std::vector<std::size_t> FoldAssignment::test_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] != fold) out.push_back(i);
    return out;
}

FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    require(k >= 2, ErrorKind::invalid_argument, "k-fold requires k >= 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    require(pos.size() >= static_cast<std::size_t>(k) && neg.size() >= static_cast<std::size_t>(k),
            ErrorKind::insufficient_data,
            "each class needs at least k=" + std::to_string(k) + " members (positives " +
                std::to_string(pos.size()) + ", negatives " + std::to_string(neg.size()) + ")");

    Rng rng(derive_seed(seed, 0x6b666f6c64ULL));
    shuffle(std::span<std::size_t>(pos), rng);
    shuffle(std::span<std::size_t>(neg), rng);

    FoldAssignment out;
    out.k = k;
    out.fold_of.assign(labels.size(), -1);
    std::size_t slot = 0;
    for (std::size_t i : pos) out.fold_of[i] = static_cast<int>(slot++ % k);
    for (std::size_t i : neg) out.fold_of[i] = static_cast<int>(slot++ % k);
    return out;
}

HoldoutSplit stratified_holdout(std::span<const int> labels, std::size_t test_count,
                                std::uint64_t seed) {
    const std::size_t n = labels.size();
    require(test_count > 0 && test_count < n, ErrorKind::invalid_argument,
            "test_count must be in (0, n)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < n; ++i) {
        require(labels[i] == 0 || labels[i] == 1, ErrorKind::non_binary_label,
                "non-binary label in holdout split");
        by_class[labels[i]].push_back(i);
    }

    // largest-remainder apportionment of the test rows to the two classes
    std::size_t take[2];
    double remainder[2];
    for (int c = 0; c < 2; ++c) {
        const double exact = static_cast<double>(by_class[c].size()) *
                             static_cast<double>(test_count) / static_cast<double>(n);
        take[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - std::floor(exact);
    }
    while (take[0] + take[1] < test_count) {
        const int c = remainder[1] > remainder[0] ? 1 : 0;
        ++take[c];
        remainder[c] = -1.0;
    }

    Rng rng(derive_seed(seed, 0x686f6c646f7574ULL));
    HoldoutSplit out;
    for (int c = 0; c < 2; ++c) {
        shuffle(std::span<std::size_t>(by_class[c]), rng);
        out.test.insert(out.test.end(), by_class[c].begin(), by_class[c].begin() + take[c]);
        out.train.insert(out.train.end(), by_class[c].begin() + take[c], by_class[c].end());
    }
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.train.begin(), out.train.end());
    return out;
}

std::vector<std::size_t> TimeFrameSplit::members(int frame) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < frame_of.size(); ++i)
        if (frame_of[i] == frame) out.push_back(i);
    return out;
}

TimeFrameSplit split_time_frames(const LabeledDataset& ds, int n_frames) {
    require(ds.timestamps.has_value(), ErrorKind::missing_timestamps,
            "time-frame split requires timestamps");
    require(n_frames >= 1, ErrorKind::invalid_argument, "n_frames must be >= 1");
    const auto& ts = *ds.timestamps;
    require(!ts.empty(), ErrorKind::degenerate_range, "no timestamps");
    const auto [lo_it, hi_it] = std::minmax_element(ts.begin(), ts.end());
    const double lo = *lo_it, hi = *hi_it;
    require(hi > lo, ErrorKind::degenerate_range, "max timestamp must exceed min timestamp");

    const double width = (hi - lo) / n_frames;
    TimeFrameSplit out;
    out.n_frames = n_frames;
    out.boundaries.resize(n_frames + 1);
    for (int f = 0; f < n_frames; ++f) out.boundaries[f] = lo + f * width;
    out.boundaries[n_frames] = hi;

    out.frame_of.resize(ts.size());
    // located against the stored boundaries so the two never disagree by rounding
    const auto first = out.boundaries.begin();
    const auto last_start = first + n_frames;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto f = std::upper_bound(first, last_start, ts[i]) - first - 1;
        out.frame_of[i] = static_cast<int>(std::clamp<std::ptrdiff_t>(f, 0, n_frames - 1));
    }
    return out;
}

} // namespace fraudkit
