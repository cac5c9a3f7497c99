#include "graincast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "graincast/rng.hpp"

namespace graincast {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const std::string text = trim(cell);
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw std::runtime_error("parse error: row " + std::to_string(row) + " column '" + column +
                                 "': not a number: '" + text + "'");
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error("parse error: row " + std::to_string(row) + " column '" + column +
                                 "': non-finite value");
    }
    return value;
}

void format_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

} // namespace

void Dataset::validate() const {
    if (n_rows < 1) throw std::runtime_error("empty dataset");
    if (n_features < 1) throw std::runtime_error("dataset has no features");
    if (features.size() != n_rows * n_features)
        throw std::runtime_error("feature matrix size mismatch");
    if (targets.size() != n_rows) throw std::runtime_error("target length mismatch");
    if (!feature_names.empty() && feature_names.size() != n_features)
        throw std::runtime_error("feature name count mismatch");
    if (!timestamps.empty() && timestamps.size() != n_rows)
        throw std::runtime_error("timestamp count mismatch");
    for (double v : features)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite feature value");
    for (double v : targets)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite target value");
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);

    const auto header = split_line(line);
    const std::vector<std::string> required = {"warehouse_temp", "warehouse_humidity",
                                               "air_temp", "air_humidity", "grain_temp"};
    std::vector<int> col_of(required.size(), -1);
    int timestamp_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (name == "timestamp") {
            timestamp_col = static_cast<int>(c);
            continue;
        }
        auto it = std::find(required.begin(), required.end(), name);
        if (it == required.end())
            throw std::runtime_error("schema error: unknown column '" + name + "'");
        col_of[static_cast<std::size_t>(it - required.begin())] = static_cast<int>(c);
    }
    for (std::size_t k = 0; k < required.size(); ++k)
        if (col_of[k] < 0)
            throw std::runtime_error("schema error: missing column '" + required[k] + "'");

    Dataset data;
    data.n_features = 4;
    data.feature_names = grain_feature_names();

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("parse error: row " + std::to_string(row) + ": expected " +
                                     std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
        GrainRecord rec;
        if (timestamp_col >= 0) rec.timestamp = trim(cells[static_cast<std::size_t>(timestamp_col)]);
        rec.warehouse_temp = parse_cell(cells[static_cast<std::size_t>(col_of[0])], row, required[0]);
        rec.warehouse_humidity = parse_cell(cells[static_cast<std::size_t>(col_of[1])], row, required[1]);
        rec.air_temp = parse_cell(cells[static_cast<std::size_t>(col_of[2])], row, required[2]);
        rec.air_humidity = parse_cell(cells[static_cast<std::size_t>(col_of[3])], row, required[3]);
        rec.avg_grain_temp = parse_cell(cells[static_cast<std::size_t>(col_of[4])], row, required[4]);

        for (auto [value, name] : {std::pair{rec.warehouse_humidity, "warehouse_humidity"},
                                   std::pair{rec.air_humidity, "air_humidity"}}) {
            if (value < 0.0 || value > 100.0) {
                std::string msg = "validation error: row " + std::to_string(row) + ": " + name + " ";
                format_double(msg, value);
                msg += " outside [0,100]";
                throw std::runtime_error(msg);
            }
        }

        data.features.insert(data.features.end(),
                             {rec.warehouse_temp, rec.warehouse_humidity, rec.air_temp, rec.air_humidity});
        data.targets.push_back(rec.avg_grain_temp);
        if (timestamp_col >= 0) data.timestamps.push_back(rec.timestamp);
    }
    data.n_rows = row;
    if (row == 0) throw std::runtime_error("empty dataset: " + path);
    data.validate();
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    data.validate();
    if (data.n_features != 4)
        throw std::runtime_error("save_csv expects the 4-feature grain schema");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);

    const bool with_time = !data.timestamps.empty();
    std::string text;
    if (with_time) text += "timestamp,";
    text += "warehouse_temp,warehouse_humidity,air_temp,air_humidity,grain_temp\n";
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        if (with_time) {
            text += data.timestamps[i];
            text += ',';
        }
        for (std::size_t j = 0; j < 4; ++j) {
            format_double(text, data.at(i, j));
            text += ',';
        }
        format_double(text, data.targets[i]);
        text += '\n';
    }
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

double aggregate_sensor_grid(const SensorGrid& grid) {
    double sum = 0.0;
    for (double r : grid.readings) {
        if (!std::isfinite(r)) throw std::runtime_error("non-finite sensor reading");
        sum += r;
    }
    return sum / static_cast<double>(SensorGrid::size);
}

Dataset take_rows(const Dataset& data, std::span<const std::size_t> indices) {
    Dataset out;
    out.n_rows = indices.size();
    out.n_features = data.n_features;
    out.feature_names = data.feature_names;
    out.features.reserve(indices.size() * data.n_features);
    out.targets.reserve(indices.size());
    if (!data.timestamps.empty()) out.timestamps.reserve(indices.size());
    for (std::size_t i : indices) {
        const auto r = data.row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.targets.push_back(data.targets[i]);
        if (!data.timestamps.empty()) out.timestamps.push_back(data.timestamps[i]);
    }
    return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, const SplitSpec& spec) {
    data.validate();
    if (data.n_rows < 2) throw std::runtime_error("train_test_split needs at least 2 rows");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw std::runtime_error("train_fraction must lie in (0,1)");

    const std::size_t n = data.n_rows;
    const auto n_train = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n)
        throw std::runtime_error("train_fraction yields an empty partition for n=" + std::to_string(n));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(spec.seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }

    const std::span<const std::size_t> all(order);
    return {take_rows(data, all.subspan(0, n_train)), take_rows(data, all.subspan(n_train))};
}

} // namespace graincast
