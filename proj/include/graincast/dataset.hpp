#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace graincast {

// One daily observation: four environmental inputs plus the grain
// temperature target. The timestamp is metadata only, never a feature.
struct GrainRecord {
    std::string timestamp; // ISO-8601 date, may be empty
    double warehouse_temp = 0.0;
    double warehouse_humidity = 0.0;
    double air_temp = 0.0;
    double air_humidity = 0.0;
    double avg_grain_temp = 0.0;
};

// Canonical feature order for grain data; load_csv and the synthetic
// generator both emit features in this order.
inline const std::vector<std::string>& grain_feature_names() {
    static const std::vector<std::string> names = {
        "warehouse_temp", "warehouse_humidity", "air_temp", "air_humidity"};
    return names;
}

// Row-major numeric dataset. d is arbitrary (4 for grain data).
struct Dataset {
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::vector<double> features; // n_rows * n_features, row-major
    std::vector<double> targets;  // length n_rows
    std::vector<std::string> feature_names;
    std::vector<std::string> timestamps; // empty or length n_rows

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * n_features, n_features};
    }
    double at(std::size_t i, std::size_t j) const {
        return features[i * n_features + j];
    }

    // Throws if shape or finiteness invariants are violated.
    void validate() const;
};

// 7 x 5 x 4 granary sensor array: 140 temperature readings.
struct SensorGrid {
    static constexpr std::size_t extent_x = 7;
    static constexpr std::size_t extent_y = 5;
    static constexpr std::size_t extent_z = 4; // vertical layers
    static constexpr std::size_t size = extent_x * extent_y * extent_z;

    std::array<double, size> readings{};

    double& at(std::size_t ix, std::size_t iy, std::size_t iz) {
        return readings[(iz * extent_y + iy) * extent_x + ix];
    }
    double at(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return readings[(iz * extent_y + iy) * extent_x + ix];
    }
};

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
};

// Reads the grain CSV schema (header
// timestamp,warehouse_temp,warehouse_humidity,air_temp,air_humidity,grain_temp;
// the timestamp column is optional, the others are matched by name).
// Rejects non-numeric or non-finite cells and humidities outside [0,100],
// citing the offending data row.
Dataset load_csv(const std::string& path);

// Writes the same schema; numbers are emitted with shortest round-trip
// formatting so write/read is lossless and byte-deterministic.
void save_csv(const Dataset& data, const std::string& path);

// Mean over all 140 readings. Layers have equal populations (35 sensors),
// so this equals the mean of the four per-layer means.
double aggregate_sensor_grid(const SensorGrid& grid);

// Seeded Fisher-Yates shuffle of row indices (xoshiro256** stream, swaps
// i = n-1..1 with j = below(i+1)); the first floor(train_fraction * n)
// shuffled indices form the train set, the rest the test set.
// The partition is a pure function of (n, seed).
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, const SplitSpec& spec);

// Row subset in the given index order (shared by split and resampling).
Dataset take_rows(const Dataset& data, std::span<const std::size_t> indices);

} // namespace graincast
