#include "graincast/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace graincast {

std::string to_string(Criterion c) {
    return c == Criterion::squared_error ? "squared_error" : "absolute_error";
}

Criterion criterion_from_string(const std::string& name) {
    if (name == "squared_error") return Criterion::squared_error;
    if (name == "absolute_error") return Criterion::absolute_error;
    throw std::runtime_error("unknown criterion: " + name);
}

void TreeParams::validate() const {
    if (min_samples_split < 2) throw std::runtime_error("min_samples_split must be >= 2");
    if (min_samples_leaf < 1) throw std::runtime_error("min_samples_leaf must be >= 1");
    if (max_depth && *max_depth < 1) throw std::runtime_error("max_depth must be >= 1");
}

namespace {

double subset_mean(const Dataset& data, std::span<const std::size_t> rows) {
    double sum = 0.0;
    for (std::size_t i : rows) sum += data.targets[i];
    return sum / static_cast<double>(rows.size());
}

double subset_median(const Dataset& data, std::span<const std::size_t> rows) {
    std::vector<double> ys;
    ys.reserve(rows.size());
    for (std::size_t i : rows) ys.push_back(data.targets[i]);
    const std::size_t mid = ys.size() / 2;
    std::nth_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(mid), ys.end());
    double m = ys[mid];
    if (ys.size() % 2 == 0) {
        const double lo = *std::max_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (lo + m);
    }
    return m;
}

// Node statistics under the training criterion: the leaf prediction and
// the impurity (variance, or mean absolute deviation around the median).
struct NodeStats {
    double value = 0.0;
    double impurity = 0.0;
};

NodeStats node_stats(const Dataset& data, std::span<const std::size_t> rows, Criterion criterion) {
    NodeStats s;
    const auto n = static_cast<double>(rows.size());
    if (criterion == Criterion::squared_error) {
        s.value = subset_mean(data, rows);
        double sse = 0.0;
        for (std::size_t i : rows) {
            const double d = data.targets[i] - s.value;
            sse += d * d;
        }
        s.impurity = sse / n;
    } else {
        s.value = subset_median(data, rows);
        double sad = 0.0;
        for (std::size_t i : rows) sad += std::abs(data.targets[i] - s.value);
        s.impurity = sad / n;
    }
    return s;
}

bool targets_constant(const Dataset& data, std::span<const std::size_t> rows) {
    const double first = data.targets[rows.front()];
    for (std::size_t i : rows)
        if (data.targets[i] != first) return false;
    return true;
}

// Midpoint between two consecutive distinct values; falls back to the
// lower value if rounding collapses the midpoint onto the upper one, so
// that "x <= threshold" always leaves both sides non-empty.
double midpoint(double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    return mid < hi ? mid : lo;
}

std::optional<SplitChoice> best_split_squared(const Dataset& data,
                                              std::span<const std::size_t> rows,
                                              const TreeParams& params) {
    const std::size_t n = rows.size();
    const auto leaf_min = static_cast<std::size_t>(params.min_samples_leaf);
    double total = 0.0;
    for (std::size_t i : rows) total += data.targets[i];

    std::optional<SplitChoice> best;
    std::vector<std::pair<double, double>> vy(n); // (feature value, target)
    for (std::size_t f = 0; f < data.n_features; ++f) {
        for (std::size_t k = 0; k < n; ++k)
            vy[k] = {data.at(rows[k], f), data.targets[rows[k]]};
        std::sort(vy.begin(), vy.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double left_sum = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            left_sum += vy[k].second;
            if (vy[k].first == vy[k + 1].first) continue;
            const std::size_t n_left = k + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < leaf_min || n_right < leaf_min) continue;
            const double right_sum = total - left_sum;
            // variance decrease relative to this node:
            //   imp(node) - (nL/n) imp(L) - (nR/n) imp(R)
            // expanded into the sums-of-targets form.
            const double decrease =
                (left_sum * left_sum / static_cast<double>(n_left) +
                 right_sum * right_sum / static_cast<double>(n_right) -
                 total * total / static_cast<double>(n)) /
                static_cast<double>(n);
            if (decrease > 0.0 && (!best || decrease > best->impurity_decrease)) {
                best = SplitChoice{static_cast<int>(f), midpoint(vy[k].first, vy[k + 1].first),
                                   decrease};
            }
        }
    }
    return best;
}

double mad_around_median(std::vector<double>& ys) {
    const std::size_t mid = ys.size() / 2;
    std::nth_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(mid), ys.end());
    double m = ys[mid];
    if (ys.size() % 2 == 0) {
        const double lo = *std::max_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (lo + m);
    }
    double sad = 0.0;
    for (double y : ys) sad += std::abs(y - m);
    return sad / static_cast<double>(ys.size());
}

std::optional<SplitChoice> best_split_absolute(const Dataset& data,
                                               std::span<const std::size_t> rows,
                                               const TreeParams& params) {
    const std::size_t n = rows.size();
    const auto leaf_min = static_cast<std::size_t>(params.min_samples_leaf);
    const double node_impurity = node_stats(data, rows, Criterion::absolute_error).impurity;

    std::optional<SplitChoice> best;
    std::vector<std::pair<double, double>> vy(n);
    std::vector<double> side;
    for (std::size_t f = 0; f < data.n_features; ++f) {
        for (std::size_t k = 0; k < n; ++k)
            vy[k] = {data.at(rows[k], f), data.targets[rows[k]]};
        std::sort(vy.begin(), vy.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (vy[k].first == vy[k + 1].first) continue;
            const std::size_t n_left = k + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < leaf_min || n_right < leaf_min) continue;

            side.clear();
            for (std::size_t j = 0; j < n_left; ++j) side.push_back(vy[j].second);
            const double left_mad = mad_around_median(side);
            side.clear();
            for (std::size_t j = n_left; j < n; ++j) side.push_back(vy[j].second);
            const double right_mad = mad_around_median(side);

            const double decrease =
                node_impurity -
                (static_cast<double>(n_left) * left_mad + static_cast<double>(n_right) * right_mad) /
                    static_cast<double>(n);
            if (decrease > 0.0 && (!best || decrease > best->impurity_decrease)) {
                best = SplitChoice{static_cast<int>(f), midpoint(vy[k].first, vy[k + 1].first),
                                   decrease};
            }
        }
    }
    return best;
}

} // namespace

std::optional<SplitChoice> best_split(const Dataset& data,
                                      std::span<const std::size_t> rows,
                                      const TreeParams& params) {
    if (rows.empty()) throw std::runtime_error("best_split on empty subset");
    params.validate();
    if (targets_constant(data, rows)) return std::nullopt;
    if (rows.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf)) return std::nullopt;
    return params.criterion == Criterion::squared_error
               ? best_split_squared(data, rows, params)
               : best_split_absolute(data, rows, params);
}

RegressionTree grow_tree(const Dataset& data, const TreeParams& params,
                         const SplitChooser& chooser) {
    data.validate();
    params.validate();

    RegressionTree tree;
    tree.n_features = data.n_features;
    tree.params = params;

    std::vector<std::size_t> rows(data.n_rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    // Recursive growth; children are appended depth-first, left first.
    const std::function<int(std::span<std::size_t>, int)> build =
        [&](std::span<std::size_t> node_rows, int depth) -> int {
        const auto id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const NodeStats stats = node_stats(data, node_rows, params.criterion);
        tree.nodes[static_cast<std::size_t>(id)].value = stats.value;
        tree.nodes[static_cast<std::size_t>(id)].impurity = stats.impurity;
        tree.nodes[static_cast<std::size_t>(id)].n_samples = node_rows.size();

        const bool depth_ok = !params.max_depth || depth < *params.max_depth;
        if (!depth_ok || node_rows.size() < static_cast<std::size_t>(params.min_samples_split) ||
            stats.impurity == 0.0)
            return id;

        const auto choice = chooser(data, node_rows, params);
        if (!choice) return id;

        const int f = choice->feature;
        const double thr = choice->threshold;
        const auto mid = std::stable_partition(node_rows.begin(), node_rows.end(),
                                               [&](std::size_t i) {
                                                   return data.at(i, static_cast<std::size_t>(f)) <= thr;
                                               });
        const auto n_left = static_cast<std::size_t>(mid - node_rows.begin());
        if (n_left == 0 || n_left == node_rows.size())
            throw std::runtime_error("split produced an empty child");

        const int left = build(node_rows.subspan(0, n_left), depth + 1);
        const int right = build(node_rows.subspan(n_left), depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].feature = f;
        tree.nodes[static_cast<std::size_t>(id)].threshold = thr;
        tree.nodes[static_cast<std::size_t>(id)].left = left;
        tree.nodes[static_cast<std::size_t>(id)].right = right;
        return id;
    };

    build(std::span<std::size_t>(rows), 0);
    return tree;
}

RegressionTree fit_tree(const Dataset& data, const TreeParams& params) {
    return grow_tree(data, params,
                     [](const Dataset& d, std::span<const std::size_t> rows, const TreeParams& p) {
                         return best_split(d, rows, p);
                     });
}

std::size_t RegressionTree::leaf_index(std::span<const double> x) const {
    if (x.size() != n_features)
        throw std::runtime_error("prediction row has " + std::to_string(x.size()) +
                                 " features, tree expects " + std::to_string(n_features));
    std::size_t id = 0;
    while (!nodes[id].is_leaf()) {
        const auto& node = nodes[id];
        id = static_cast<std::size_t>(
            x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
    }
    return id;
}

double RegressionTree::predict(std::span<const double> x) const {
    return nodes[leaf_index(x)].value;
}

std::vector<double> RegressionTree::predict_all(const Dataset& data) const {
    std::vector<double> out;
    out.reserve(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) out.push_back(predict(data.row(i)));
    return out;
}

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    out.append(buf, ptr);
}

void dump_node(const RegressionTree& tree, const std::vector<std::string>& names,
               std::size_t id, int indent, std::string& out) {
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
    const auto& node = tree.nodes[id];
    if (node.is_leaf()) {
        out += "leaf value=";
        append_number(out, node.value);
        out += " n=" + std::to_string(node.n_samples) + "\n";
        return;
    }
    const auto f = static_cast<std::size_t>(node.feature);
    out += (f < names.size() ? names[f] : "x" + std::to_string(f));
    out += " <= ";
    append_number(out, node.threshold);
    out += " n=" + std::to_string(node.n_samples) + "\n";
    dump_node(tree, names, static_cast<std::size_t>(node.left), indent + 1, out);
    dump_node(tree, names, static_cast<std::size_t>(node.right), indent + 1, out);
}

} // namespace

std::string RegressionTree::dump(const std::vector<std::string>& feature_names) const {
    std::string out;
    dump_node(*this, feature_names, 0, 0, out);
    return out;
}

std::pair<WeightedStump, double> fit_stump(const Dataset& data,
                                           std::span<const double> weights) {
    data.validate();
    if (weights.size() != data.n_rows) throw std::runtime_error("weight count mismatch");
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::runtime_error("negative sample weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw std::runtime_error("sample weights must sum to 1");
    for (double y : data.targets)
        if (y != 1.0 && y != -1.0)
            throw std::runtime_error("stump labels must be exactly +1 or -1");

    const std::size_t n = data.n_rows;
    std::optional<WeightedStump> best;
    double best_error = 0.0;

    std::vector<double> values(n);
    for (std::size_t f = 0; f < data.n_features; ++f) {
        for (std::size_t i = 0; i < n; ++i) values[i] = data.at(i, f);
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());

        std::vector<double> thresholds;
        thresholds.push_back(sorted.front() - 1.0); // routes every sample right
        for (std::size_t k = 0; k + 1 < n; ++k)
            if (sorted[k] != sorted[k + 1])
                thresholds.push_back(0.5 * (sorted[k] + sorted[k + 1]));

        for (double thr : thresholds) {
            for (int polarity : {+1, -1}) {
                // weighted error accumulated in sample-index order
                double err = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const int pred = values[i] <= thr ? -polarity : polarity;
                    if (static_cast<double>(pred) != data.targets[i]) err += weights[i];
                }
                if (!best || err < best_error) {
                    best = WeightedStump{static_cast<int>(f), thr, polarity};
                    best_error = err;
                }
            }
        }
    }
    return {*best, best_error};
}

} // namespace graincast
