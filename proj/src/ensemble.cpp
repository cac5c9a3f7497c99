#include "graincast/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace graincast {

void ForestParams::validate() const {
    if (n_estimators < 1) throw std::runtime_error("n_estimators must be >= 1");
    tree_params.validate();
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
    if (n < 1) throw std::runtime_error("bootstrap_sample needs n >= 1");
    std::vector<std::size_t> draws(n);
    for (auto& d : draws) d = static_cast<std::size_t>(rng.below(n));
    return draws;
}

namespace {

// Impurity decrease of splitting `rows` on (feature, threshold), or
// nullopt when a child would fall below min_samples_leaf.
std::optional<double> split_decrease(const Dataset& data, std::span<const std::size_t> rows,
                                     int feature, double threshold, const TreeParams& params) {
    const std::size_t n = rows.size();
    const auto leaf_min = static_cast<std::size_t>(params.min_samples_leaf);
    const auto f = static_cast<std::size_t>(feature);

    if (params.criterion == Criterion::squared_error) {
        double left_sum = 0.0, total = 0.0;
        std::size_t n_left = 0;
        for (std::size_t i : rows) {
            const double y = data.targets[i];
            total += y;
            if (data.at(i, f) <= threshold) {
                left_sum += y;
                ++n_left;
            }
        }
        const std::size_t n_right = n - n_left;
        if (n_left < leaf_min || n_right < leaf_min) return std::nullopt;
        const double right_sum = total - left_sum;
        return (left_sum * left_sum / static_cast<double>(n_left) +
                right_sum * right_sum / static_cast<double>(n_right) -
                total * total / static_cast<double>(n)) /
               static_cast<double>(n);
    }

    std::vector<double> left, right;
    for (std::size_t i : rows)
        (data.at(i, f) <= threshold ? left : right).push_back(data.targets[i]);
    if (left.size() < leaf_min || right.size() < leaf_min) return std::nullopt;

    const auto mad = [](std::vector<double>& ys) {
        const std::size_t mid = ys.size() / 2;
        std::nth_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(mid), ys.end());
        double m = ys[mid];
        if (ys.size() % 2 == 0)
            m = 0.5 * (m + *std::max_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(mid)));
        double sad = 0.0;
        for (double y : ys) sad += std::abs(y - m);
        return sad / static_cast<double>(ys.size());
    };

    double node_sad = 0.0;
    {
        std::vector<double> all;
        all.reserve(n);
        for (std::size_t i : rows) all.push_back(data.targets[i]);
        node_sad = mad(all);
    }
    const double left_mad = mad(left);
    const double right_mad = mad(right);
    return node_sad - (static_cast<double>(left.size()) * left_mad +
                       static_cast<double>(right.size()) * right_mad) /
                          static_cast<double>(n);
}

// One uniformly random threshold per feature, drawn strictly inside the
// node's empirical range; the best-scoring legal candidate wins.
std::optional<SplitChoice> random_split(const Dataset& data, std::span<const std::size_t> rows,
                                        const TreeParams& params, Rng& rng) {
    std::optional<SplitChoice> best;
    for (std::size_t f = 0; f < data.n_features; ++f) {
        double lo = data.at(rows.front(), f), hi = lo;
        for (std::size_t i : rows) {
            const double v = data.at(i, f);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(lo < hi)) continue; // constant feature: no candidate

        double threshold = 0.0;
        bool drawn = false;
        for (int attempt = 0; attempt < 16 && !drawn; ++attempt) {
            threshold = lo + rng.uniform_open() * (hi - lo);
            drawn = threshold > lo && threshold < hi;
        }
        if (!drawn) continue; // adjacent doubles; nothing strictly inside

        const auto decrease = split_decrease(data, rows, static_cast<int>(f), threshold, params);
        if (decrease && *decrease > 0.0 && (!best || *decrease > best->impurity_decrease))
            best = SplitChoice{static_cast<int>(f), threshold, *decrease};
    }
    return best;
}

RegressionTree fit_member_tree(const Dataset& train, const ForestParams& params,
                               ForestKind kind, std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    if (kind == ForestKind::random_forest) {
        if (params.bootstrap) {
            const auto sample = bootstrap_sample(train.n_rows, rng);
            return fit_tree(take_rows(train, sample), params.tree_params);
        }
        return fit_tree(train, params.tree_params);
    }
    // extra trees: entire sample, randomized thresholds
    return grow_tree(train, params.tree_params,
                     [&rng](const Dataset& d, std::span<const std::size_t> rows,
                            const TreeParams& p) { return random_split(d, rows, p, rng); });
}

Forest fit_forest(const Dataset& train, const ForestParams& params, ForestKind kind,
                  int n_threads) {
    train.validate();
    params.validate();

    Forest forest;
    forest.kind = kind;
    forest.n_features = train.n_features;
    forest.params = params;
    const auto count = static_cast<std::size_t>(params.n_estimators);
    forest.per_tree_seeds.resize(count);
    for (std::size_t b = 0; b < count; ++b)
        forest.per_tree_seeds[b] = derive_stream(params.seed, b);

    forest.trees.resize(count);
    if (n_threads <= 1 || count == 1) {
        for (std::size_t b = 0; b < count; ++b)
            forest.trees[b] = fit_member_tree(train, params, kind, forest.per_tree_seeds[b]);
        return forest;
    }

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(n_threads), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t b = w; b < count; b += workers)
                forest.trees[b] = fit_member_tree(train, params, kind, forest.per_tree_seeds[b]);
        });
    }
    for (auto& t : pool) t.join();
    return forest;
}

} // namespace

Forest fit_random_forest(const Dataset& train, const ForestParams& params, int n_threads) {
    return fit_forest(train, params, ForestKind::random_forest, n_threads);
}

Forest fit_extra_trees(const Dataset& train, const ForestParams& params, int n_threads) {
    return fit_forest(train, params, ForestKind::extra_trees, n_threads);
}

double Forest::predict(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& tree : trees) sum += tree.predict(x);
    return sum / static_cast<double>(trees.size());
}

std::vector<double> Forest::predict_all(const Dataset& data) const {
    std::vector<double> out;
    out.reserve(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) out.push_back(predict(data.row(i)));
    return out;
}

double predict_forest(const Forest& forest, std::span<const double> x) {
    return forest.predict(x);
}

BoostedClassifier fit_adaboost_classifier(const Dataset& train, int rounds) {
    train.validate();
    if (rounds < 1) throw std::runtime_error("rounds must be >= 1");
    for (double y : train.targets)
        if (y != 1.0 && y != -1.0)
            throw std::runtime_error("adaboost classifier labels must be exactly +1 or -1");

    const std::size_t n = train.n_rows;
    BoostedClassifier model;
    model.n_features = train.n_features;
    BoostState& st = model.state;
    st.weights.assign(n, 1.0 / static_cast<double>(n));
    st.weight_history.push_back(st.weights);

    constexpr double eps = 1e-10;
    for (int t = 0; t < rounds; ++t) {
        auto [stump, error] = fit_stump(train, st.weights);

        if (error == 0.0) {
            // perfect learner: keep it with a capped weight and stop
            st.learners.push_back(stump);
            st.alphas.push_back(0.5 * std::log((1.0 - eps) / eps));
            st.errors.push_back(0.0);
            st.normalizers.push_back(1.0);
            ++st.rounds_completed;
            break;
        }
        if (error >= 0.5) break; // no better than chance: discard and stop

        const double alpha = 0.5 * std::log((1.0 - error) / error);
        std::vector<double> updated(n);
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto h = static_cast<double>(stump.predict(train.row(i)));
            updated[i] = st.weights[i] * std::exp(-alpha * train.targets[i] * h);
            z += updated[i];
        }
        for (double& w : updated) w /= z;

        st.learners.push_back(stump);
        st.alphas.push_back(alpha);
        st.errors.push_back(error);
        st.normalizers.push_back(z);
        st.weights = std::move(updated);
        st.weight_history.push_back(st.weights);
        ++st.rounds_completed;
    }
    return model;
}

double BoostedClassifier::decision(std::span<const double> x) const {
    double f = 0.0;
    for (std::size_t t = 0; t < state.learners.size(); ++t)
        f += state.alphas[t] * static_cast<double>(state.learners[t].predict(x));
    return f;
}

int BoostedClassifier::predict(std::span<const double> x) const {
    return decision(x) >= 0.0 ? +1 : -1;
}

std::string to_string(BoostLoss loss) {
    switch (loss) {
        case BoostLoss::linear: return "linear";
        case BoostLoss::square: return "square";
        case BoostLoss::exponential: return "exponential";
    }
    return "linear";
}

BoostLoss boost_loss_from_string(const std::string& name) {
    if (name == "linear") return BoostLoss::linear;
    if (name == "square") return BoostLoss::square;
    if (name == "exponential") return BoostLoss::exponential;
    throw std::runtime_error("unknown boost loss: " + name);
}

double weighted_median(std::span<const double> values, std::span<const double> weights) {
    if (values.empty() || values.size() != weights.size())
        throw std::runtime_error("weighted_median shape mismatch");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] != values[b] ? values[a] < values[b] : a < b;
    });
    double total = 0.0;
    for (double w : weights) total += w;
    double cum = 0.0;
    for (std::size_t k : order) {
        cum += weights[k];
        if (cum >= 0.5 * total) return values[k];
    }
    return values[order.back()];
}

BoostedRegressor fit_adaboost_r2(const Dataset& train, int n_estimators,
                                 const TreeParams& tree_params, std::uint64_t seed,
                                 BoostLoss loss) {
    train.validate();
    if (n_estimators < 1) throw std::runtime_error("n_estimators must be >= 1");
    tree_params.validate();

    const std::size_t n = train.n_rows;
    BoostedRegressor model;
    model.loss = loss;
    model.n_features = train.n_features;

    std::vector<double> dist(n, 1.0 / static_cast<double>(n));
    Rng rng(seed);
    std::vector<double> cumulative(n);

    for (int t = 0; t < n_estimators; ++t) {
        // weighted bootstrap: n draws from Categorical(dist)
        std::partial_sum(dist.begin(), dist.end(), cumulative.begin());
        cumulative.back() = 1.0;
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) {
            const double u = rng.uniform();
            s = static_cast<std::size_t>(
                std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        }
        RegressionTree tree = fit_tree(take_rows(train, sample), tree_params);

        // relative losses on the full training set
        std::vector<double> abs_err(n);
        double max_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            abs_err[i] = std::abs(train.targets[i] - tree.predict(train.row(i)));
            max_err = std::max(max_err, abs_err[i]);
        }
        if (max_err == 0.0) {
            model.learners.push_back(std::move(tree));
            model.learner_weights.push_back(std::log(1e10)); // capped perfect-fit weight
            break;
        }

        double avg_loss = 0.0;
        std::vector<double> rel(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = abs_err[i] / max_err;
            switch (loss) {
                case BoostLoss::linear: rel[i] = r; break;
                case BoostLoss::square: rel[i] = r * r; break;
                case BoostLoss::exponential: rel[i] = 1.0 - std::exp(-r); break;
            }
            avg_loss += dist[i] * rel[i];
        }

        if (avg_loss >= 0.5) {
            if (model.learners.empty()) {
                model.learners.push_back(std::move(tree));
                model.learner_weights.push_back(0.0);
            }
            break;
        }

        const double beta = avg_loss / (1.0 - avg_loss);
        model.learners.push_back(std::move(tree));
        model.learner_weights.push_back(std::log(1.0 / beta));

        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dist[i] *= std::pow(beta, 1.0 - rel[i]);
            sum += dist[i];
        }
        for (double& w : dist) w /= sum;
    }
    return model;
}

double BoostedRegressor::predict(std::span<const double> x) const {
    std::vector<double> preds;
    preds.reserve(learners.size());
    for (const auto& tree : learners) preds.push_back(tree.predict(x));
    return weighted_median(preds, learner_weights);
}

std::vector<double> BoostedRegressor::predict_all(const Dataset& data) const {
    std::vector<double> out;
    out.reserve(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) out.push_back(predict(data.row(i)));
    return out;
}

} // namespace graincast
