#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graincast/dataset.hpp"
#include "graincast/rng.hpp"
#include "graincast/tree.hpp"

namespace graincast {

struct ForestParams {
    int n_estimators = 100;
    bool bootstrap = true; // ignored by extra trees (always full sample)
    TreeParams tree_params;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class ForestKind { random_forest, extra_trees };

struct Forest {
    ForestKind kind = ForestKind::random_forest;
    std::vector<RegressionTree> trees;
    std::vector<std::uint64_t> per_tree_seeds; // derive_stream(seed, b) record
    std::size_t n_features = 0;
    ForestParams params;

    // Arithmetic mean of member predictions, summed in member order.
    double predict(std::span<const double> x) const;
    std::vector<double> predict_all(const Dataset& data) const;
};

// n uniform with-replacement draws from 0..n-1, in draw order.
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

// Bagged CART forest. Tree b trains on a bootstrap resample drawn from
// the stream derive_stream(seed, b) (or on the full sample when bootstrap
// is off). All d features are scanned at every split. With n_threads > 1
// trees are fitted concurrently; results are bit-identical to sequential.
Forest fit_random_forest(const Dataset& train, const ForestParams& params, int n_threads = 1);

// Extremely randomized trees: every tree sees the entire sample; at each
// node one threshold per feature is drawn uniformly from the open interval
// of that feature's empirical range, and the highest-scoring legal
// candidate wins. Ties go to the lowest feature index.
Forest fit_extra_trees(const Dataset& train, const ForestParams& params, int n_threads = 1);

double predict_forest(const Forest& forest, std::span<const double> x);

// Per-round AdaBoost bookkeeping. weight_history[t] is the distribution
// the round-(t+1) learner was fitted under; the last entry is the final
// distribution.
struct BoostState {
    std::vector<double> weights;                     // final distribution
    std::vector<std::vector<double>> weight_history; // D_1 .. D_{T+1}
    std::vector<WeightedStump> learners;
    std::vector<double> alphas;
    std::vector<double> errors;      // weighted error of each round's learner
    std::vector<double> normalizers; // realized normalizer of each update
    int rounds_completed = 0;
};

// Discrete AdaBoost over +1/-1 labels with stump weak learners:
// uniform initial weights, alpha = ln((1-e)/e)/2, multiplicative update
// exp(-alpha y h(x)) renormalized each round (the realized normalizer
// equals 2 sqrt(e(1-e))). A perfect round (e = 0) terminates boosting and
// keeps the learner with alpha capped at ln((1-eps)/eps)/2, eps = 1e-10;
// a round with e >= 0.5 is discarded and terminates boosting.
struct BoostedClassifier {
    BoostState state;
    std::size_t n_features = 0;

    double decision(std::span<const double> x) const; // sum of alpha_t h_t(x)
    int predict(std::span<const double> x) const;     // sign; sign(0) = +1
};

BoostedClassifier fit_adaboost_classifier(const Dataset& train, int rounds);

enum class BoostLoss { linear, square, exponential };

std::string to_string(BoostLoss loss);
BoostLoss boost_loss_from_string(const std::string& name);

// Boosted CART regressor; prediction is the weighted median of the
// member predictions under the learner weights log(1/beta_t).
struct BoostedRegressor {
    std::vector<RegressionTree> learners;
    std::vector<double> learner_weights;
    BoostLoss loss = BoostLoss::linear;
    std::size_t n_features = 0;

    double predict(std::span<const double> x) const;
    std::vector<double> predict_all(const Dataset& data) const;
};

// AdaBoost.R2: each round draws a weighted bootstrap resample, fits a
// CART tree, computes relative losses L_i on the full training set,
// average loss Lbar, beta = Lbar/(1-Lbar), reweights D_i ~ D_i *
// beta^(1-L_i) and records learner weight log(1/beta). A perfect round
// stops boosting with the weight capped at log(1e10); a round with
// Lbar >= 0.5 stops boosting and is kept only if it is the first.
BoostedRegressor fit_adaboost_r2(const Dataset& train, int n_estimators,
                                 const TreeParams& tree_params, std::uint64_t seed,
                                 BoostLoss loss = BoostLoss::linear);

// Weighted median: smallest value whose cumulative weight reaches half
// of the total. Exposed for tests.
double weighted_median(std::span<const double> values, std::span<const double> weights);

} // namespace graincast
