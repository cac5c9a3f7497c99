#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graincast/dataset.hpp"

namespace graincast {

enum class Criterion { squared_error, absolute_error };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& name);

struct TreeParams {
    Criterion criterion = Criterion::squared_error;
    std::optional<int> max_depth;  // absent = unbounded
    int min_samples_split = 2;
    int min_samples_leaf = 1;

    void validate() const;
};

// Nodes live in one vector; children are indices, feature < 0 marks a leaf.
// Every node records its routed sample count and training impurity so that
// impurity-based feature importance can be computed after the fact.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;       // leaf prediction
    double impurity = 0.0;    // impurity under the training criterion
    std::size_t n_samples = 0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
    std::size_t n_features = 0;
    TreeParams params;

    // Routes x <= threshold to the left child.
    double predict(std::span<const double> x) const;
    std::vector<double> predict_all(const Dataset& data) const;

    // Index of the leaf x is routed to.
    std::size_t leaf_index(std::span<const double> x) const;

    // Indented text rendering for debugging; not a stability contract.
    std::string dump(const std::vector<std::string>& feature_names = {}) const;
};

struct SplitChoice {
    int feature = 0;
    double threshold = 0.0;
    double impurity_decrease = 0.0;
};

// Exhaustive CART split search over the given row subset. Candidate
// thresholds are midpoints between consecutive distinct sorted feature
// values. Returns the candidate with the largest impurity decrease whose
// children both hold >= min_samples_leaf rows; ties go to the lowest
// feature index, then the smallest threshold. Returns nullopt when the
// targets are constant or no legal candidate exists.
std::optional<SplitChoice> best_split(const Dataset& data,
                                      std::span<const std::size_t> rows,
                                      const TreeParams& params);

// Node-level split strategy; fit_tree uses best_split, the randomized
// forests substitute their own.
using SplitChooser = std::function<std::optional<SplitChoice>(
    const Dataset&, std::span<const std::size_t>, const TreeParams&)>;

// Greedy recursive growth with the given chooser. Stops on the depth
// limit, min_samples_split, zero impurity, or an empty choice.
RegressionTree grow_tree(const Dataset& data, const TreeParams& params,
                         const SplitChooser& chooser);

// Deterministic CART fit (no randomness anywhere in the growth).
RegressionTree fit_tree(const Dataset& data, const TreeParams& params);

// Depth-1 binary classifier with outputs in {+1, -1}.
struct WeightedStump {
    int feature = 0;
    double threshold = 0.0;
    int polarity = +1;

    int predict(std::span<const double> x) const {
        return x[static_cast<std::size_t>(feature)] <= threshold ? -polarity : polarity;
    }
};

// Exhaustive weighted-error stump search. Targets must be exactly +1/-1
// and weights a distribution (non-negative, sum 1 within 1e-9). Candidate
// thresholds per feature are (min - 1) followed by the midpoints of
// consecutive distinct values; ties go to the lowest feature, smallest
// threshold, polarity +1 first. Returns the stump and its weighted error.
std::pair<WeightedStump, double> fit_stump(const Dataset& data,
                                           std::span<const double> weights);

} // namespace graincast
