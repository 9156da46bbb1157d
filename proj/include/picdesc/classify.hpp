#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "picdesc/corpus.hpp"
#include "picdesc/errors.hpp"

namespace picdesc {

enum class ClassifierKind { MaxMarginRbf, MaxMarginLinear, NearestCentroid };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& name);

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::MaxMarginRbf;
    double regularization = 1.0;
    uint64_t rng_seed = 0;
};

using LabeledVector = std::pair<std::vector<double>, Label>;

// A trained two-class model. Copyable; prediction is const and thread-safe.
class Model {
public:
    Label predict(const std::vector<double>& features) const;
    double accuracy(const std::vector<LabeledVector>& data) const;
    int dim() const { return dim_; }

private:
    friend Model train(const std::vector<LabeledVector>&, const ClassifierSpec&);
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    int dim_ = 0;
};

// Fits the requested classifier. Both classes must be present and all
// feature vectors must share one dimension.
Model train(const std::vector<LabeledVector>& features, const ClassifierSpec& spec);

struct FewShotConfig {
    int k = 1;               // training shots per class
    int test_per_class = 15;
    int rounds = 600;
    uint64_t rng_seed = 0;
};

struct EvalReport {
    std::vector<double> per_round_accuracy;  // each in [0, 1]
    double mean = 0.0;
    double std_dev = 0.0;  // population std over rounds
    FewShotConfig config;
    std::string pipeline_id;
};

struct Episode {
    std::vector<int> train_indices;
    std::vector<int> test_indices;
};

// Draws k training and test_per_class testing indices per class, disjoint
// within the round, deterministically from round_seed.
Episode sample_episode(const std::vector<Label>& labels, const FewShotConfig& config,
                       uint64_t round_seed);

// Derives one seed per round from the config's master seed by counter.
uint64_t round_seed(uint64_t master_seed, int round);

// Episodic evaluation: per round, sample an episode, train on the shots,
// score accuracy on the held-out test points, then aggregate.
EvalReport few_shot_evaluate(const std::vector<LabeledVector>& features,
                             const FewShotConfig& config, const ClassifierSpec& spec,
                             const std::string& pipeline_id = "");

// Single train/test evaluation on a fixed split.
double fixed_split_evaluate(const std::vector<LabeledVector>& train_features,
                            const std::vector<LabeledVector>& test_features,
                            const ClassifierSpec& spec);

struct TTestResult {
    double t = 0.0;
    double degrees_of_freedom = 0.0;
    double p_two_sided = 1.0;
};

// Welch's two-sample t-test on two sets of round accuracies.
TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace picdesc
