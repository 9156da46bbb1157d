#include "picdesc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <opencv2/ml.hpp>

#include "picdesc/hashing.hpp"

namespace picdesc {

std::string to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::MaxMarginRbf: return "max_margin_rbf";
        case ClassifierKind::MaxMarginLinear: return "max_margin_linear";
        case ClassifierKind::NearestCentroid: return "nearest_centroid";
    }
    return "max_margin_rbf";
}

ClassifierKind classifier_kind_from_string(const std::string& name) {
    if (name == "max_margin_rbf") return ClassifierKind::MaxMarginRbf;
    if (name == "max_margin_linear") return ClassifierKind::MaxMarginLinear;
    if (name == "nearest_centroid") return ClassifierKind::NearestCentroid;
    throw Error("unknown classifier kind '" + name + "'");
}

struct Model::Impl {
    ClassifierKind kind = ClassifierKind::MaxMarginRbf;
    cv::Ptr<cv::ml::SVM> svm;
    std::vector<double> centroid_hc;
    std::vector<double> centroid_ad;
};

Label Model::predict(const std::vector<double>& features) const {
    if (!impl_) throw Error("model is not trained");
    if (static_cast<int>(features.size()) != dim_)
        throw DimensionMismatch("query has dimension " + std::to_string(features.size()) +
                                ", model expects " + std::to_string(dim_));
    if (impl_->kind == ClassifierKind::NearestCentroid) {
        double d_hc = 0.0, d_ad = 0.0;
        for (size_t i = 0; i < features.size(); ++i) {
            const double a = features[i] - impl_->centroid_hc[i];
            const double b = features[i] - impl_->centroid_ad[i];
            d_hc += a * a;
            d_ad += b * b;
        }
        return d_ad < d_hc ? Label::AD : Label::HC;  // tie goes to HC
    }
    cv::Mat1f row(1, dim_);
    for (int i = 0; i < dim_; ++i) row(0, i) = static_cast<float>(features[static_cast<size_t>(i)]);
    return impl_->svm->predict(row) > 0.5f ? Label::AD : Label::HC;
}

double Model::accuracy(const std::vector<LabeledVector>& data) const {
    if (data.empty()) throw Error("cannot score an empty evaluation set");
    int correct = 0;
    for (const auto& [features, label] : data)
        if (predict(features) == label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

Model train(const std::vector<LabeledVector>& features, const ClassifierSpec& spec) {
    if (features.empty()) throw Error("cannot train on an empty feature set");
    if (spec.regularization <= 0.0) throw Error("regularization must be positive");
    const int dim = static_cast<int>(features.front().first.size());
    if (dim == 0) throw DimensionMismatch("feature vectors must be non-empty");
    bool has_hc = false, has_ad = false;
    for (const auto& [vector, label] : features) {
        if (static_cast<int>(vector.size()) != dim)
            throw DimensionMismatch("inconsistent feature dimensions in training set");
        (label == Label::HC ? has_hc : has_ad) = true;
    }
    if (!has_hc || !has_ad) throw SingleClass("training set must contain both labels");

    auto impl = std::make_shared<Model::Impl>();
    impl->kind = spec.kind;

    if (spec.kind == ClassifierKind::NearestCentroid) {
        impl->centroid_hc.assign(static_cast<size_t>(dim), 0.0);
        impl->centroid_ad.assign(static_cast<size_t>(dim), 0.0);
        int n_hc = 0, n_ad = 0;
        for (const auto& [vector, label] : features) {
            auto& centroid = (label == Label::HC) ? impl->centroid_hc : impl->centroid_ad;
            (label == Label::HC ? n_hc : n_ad) += 1;
            for (int i = 0; i < dim; ++i) centroid[static_cast<size_t>(i)] += vector[static_cast<size_t>(i)];
        }
        for (int i = 0; i < dim; ++i) {
            impl->centroid_hc[static_cast<size_t>(i)] /= n_hc;
            impl->centroid_ad[static_cast<size_t>(i)] /= n_ad;
        }
    } else {
        const int n = static_cast<int>(features.size());
        cv::Mat1f x(n, dim);
        cv::Mat1i y(n, 1);
        double sum = 0.0, sum_sq = 0.0;
        for (int r = 0; r < n; ++r) {
            y(r, 0) = features[static_cast<size_t>(r)].second == Label::AD ? 1 : 0;
            for (int c = 0; c < dim; ++c) {
                const double v = features[static_cast<size_t>(r)].first[static_cast<size_t>(c)];
                x(r, c) = static_cast<float>(v);
                sum += v;
                sum_sq += v * v;
            }
        }
        auto svm = cv::ml::SVM::create();
        svm->setType(cv::ml::SVM::C_SVC);
        svm->setC(spec.regularization);
        if (spec.kind == ClassifierKind::MaxMarginLinear) {
            svm->setKernel(cv::ml::SVM::LINEAR);
        } else {
            svm->setKernel(cv::ml::SVM::RBF);
            // gamma follows the common "scale" heuristic: 1 / (dim * var(X))
            const double count = static_cast<double>(n) * dim;
            const double mean = sum / count;
            const double variance = sum_sq / count - mean * mean;
            svm->setGamma(variance > 1e-300 ? 1.0 / (dim * variance) : 1.0 / dim);
        }
        svm->setTermCriteria(
            cv::TermCriteria(cv::TermCriteria::MAX_ITER + cv::TermCriteria::EPS, 20000, 1e-6));
        svm->train(x, cv::ml::ROW_SAMPLE, y);
        impl->svm = svm;
    }

    Model model;
    model.impl_ = impl;
    model.dim_ = dim;
    return model;
}

namespace {

// Unbiased bounded draw and Fisher-Yates shuffle over a splitmix64 stream.
uint64_t draw_below(uint64_t& state, uint64_t n) {
    const uint64_t threshold = (0 - n) % n;
    while (true) {
        const uint64_t r = splitmix64(state);
        if (r >= threshold) return r % n;
    }
}

void shuffle_indices(std::vector<int>& values, uint64_t& state) {
    for (size_t i = values.size(); i > 1; --i)
        std::swap(values[i - 1], values[draw_below(state, i)]);
}

}  // namespace

uint64_t round_seed(uint64_t master_seed, int round) {
    uint64_t state = master_seed + static_cast<uint64_t>(round) * 0x9e3779b97f4a7c15ULL;
    return splitmix64(state);
}

Episode sample_episode(const std::vector<Label>& labels, const FewShotConfig& config,
                       uint64_t seed) {
    int n_hc = 0, n_ad = 0;
    for (Label label : labels) (label == Label::HC ? n_hc : n_ad) += 1;
    const int need = config.k + config.test_per_class;
    if (config.k < 1 || config.test_per_class < 1 || n_hc < need || n_ad < need)
        throw InfeasibleConfig("need " + std::to_string(need) + " samples per class, have " +
                               std::to_string(n_hc) + " HC and " + std::to_string(n_ad) + " AD");

    // One shuffle over all indices, then per-class quota fill in encounter
    // order. A sample's train/test role depends only on its position and its
    // class's quota state, so relabeling HC<->AD yields identical episodes.
    std::vector<int> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    uint64_t state = seed;
    shuffle_indices(order, state);

    Episode episode;
    int train_hc = 0, train_ad = 0, test_hc = 0, test_ad = 0;
    for (int index : order) {
        const bool is_hc = labels[static_cast<size_t>(index)] == Label::HC;
        int& trained = is_hc ? train_hc : train_ad;
        int& tested = is_hc ? test_hc : test_ad;
        if (trained < config.k) {
            episode.train_indices.push_back(index);
            ++trained;
        } else if (tested < config.test_per_class) {
            episode.test_indices.push_back(index);
            ++tested;
        }
    }
    std::sort(episode.train_indices.begin(), episode.train_indices.end());
    std::sort(episode.test_indices.begin(), episode.test_indices.end());
    return episode;
}

EvalReport few_shot_evaluate(const std::vector<LabeledVector>& features,
                             const FewShotConfig& config, const ClassifierSpec& spec,
                             const std::string& pipeline_id) {
    if (config.rounds < 1) throw InfeasibleConfig("round count must be at least 1");
    std::vector<Label> labels;
    labels.reserve(features.size());
    for (const auto& [vector, label] : features) labels.push_back(label);

    EvalReport report;
    report.config = config;
    report.pipeline_id = pipeline_id;
    report.per_round_accuracy.reserve(static_cast<size_t>(config.rounds));
    for (int r = 0; r < config.rounds; ++r) {
        const Episode episode = sample_episode(labels, config, round_seed(config.rng_seed, r));
        std::vector<LabeledVector> train_set, test_set;
        train_set.reserve(episode.train_indices.size());
        test_set.reserve(episode.test_indices.size());
        for (int i : episode.train_indices) train_set.push_back(features[static_cast<size_t>(i)]);
        for (int i : episode.test_indices) test_set.push_back(features[static_cast<size_t>(i)]);
        const Model model = train(train_set, spec);
        report.per_round_accuracy.push_back(model.accuracy(test_set));
    }

    double sum = 0.0;
    for (double a : report.per_round_accuracy) sum += a;
    report.mean = sum / static_cast<double>(report.per_round_accuracy.size());
    double sq = 0.0;
    for (double a : report.per_round_accuracy) sq += (a - report.mean) * (a - report.mean);
    report.std_dev = std::sqrt(sq / static_cast<double>(report.per_round_accuracy.size()));
    return report;
}

double fixed_split_evaluate(const std::vector<LabeledVector>& train_features,
                            const std::vector<LabeledVector>& test_features,
                            const ClassifierSpec& spec) {
    const Model model = train(train_features, spec);
    return model.accuracy(test_features);
}

namespace {

// Regularized incomplete beta via Lentz's continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 300;
    constexpr double kEpsilon = 3e-12, kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) break;
    }
    return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log1p(-x) -
                             (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw Error("t-test needs at least two observations per group");
    auto mean_var = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double sq = 0.0;
        for (double x : v) sq += (x - mean) * (x - mean);
        return std::make_pair(mean, sq / static_cast<double>(v.size() - 1));
    };
    const auto [mean_a, var_a] = mean_var(a);
    const auto [mean_b, var_b] = mean_var(b);
    const double se_a = var_a / static_cast<double>(a.size());
    const double se_b = var_b / static_cast<double>(b.size());
    const double denom = std::sqrt(se_a + se_b);

    TTestResult result;
    if (denom == 0.0) {
        result.t = (mean_a == mean_b) ? 0.0 : std::numeric_limits<double>::infinity();
        result.degrees_of_freedom = static_cast<double>(a.size() + b.size() - 2);
        result.p_two_sided = (mean_a == mean_b) ? 1.0 : 0.0;
        return result;
    }
    result.t = (mean_a - mean_b) / denom;
    result.degrees_of_freedom =
        (se_a + se_b) * (se_a + se_b) /
        (se_a * se_a / (static_cast<double>(a.size()) - 1.0) +
         se_b * se_b / (static_cast<double>(b.size()) - 1.0));
    const double df = result.degrees_of_freedom;
    result.p_two_sided =
        regularized_incomplete_beta(df / 2.0, 0.5, df / (df + result.t * result.t));
    return result;
}

}  // namespace picdesc
