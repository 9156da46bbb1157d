#include "picdesc/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "picdesc/hashing.hpp"

namespace picdesc {

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::JointPretrained: return "joint_pretrained";
        case BackendKind::TextPretrained: return "text_pretrained";
        case BackendKind::Synthetic: return "synthetic";
        case BackendKind::Fixture: return "fixture";
    }
    return "unknown";
}

std::string BackendDescriptor::backend_id() const {
    std::ostringstream out;
    out << to_string(kind) << ":" << model_id << ":" << dim;
    return out.str();
}

std::string CropRef::content_key() const {
    std::ostringstream out;
    out << "image:" << picture_id << ":" << box.x0 << "," << box.y0 << ","
        << box.x1 << "," << box.y1;
    return out.str();
}

PictureInfo picture_info_from_file(const std::string& picture_path) {
    cv::Mat image = cv::imread(picture_path, cv::IMREAD_COLOR);
    if (image.empty()) throw MissingPicture("cannot read picture " + picture_path);
    std::string stem = std::filesystem::path(picture_path).stem().string();
    PictureInfo info;
    info.width = image.cols;
    info.height = image.rows;
    info.id = stem + "@" + std::to_string(info.width) + "x" + std::to_string(info.height);
    return info;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        size_t b = 0, e = word.size();
        while (b < e && !std::isalnum(static_cast<unsigned char>(word[b]))) ++b;
        while (e > b && !std::isalnum(static_cast<unsigned char>(word[e - 1]))) --e;
        if (b == e) continue;
        std::string token = word.substr(b, e - b);
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        tokens.push_back(std::move(token));
    }
    return tokens;
}

namespace {

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize_in_place(std::vector<double>& v) {
    double n = l2_norm(v);
    if (n <= 0.0) throw Error("cannot normalize zero vector");
    for (double& x : v) x /= n;
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string word;
    while (in >> word) tokens.push_back(std::move(word));
    return tokens;
}

// Whitespace-canonical text truncated to max_tokens whitespace tokens.
std::string canonical_truncated(const std::string& text, int max_tokens) {
    auto tokens = whitespace_tokens(text);
    if (tokens.empty()) throw EmptyText("text has no tokens");
    if (static_cast<int>(tokens.size()) > max_tokens)
        tokens.resize(static_cast<size_t>(max_tokens));
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace

std::string classifier_text_key(const std::string& text) { return "textmean:" + text; }
std::string joint_text_key(const std::string& canonical_text) { return "text:" + canonical_text; }

// --- spec operations ------------------------------------------------------

ClassifierEmbedding embed_text_for_classifier(const std::string& text, EmbeddingBackend& backend) {
    const BackendKind kind = backend.descriptor().kind;
    if (kind == BackendKind::JointPretrained)
        throw BackendUnavailable("classifier embedding requires a text backend, got " +
                                 to_string(kind));
    if (whitespace_tokens(text).empty()) throw EmptyText("empty classifier text");
    ClassifierEmbedding out;
    out.values = backend.classifier_text_vector(text);
    out.source = EmbeddingSource::TokenAverage;
    return out;
}

JointVector embed_sentence_joint(const std::string& text, EmbeddingBackend& backend) {
    const BackendDescriptor& desc = backend.descriptor();
    if (desc.kind == BackendKind::TextPretrained)
        throw BackendUnavailable("joint embedding requires a joint backend, got " +
                                 to_string(desc.kind));
    std::string canonical = canonical_truncated(text, desc.max_text_tokens);
    JointVector out;
    out.values = backend.joint_text_vector(canonical);
    double n = l2_norm(out.values);
    if (std::abs(n - 1.0) > 1e-6) normalize_in_place(out.values);
    out.normalized = true;
    return out;
}

JointVector embed_image_joint(const CropRef& crop, EmbeddingBackend& backend) {
    const BackendDescriptor& desc = backend.descriptor();
    if (desc.kind == BackendKind::TextPretrained)
        throw BackendUnavailable("image embedding requires a joint backend, got " +
                                 to_string(desc.kind));
    if (crop.box.area() <= 0)
        throw DegenerateCrop("zero-area crop " + crop.content_key());
    if (crop.picture_width > 0 && crop.picture_height > 0 &&
        !crop.box.within(crop.picture_width, crop.picture_height))
        throw DegenerateCrop("crop outside picture bounds: " + crop.content_key());
    JointVector out;
    out.values = backend.joint_image_vector(crop);
    double n = l2_norm(out.values);
    if (std::abs(n - 1.0) > 1e-6) normalize_in_place(out.values);
    out.normalized = true;
    return out;
}

RelevanceMatrix relevance_logits(std::span<const JointVector> images,
                                 std::span<const JointVector> texts, double logit_scale,
                                 std::vector<std::string> image_ids,
                                 std::vector<std::string> text_ids) {
    if (images.empty() || texts.empty())
        throw DimensionMismatch("relevance_logits needs at least one image and one text");
    const int dim = images[0].dim();
    auto check = [&](const JointVector& v) {
        if (v.dim() != dim)
            throw DimensionMismatch("joint vector dimension mismatch: " +
                                    std::to_string(v.dim()) + " vs " + std::to_string(dim));
        if (!v.normalized || std::abs(l2_norm(v.values) - 1.0) > 1e-6)
            throw DimensionMismatch("relevance_logits requires normalized vectors");
    };
    for (const auto& v : images) check(v);
    for (const auto& v : texts) check(v);

    RelevanceMatrix m;
    m.logits = Mat2D(static_cast<int>(images.size()), static_cast<int>(texts.size()));
    for (int i = 0; i < m.logits.rows; ++i) {
        for (int j = 0; j < m.logits.cols; ++j) {
            double dot = 0.0;
            for (int d = 0; d < dim; ++d) dot += images[i].values[d] * texts[j].values[d];
            m.logits.at(i, j) = logit_scale * dot;
        }
    }
    m.image_ids = std::move(image_ids);
    m.text_ids = std::move(text_ids);
    if (m.image_ids.empty())
        for (int i = 0; i < m.logits.rows; ++i) m.image_ids.push_back("img" + std::to_string(i));
    if (m.text_ids.empty())
        for (int j = 0; j < m.logits.cols; ++j) m.text_ids.push_back("txt" + std::to_string(j));
    if (static_cast<int>(m.image_ids.size()) != m.logits.rows ||
        static_cast<int>(m.text_ids.size()) != m.logits.cols)
        throw DimensionMismatch("id list lengths do not match matrix shape");
    return m;
}

RelevanceMatrix relevance_logits(std::span<const JointVector> images,
                                 std::span<const JointVector> texts, double logit_scale) {
    return relevance_logits(images, texts, logit_scale, {}, {});
}

// --- synthetic backend ------------------------------------------------------

SyntheticBackend::SyntheticBackend(std::uint64_t seed, int dim, SyntheticPlant plant,
                                   double logit_scale, int max_text_tokens)
    : seed_(seed), plant_(std::move(plant)) {
    if (dim < 2) throw Error("synthetic backend needs dim >= 2");
    descriptor_.kind = BackendKind::Synthetic;
    descriptor_.dim = dim;
    descriptor_.logit_scale = logit_scale;
    descriptor_.max_text_tokens = max_text_tokens;

    std::ostringstream id;
    id << "seed=" << seed << "/dim=" << dim;
    if (!plant_.empty()) {
        std::string tags;
        for (const auto& g : plant_.groups) {
            tags += g.name;
            for (const auto& k : g.keywords) tags += "," + k;
            tags += ";" + std::to_string(g.region.x0) + "," + std::to_string(g.region.y0) +
                    "," + std::to_string(g.region.x1) + "," + std::to_string(g.region.y1);
        }
        id << "/plant=" << hex64(fnv1a64(tags));
    }
    descriptor_.model_id = id.str();
}

std::vector<double> SyntheticBackend::unit_hash_vector(const std::string& tag) const {
    std::uint64_t state = fnv1a64(tag) ^ (seed_ * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    const int dim = descriptor_.dim;
    std::vector<double> v(static_cast<size_t>(dim));
    auto uniform = [&state] {
        return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    };
    for (int i = 0; i < dim; i += 2) {
        double u1 = std::max(uniform(), 1e-300);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        v[static_cast<size_t>(i)] = r * std::cos(2.0 * std::numbers::pi * u2);
        if (i + 1 < dim) v[static_cast<size_t>(i + 1)] = r * std::sin(2.0 * std::numbers::pi * u2);
    }
    normalize_in_place(v);
    return v;
}

std::vector<double> SyntheticBackend::token_vector(const std::string& token) const {
    return unit_hash_vector("token:" + token);
}

std::vector<double> SyntheticBackend::anchor_vector(const std::string& group_name) const {
    return unit_hash_vector("anchor:" + group_name);
}

std::vector<double> SyntheticBackend::classifier_text_vector(const std::string& text) {
    auto tokens = tokenize(text);
    if (tokens.empty()) throw EmptyText("no tokens in classifier text");
    std::vector<double> mean(static_cast<size_t>(descriptor_.dim), 0.0);
    for (const auto& token : tokens) {
        auto v = token_vector(token);
        for (size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
    }
    for (double& x : mean) x /= static_cast<double>(tokens.size());
    return mean;
}

std::vector<double> SyntheticBackend::joint_text_vector(const std::string& canonical_text) {
    auto tokens = tokenize(canonical_text);
    if (tokens.empty()) throw EmptyText("no tokens in joint text");
    std::vector<double> v(static_cast<size_t>(descriptor_.dim), 0.0);
    for (const auto& token : tokens) {
        auto t = token_vector(token);
        for (size_t d = 0; d < v.size(); ++d) v[d] += t[d];
    }
    for (double& x : v) x /= static_cast<double>(tokens.size());

    for (const auto& group : plant_.groups) {
        int matched = 0;
        for (const auto& token : tokens)
            if (std::find(group.keywords.begin(), group.keywords.end(), token) !=
                group.keywords.end())
                ++matched;
        if (matched == 0) continue;
        double strength =
            plant_.text_pull * static_cast<double>(matched) / static_cast<double>(tokens.size());
        auto anchor = anchor_vector(group.name);
        for (size_t d = 0; d < v.size(); ++d) v[d] += strength * anchor[d];
    }
    normalize_in_place(v);
    return v;
}

std::vector<double> SyntheticBackend::joint_image_vector(const CropRef& crop) {
    std::ostringstream tag;
    tag << "crop:" << crop.box.x0 << "," << crop.box.y0 << "," << crop.box.x1 << ","
        << crop.box.y1;
    auto v = unit_hash_vector(tag.str());
    for (const auto& group : plant_.groups) {
        double overlap = iou(crop.box, group.region);
        if (overlap <= 0.0) continue;
        auto anchor = anchor_vector(group.name);
        double strength = plant_.image_pull * overlap;
        for (size_t d = 0; d < v.size(); ++d) v[d] += strength * anchor[d];
    }
    normalize_in_place(v);
    return v;
}

// --- stored-vector backend ---------------------------------------------------

StoredVectorBackend::StoredVectorBackend(BackendDescriptor descriptor,
                                         std::shared_ptr<CacheStore> store)
    : descriptor_(std::move(descriptor)), store_(std::move(store)) {}

std::vector<double> StoredVectorBackend::lookup(const std::string& content_key) const {
    auto hit = store_->get(descriptor_.backend_id(), content_key);
    if (!hit)
        throw BackendUnavailable("no stored vector for key '" + content_key + "' (backend " +
                                 descriptor_.backend_id() +
                                 "); precompute with tools/precompute_embeddings.py");
    return *hit;
}

std::vector<double> StoredVectorBackend::classifier_text_vector(const std::string& text) {
    if (store_->contains(descriptor_.backend_id(), classifier_text_key(text)))
        return lookup(classifier_text_key(text));
    // fall back to stored per-token vectors
    auto tokens = tokenize(text);
    if (tokens.empty()) throw EmptyText("no tokens in classifier text");
    std::vector<double> mean;
    for (const auto& token : tokens) {
        auto v = lookup("token:" + token);
        if (mean.empty()) mean.assign(v.size(), 0.0);
        if (v.size() != mean.size())
            throw DimensionMismatch("stored token vectors disagree on dimension");
        for (size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
    }
    for (double& x : mean) x /= static_cast<double>(tokens.size());
    return mean;
}

std::vector<double> StoredVectorBackend::joint_text_vector(const std::string& canonical_text) {
    return lookup(joint_text_key(canonical_text));
}

std::vector<double> StoredVectorBackend::joint_image_vector(const CropRef& crop) {
    return lookup(crop.content_key());
}

// --- caching wrapper ---------------------------------------------------------

CachingBackend::CachingBackend(std::shared_ptr<EmbeddingBackend> inner,
                               std::shared_ptr<CacheStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

std::vector<double> CachingBackend::through(const std::string& content_key,
                                            const std::function<std::vector<double>()>& compute) {
    const std::string id = inner_->descriptor().backend_id();
    if (auto hit = store_->get(id, content_key)) return *hit;
    std::vector<double> values;
    if (inner_->thread_safe()) {
        values = compute();
    } else {
        std::lock_guard lock(mutex_);
        values = compute();
    }
    store_->put(id, content_key, values);
    return values;
}

std::vector<double> CachingBackend::classifier_text_vector(const std::string& text) {
    return through(classifier_text_key(text), [&] { return inner_->classifier_text_vector(text); });
}

std::vector<double> CachingBackend::joint_text_vector(const std::string& canonical_text) {
    return through(joint_text_key(canonical_text),
                   [&] { return inner_->joint_text_vector(canonical_text); });
}

std::vector<double> CachingBackend::joint_image_vector(const CropRef& crop) {
    return through(crop.content_key(), [&] { return inner_->joint_image_vector(crop); });
}

}  // namespace picdesc
