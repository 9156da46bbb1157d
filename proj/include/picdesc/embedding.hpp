#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "picdesc/cache.hpp"
#include "picdesc/errors.hpp"
#include "picdesc/geometry.hpp"
#include "picdesc/matrix.hpp"

namespace picdesc {

enum class BackendKind { JointPretrained, TextPretrained, Synthetic, Fixture };

std::string to_string(BackendKind kind);

struct BackendDescriptor {
    BackendKind kind = BackendKind::Synthetic;
    std::string model_id;
    int dim = 0;
    int max_text_tokens = 77;
    double logit_scale = 100.0;

    // Identifies the backend in cache/fixture keys.
    std::string backend_id() const;
};

struct JointVector {
    std::vector<double> values;
    bool normalized = false;

    int dim() const { return static_cast<int>(values.size()); }
};

enum class EmbeddingSource { TokenAverage, TopicConcat };

struct ClassifierEmbedding {
    std::vector<double> values;
    EmbeddingSource source = EmbeddingSource::TokenAverage;

    int dim() const { return static_cast<int>(values.size()); }
};

// Names a rectangular crop of the stimulus picture without holding pixels.
// picture_width/height of 0 means bounds are unknown and not checked.
struct CropRef {
    std::string picture_id;
    BoundingBox box;
    int picture_width = 0;
    int picture_height = 0;

    std::string content_key() const;
};

struct PictureInfo {
    std::string id;
    int width = 0;
    int height = 0;

    CropRef full() const { return {id, {0, 0, width, height}, width, height}; }
    CropRef crop(const BoundingBox& box) const { return {id, box, width, height}; }
};

// Reads the raster header to build a PictureInfo for a dataset picture.
PictureInfo picture_info_from_file(const std::string& picture_path);

// Lowercased whitespace tokens with non-alphanumeric edges stripped.
std::vector<std::string> tokenize(const std::string& text);

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;

    virtual const BackendDescriptor& descriptor() const = 0;
    virtual bool thread_safe() const { return true; }

    // Token-average embedding of the whole text (classifier path).
    virtual std::vector<double> classifier_text_vector(const std::string& text) = 0;
    // Unit-norm joint embedding of a whitespace-canonical, token-truncated text.
    virtual std::vector<double> joint_text_vector(const std::string& canonical_text) = 0;
    // Unit-norm joint embedding of a picture crop.
    virtual std::vector<double> joint_image_vector(const CropRef& crop) = 0;
};

// --- spec operations ---------------------------------------------------

ClassifierEmbedding embed_text_for_classifier(const std::string& text, EmbeddingBackend& backend);
JointVector embed_sentence_joint(const std::string& text, EmbeddingBackend& backend);
JointVector embed_image_joint(const CropRef& crop, EmbeddingBackend& backend);

// M[i][j] = logit_scale * dot(images[i], texts[j]); all vectors must be
// normalized and of equal dimension.
RelevanceMatrix relevance_logits(std::span<const JointVector> images,
                                 std::span<const JointVector> texts, double logit_scale);
RelevanceMatrix relevance_logits(std::span<const JointVector> images,
                                 std::span<const JointVector> texts, double logit_scale,
                                 std::vector<std::string> image_ids,
                                 std::vector<std::string> text_ids);

// --- backends -----------------------------------------------------------

// One keyword group tied to one picture region; sentences containing the
// keywords and crops overlapping the region embed near a shared anchor.
struct PlantedGroup {
    std::string name;
    std::vector<std::string> keywords;
    BoundingBox region;
};

struct SyntheticPlant {
    std::vector<PlantedGroup> groups;
    double text_pull = 4.0;
    double image_pull = 4.0;

    bool empty() const { return groups.empty(); }
};

// Deterministic backend: every vector is a pure function of (seed, content).
class SyntheticBackend : public EmbeddingBackend {
public:
    SyntheticBackend(std::uint64_t seed, int dim, SyntheticPlant plant = {},
                     double logit_scale = 100.0, int max_text_tokens = 77);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<double> classifier_text_vector(const std::string& text) override;
    std::vector<double> joint_text_vector(const std::string& canonical_text) override;
    std::vector<double> joint_image_vector(const CropRef& crop) override;

    std::vector<double> token_vector(const std::string& token) const;
    std::vector<double> anchor_vector(const std::string& group_name) const;

private:
    std::vector<double> unit_hash_vector(const std::string& tag) const;

    BackendDescriptor descriptor_;
    std::uint64_t seed_;
    SyntheticPlant plant_;
};

// Read-only backend over a CacheStore. Fixture backends and the pretrained
// adapters (vectors precomputed by tools/precompute_embeddings.py) share it.
class StoredVectorBackend : public EmbeddingBackend {
public:
    StoredVectorBackend(BackendDescriptor descriptor, std::shared_ptr<CacheStore> store);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<double> classifier_text_vector(const std::string& text) override;
    std::vector<double> joint_text_vector(const std::string& canonical_text) override;
    std::vector<double> joint_image_vector(const CropRef& crop) override;

private:
    std::vector<double> lookup(const std::string& content_key) const;

    BackendDescriptor descriptor_;
    std::shared_ptr<CacheStore> store_;
};

// Write-through cache around any backend; hits are bit-identical to the
// original computation.
class CachingBackend : public EmbeddingBackend {
public:
    CachingBackend(std::shared_ptr<EmbeddingBackend> inner, std::shared_ptr<CacheStore> store);

    const BackendDescriptor& descriptor() const override { return inner_->descriptor(); }
    bool thread_safe() const override { return true; }
    std::vector<double> classifier_text_vector(const std::string& text) override;
    std::vector<double> joint_text_vector(const std::string& canonical_text) override;
    std::vector<double> joint_image_vector(const CropRef& crop) override;

private:
    std::vector<double> through(const std::string& content_key,
                                const std::function<std::vector<double>()>& compute);

    std::shared_ptr<EmbeddingBackend> inner_;
    std::shared_ptr<CacheStore> store_;
    std::mutex mutex_;
};

// content keys shared by caches, fixtures and the precompute tool
std::string classifier_text_key(const std::string& text);
std::string joint_text_key(const std::string& canonical_text);

}  // namespace picdesc
