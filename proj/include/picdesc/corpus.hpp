#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "picdesc/errors.hpp"

namespace picdesc {

enum class Label { HC, AD };

std::string to_string(Label label);
Label label_from_string(const std::string& s);  // throws UnknownLabel

enum class Split { Train, Test };

std::string to_string(Split split);

struct Sentence {
    std::string sample_id;
    int index = 0;  // position in original order, consecutive from 0
    std::string text;

    friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct TranscriptSample {
    std::string sample_id;
    std::vector<Sentence> sentences;
    Label label = Label::HC;

    // Sentences joined with ". " in original order; the text the baseline embeds.
    std::string joined_text() const;

    friend bool operator==(const TranscriptSample&, const TranscriptSample&) = default;
};

struct Dataset {
    std::vector<TranscriptSample> samples;
    std::string picture_path;
    std::optional<std::map<std::string, Split>> split_tags;

    const TranscriptSample* find(const std::string& sample_id) const;
    int count_label(Label label) const;
    int total_sentences() const;
};

// Splits raw text on sentence terminators {., ?, !} and newlines, trims
// whitespace, drops empty fragments, preserves order.
std::vector<std::string> segment_sentences(const std::string& raw_text);

// Loads a dataset directory: manifest.tsv (sample_id, label, transcript_relpath,
// optional split column) plus one transcript file per sample and a picture.*
// raster beside the manifest.
Dataset load_manifest(const std::filesystem::path& dir);

// Writes the dataset in the same directory layout load_manifest reads.
// Copies the picture file when the source exists.
void write_manifest(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace picdesc
