#include "picdesc/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace picdesc {

std::string to_string(Label label) {
    return label == Label::HC ? "HC" : "AD";
}

Label label_from_string(const std::string& s) {
    if (s == "HC") return Label::HC;
    if (s == "AD") return Label::AD;
    throw UnknownLabel("unknown label '" + s + "' (expected HC or AD)");
}

std::string to_string(Split split) {
    return split == Split::Train ? "train" : "test";
}

namespace {

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw Error("unknown split tag '" + s + "' (expected train or test)");
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tsv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, '\t')) fields.push_back(field);
    return fields;
}

}  // namespace

std::string TranscriptSample::joined_text() const {
    std::string out;
    for (size_t i = 0; i < sentences.size(); ++i) {
        if (i > 0) out += ". ";
        out += sentences[i].text;
    }
    return out;
}

const TranscriptSample* Dataset::find(const std::string& sample_id) const {
    for (const auto& s : samples)
        if (s.sample_id == sample_id) return &s;
    return nullptr;
}

int Dataset::count_label(Label label) const {
    int n = 0;
    for (const auto& s : samples)
        if (s.label == label) ++n;
    return n;
}

int Dataset::total_sentences() const {
    int n = 0;
    for (const auto& s : samples) n += static_cast<int>(s.sentences.size());
    return n;
}

std::vector<std::string> segment_sentences(const std::string& raw_text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        std::string t = trim(current);
        if (!t.empty()) out.push_back(std::move(t));
        current.clear();
    };
    for (char c : raw_text) {
        if (c == '.' || c == '?' || c == '!' || c == '\n') {
            flush();
        } else {
            current += c;
        }
    }
    flush();
    return out;
}

namespace {

fs::path find_picture(const fs::path& dir) {
    static const char* kExtensions[] = {".png", ".ppm", ".pgm", ".pbm",
                                        ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"};
    for (const char* ext : kExtensions) {
        fs::path candidate = dir / (std::string("picture") + ext);
        if (fs::exists(candidate)) return candidate;
    }
    throw MissingPicture("no picture.* raster found in " + dir.string());
}

}  // namespace

Dataset load_manifest(const fs::path& dir) {
    fs::path manifest_path = dir / "manifest.tsv";
    if (!fs::exists(manifest_path))
        throw Error("manifest not found: " + manifest_path.string());

    Dataset dataset;
    dataset.picture_path = find_picture(dir).string();

    std::ifstream in(manifest_path);
    if (!in) throw Error("cannot open " + manifest_path.string());

    std::set<std::string> seen_ids;
    std::map<std::string, Split> split_tags;
    bool any_split = false;

    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        auto fields = split_tsv_line(line);
        if (first && !fields.empty() && fields[0] == "sample_id") {
            first = false;
            continue;  // header row
        }
        first = false;
        if (fields.size() < 3)
            throw Error("manifest row needs sample_id, label, transcript_relpath: " + line);

        TranscriptSample sample;
        sample.sample_id = trim(fields[0]);
        sample.label = label_from_string(trim(fields[1]));
        if (!seen_ids.insert(sample.sample_id).second)
            throw DuplicateSampleId("duplicate sample_id '" + sample.sample_id + "'");

        fs::path transcript = dir / trim(fields[2]);
        std::ifstream tin(transcript);
        if (!tin) throw Error("cannot open transcript " + transcript.string());
        std::string sentence_line;
        int index = 0;
        while (std::getline(tin, sentence_line)) {
            std::string text = trim(sentence_line);
            if (text.empty()) continue;
            sample.sentences.push_back({sample.sample_id, index, text});
            ++index;
        }
        if (sample.sentences.empty())
            throw EmptySample("sample '" + sample.sample_id + "' has no sentences");

        if (fields.size() >= 4 && !trim(fields[3]).empty()) {
            split_tags[sample.sample_id] = split_from_string(trim(fields[3]));
            any_split = true;
        }
        dataset.samples.push_back(std::move(sample));
    }

    if (any_split) {
        if (split_tags.size() != dataset.samples.size())
            throw Error("split column must tag every sample or none");
        dataset.split_tags = std::move(split_tags);
    }
    return dataset;
}

void write_manifest(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir);
    const bool has_split = dataset.split_tags.has_value();

    std::ofstream out(dir / "manifest.tsv");
    out << "sample_id\tlabel\ttranscript_relpath";
    if (has_split) out << "\tsplit";
    out << "\n";

    for (const auto& sample : dataset.samples) {
        std::string relpath = sample.sample_id + ".txt";
        out << sample.sample_id << "\t" << to_string(sample.label) << "\t" << relpath;
        if (has_split) out << "\t" << to_string(dataset.split_tags->at(sample.sample_id));
        out << "\n";

        std::ofstream tout(dir / relpath);
        for (const auto& sentence : sample.sentences) tout << sentence.text << "\n";
    }

    if (!dataset.picture_path.empty() && fs::exists(dataset.picture_path)) {
        fs::path src(dataset.picture_path);
        fs::path dst = dir / ("picture" + src.extension().string());
        if (!fs::exists(dst) || !fs::equivalent(src, dst))
            fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
    }
}

}  // namespace picdesc
