#include "picdesc/cache.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "picdesc/errors.hpp"
#include "picdesc/hashing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace picdesc {

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string CacheStore::content_hash(const std::string& content_key) {
    return hex64(fnv1a64(content_key));
}

CacheStore::CacheStore(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    load_index();
}

void CacheStore::load_index() {
    fs::path index_path = dir_ / "index.json";
    if (!fs::exists(index_path)) return;
    std::ifstream in(index_path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return;
    for (auto& [key, value] : doc.items()) {
        Entry e;
        e.file = value.value("file", "");
        e.dim = value.value("dim", 0);
        if (!e.file.empty() && e.dim > 0) entries_[key] = std::move(e);
    }
}

void CacheStore::write_index_locked() const {
    json doc = json::object();
    for (const auto& [key, entry] : entries_) {
        doc[key] = {{"file", entry.file}, {"dim", entry.dim}};
    }
    fs::path tmp = dir_ / "index.json.tmp";
    {
        std::ofstream out(tmp);
        out << doc.dump(1) << "\n";
    }
    fs::rename(tmp, dir_ / "index.json");
}

std::optional<std::vector<double>> CacheStore::get(const std::string& backend_id,
                                                   const std::string& content_key) const {
    const std::string key = backend_id + "|" + content_hash(content_key);
    Entry entry;
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        entry = it->second;
    }
    std::ifstream in(dir_ / entry.file, std::ios::binary);
    if (!in) return std::nullopt;
    std::vector<double> values(static_cast<size_t>(entry.dim));
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) return std::nullopt;
    return values;
}

bool CacheStore::contains(const std::string& backend_id, const std::string& content_key) const {
    std::lock_guard lock(mutex_);
    return entries_.count(backend_id + "|" + content_hash(content_key)) > 0;
}

size_t CacheStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void CacheStore::put(const std::string& backend_id, const std::string& content_key,
                     std::span<const double> values) {
    if (values.empty()) throw Error("cache: refusing to store empty vector");
    const std::string hash = content_hash(content_key);
    const std::string file = hex64(fnv1a64(backend_id)) + "-" + hash + ".f64";

    fs::path tmp = dir_ / (file + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!out) throw Error("cache: write failed for " + tmp.string());
    }
    fs::rename(tmp, dir_ / file);

    std::lock_guard lock(mutex_);
    entries_[backend_id + "|" + hash] = Entry{file, static_cast<int>(values.size())};
    write_index_locked();
}

}  // namespace picdesc
