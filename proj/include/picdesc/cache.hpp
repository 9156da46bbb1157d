#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace picdesc {

// On-disk vector store shared by the embedding cache and fixture backends:
// one raw little-endian float64 file per entry plus index.json mapping
// (backend_id, content hash) -> filename and dimension.
class CacheStore {
public:
    explicit CacheStore(std::filesystem::path dir);

    std::optional<std::vector<double>> get(const std::string& backend_id,
                                           const std::string& content_key) const;

    // Atomic per entry: the vector file lands via rename, then the index
    // is rewritten.
    void put(const std::string& backend_id, const std::string& content_key,
             std::span<const double> values);

    bool contains(const std::string& backend_id, const std::string& content_key) const;
    size_t size() const;
    const std::filesystem::path& dir() const { return dir_; }

    static std::string content_hash(const std::string& content_key);

private:
    struct Entry {
        std::string file;
        int dim = 0;
    };

    void load_index();
    void write_index_locked() const;

    std::filesystem::path dir_;
    std::map<std::string, Entry> entries_;  // key = backend_id + "|" + hash
    mutable std::mutex mutex_;
};

}  // namespace picdesc
