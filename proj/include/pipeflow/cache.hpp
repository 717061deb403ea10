/// @file cache.hpp
/// @brief Content-addressed on-disk cache for expensive per-point sweep
///        results.  Entries are keyed by a caller-assembled key string (the
///        full description of the computation); the filename is the 64-bit
///        FNV-1a hash of that key, and the stored document echoes the key so
///        hash collisions are detected on read.  Writes go through a
///        temporary file plus an atomic rename, so concurrent writers and
///        interrupted runs never leave partial entries.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include <json.hpp>

#include "pipeflow/common.hpp"

namespace pipeflow {

class point_cache {
public:
    point_cache() = default;

    /// A cache rooted at `dir`; an empty dir disables caching entirely.
    explicit point_cache(std::string dir) : dir_(std::move(dir)) {
        if (!dir_.empty()) std::filesystem::create_directories(dir_);
    }

    /// Uses `dir` when nonempty, otherwise the PIPEFLOW_CACHE_DIR environment
    /// variable, otherwise caching is disabled.
    static point_cache from_env_or(const std::string& dir) {
        if (!dir.empty()) return point_cache(dir);
        if (const char* env = std::getenv("PIPEFLOW_CACHE_DIR"); env && *env)
            return point_cache(std::string(env));
        return point_cache();
    }

    bool enabled() const { return !dir_.empty(); }
    const std::string& dir() const { return dir_; }

    /// Returns the stored payload for the key, or nullopt on miss (also on
    /// unreadable/corrupt/collided entries, which are treated as misses).
    std::optional<nlohmann::json> lookup(const std::string& key) const {
        if (!enabled()) return std::nullopt;
        std::ifstream in(path_for(key));
        if (!in) return std::nullopt;
        nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
        if (doc.value("key", std::string()) != key) return std::nullopt;
        if (!doc.contains("payload")) return std::nullopt;
        return doc["payload"];
    }

    /// Stores the payload under the key (no-op when disabled).
    void store(const std::string& key, const nlohmann::json& payload) const {
        if (!enabled()) return;
        nlohmann::json doc;
        doc["key"] = key;
        doc["payload"] = payload;
        const std::filesystem::path final_path = path_for(key);
        std::ostringstream tmp_name;
        tmp_name << final_path.filename().string() << ".tmp."
                 << std::hash<std::thread::id>{}(std::this_thread::get_id());
        const std::filesystem::path tmp_path = final_path.parent_path() / tmp_name.str();
        {
            std::ofstream out(tmp_path, std::ios::trunc);
            if (!out) return;  // cache failures never abort the computation
            out << doc.dump(2) << "\n";
        }
        std::error_code ec;
        std::filesystem::rename(tmp_path, final_path, ec);
        if (ec) std::filesystem::remove(tmp_path, ec);
    }

private:
    std::filesystem::path path_for(const std::string& key) const {
        return std::filesystem::path(dir_) / (hex64(fnv1a64(key)) + ".json");
    }

    std::string dir_;
};

}  // namespace pipeflow
