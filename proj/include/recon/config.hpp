#pragma once

#include <map>
#include <string>
#include <vector>

namespace recon {

// Flat key = value text configuration. '#' starts a comment; blank lines are
// ignored. Keys carry explicit units where relevant (e.g. sigma_lr_norm).
class Config {
public:
    Config() = default;

    static Config parse(const std::string& text);
    static Config load(const std::string& path);
    void save(const std::string& path) const;
    std::string serialize() const;

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Required variants throw DataError when the key is missing.
    std::string require_string(const std::string& key) const;
    double require_double(const std::string& key) const;
    long require_int(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long value);
    void set(const std::string& key, int value) { set(key, static_cast<long>(value)); }

    // Overlays other on top of *this.
    void merge(const Config& other);

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace recon
