#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pba {

// Flat `key = value` text config. Lines starting with '#' (or trailing
// '#' comments) are ignored. List-style keys use dotted indices,
// e.g. `plane.0.albedo`. Insertion order is preserved for writing.
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_str(const std::string& key) const;  // throws if missing
    std::string get_str(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int def) const;
    bool get_bool(const std::string& key, bool def) const;
    unsigned long long get_u64(const std::string& key, unsigned long long def) const;
    // Whitespace-separated numeric list value.
    std::vector<double> get_doubles(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

    std::string to_string() const;
    void write_file(const std::string& path) const;

private:
    const std::string* find(const std::string& key) const;

    std::vector<std::pair<std::string, std::string>> entries_;
    std::unordered_map<std::string, size_t> index_;
};

}  // namespace pba
