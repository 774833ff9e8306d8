#include "pba/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pba {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return from_string(ss.str());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config: line " + std::to_string(lineno) +
                                     ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error("config: line " + std::to_string(lineno) + ": empty key");
        }
        cfg.set(key, value);
    }
    return cfg;
}

const std::string* Config::find(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return nullptr;
    return &entries_[it->second].second;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_str(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw std::runtime_error("config: missing key '" + key + "'");
    return *v;
}

std::string Config::get_str(const std::string& key, const std::string& def) const {
    const std::string* v = find(key);
    return v ? *v : def;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_str(key);
    size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "': not a number: '" + v + "'");
    }
    if (trim(v.substr(pos)) != "") {
        throw std::runtime_error("config: key '" + key + "': trailing junk in '" + v + "'");
    }
    return d;
}

double Config::get_double(const std::string& key, double def) const {
    return has(key) ? get_double(key) : def;
}

int Config::get_int(const std::string& key) const {
    const double d = get_double(key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) {
        throw std::runtime_error("config: key '" + key + "': expected integer");
    }
    return i;
}

int Config::get_int(const std::string& key, int def) const {
    return has(key) ? get_int(key) : def;
}

bool Config::get_bool(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string v = get_str(key);
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw std::runtime_error("config: key '" + key + "': expected boolean, got '" + v + "'");
}

unsigned long long Config::get_u64(const std::string& key, unsigned long long def) const {
    if (!has(key)) return def;
    const std::string v = get_str(key);
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "': not an unsigned integer: '" + v + "'");
    }
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    std::istringstream in(get_str(key));
    std::vector<double> out;
    double d;
    while (in >> d) out.push_back(d);
    if (!in.eof()) {
        throw std::runtime_error("config: key '" + key + "': malformed numeric list");
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = index_.find(key);
    if (it != index_.end()) {
        entries_[it->second].second = value;
    } else {
        index_[key] = entries_.size();
        entries_.emplace_back(key, value);
    }
}

void Config::set_double(const std::string& key, double value) {
    std::ostringstream ss;
    ss.precision(17);
    ss << value;
    set(key, ss.str());
}

std::string Config::to_string() const {
    std::ostringstream ss;
    for (const auto& [k, v] : entries_) ss << k << " = " << v << "\n";
    return ss.str();
}

void Config::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    out << to_string();
}

}  // namespace pba
