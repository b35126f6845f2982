#include "misclass/config.hpp"

#include "misclass/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace misclass {

std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

double parse_double_strict(std::string_view text, std::string_view what) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto *first = t.data();
    const auto *last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (t.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw InputError("expected a finite number for " + std::string(what) + ", got '" + t + "'");
    }
    return value;
}

long long parse_int_strict(std::string_view text, std::string_view what) {
    const std::string t = trim(text);
    long long value = 0;
    const auto *first = t.data();
    const auto *last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (t.empty() || ec != std::errc{} || ptr != last) {
        throw InputError("expected an integer for " + std::string(what) + ", got '" + t + "'");
    }
    return value;
}

KeyValueConfig KeyValueConfig::parse(std::istream &in, std::string_view source_name) {
    KeyValueConfig cfg;
    cfg.source_ = std::string(source_name);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw InputError(cfg.source_ + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) {
            throw InputError(cfg.source_ + ":" + std::to_string(lineno) + ": empty key");
        }
        if (cfg.values_.count(key)) {
            throw InputError(cfg.source_ + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        cfg.values_.emplace(std::move(key), std::move(value));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    return parse(in, path);
}

std::optional<std::string> KeyValueConfig::get(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string &key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    return parse_double_strict(*v, source_ + " key '" + key + "'");
}

std::optional<long long> KeyValueConfig::get_int(const std::string &key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    return parse_int_strict(*v, source_ + " key '" + key + "'");
}

std::optional<std::vector<std::string>> KeyValueConfig::get_list(const std::string &key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    std::vector<std::string> items;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) items.push_back(std::move(t));
    }
    return items;
}

std::optional<std::vector<double>> KeyValueConfig::get_double_list(const std::string &key) const {
    auto items = get_list(key);
    if (!items) return std::nullopt;
    std::vector<double> out;
    out.reserve(items->size());
    for (const auto &item : *items) out.push_back(parse_double_strict(item, source_ + " key '" + key + "'"));
    return out;
}

} // namespace misclass
