#pragma once

// Plain-text `key = value` files used for column mappings, assay
// declarations and simulation scenarios. `#` starts a comment.

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace misclass {

class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::istream &in, std::string_view source_name = "<config>");
    static KeyValueConfig load(const std::string &path);

    bool has(const std::string &key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string &key) const;
    std::optional<double> get_double(const std::string &key) const;
    std::optional<long long> get_int(const std::string &key) const;
    // Comma-separated list; whitespace around items is trimmed.
    std::optional<std::vector<std::string>> get_list(const std::string &key) const;
    std::optional<std::vector<double>> get_double_list(const std::string &key) const;

    void set(const std::string &key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string> &entries() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string source_;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
double parse_double_strict(std::string_view text, std::string_view what);
long long parse_int_strict(std::string_view text, std::string_view what);

} // namespace misclass
