#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqglab {

/// Raised for user-facing configuration problems; carries the offending key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Flat dotted-key configuration ("nudge.mu = 64", '#' comments). Values stay
/// strings until typed access; consumers validate against a key registry so
/// unknown keys are rejected.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Throw ConfigError naming the first key not in `known` (prefixes ending
    /// in '.' admit whole families, e.g. "sweep.axis.").
    void reject_unknown(const std::set<std::string>& known,
                        const std::vector<std::string>& prefixes = {}) const;

    /// Resolved-config echo, one key per line, sorted.
    std::string echo() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

} // namespace sqglab
