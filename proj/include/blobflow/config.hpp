#pragma once

#include <map>
#include <string>
#include <vector>

#include "blobflow/state.hpp"

namespace blob::cfg {

/// Flat "section.key = value" configuration with schema validation. Every run
/// writes its resolved form next to the outputs.
struct RunConfig {
    std::map<std::string, std::string> kv;

    static RunConfig parse_string(const std::string& text);
    static RunConfig parse_file(const std::string& path);

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_num(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { kv[key] = value; }

    /// Rejects keys outside the published schema.
    void validate_schema() const;

    std::string serialize() const;
};

MollifierKernel kernel_from(const RunConfig& c);
ProblemSpec problem_from(const RunConfig& c);
ParticleState initial_state_from(const RunConfig& c, int dim);

}  // namespace blob::cfg
