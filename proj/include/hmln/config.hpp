#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "hmln/explainer.hpp"
#include "hmln/learner.hpp"
#include "hmln/potentials.hpp"
#include "hmln/sampler.hpp"

namespace hmln {

struct RunPaths {
    std::filesystem::path corpus;
    std::filesystem::path embeddings;
    std::filesystem::path test;
    std::filesystem::path out = ".";
    /// Weight checkpoint read by `explain`; defaults to <out>/weights.json.
    std::filesystem::path weights;
};

struct RunConfig {
    RunPaths paths;
    HybridParams hybrid;
    double tau = 0.5;
    std::size_t caption_index = 0;
    Thresholds thresholds;
    LearnConfig learn;
    SamplerConfig sampler;
    std::uint64_t seed = 1;
    bool clip = true;
    bool null_evidence = false;

    /// Pushes the top-level seed into the learner and sampler.
    void apply_seed(std::uint64_t s);
    /// Throws ValidationError naming the first out-of-range field.
    void validate() const;
    std::filesystem::path weights_path() const;
};

/// Reads a config file; absent fields keep their defaults, unknown fields are rejected.
/// Relative paths are resolved against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Effective configuration, every default resolved.
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const SamplerConfig& cfg);
nlohmann::json to_json(const LearnConfig& cfg);

}  // namespace hmln
