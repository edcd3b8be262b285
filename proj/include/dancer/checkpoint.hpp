#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dancer/tape.hpp"

namespace dancer {

// Single-file checkpoint container:
//   8-byte magic "DSQ1\0\0\0\1"
//   u64 LE metadata byte length, then that many bytes of UTF-8 JSON
//   u32 LE manifest entry count, then per entry:
//     u32 LE name length, name bytes, u8 dtype tag (1 = f32, 2 = f64),
//     u8 rank, u64 LE dims..., u64 LE payload offset
//   raw little-endian tensor payloads, in manifest order
struct Checkpoint {
    nlohmann::json metadata;
    std::vector<std::pair<std::string, Tensor>> tensors;

    void add(const std::string& name, const Tensor& t) { tensors.emplace_back(name, t); }
    const Tensor* find(const std::string& name) const;
    const Tensor& require(const std::string& name) const;

    void save(const std::filesystem::path& file) const;
    static Checkpoint load(const std::filesystem::path& file);

    // ParamSet helpers; load requires every registered parameter present
    // with a matching shape.
    void add_params(const ParamSet& params, const std::string& prefix = "");
    void restore_params(ParamSet& params, const std::string& prefix = "") const;
};

}  // namespace dancer
