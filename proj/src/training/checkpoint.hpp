#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "model/hsie_net.hpp"
#include "numerics/adam.hpp"

namespace hsie::training {

constexpr char kCheckpointMagic[8] = {'H', 'S', 'I', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    model::HsieParams<float> params;
    std::optional<nn::AdamState> optimizer;
    std::uint32_t epoch = 0;
};

/// Little-endian layout:
///   magic[8] "HSIECKPT" | u32 version | 7 x i32 config (k, feat, n_cab, n_dense,
///   eca_kernel, mask_channels, growth) | u32 epoch | u64 param_count |
///   param_count x f32 parameters | u8 has_optimizer |
///   [i64 step | f64 beta1 | f64 beta2 | f64 eps | param_count x f32 m | param_count x f32 v]
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);

/// With `expected`, the stored network must match it layer by layer; the error
/// names the first layer that differs.
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes,
                                  const model::HsieConfig* expected = nullptr);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path, const model::HsieConfig* expected = nullptr);

/// Empty when compatible, else a message naming the first mismatched layer.
std::string describe_mismatch(const model::Layout& stored, const model::Layout& expected);

}  // namespace hsie::training
