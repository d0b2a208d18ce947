#pragma once

#include <filesystem>

#include "sculpt/action_model.hpp"

namespace sculpt {

// Versioned JSON tensor container: every tensor carries its shape, the file
// carries a format-version field.
inline constexpr int kCheckpointFormatVersion = 1;

void save_encoder(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_encoder(const std::filesystem::path& path);

void save_action_model(const ActionModel& model, const std::filesystem::path& path);
ActionModel load_action_model(const std::filesystem::path& path);

}  // namespace sculpt
