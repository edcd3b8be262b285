#pragma once

#include <filesystem>

#include "dancer/checkpoint.hpp"
#include "dancer/judge.hpp"
#include "dancer/oracle.hpp"

namespace dancer {

nlohmann::json config_to_json(const EncoderDecoderConfig& config);
EncoderDecoderConfig config_from_json(const nlohmann::json& j);

void save_nb_model(const NBModel& model, const std::filesystem::path& file);
NBModel load_nb_model(const std::filesystem::path& file);

void save_judge(const JudgeModel& judge, const std::filesystem::path& file);
JudgeModel load_judge(const std::filesystem::path& file);  // returned frozen

}  // namespace dancer
