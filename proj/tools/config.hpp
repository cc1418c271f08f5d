#pragma once

#include "waveapost/verify.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace waveapost::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Schedule entry: `<time> refine|coarsen x0 x1 [y0 y1]` or
/// `step <n> refine|coarsen ...`.
struct ScheduleEntry {
    std::optional<double> time;
    std::optional<int> step;
    MeshAction action;
};

struct RunConfig {
    std::string case_name = "sine1d";
    /// Set for custom problems; built-in cases provide their own.
    std::optional<ManufacturedCase> manufactured;
    ProblemSpec problem;

    int n = 16;
    int steps = 16;
    StepperOptions stepper;
    EstimatorConfig estimator;
    std::vector<ScheduleEntry> schedule;

    std::optional<std::filesystem::path> csv_path;
    std::optional<std::filesystem::path> breakdown_path;
    std::optional<std::filesystem::path> element_map_path;

    MeshSchedule schedule_for(const TimeGrid& grid) const;
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text);

}  // namespace waveapost::cli
