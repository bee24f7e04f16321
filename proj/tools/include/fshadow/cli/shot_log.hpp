#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fshadow/estimator.hpp"

namespace fshadow::cli {

inline constexpr const char* kShotLogHeader = "shot_id,alpha,outcome_bits,seed";

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

std::string shot_row(const estimator::ShotRecord& shot);
estimator::ShotRecord parse_shot_row(const std::string& line);

void write_shot_log(std::ostream& out, const std::vector<estimator::ShotRecord>& shots, bool header = true);
/// Appends to an existing log, or creates it with a header.
void append_shot_log(const std::filesystem::path& path, const std::vector<estimator::ShotRecord>& shots);
std::vector<estimator::ShotRecord> read_shot_log(const std::filesystem::path& path);

}  // namespace fshadow::cli
