#pragma once

#include <filesystem>

#include "fist/evaluate.hpp"

namespace fist::exp {

void append_episode_log(const std::filesystem::path& file,
                        const std::vector<imitator::EpisodeLogEntry>& entries);
std::vector<imitator::EpisodeLogEntry> read_episode_log(const std::filesystem::path& file);

// One CSV row per (policy, task, resample_period).
void write_report_csv(const std::filesystem::path& file,
                      const std::vector<imitator::EvalRow>& rows);

// Aggregates a raw episode log into report rows.
std::vector<imitator::EvalRow> rows_from_log(const std::vector<imitator::EpisodeLogEntry>& log,
                                             int max_steps);

// Grouped bar chart of normalized scores, one group per task. Throws on an
// empty row set and writes nothing.
void write_score_chart(const std::filesystem::path& file,
                       const std::vector<imitator::EvalRow>& rows);

}  // namespace fist::exp
