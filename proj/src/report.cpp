#include "fist/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fist/errors.hpp"

namespace fist::exp {

using imitator::EpisodeLogEntry;
using imitator::EvalRow;

void append_episode_log(const std::filesystem::path& file,
                        const std::vector<EpisodeLogEntry>& entries) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::app);
  if (!out) throw IoError("cannot open episode log for append: " + file.string());
  for (const auto& e : entries) {
    nlohmann::json j{{"policy", e.policy},   {"task", e.task},
                     {"start_id", e.start_id}, {"repeat", e.repeat},
                     {"length", e.length},   {"success", e.success},
                     {"seed", e.seed},       {"resample_period", e.resample_period}};
    out << j.dump() << "\n";
  }
}

std::vector<EpisodeLogEntry> read_episode_log(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw MissingArtifactError("missing episode log: " + file.string());
  std::vector<EpisodeLogEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      EpisodeLogEntry e;
      e.policy = j.at("policy");
      e.task = j.at("task");
      e.start_id = j.at("start_id");
      e.repeat = j.at("repeat");
      e.length = j.at("length");
      e.success = j.at("success");
      e.seed = j.at("seed");
      e.resample_period = j.at("resample_period");
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw IoError("malformed episode log " + file.string() + " line " +
                    std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<EvalRow> rows_from_log(const std::vector<EpisodeLogEntry>& log, int max_steps) {
  std::map<std::tuple<std::string, std::string, int>, std::vector<EpisodeLogEntry>> groups;
  for (const auto& e : log) groups[{e.policy, e.task, e.resample_period}].push_back(e);
  std::vector<EvalRow> rows;
  for (const auto& [key, entries] : groups) {
    EvalRow row = imitator::aggregate(std::get<0>(key), std::get<1>(key), entries, max_steps);
    row.resample_period = std::get<2>(key);
    row.seed = entries.front().seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report_csv(const std::filesystem::path& file, const std::vector<EvalRow>& rows) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write report: " + file.string());
  out << "policy,task,resample_period,episodes,mean_length,length_std,length_stderr,"
         "success_rate,success_std,normalized_score,seed\n";
  out.precision(17);  // doubles survive the text round trip exactly
  for (const auto& r : rows) {
    out << r.policy << ',' << r.task << ',' << r.resample_period << ',' << r.episodes << ','
        << r.mean_length << ',' << r.length_std << ',' << r.length_stderr << ','
        << r.success_rate << ',' << r.success_std << ',' << r.normalized_score << ',' << r.seed
        << "\n";
  }
}

namespace {

std::string color_for(std::size_t i) {
  static const char* palette[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f",
                                  "#956cb4", "#8c613c", "#dc7ec0", "#797979"};
  return palette[i % 8];
}

}  // namespace

void write_score_chart(const std::filesystem::path& file, const std::vector<EvalRow>& rows) {
  if (rows.empty()) throw ConfigError("score chart: no rows to plot");
  std::vector<std::string> tasks, policies;
  for (const auto& r : rows) {
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
    if (std::find(policies.begin(), policies.end(), r.policy) == policies.end()) {
      policies.push_back(r.policy);
    }
  }

  const double bar_w = 26, gap = 8, group_gap = 42, left = 70, bottom = 46, top = 30;
  const double plot_h = 240;
  const double group_w = policies.size() * (bar_w + gap) + group_gap;
  const double width = left + tasks.size() * group_w + 180;  // room for the legend
  const double height = top + plot_h + bottom;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // y axis with a few reference lines
  for (int tick = 0; tick <= 4; ++tick) {
    const double frac = tick / 4.0;
    const double y = top + plot_h * (1.0 - frac);
    svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 150 << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">" << frac << "</text>\n";
  }
  svg << "<text x=\"14\" y=\"" << top + plot_h / 2
      << "\" transform=\"rotate(-90 14 " << top + plot_h / 2
      << ")\" text-anchor=\"middle\">normalized score</text>\n";

  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const double gx = left + ti * group_w + group_gap / 2;
    for (std::size_t pi = 0; pi < policies.size(); ++pi) {
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const EvalRow& r) {
        return r.task == tasks[ti] && r.policy == policies[pi];
      });
      if (it == rows.end()) continue;
      const double h = plot_h * std::clamp(it->normalized_score, 0.0, 1.0);
      const double x = gx + pi * (bar_w + gap);
      svg << "<rect x=\"" << x << "\" y=\"" << top + plot_h - h << "\" width=\"" << bar_w
          << "\" height=\"" << h << "\" fill=\"" << color_for(pi) << "\"/>\n";
    }
    svg << "<text x=\"" << gx + policies.size() * (bar_w + gap) / 2 - gap / 2 << "\" y=\""
        << top + plot_h + 18 << "\" text-anchor=\"middle\">" << tasks[ti] << "</text>\n";
  }

  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    const double y = top + 16.0 * pi;
    svg << "<rect x=\"" << width - 140 << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\""
        << color_for(pi) << "\"/>\n";
    svg << "<text x=\"" << width - 122 << "\" y=\"" << y + 11 << "\">" << policies[pi]
        << "</text>\n";
  }
  svg << "</svg>\n";

  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write chart: " + file.string());
  out << svg.str();
}

}  // namespace fist::exp
