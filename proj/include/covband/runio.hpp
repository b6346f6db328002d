#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace covband {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "0.1.0";

struct GridSpec {
  double start;
  double stop;
  int count;
  bool log_spacing = false;
};

struct RunConfig {
  std::string command;
  double cutoff = 1.0;  // infinity() spells the Lambda=inf sentinel
  double omega = 10.0;
  std::optional<GridSpec> omega_grid;
  std::optional<GridSpec> r_grid;
  double t = 0.0;
  double sigma = 0.5;
  double tau = 1.0;
  double sep = 3.0;
  std::string out_path;
  std::string json_path;
  std::string cache_dir;
  int threads = 1;
  std::uint64_t seed = 12345;
};

struct ResultRecord {
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> row_status;  // "ok" or an error tag
  double wall_time_s = 0.0;
  std::string config_hash;
  bool any_row_failed = false;
  bool validation_failed = false;
  std::vector<std::string> messages;  // validate-style report lines
};

GridSpec parse_grid(const std::string& text);  // "a:b:n" or "a:b:n:log"
double parse_cutoff(const std::string& text);  // "inf" or a positive number
std::vector<double> grid_points(const GridSpec& g);

std::string config_hash(const RunConfig& cfg);  // FNV-1a 64 over canonical text
std::vector<std::pair<std::string, std::string>> canonical_parameters(
    const RunConfig& cfg);

ResultRecord run(const RunConfig& cfg);

std::string format_csv(const ResultRecord& rec);
std::string format_json(const ResultRecord& rec);
void write_atomic(const std::string& path, const std::string& content);

// process exit code per contract: 0 ok, 2 row failure, 3 validation failure
int exit_code_for(const ResultRecord& rec);

}  // namespace covband
