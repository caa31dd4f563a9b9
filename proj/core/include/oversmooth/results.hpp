#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oversmooth {

/// One row of experiment output. Integer fields use -1 and real fields NaN
/// when they do not apply to the producing experiment.
struct ResultRecord {
  static constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

  std::string run_id;
  std::uint64_t seed = 0;
  int layers = -1;
  int epoch = -1;
  std::string split;
  double accuracy = kNone;
  double mad_global = kNone;
  double madgap = kNone;
  int info_noise_k = -1;
  double lambda = kNone;
  int round = -1;
};

enum class ResultFormat { Csv, Json };

/// Column order, also the CSV header.
inline constexpr std::string_view kResultColumns =
    "run_id,seed,layers,epoch,split,accuracy,mad_global,madgap,info_noise_k,lambda,round";

/// Reals are written with 9 significant digits; NaN as `nan` (CSV) or null
/// (JSON). Throws IoError.
void emit_results(std::span<const ResultRecord> records, const std::filesystem::path& path,
                  ResultFormat format);
std::vector<ResultRecord> load_results(const std::filesystem::path& path, ResultFormat format);

/// The value a real takes after a write/read cycle.
double round_to_emitted(double v);
bool same_record(const ResultRecord& a, const ResultRecord& b);

ResultFormat result_format_from_path(const std::filesystem::path& path);

}  // namespace oversmooth
