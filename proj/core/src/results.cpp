#include "oversmooth/results.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oversmooth/error.hpp"

namespace oversmooth {
namespace {

using nlohmann::json;

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, ptr);
}

double parse_real(std::string_view s, std::size_t line) {
  if (s == "nan") return ResultRecord::kNone;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "bad real '" + std::string(s) + "'", line);
  }
  return v;
}

template <typename T>
T parse_integer(std::string_view s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "bad integer '" + std::string(s) + "'", line);
  }
  return v;
}

void check_text_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "result text field contains a delimiter: " + s);
  }
}

json real_to_json(double v) {
  if (std::isnan(v)) return nullptr;
  return round_to_emitted(v);
}

double real_from_json(const json& j) {
  return j.is_null() ? ResultRecord::kNone : j.get<double>();
}

void write_csv(std::span<const ResultRecord> records, std::ostream& out) {
  out << kResultColumns << '\n';
  for (const auto& r : records) {
    check_text_field(r.run_id);
    check_text_field(r.split);
    out << r.run_id << ',' << r.seed << ',' << r.layers << ',' << r.epoch << ',' << r.split << ','
        << format_real(r.accuracy) << ',' << format_real(r.mad_global) << ','
        << format_real(r.madgap) << ',' << r.info_noise_k << ',' << format_real(r.lambda) << ','
        << r.round << '\n';
  }
}

void write_json(std::span<const ResultRecord> records, std::ostream& out) {
  json arr = json::array();
  for (const auto& r : records) {
    arr.push_back(json{{"run_id", r.run_id},
                       {"seed", r.seed},
                       {"layers", r.layers},
                       {"epoch", r.epoch},
                       {"split", r.split},
                       {"accuracy", real_to_json(r.accuracy)},
                       {"mad_global", real_to_json(r.mad_global)},
                       {"madgap", real_to_json(r.madgap)},
                       {"info_noise_k", r.info_noise_k},
                       {"lambda", real_to_json(r.lambda)},
                       {"round", r.round}});
  }
  out << arr.dump(2) << '\n';
}

std::vector<ResultRecord> read_csv(std::istream& in) {
  std::vector<ResultRecord> out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return out;
  ++line_no;
  if (line != kResultColumns) throw Error(ErrorCode::ParseError, "unexpected results header", 1);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view view = line;
    std::size_t pos = 0;
    while (true) {
      const auto comma = view.find(',', pos);
      f.push_back(view.substr(pos, comma == std::string_view::npos ? view.npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (f.size() != 11) throw Error(ErrorCode::ParseError, "expected 11 fields", line_no);
    ResultRecord r;
    r.run_id = std::string(f[0]);
    r.seed = parse_integer<std::uint64_t>(f[1], line_no);
    r.layers = parse_integer<int>(f[2], line_no);
    r.epoch = parse_integer<int>(f[3], line_no);
    r.split = std::string(f[4]);
    r.accuracy = parse_real(f[5], line_no);
    r.mad_global = parse_real(f[6], line_no);
    r.madgap = parse_real(f[7], line_no);
    r.info_noise_k = parse_integer<int>(f[8], line_no);
    r.lambda = parse_real(f[9], line_no);
    r.round = parse_integer<int>(f[10], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResultRecord> read_json(std::istream& in) {
  json arr;
  try {
    arr = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!arr.is_array()) throw Error(ErrorCode::ParseError, "results JSON must be an array");
  std::vector<ResultRecord> out;
  try {
    for (const auto& o : arr) {
      ResultRecord r;
      r.run_id = o.at("run_id").get<std::string>();
      r.seed = o.at("seed").get<std::uint64_t>();
      r.layers = o.at("layers").get<int>();
      r.epoch = o.at("epoch").get<int>();
      r.split = o.at("split").get<std::string>();
      r.accuracy = real_from_json(o.at("accuracy"));
      r.mad_global = real_from_json(o.at("mad_global"));
      r.madgap = real_from_json(o.at("madgap"));
      r.info_noise_k = o.at("info_noise_k").get<int>();
      r.lambda = real_from_json(o.at("lambda"));
      r.round = o.at("round").get<int>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return out;
}

}  // namespace

double round_to_emitted(double v) {
  if (std::isnan(v)) return v;
  return parse_real(format_real(v), 0);
}

bool same_record(const ResultRecord& a, const ResultRecord& b) {
  auto same_real = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
  return a.run_id == b.run_id && a.seed == b.seed && a.layers == b.layers && a.epoch == b.epoch &&
         a.split == b.split && same_real(a.accuracy, b.accuracy) &&
         same_real(a.mad_global, b.mad_global) && same_real(a.madgap, b.madgap) &&
         a.info_noise_k == b.info_noise_k && same_real(a.lambda, b.lambda) && a.round == b.round;
}

ResultFormat result_format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? ResultFormat::Json : ResultFormat::Csv;
}

void emit_results(std::span<const ResultRecord> records, const std::filesystem::path& path,
                  ResultFormat format) {
  // Serialize fully before touching the file so a bad record leaves no
  // partial output.
  std::ostringstream buffer;
  if (format == ResultFormat::Csv) {
    write_csv(records, buffer);
  } else {
    write_json(records, buffer);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << buffer.str();
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<ResultRecord> load_results(const std::filesystem::path& path, ResultFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return format == ResultFormat::Csv ? read_csv(in) : read_json(in);
}

}  // namespace oversmooth
