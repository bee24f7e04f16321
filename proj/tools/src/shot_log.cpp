#include "fshadow/cli/shot_log.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fshadow/error.hpp"

namespace fshadow::cli {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ValidationError("bad number '" + s + "'");
  return v;
}

namespace {

template <class T>
T parse_integer(const std::string& s) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ValidationError("bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string shot_row(const estimator::ShotRecord& shot) {
  std::string row = std::to_string(shot.shot_id) + ',';
  if (shot.alpha) {
    row += format_double(*shot.alpha);
  } else {
    for (std::size_t k = 0; k < shot.phases.size(); ++k) row += (k ? ";" : "") + format_double(shot.phases[k]);
  }
  row += ',' + shot.outcome.to_string() + ',' + std::to_string(shot.seed);
  return row;
}

estimator::ShotRecord parse_shot_row(const std::string& line) {
  const auto cols = split(line, ',');
  require(cols.size() == 4, "shot log row must have 4 columns: '" + line + "'");
  estimator::ShotRecord rec;
  rec.shot_id = parse_integer<std::int64_t>(cols[0]);
  if (cols[1].find(';') != std::string::npos) {
    for (const auto& p : split(cols[1], ';')) rec.phases.push_back(parse_double(p));
  } else {
    rec.alpha = parse_double(cols[1]);
  }
  rec.outcome = fock::OccupationOutcome::from_string(cols[2]);
  rec.seed = parse_integer<std::uint64_t>(cols[3]);
  return rec;
}

void write_shot_log(std::ostream& out, const std::vector<estimator::ShotRecord>& shots, bool header) {
  if (header) out << kShotLogHeader << '\n';
  for (const auto& s : shots) out << shot_row(s) << '\n';
}

void append_shot_log(const std::filesystem::path& path, const std::vector<estimator::ShotRecord>& shots) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot open shot log " + path.string() + " for writing");
  write_shot_log(out, shots, fresh);
  if (!out) throw IoError("write failed for shot log " + path.string());
}

std::vector<estimator::ShotRecord> read_shot_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open shot log " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kShotLogHeader)
    throw ValidationError("shot log " + path.string() + " lacks the expected header");
  std::vector<estimator::ShotRecord> shots;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    shots.push_back(parse_shot_row(line));
  }
  return shots;
}

}  // namespace fshadow::cli
