#include "dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "error.hpp"

namespace orchard {

namespace {

constexpr const char* kLogHeader = "waypoint_id,timestamp,rssi_dbm";
constexpr const char* kPositionsHeader = "waypoint_id,x_m,y_m";

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool digits_at(const std::string& s, std::size_t pos, std::size_t count) {
  if (pos + count > s.size()) return false;
  for (std::size_t i = 0; i < count; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[pos + i]))) return false;
  return true;
}

int num_at(const std::string& s, std::size_t pos, std::size_t count) {
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) v = v * 10 + (s[pos + i] - '0');
  return v;
}

int days_in_month(int year, int month) {
  static const int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

// Accepts YYYY-MM-DDThh:mm:ss with optional fractional seconds and an
// optional zone designator (Z or +hh:mm / -hh:mm). Calendar plausibility
// only; this is a log format check, not a datetime library.
bool valid_timestamp(const std::string& s) {
  if (s.size() < 19) return false;
  if (!digits_at(s, 0, 4) || s[4] != '-' || !digits_at(s, 5, 2) ||
      s[7] != '-' || !digits_at(s, 8, 2) || s[10] != 'T' ||
      !digits_at(s, 11, 2) || s[13] != ':' || !digits_at(s, 14, 2) ||
      s[16] != ':' || !digits_at(s, 17, 2))
    return false;
  int year = num_at(s, 0, 4), month = num_at(s, 5, 2), day = num_at(s, 8, 2);
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month))
    return false;
  if (num_at(s, 11, 2) > 23 || num_at(s, 14, 2) > 59 || num_at(s, 17, 2) > 59)
    return false;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    std::size_t digits = 0;
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      ++pos;
      ++digits;
    }
    if (digits == 0) return false;
  }
  if (pos == s.size()) return true;
  if (s[pos] == 'Z') return pos + 1 == s.size();
  if (s[pos] == '+' || s[pos] == '-') {
    if (!(digits_at(s, pos + 1, 2) && pos + 3 < s.size() &&
          s[pos + 3] == ':' && digits_at(s, pos + 4, 2) &&
          pos + 6 == s.size()))
      return false;
    return num_at(s, pos + 1, 2) <= 23 && num_at(s, pos + 4, 2) <= 59;
  }
  return false;
}

void require_header(std::istream& in, const char* expected) {
  std::string line;
  if (!std::getline(in, line))
    fail(Errc::parse, std::string("missing header line, expected '") +
                          expected + "'");
  strip_cr(line);
  if (line != expected)
    fail(Errc::parse, std::string("bad header '") + line + "', expected '" +
                          expected + "'");
}

}  // namespace

PacketLog parse_log(std::istream& in) {
  require_header(in, kLogHeader);

  PacketLog log;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      log.diagnostics.push_back({line_no, "empty line"});
      continue;
    }
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 3) {
      log.diagnostics.push_back(
          {line_no, "expected 3 fields, got " + std::to_string(fields.size())});
      continue;
    }
    if (fields[0].empty()) {
      log.diagnostics.push_back({line_no, "empty waypoint_id"});
      continue;
    }
    if (!valid_timestamp(fields[1])) {
      log.diagnostics.push_back({line_no, "invalid timestamp '" + fields[1] + "'"});
      continue;
    }
    double rssi = 0.0;
    if (!parse_double(fields[2], rssi)) {
      log.diagnostics.push_back({line_no, "invalid rssi_dbm '" + fields[2] + "'"});
      continue;
    }
    if (rssi < -160.0 || rssi > 10.0) {
      log.diagnostics.push_back(
          {line_no, "rssi_dbm " + fields[2] + " outside [-160, 10]"});
      continue;
    }
    log.records.push_back({fields[0], fields[1], rssi});
  }
  return log;
}

std::map<std::string, Point2D> parse_positions(std::istream& in) {
  require_header(in, kPositionsHeader);

  std::map<std::string, Point2D> positions;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 3 || fields[0].empty())
      fail(Errc::parse,
           "positions line " + std::to_string(line_no) + ": malformed");
    double x = 0.0, y = 0.0;
    if (!parse_double(fields[1], x) || !parse_double(fields[2], y))
      fail(Errc::parse, "positions line " + std::to_string(line_no) +
                            ": invalid coordinate");
    if (!positions.emplace(fields[0], Point2D{x, y}).second)
      fail(Errc::parse, "positions line " + std::to_string(line_no) +
                            ": duplicate waypoint '" + fields[0] + "'");
  }
  return positions;
}

AggregationResult aggregate_waypoints(
    const std::vector<PacketRecord>& records,
    const std::map<std::string, Point2D>& positions, int min_samples) {
  if (min_samples < 1)
    fail(Errc::invalid_argument, "min_samples must be at least 1");

  // std::map keys keep waypoints ordered by id in the output.
  std::map<std::string, std::vector<double>> groups;
  for (const PacketRecord& r : records) groups[r.waypoint_id].push_back(r.rssi_dbm);

  std::string missing;
  for (const auto& [id, samples] : groups) {
    if (positions.find(id) == positions.end()) {
      if (!missing.empty()) missing += ", ";
      missing += id;
    }
  }
  if (!missing.empty())
    fail(Errc::not_found, "waypoints missing from positions: " + missing);

  AggregationResult out;
  for (const auto& [id, samples] : groups) {
    int n = static_cast<int>(samples.size());
    if (n < min_samples) {
      out.excluded.push_back({id, n});
      continue;
    }
    double sum = 0.0, lo = samples[0], hi = samples[0];
    for (double v : samples) {
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double mean = std::round(sum / n);  // half away from zero
    out.dataset.waypoints.push_back(
        {id, positions.at(id), mean, n, lo, hi});
  }
  return out;
}

}  // namespace orchard
