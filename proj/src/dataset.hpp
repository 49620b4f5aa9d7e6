#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "models.hpp"

namespace orchard {

struct PacketRecord {
  std::string waypoint_id;
  std::string timestamp;  // ISO-8601 instant, validated on parse
  double rssi_dbm = 0.0;
};

struct ParseDiagnostic {
  std::size_t line_no = 0;  // 1-based, header is line 1
  std::string message;
};

struct PacketLog {
  std::vector<PacketRecord> records;       // valid lines, input order
  std::vector<ParseDiagnostic> diagnostics;  // malformed lines, never dropped silently
};

struct Waypoint {
  std::string waypoint_id;
  Point2D position;
  double mean_rssi_dbm = 0.0;  // rounded to integer dBm
  int n_samples = 0;
  double raw_min_dbm = 0.0;
  double raw_max_dbm = 0.0;
};

struct MeasurementDataset {
  std::vector<Waypoint> waypoints;  // sorted by waypoint_id
  RadioConfig radio;
  std::shared_ptr<const Layout> layout_ref;
};

struct ExcludedWaypoint {
  std::string waypoint_id;
  int n_samples = 0;
};

struct AggregationResult {
  MeasurementDataset dataset;
  std::vector<ExcludedWaypoint> excluded;  // below min_samples
};

// Reads the packet log CSV (header `waypoint_id,timestamp,rssi_dbm`).
// A missing or wrong header is fatal; malformed data lines become
// per-line diagnostics.
PacketLog parse_log(std::istream& in);

// Reads the positions CSV (header `waypoint_id,x_m,y_m`). Duplicate
// waypoint ids are fatal.
std::map<std::string, Point2D> parse_positions(std::istream& in);

// Groups records by waypoint, averages RSSI (mean rounded half-away-from-
// zero to whole dBm), attaches the raw min/max envelope, and drops
// waypoints with fewer than min_samples into the excluded list. A record
// whose waypoint has no position is an error listing the offending ids.
// The caller attaches radio and layout_ref.
AggregationResult aggregate_waypoints(
    const std::vector<PacketRecord>& records,
    const std::map<std::string, Point2D>& positions, int min_samples = 30);

}  // namespace orchard
