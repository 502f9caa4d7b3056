#include "safegen/sim/telemetry.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen::sim {

namespace {

std::string g17(double v) { return detail::format("%.17g", v); }

double parse_field(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw SyntaxError("telemetry line " + std::to_string(line_no) + ": bad number '" +
                      std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::string to_csv(const Telemetry& tel) {
  std::string out(kTelemetryHeader);
  out += '\n';
  for (const auto& s : tel.samples) {
    out += g17(s.t) + ',' + g17(s.ego.position) + ',' + g17(s.ego.speed) + ',' +
           g17(s.ego.acceleration) + ',' + g17(s.lead.position) + ',' + g17(s.lead.speed) + ',' +
           g17(s.gap) + ',' + g17(s.command.throttle) + ',' + g17(s.command.brake) + ',' +
           (s.command.emergency ? "1" : "0") + ',' + g17(s.latency_ms) + '\n';
  }
  return out;
}

Telemetry parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kTelemetryHeader) {
    throw SyntaxError("telemetry: missing or unexpected header");
  }
  Telemetry tel;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 11) {
      throw SyntaxError("telemetry line " + std::to_string(line_no) + ": expected 11 fields");
    }
    Sample s;
    s.t = parse_field(fields[0], line_no);
    s.ego.position = parse_field(fields[1], line_no);
    s.ego.speed = parse_field(fields[2], line_no);
    s.ego.acceleration = parse_field(fields[3], line_no);
    s.lead.position = parse_field(fields[4], line_no);
    s.lead.speed = parse_field(fields[5], line_no);
    s.gap = parse_field(fields[6], line_no);
    s.command.throttle = parse_field(fields[7], line_no);
    s.command.brake = parse_field(fields[8], line_no);
    if (fields[9] != "0" && fields[9] != "1") {
      throw SyntaxError("telemetry line " + std::to_string(line_no) + ": emergency must be 0 or 1");
    }
    s.command.emergency = fields[9] == "1";
    s.latency_ms = parse_field(fields[10], line_no);
    s.relative_speed = s.lead.speed - s.ego.speed;
    tel.samples.push_back(s);
  }
  if (!tel.samples.empty()) {
    tel.dt = tel.samples.size() > 1 ? tel.samples[1].t - tel.samples[0].t : tel.samples[0].t;
    tel.collided = tel.samples.back().gap <= 0.0;
  }
  return tel;
}

void write_csv(const std::filesystem::path& path, const Telemetry& telemetry) {
  detail::write_text_file(path, to_csv(telemetry));
}

Telemetry read_csv(const std::filesystem::path& path) {
  return parse_csv(detail::read_text_file<StorageError>(path));
}

}  // namespace safegen::sim
