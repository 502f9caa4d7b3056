#include "safegen/sim/integration.hpp"

#include <cmath>

#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen::sim {

namespace {

using Clock = std::chrono::steady_clock;

std::string expect_reply(ControllerChannel& ch, std::chrono::milliseconds timeout,
                         std::string_view waiting_for) {
  auto line = ch.receive(timeout);
  if (line) return *line;
  if (ch.timed_out()) {
    throw DeadlineExceeded("controller did not answer " + std::string(waiting_for) + " within " +
                           std::to_string(timeout.count()) + " ms");
  }
  throw ControllerCrashed("controller closed its output while answering " + std::string(waiting_for));
}

void send_or_crash(ControllerChannel& ch, std::string_view line) {
  if (!ch.send(line)) throw ControllerCrashed("controller stopped reading its input");
}

}  // namespace

Telemetry run_episode(const ControllerEndpoint& controller, const BehaviorSpec& b,
                      const SimConfig& cfg, std::uint64_t seed) {
  const SimConstants& k = cfg.constants;
  if (!(k.dt > 0.0)) throw InvariantError("dt must be positive");
  LeadProfileConfig lead_cfg = cfg.lead;
  lead_cfg.initial_speed = cfg.initial_speed;
  lead_cfg.v_max = k.v_max;
  const LeadProfile profile = LeadProfile::generate(seed, b.episode_duration, lead_cfg);

  auto channel = controller.open();
  send_or_crash(*channel, kHello);
  parse_ready(expect_reply(*channel, cfg.reply_timeout, "HELLO"));

  VehicleState ego{0.0, cfg.initial_speed, 0.0};
  VehicleState lead{2.0 * b.nominal_distance + k.vehicle_length, cfg.initial_speed, 0.0};
  const bool measure = cfg.measure_latency || b.tick_deadline_ms.has_value();
  const auto ticks = static_cast<std::size_t>(std::llround(b.episode_duration / k.dt));

  Telemetry tel;
  tel.dt = k.dt;
  tel.samples.reserve(ticks);
  for (std::size_t i = 0; i < ticks; ++i) {
    const double t = static_cast<double>(i) * k.dt;
    const TickMessage tick{t, ego.speed, ego.acceleration, gap_between(lead, ego, k.vehicle_length),
                           lead.speed - ego.speed};
    const auto sent = Clock::now();
    send_or_crash(*channel, encode_tick(tick));
    const ControllerCommand cmd = parse_command(expect_reply(*channel, cfg.reply_timeout, "TICK"));
    const double latency =
        measure ? std::chrono::duration<double, std::milli>(Clock::now() - sent).count() : 0.0;

    // Outside an emergency the brake pedal maps onto the normal decel limit.
    const double authority = cmd.emergency ? k.b_max : std::min(k.b_max, b.a_limit);
    const double net = cmd.throttle * k.a_max - cmd.brake * authority;
    ego = step_dynamics(ego, net, k.dt, k.v_max);
    lead = step_dynamics(lead, profile.acceleration_at(t), k.dt, k.v_max);

    Sample s;
    s.t = static_cast<double>(i + 1) * k.dt;
    s.ego = ego;
    s.lead = lead;
    s.gap = gap_between(lead, ego, k.vehicle_length);
    s.relative_speed = lead.speed - ego.speed;
    s.command = cmd;
    s.latency_ms = latency;
    tel.samples.push_back(s);
    if (s.gap <= 0.0) {
      tel.collided = true;
      break;
    }
  }

  send_or_crash(*channel, kEnd);
  const auto code = channel->finish(std::chrono::milliseconds(1000));
  if (!code) throw ControllerCrashed("controller did not exit after END");
  if (*code != 0) throw ControllerCrashed("controller exited with status " + std::to_string(*code));
  return tel;
}

std::string integration_feedback(const std::vector<EvaluationReport>& reports,
                                 const BehaviorSpec& b) {
  std::string out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (r.passed) continue;
    std::vector<std::string> parts;
    if (r.collision) parts.push_back(detail::format("collision (gap reached %.2f m)", r.min_gap));
    if (!r.clearance_ok) {
      parts.push_back(detail::format(
          "clearance below max(c_min, tau_min*v) on %zu samples, worst margin %.2f m",
          r.clearance_violations.size(), r.worst_clearance_margin.value_or(0.0)));
    }
    if (!r.accel_ok) {
      parts.push_back(detail::format(
          "|a| limit %.2f m/s^2 exceeded on %zu samples, peak non-emergency |a| %.2f m/s^2",
          b.a_limit, r.accel_violations.size(), r.peak_abs_accel_non_emergency));
    }
    if (!r.band_ok) {
      parts.push_back(detail::format("band occupancy %.3f below %.3f", r.band_occupancy,
                                     b.band_occupancy_min));
    }
    if (!r.timing_ok) {
      parts.push_back(detail::format("tick deadline missed on %zu samples, max latency %.2f ms",
                                     r.timing_violations.size(), r.max_latency_ms));
    }
    std::string line = detail::format("episode %zu/%zu failed: ", i + 1, reports.size());
    for (std::size_t p = 0; p < parts.size(); ++p) line += (p ? "; " : "") + parts[p];
    if (!out.empty()) out += '\n';
    out += line;
  }
  return out;
}

IntegrationResult run_integration_monitoring(const ControllerEndpoint& controller,
                                             const BehaviorSpec& behavior, std::size_t n_seeds,
                                             const SimConfig& config) {
  if (n_seeds == 0) throw InvariantError("integration monitoring needs at least one seed");
  IntegrationResult out;
  out.passed = true;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    Telemetry tel = run_episode(controller, behavior, config, behavior.seed + i);
    EvaluationReport report = evaluate_data(tel, behavior, config.evaluation);
    out.passed = out.passed && report.passed;
    out.reports.push_back(std::move(report));
    out.telemetry.push_back(std::move(tel));
  }
  if (!out.passed) out.feedback = integration_feedback(out.reports, behavior);
  return out;
}

}  // namespace safegen::sim
